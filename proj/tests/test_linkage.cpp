// Copyright 2026 The nova-infer Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "nova/linkage.hpp"
#include "oracles.hpp"

namespace nova {
namespace {

const LinkageParams kDefault{0.8, 0.1, 0.95};

TEST(ScaleRatio, SigmoidMidpointAtActivation) {
  EXPECT_EQ(scale_ratio(8, 7, 0.0, kDefault), 0.5);
}

TEST(ScaleRatio, MatchesExtendedPrecisionOracle) {
  const double r = scale_ratio(8, 7, 0.05, kDefault);
  const long double ref = testing::scale_ratio_oracle(0.0L, 0.8L, 0.1L, 0.05L);
  EXPECT_NEAR(r, static_cast<double>(ref), 1e-15);
  EXPECT_NEAR(r, 0.495004, 1e-6);
  for (std::size_t t = 8; t <= 12; ++t) {
    for (double g : {-1.0, -0.2, 0.0, 0.3}) {
      const long double o = testing::scale_ratio_oracle(static_cast<long double>(t - 8), 0.8L, 0.1L, g);
      const double clamped = std::clamp(static_cast<double>(o), 0.0, 0.95);
      EXPECT_NEAR(scale_ratio(t, 7, g, kDefault), clamped, 1e-15);
    }
  }
}

TEST(ScaleRatio, SaturatesAtRMax) {
  EXPECT_EQ(scale_ratio(60, 7, 0.0, kDefault), 0.95);
  LinkageParams open = kDefault;
  open.r_max = 1.0;
  EXPECT_NEAR(scale_ratio(60, 7, 0.0, open), 1.0, 1e-12);
}

TEST(ScaleRatio, GrowthAdjustmentBoundedByLambda) {
  const double fast_drop = scale_ratio(8, 7, -50.0, kDefault);
  const double fast_rise = scale_ratio(8, 7, 50.0, kDefault);
  EXPECT_GT(fast_drop, 0.5);
  EXPECT_LT(fast_rise, 0.5);
  EXPECT_NEAR(fast_drop, 0.6, 1e-12);
  EXPECT_NEAR(fast_rise, 0.4, 1e-12);
}

TEST(ScaleRatio, RejectsScalesUpToTStar) {
  EXPECT_THROW(scale_ratio(7, 7, 0.0, kDefault), UsageError);
  EXPECT_THROW(scale_ratio(3, 7, 0.0, kDefault), UsageError);
}

TEST(ScaleRatio, MonotoneInScale) {
  for (double g : {-0.5, 0.0, 0.05, 0.7}) {
    double previous = -1.0;
    for (std::size_t t = 6; t < 56; ++t) {
      const double r = scale_ratio(t, 5, g, kDefault);
      EXPECT_GE(r, previous);
      previous = r;
    }
  }
}

TEST(ScaleRatio, Limits) {
  LinkageParams no_lambda = kDefault;
  no_lambda.lambda = 0.0;
  for (double g : {-3.0, 0.0, 0.4, 2.0}) EXPECT_EQ(scale_ratio(10, 6, g, no_lambda), scale_ratio(10, 6, 0.0, no_lambda));
  LinkageParams flat = no_lambda;
  flat.tau = 1e12;
  for (std::size_t t = 7; t < 20; ++t) EXPECT_NEAR(scale_ratio(t, 6, 0.0, flat), 0.5, 1e-9);
}

TEST(LayerMean, Basics) {
  EXPECT_EQ(layer_mean(std::vector<double>{2.5}), 2.5);
  EXPECT_EQ(layer_mean(std::vector<double>{2.0, 4.0}), 3.0);
  EXPECT_THROW(layer_mean(std::vector<double>{}), UsageError);
  Rng rng(3);
  std::vector<double> v(64);
  for (double& x : v) x = 4.0 * rng.next_unit();
  long double s = 0.0L;
  for (double x : v) s += x;
  EXPECT_NEAR(layer_mean(v), static_cast<double>(s / 64.0L), 1e-12);
}

TEST(LayerRatio, FirstLayerAndZeroDeviationKeepBase) {
  EXPECT_EQ(layer_ratio(0.37, 1, 9.0, 1.0, kDefault), 0.37);
  EXPECT_EQ(layer_ratio(0.37, 4, 2.0, 2.0, kDefault), 0.37);
}

TEST(LayerRatio, WorkedCase) {
  EXPECT_NEAR(layer_ratio(0.5, 2, 2.2, 2.0, kDefault), 0.45, 1e-12);
}

TEST(LayerRatio, DoubleEntropySparesLayer) {
  EXPECT_EQ(layer_ratio(0.5, 3, 4.0, 2.0, kDefault), 0.0);
}

TEST(LayerRatio, ClampsOutsideValidDeviationRange) {
  // delta > 1 would go negative.
  EXPECT_EQ(layer_ratio(0.5, 2, 7.0, 2.0, kDefault), 0.0);
  // delta < -(1 - base) / base would exceed 1; r_max caps earlier.
  EXPECT_EQ(layer_ratio(0.5, 2, 0.1, 2.0, kDefault), 0.95);
  LinkageParams open = kDefault;
  open.r_max = 1.0;
  EXPECT_NEAR(layer_ratio(0.5, 2, 0.5, 2.0, open), 0.875, 1e-15);
  EXPECT_EQ(layer_ratio(0.5, 2, 0.0, 2.0, open), 1.0);
}

TEST(LayerRatio, DegenerateMeanThrows) {
  EXPECT_THROW(layer_ratio(0.5, 2, 1.0, 0.0, kDefault), DegenerateEntropyError);
  EXPECT_THROW(layer_ratio(0.5, 2, 1.0, -1.0, kDefault), DegenerateEntropyError);
}

TEST(LayerRatio, ConservationDirection) {
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const double base = 0.05 + 0.8 * rng.next_unit();
    const double mu = 0.1 + 3.0 * rng.next_unit();
    const double above = mu * (1.0 + 0.5 * rng.next_unit() + 1e-6);
    const double below = mu * (1.0 - 0.5 * rng.next_unit() - 1e-6);
    EXPECT_LT(layer_ratio(base, 2, above, mu, kDefault), base);
    const double r = layer_ratio(base, 2, below, mu, kDefault);
    if (r < kDefault.r_max) {
      EXPECT_GT(r, base);
    }
  }
}

TEST(KeptCount, FloorRule) {
  EXPECT_EQ(kept_count(0.5, 4), 2u);
  EXPECT_EQ(kept_count(0.5, 5), 3u);
  EXPECT_EQ(kept_count(0.0, 7), 7u);
  EXPECT_EQ(kept_count(0.95, 1), 1u);
  EXPECT_EQ(kept_count(0.95, 256), 256u - 243u);
}

SchedulerConfig sched(SchedulerMode mode) {
  SchedulerConfig c;
  c.mode = mode;
  c.linkage = kDefault;
  c.fixed_ratios = {0, 0, 0, 0, 0, 0, 0, 0.3, 0.5, 0.5};
  return c;
}

EntropyTrace worked_trace() {
  return build_trace(std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0, 5.4, 5.5}, {5, 0.5});
}

TEST(PlanScale, PerMode) {
  const EntropyTrace tr = worked_trace();  // t* = 7, 7 scales observed
  EXPECT_EQ(plan_scale(8, sched(SchedulerMode::off), tr), 0.0);
  EXPECT_EQ(plan_scale(8, sched(SchedulerMode::fixed), tr), 0.3);
  EXPECT_EQ(plan_scale(9, sched(SchedulerMode::layer_only), tr), 0.5);
  const double g = 5.5 - 5.4;
  EXPECT_EQ(plan_scale(8, sched(SchedulerMode::nova), tr), scale_ratio(8, 7, g, kDefault));
  EXPECT_EQ(plan_scale(8, sched(SchedulerMode::scale_only), tr), scale_ratio(8, 7, g, kDefault));
  EXPECT_THROW(plan_scale(9, sched(SchedulerMode::nova), tr), UsageError);
  SchedulerConfig missing = sched(SchedulerMode::fixed);
  missing.fixed_ratios.resize(5);
  EXPECT_THROW(plan_scale(8, missing, tr), ConfigError);
}

TEST(PlanScale, NovaIsZeroBeforeActivation) {
  const EntropyTrace early =
      build_trace(std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0, 5.4}, {5, 0.5});
  EXPECT_FALSE(early.t_star);
  EXPECT_EQ(plan_scale(7, sched(SchedulerMode::nova), early), 0.0);
}

TEST(PlanLayer, OffModeKeepsEverything) {
  const auto d = plan_layer(3, 100, 0.8, sched(SchedulerMode::off), {});
  EXPECT_EQ(d.ratio, 0.0);
  EXPECT_EQ(d.kept, 100u);
}

TEST(PlanLayer, LayerLinkageOnlyInLinkageModes) {
  const std::vector<double> means = {2.0, 2.2};
  const auto nova = plan_layer(2, 100, 0.5, sched(SchedulerMode::nova), means);
  EXPECT_NEAR(nova.ratio, 0.45, 1e-12);
  // (2.2 - 2.0) / 2.0 rounds just above 0.1, so the product floors to 44.
  EXPECT_EQ(nova.kept, 56u);
  const auto scale_only = plan_layer(2, 100, 0.5, sched(SchedulerMode::scale_only), means);
  EXPECT_EQ(scale_only.ratio, 0.5);
  EXPECT_EQ(scale_only.kept, 50u);
  const auto first = plan_layer(1, 100, 0.5, sched(SchedulerMode::nova), std::vector<double>{2.0});
  EXPECT_EQ(first.ratio, 0.5);
}

TEST(PlanLayer, DegenerateEntropyFallsBackToBase) {
  const std::vector<double> means = {0.0, 0.0, 0.3};
  const auto d = plan_layer(3, 10, 0.5, sched(SchedulerMode::nova), means);
  EXPECT_EQ(d.ratio, 0.5);
}

TEST(PlanLayer, KeptPlusPrunedIsTokens) {
  Rng rng(44);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 400;
    const double base = 0.95 * rng.next_unit();
    std::vector<double> means(8);
    for (double& m : means) m = 0.1 + 3.0 * rng.next_unit();
    const std::size_t layer = 1 + rng.next_u64() % 8;
    const auto d = plan_layer(layer, n, base, sched(SchedulerMode::nova), means);
    EXPECT_GE(d.ratio, 0.0);
    EXPECT_LE(d.ratio, 0.95);
    EXPECT_GE(d.kept, 1u);
    EXPECT_EQ(d.kept + static_cast<std::size_t>(std::floor(d.ratio * static_cast<double>(n))), n);
  }
}

TEST(SchedulerConfig, Validation) {
  auto c = sched(SchedulerMode::fixed);
  EXPECT_NO_THROW(c.validate(10));
  EXPECT_THROW(c.validate(9), ConfigError);
  c.fixed_ratios[9] = 0.99;
  EXPECT_THROW(c.validate(10), ConfigError);
  auto p = kDefault;
  p.tau = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = kDefault;
  p.lambda = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = kDefault;
  p.r_max = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_EQ(sched(SchedulerMode::fixed).fixed_activation(), std::optional<std::size_t>(8));
  EXPECT_THROW(parse_scheduler_mode("turbo"), ConfigError);
  EXPECT_EQ(parse_scheduler_mode("layer_only"), SchedulerMode::layer_only);
}

}  // namespace
}  // namespace nova
