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

// Pinned defaults. Golden files under tests/golden are generated from these
// values; bump kDefaultsVersion whenever one changes.

#pragma once

#include <array>
#include <cstddef>

#include "nova/engine.hpp"

namespace nova {

inline constexpr int kDefaultsVersion = 1;

inline constexpr std::array<std::size_t, 10> kDefaultScaleSides = {1, 2, 3, 4, 5, 6, 8, 10, 13, 16};

inline ModelConfig default_model_config() {
  ModelConfig c;
  c.schedule = ScaleSchedule::square(kDefaultScaleSides);
  c.vocab = 64;
  c.dim = 64;
  c.layers = 8;
  c.heads = 4;
  c.seed = 42;
  return c;
}

// Static late-stage schedule for the fixed and layer_only ablations: the
// last two scales drop half their tokens.
inline std::vector<double> default_fixed_ratios(std::size_t scales) {
  std::vector<double> r(scales, 0.0);
  for (std::size_t i = scales >= 2 ? scales - 2 : 0; i < scales; ++i) r[i] = 0.5;
  return r;
}

inline RunConfig default_run_config() {
  RunConfig c;
  c.model = default_model_config();
  c.activation = {5, 0.5};
  c.scheduler.mode = SchedulerMode::nova;
  c.scheduler.linkage = {0.8, 0.1, 0.95};
  c.scheduler.fixed_ratios = default_fixed_ratios(c.model.schedule.scales());
  c.selector = Selector::entropy;
  c.sampling = SamplingMode::argmax;
  c.sample_seed = 0;
  c.shared_mask = false;
  return c;
}

}  // namespace nova
