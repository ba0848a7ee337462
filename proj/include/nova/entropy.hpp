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

// Predictive entropy (nats) and online detection of the scale where entropy
// growth flattens out.
//
// Detection protocol, applied one scale at a time:
//   growth g_t      = mean_t - mean_{t-1}                      (t >= 2)
//   baseline eta    = mean(g_2 .. g_{t_est}), frozen at t_est
//   smoothed s_t    = (g_t + g_{t-1}) / 2                      (t >= t_est+1)
//   activation t*   = first t >= t_est+1 with s_t <= alpha * eta
// The first smoothed rate pairs g_{t_est+1} with g_{t_est}, the last growth
// sample inside the baseline window. Detection is disabled when eta <= 0.

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nova/errors.hpp"
#include "nova/numerics.hpp"
#include "nova/scale_model.hpp"

namespace nova {

inline constexpr double kDistributionTolerance = 1e-6;

struct EntropyMap {
  std::size_t scale = 0;
  std::optional<std::size_t> layer;  // absent for the scale-level (final readout) map
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> values;
};

inline double token_entropy(std::span<const double> dist) {
  double total = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0)) throw InvalidInputError("token_entropy: negative or NaN probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kDistributionTolerance) {
    throw InvalidInputError("token_entropy: distribution sums to " + std::to_string(total));
  }
  double h = 0.0;
  for (double p : dist)
    if (p > 0.0) h -= p * std::log(p);
  return h < 0.0 ? 0.0 : h;
}

inline EntropyMap entropy_map(const Matrix& probs, GridSize grid, std::size_t scale,
                              std::optional<std::size_t> layer = std::nullopt) {
  if (probs.rows != grid.tokens()) {
    throw InvalidInputError("entropy_map: " + std::to_string(probs.rows) +
                            " rows for a grid of " + std::to_string(grid.tokens()));
  }
  EntropyMap map{scale, layer, grid.h, grid.w, std::vector<double>(probs.rows)};
  for (std::size_t r = 0; r < probs.rows; ++r) map.values[r] = token_entropy(probs.row(r));
  return map;
}

inline double scale_mean_entropy(std::span<const double> values) {
  if (values.empty()) throw InvalidInputError("scale_mean_entropy: empty map");
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

inline double scale_mean_entropy(const EntropyMap& map) { return scale_mean_entropy(map.values); }

struct ActivationParams {
  std::size_t t_est = 5;
  double alpha = 0.5;

  void validate(std::size_t scales) const {
    if (t_est < 2 || t_est + 2 > scales) {
      throw ConfigError("t_est", "must lie in [2, T-2] = [2, " +
                                     std::to_string(scales < 2 ? 0 : scales - 2) + "]");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
  }
};

// Index t of every vector below is stored at position t-1; undefined entries
// (growth at t=1, smoothed before t_est+1) are std::nullopt.
struct EntropyTrace {
  std::vector<double> means;
  std::vector<std::optional<double>> growth;
  std::vector<std::optional<double>> smoothed;
  std::optional<double> baseline;     // eta
  std::optional<std::size_t> t_star;  // 1-based

  std::size_t scales() const noexcept { return means.size(); }
};

// Appends scale `t`'s mean entropy. `t` must equal trace.scales() + 1.
inline void update_trace(EntropyTrace& trace, std::size_t t, double mean,
                         const ActivationParams& params) {
  if (t != trace.scales() + 1) {
    throw UsageError("update_trace: expected scale " + std::to_string(trace.scales() + 1) +
                     ", got " + std::to_string(t));
  }
  trace.means.push_back(mean);
  trace.growth.push_back(t >= 2 ? std::optional(mean - trace.means[t - 2]) : std::nullopt);
  trace.smoothed.push_back(std::nullopt);

  if (t == params.t_est) {
    double sum = 0.0;
    for (std::size_t s = 2; s <= params.t_est; ++s) sum += *trace.growth[s - 1];
    trace.baseline = sum / static_cast<double>(params.t_est - 1);
  }
  if (t >= params.t_est + 1) {
    const double s = (*trace.growth[t - 1] + *trace.growth[t - 2]) / 2.0;
    trace.smoothed[t - 1] = s;
    if (!trace.t_star && trace.baseline && *trace.baseline > 0.0 &&
        s <= params.alpha * *trace.baseline) {
      trace.t_star = t;
    }
  }
}

inline EntropyTrace build_trace(std::span<const double> means, const ActivationParams& params) {
  EntropyTrace trace;
  for (std::size_t i = 0; i < means.size(); ++i) update_trace(trace, i + 1, means[i], params);
  return trace;
}

// Scale at which pruning starts: t* + 1 when that scale exists.
inline std::optional<std::size_t> activation_scale(const EntropyTrace& trace,
                                                   std::size_t total_scales) {
  if (!trace.t_star || *trace.t_star + 1 > total_scales) return std::nullopt;
  return *trace.t_star + 1;
}

}  // namespace nova
