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

// Token-reduction ratios per scale and per layer.
//
// Scale linkage: once pruning is active, scale t's base ratio is
//   sigmoid((t - (t* + 1)) / tau) - lambda * tanh(g)
// where g is the growth rate of mean entropy. Layer linkage then rescales the
// base by the relative deviation of layer j's input entropy from the mean of
// layers 1..j-1:
//   ratio_j = base - delta_j * base,  delta_j = (H_j - mu_{j-1}) / mu_{j-1}
// Neither formula is bounded, so every ratio is clamped to [0, r_max].
// Layers here are 1-based (j = 1..L).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nova/entropy.hpp"
#include "nova/errors.hpp"

namespace nova {

struct LinkageParams {
  double tau = 0.8;
  double lambda = 0.1;
  double r_max = 0.95;

  void validate() const {
    if (!(tau > 0.0)) throw ConfigError("tau", "must be positive");
    if (!(lambda >= 0.0 && lambda < 1.0)) throw ConfigError("lambda", "must lie in [0, 1)");
    if (!(r_max > 0.0 && r_max <= 1.0)) throw ConfigError("r_max", "must lie in (0, 1]");
  }
};

enum class SchedulerMode { nova, scale_only, layer_only, fixed, off };

inline std::string_view to_string(SchedulerMode m) {
  switch (m) {
    case SchedulerMode::nova: return "nova";
    case SchedulerMode::scale_only: return "scale_only";
    case SchedulerMode::layer_only: return "layer_only";
    case SchedulerMode::fixed: return "fixed";
    case SchedulerMode::off: return "off";
  }
  return "?";
}

inline SchedulerMode parse_scheduler_mode(std::string_view s) {
  for (auto m : {SchedulerMode::nova, SchedulerMode::scale_only, SchedulerMode::layer_only,
                 SchedulerMode::fixed, SchedulerMode::off}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("mode", "unknown scheduler mode '" + std::string(s) + "'");
}

// Modes that detect activation online from the entropy trace.
inline bool uses_entropy_activation(SchedulerMode m) {
  return m == SchedulerMode::nova || m == SchedulerMode::scale_only;
}

inline bool uses_layer_linkage(SchedulerMode m) {
  return m == SchedulerMode::nova || m == SchedulerMode::layer_only;
}

struct SchedulerConfig {
  SchedulerMode mode = SchedulerMode::nova;
  LinkageParams linkage;
  // Per-scale base ratios for fixed and layer_only modes, index t-1.
  std::vector<double> fixed_ratios;

  void validate(std::size_t scales) const {
    linkage.validate();
    if (mode == SchedulerMode::fixed || mode == SchedulerMode::layer_only) {
      if (fixed_ratios.size() != scales) {
        throw ConfigError("fixed_ratios", "need exactly one ratio per scale (" +
                                              std::to_string(scales) + "), got " +
                                              std::to_string(fixed_ratios.size()));
      }
      for (double r : fixed_ratios) {
        if (!(r >= 0.0 && r <= linkage.r_max)) {
          throw ConfigError("fixed_ratios", "every ratio must lie in [0, r_max]");
        }
      }
    }
  }

  // First scale with a non-zero fixed ratio, for the fixed-schedule modes.
  std::optional<std::size_t> fixed_activation() const {
    for (std::size_t i = 0; i < fixed_ratios.size(); ++i)
      if (fixed_ratios[i] > 0.0) return i + 1;
    return std::nullopt;
  }
};

inline double clamp_ratio(double r, const LinkageParams& p) { return std::clamp(r, 0.0, p.r_max); }

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Base ratio of scale t, which must come after the inflection scale t_star.
inline double scale_ratio(std::size_t t, std::size_t t_star, double growth,
                          const LinkageParams& params) {
  if (t <= t_star) {
    throw UsageError("scale_ratio: scale " + std::to_string(t) + " is not after t* = " +
                     std::to_string(t_star));
  }
  const double offset = static_cast<double>(t) - static_cast<double>(t_star + 1);
  return clamp_ratio(sigmoid(offset / params.tau) - params.lambda * std::tanh(growth), params);
}

inline double layer_mean(std::span<const double> preceding) {
  if (preceding.empty()) throw UsageError("layer_mean: no preceding layers");
  double total = 0.0;
  for (double v : preceding) total += v;
  return total / static_cast<double>(preceding.size());
}

// `layer` is 1-based. Throws DegenerateEntropyError when mu <= 0 at j >= 2.
inline double layer_ratio(double base, std::size_t layer, double layer_entropy, double mu,
                          const LinkageParams& params) {
  if (layer <= 1) return base;
  if (!(mu > 0.0)) {
    throw DegenerateEntropyError("layer_ratio: preceding-layer mean entropy " +
                                 std::to_string(mu) + " is not positive");
  }
  const double delta = (layer_entropy - mu) / mu;
  return clamp_ratio(base - delta * base, params);
}

inline std::size_t kept_count(double ratio, std::size_t tokens) {
  const auto pruned = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(tokens)));
  return tokens - std::min(pruned, tokens);
}

struct LayerDecision {
  double ratio = 0.0;
  std::size_t kept = 0;
};

// Base ratio for scale t given everything known before t starts. `trace`
// must hold exactly scales 1..t-1. The growth rate fed to scale linkage is
// the most recent one observed, g_{t-1}.
inline double plan_scale(std::size_t t, const SchedulerConfig& cfg, const EntropyTrace& trace) {
  switch (cfg.mode) {
    case SchedulerMode::off:
      return 0.0;
    case SchedulerMode::fixed:
    case SchedulerMode::layer_only:
      if (t == 0 || t > cfg.fixed_ratios.size()) {
        throw ConfigError("fixed_ratios", "no entry for scale " + std::to_string(t));
      }
      return cfg.fixed_ratios[t - 1];
    case SchedulerMode::nova:
    case SchedulerMode::scale_only: {
      if (trace.scales() + 1 != t) {
        throw UsageError("plan_scale: trace holds " + std::to_string(trace.scales()) +
                         " scales, planning scale " + std::to_string(t));
      }
      if (!trace.t_star || t < *trace.t_star + 1) return 0.0;
      const double g = trace.growth.back().value_or(0.0);
      return scale_ratio(t, *trace.t_star, g, cfg.linkage);
    }
  }
  return 0.0;
}

// Ratio and kept-token count for (t, layer). `layer_means` holds the mean
// input entropy of layers 1..layer (only read by layer-linkage modes).
inline LayerDecision plan_layer(std::size_t layer, std::size_t tokens, double base,
                                const SchedulerConfig& cfg, std::span<const double> layer_means) {
  double ratio = clamp_ratio(base, cfg.linkage);
  if (cfg.mode == SchedulerMode::off) ratio = 0.0;
  if (ratio > 0.0 && uses_layer_linkage(cfg.mode) && layer >= 2) {
    if (layer_means.size() < layer) {
      throw UsageError("plan_layer: need entropies for layers 1.." + std::to_string(layer));
    }
    try {
      const double mu = layer_mean(layer_means.first(layer - 1));
      ratio = layer_ratio(ratio, layer, layer_means[layer - 1], mu, cfg.linkage);
    } catch (const DegenerateEntropyError&) {
      // Falls back to the base ratio.
    }
  }
  return {ratio, kept_count(ratio, tokens)};
}

struct ReductionPlan {
  std::optional<std::size_t> activation;       // first pruned scale (t* + 1)
  std::vector<double> base;                    // per scale
  std::vector<std::vector<LayerDecision>> layers;  // [scale][layer]
};

}  // namespace nova
