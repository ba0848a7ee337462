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

// Generation runs: dense baseline, entropy-linked pruning, and the ablation
// schedules. One run is strictly sequential over scales and layers.
//
// Per scale t:
//   1. build the scale input from the running feature map;
//   2. per layer: read layer-input entropies when the schedule needs them,
//      pick a ratio, keep the highest-importance rows, run the layer on those
//      rows only, rebuild the others as input + residual interpolated from
//      the previous scale, and project keys/values for every row;
//   3. read out the final logits, append the scale mean entropy to the trace,
//      sample tokens, and push all rows' keys/values into the store;
//   4. once pruning is due (t >= t*), capture per-layer residuals for reuse
//      at t + 1.
// Keys/values of rebuilt rows come from their rebuilt states, so later scales
// always condition on a dense history.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nova/entropy.hpp"
#include "nova/errors.hpp"
#include "nova/flop_ledger.hpp"
#include "nova/linkage.hpp"
#include "nova/numerics.hpp"
#include "nova/prune_cache.hpp"
#include "nova/scale_model.hpp"

namespace nova {

enum class Selector { entropy, attention, mse };

inline std::string_view to_string(Selector s) {
  switch (s) {
    case Selector::entropy: return "entropy";
    case Selector::attention: return "attention";
    case Selector::mse: return "mse";
  }
  return "?";
}

inline Selector parse_selector(std::string_view s) {
  for (auto v : {Selector::entropy, Selector::attention, Selector::mse})
    if (to_string(v) == s) return v;
  throw ConfigError("selector", "unknown selector '" + std::string(s) + "'");
}

inline std::string_view to_string(SamplingMode m) {
  return m == SamplingMode::argmax ? "argmax" : "categorical";
}

inline SamplingMode parse_sampling(std::string_view s) {
  if (s == "argmax") return SamplingMode::argmax;
  if (s == "categorical") return SamplingMode::categorical;
  throw ConfigError("sampling", "unknown sampling mode '" + std::string(s) + "'");
}

struct RunConfig {
  ModelConfig model;
  ActivationParams activation;
  SchedulerConfig scheduler;
  Selector selector = Selector::entropy;
  SamplingMode sampling = SamplingMode::argmax;
  std::uint64_t sample_seed = 0;
  // Rank tokens once per scale and let every layer keep a prefix of that
  // ranking, instead of re-ranking at each layer.
  bool shared_mask = false;

  void validate() const {
    model.validate();
    activation.validate(model.schedule.scales());
    scheduler.validate(model.schedule.scales());
    if (selector != Selector::entropy && scheduler.mode == SchedulerMode::off) {
      throw ConfigError("selector", "attention/mse selectors need a pruning mode");
    }
  }
};

// Test seam: replaces entropies the scheduler sees, leaving the model alone.
struct EntropyHook {
  std::vector<double> scale_means;               // index t-1; empty = measured
  std::vector<std::vector<double>> layer_means;  // [t-1][j]; empty = measured
};

struct RunOptions {
  const EntropyHook* hook = nullptr;
  // (scale, layer) pairs whose entropy maps are kept; layer nullopt selects
  // the final-readout map. Diagnostic readouts are not charged to the ledger.
  std::vector<std::pair<std::size_t, std::optional<std::size_t>>> capture;
  bool record_masks = false;
  bool record_queries = false;
  bool record_caches = false;
};

// Matrix-product work observed by FlopCounter for one (scale, layer).
struct MeasuredFlops {
  std::uint64_t forward = 0;  // attention + MLP
  std::uint64_t readout = 0;
  std::uint64_t kv_fill = 0;
  bool operator==(const MeasuredFlops&) const = default;
};

struct RunReport {
  SchedulerMode mode = SchedulerMode::off;
  Selector selector = Selector::entropy;
  std::string digest;
  std::optional<std::size_t> t_star;
  std::optional<std::size_t> activation;
  std::vector<double> scale_ratios;
  std::uint64_t ledger_total = 0;
  double wall_ms = 0.0;
  EntropyTrace trace;
  bool activation_safe = true;
};

struct RunResult {
  RunReport report;
  std::vector<TokenMap> tokens;
  Grid2D feature;
  ReductionPlan plan;
  FlopLedger ledger;
  std::vector<std::vector<MeasuredFlops>> measured;  // [scale][layer]
  std::vector<EntropyMap> captured;
  std::vector<KeepMask> masks;                       // when record_masks
  std::vector<std::vector<std::vector<std::size_t>>> query_rows;  // [scale][layer]
  std::vector<std::vector<double>> cache_norms;      // [scale][layer], empty when not cached
  std::vector<ResidualCache> caches;                 // when record_caches
  std::vector<std::vector<double>> layer_means;      // [scale][layer] entropies read
};

// FNV-1a over every token id, scale by scale.
inline std::string pyramid_digest(std::span<const TokenMap> tokens) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& m : tokens) {
    mix(m.scale);
    for (auto id : m.ids) mix(id);
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
  return out;
}

namespace detail {

inline double grid_norm(const Grid2D& g) {
  double s = 0.0;
  for (double v : g.data) s += v * v;
  return std::sqrt(s);
}

// Squared distance of each row to the previous scale's grid, upsampled.
inline std::vector<double> mse_importance(const Matrix& rows, const Grid2D& previous,
                                          GridSize grid) {
  const Grid2D up = bilinear_resize(previous, grid.h, grid.w);
  std::vector<double> out(rows.rows, 0.0);
  for (std::size_t r = 0; r < rows.rows; ++r) {
    for (std::size_t c = 0; c < rows.cols; ++c) {
      const double diff = rows(r, c) - up.data[r * rows.cols + c];
      out[r] += diff * diff;
    }
  }
  return out;
}

// Attention mass received by each current-scale row at the previous layer.
// Rows that were not keys there receive 0.
inline std::vector<double> attention_importance(const AttentionProbe& probe,
                                                std::size_t prefix_rows, std::size_t tokens) {
  std::vector<double> out(tokens, 0.0);
  for (std::size_t i = 0; i < probe.query_rows.size(); ++i) {
    out[probe.query_rows[i]] = probe.key_mass[prefix_rows + i];
  }
  return out;
}

}  // namespace detail

// Importance map used to pick kept rows. Falls back to `entropy` for the
// attention selector when no probe from a previous layer exists, and for the
// mse selector when there is no previous scale.
inline std::vector<double> ablation_selector(Selector selector, const EntropyMap* entropy,
                                             const AttentionProbe* previous_layer,
                                             std::size_t prefix_rows, const Matrix& layer_input,
                                             const Grid2D* previous_scale_input, GridSize grid) {
  auto from_entropy = [&] {
    if (!entropy) throw InternalStateError("ablation_selector: entropy map unavailable");
    return entropy->values;
  };
  switch (selector) {
    case Selector::entropy:
      return from_entropy();
    case Selector::attention:
      if (!previous_layer) return from_entropy();
      return detail::attention_importance(*previous_layer, prefix_rows, grid.tokens());
    case Selector::mse:
      if (!previous_scale_input) return from_entropy();
      return detail::mse_importance(layer_input, *previous_scale_input, grid);
  }
  return from_entropy();
}

class Engine {
 public:
  explicit Engine(RunConfig config) : config_(std::move(config)), model_((config_.validate(), config_.model)) {}

  // Runs with supplied weights, e.g. imported from disk.
  Engine(RunConfig config, Model model) : config_(std::move(config)), model_(std::move(model)) {
    config_.validate();
    if (!(model_.config() == config_.model)) {
      throw ConfigError("model", "supplied weights were built for a different model config");
    }
  }

  const Model& model() const noexcept { return model_; }
  const RunConfig& config() const noexcept { return config_; }

  RunResult run(const RunOptions& options = {}) const {
    const auto started = std::chrono::steady_clock::now();
    const auto& mc = model_.config();
    const auto& sched = mc.schedule;
    const auto& sc = config_.scheduler;
    const std::size_t T = sched.scales();
    const std::size_t L = mc.layers;
    const std::size_t d = mc.dim;

    RunResult res;
    res.report.mode = sc.mode;
    res.report.selector = config_.selector;
    res.plan.base.assign(T, 0.0);
    res.plan.layers.assign(T, std::vector<LayerDecision>(L));
    res.ledger.layers.assign(T, std::vector<LayerFlops>(L));
    res.ledger.head.assign(T, 0);
    res.measured.assign(T, std::vector<MeasuredFlops>(L));
    res.cache_norms.assign(T, {});
    res.layer_means.assign(T, {});
    if (options.record_queries) res.query_rows.assign(T, std::vector<std::vector<std::size_t>>(L));
    if (sc.mode == SchedulerMode::fixed || sc.mode == SchedulerMode::layer_only) {
      res.plan.activation = sc.fixed_activation();
    }

    KvStore kv = make_kv_store(model_);
    EntropyTrace& trace = res.report.trace;
    const GridSize final_grid = sched.final_grid();
    Grid2D acc(final_grid.h, final_grid.w, d);
    Rng sampler(config_.sample_seed);
    std::optional<ResidualCache> cache;
    std::vector<Grid2D> previous_inputs;  // per layer, previous scale

    for (std::size_t t = 1; t <= T; ++t) {
      const GridSize grid = sched.grid(t);
      const std::size_t N = grid.tokens();
      const std::size_t prefix = kv.rows(0);
      Matrix x = t == 1 ? first_scale_input(model_) : next_scale_input(model_, acc, t);

      const double base = clamp_ratio(plan_scale(t, sc, trace), sc.linkage);
      res.plan.base[t - 1] = base;
      const bool accelerated = base > 0.0;
      std::optional<ResidualCache> interp;

      std::vector<LayerState> inputs;
      std::vector<LayerState> outputs;
      std::vector<Matrix> residuals;
      std::vector<std::vector<std::size_t>> reused(L);
      std::vector<Matrix> scale_keys(L), scale_values(L);
      std::vector<double>& layer_means = res.layer_means[t - 1];
      std::vector<std::size_t> shared_ranking;
      std::optional<AttentionProbe> last_probe;

      for (std::size_t j = 0; j < L; ++j) {
        LayerState state{t, j, std::move(x)};
        inputs.push_back(state);
        auto& flops = res.ledger.layers[t - 1][j];
        auto& measured = res.measured[t - 1][j];

        capture_map(options, res, state.hidden, grid, t, j);

        // Layer-linkage modes read every layer's input entropy at pruned
        // scales; other modes read it only when it drives selection.
        std::optional<EntropyMap> emap;
        auto read_entropy = [&] {
          if (emap) return;
          FlopCounter counter;
          emap = entropy_map(softmax_rows(readout_logits(model_, state.hidden)), grid, t, j);
          measured.readout = counter.count();
          flops.readout = readout_flops(N, d, mc.vocab);
        };
        const bool linkage = accelerated && uses_layer_linkage(sc.mode);
        if (linkage) {
          read_entropy();
          double mean = scale_mean_entropy(*emap);
          if (options.hook && t - 1 < options.hook->layer_means.size()) {
            mean = options.hook->layer_means[t - 1].at(j);
          }
          layer_means.push_back(mean);
        }
        const LayerDecision decision = plan_layer(j + 1, N, base, sc, layer_means);
        res.plan.layers[t - 1][j] = decision;

        AttentionProbe probe;
        AttentionProbe* probe_ptr = config_.selector == Selector::attention || options.record_queries
                                        ? &probe
                                        : nullptr;
        std::optional<KeepMask> mask;
        if (decision.kept < N) {
          if (sc.mode == SchedulerMode::nova || sc.mode == SchedulerMode::scale_only) {
            if (!trace.t_star || t < *trace.t_star + 1) {
              res.report.activation_safe = false;
              throw InternalStateError("pruning requested at scale " + std::to_string(t) +
                                       " before activation");
            }
          }
          if (!interp) {
            if (!cache || cache->scale != t - 1) {
              throw InternalStateError("no residual cache from scale " + std::to_string(t - 1) +
                                       " for pruned scale " + std::to_string(t));
            }
            interp = interpolate_cache(*cache, grid);
          }
          if (!config_.shared_mask || shared_ranking.empty()) {
            const bool need_entropy =
                config_.selector == Selector::entropy ||
                (config_.selector == Selector::attention && !last_probe) ||
                (config_.selector == Selector::mse && previous_inputs.empty());
            if (need_entropy) read_entropy();
            const std::vector<double> importance = ablation_selector(
                config_.selector, emap ? &*emap : nullptr, last_probe ? &*last_probe : nullptr,
                prefix, state.hidden, previous_inputs.empty() ? nullptr : &previous_inputs[j],
                grid);
            if (config_.shared_mask) {
              shared_ranking = rank_by_importance(importance);
            } else {
              mask = select_kept(importance, decision.kept, t, j);
            }
          }
          if (config_.shared_mask) mask = mask_from_ranking(shared_ranking, decision.kept, t, j);
        }

        LayerOutput out;
        {
          FlopCounter counter;
          out = mask ? forward_layer(model_, state, kv, std::span<const std::size_t>(mask->kept),
                                     probe_ptr)
                     : forward_layer(model_, state, kv, std::nullopt, probe_ptr);
          measured.forward = counter.count();
        }
        const std::size_t kept = mask ? mask->kept.size() : N;
        flops.attention = attention_flops(kept, prefix + kept, d, mc.heads);
        flops.mlp = mlp_flops(kept, d, mc.mlp_dim());
        if (options.record_queries) res.query_rows[t - 1][j] = probe.query_rows;

        residuals.push_back(std::move(out.residual));
        if (mask) {
          LayerState rebuilt = reconstruct_pruned(std::move(out.state), interp->layers[j], *mask);
          reused[j] = pruned_rows(*mask, N);
          FlopCounter counter;
          auto [fk, fv] = project_kv(model_, j, gather_rows(state.hidden, reused[j]));
          measured.kv_fill = counter.count();
          flops.kv_fill = kv_fill_flops(reused[j].size(), d);
          scale_keys[j] = merge_rows(out.keys, fk, mask->kept, reused[j]);
          scale_values[j] = merge_rows(out.values, fv, mask->kept, reused[j]);
          outputs.push_back(std::move(rebuilt));
          if (options.record_masks) res.masks.push_back(*mask);
        } else {
          scale_keys[j] = std::move(out.keys);
          scale_values[j] = std::move(out.values);
          outputs.push_back(std::move(out.state));
        }
        if (probe_ptr && config_.selector == Selector::attention) last_probe = std::move(probe);
        x = outputs.back().hidden;
      }

      {
        FlopCounter counter;
        const Matrix logits = readout_logits(model_, x);
        res.ledger.head[t - 1] = readout_flops(N, d, mc.vocab);
        const EntropyMap final_map = entropy_map(softmax_rows(logits), grid, t);
        if (wants_capture(options, t, std::nullopt)) res.captured.push_back(final_map);
        double mean = scale_mean_entropy(final_map);
        if (options.hook && t - 1 < options.hook->scale_means.size()) {
          mean = options.hook->scale_means[t - 1];
        }
        update_trace(trace, t, mean, config_.activation);
        res.tokens.push_back(sample_tokens(logits, t, grid, config_.sampling, &sampler));
        if (counter.count() != res.ledger.head[t - 1]) {
          throw InternalStateError("readout head flop count mismatch");
        }
      }
      if (uses_entropy_activation(sc.mode) && !res.plan.activation) {
        res.plan.activation = activation_scale(trace, T);
      }

      for (std::size_t j = 0; j < L; ++j) kv.append(j, scale_keys[j], scale_values[j]);
      acc = accumulate_feature(std::move(acc), res.tokens.back(), model_.codebook());

      previous_inputs.clear();
      for (const auto& in : inputs) previous_inputs.push_back(to_grid(in.hidden, grid.h, grid.w));

      if (should_cache(t, trace)) {
        ResidualCache next{t, {}};
        for (std::size_t j = 0; j < L; ++j) {
          next.layers.push_back(
              compute_cache(residuals[j], grid, reused[j], interp ? &interp->layers[j] : nullptr));
          res.cache_norms[t - 1].push_back(detail::grid_norm(next.layers.back()));
        }
        if (options.record_caches) res.caches.push_back(next);
        cache = std::move(next);
      }
    }

    res.feature = std::move(acc);
    res.report.digest = pyramid_digest(res.tokens);
    // Off never schedules, so it reports no inflection even if the trace has one.
    if (sc.mode != SchedulerMode::off) res.report.t_star = trace.t_star;
    res.report.activation = res.plan.activation;
    res.report.scale_ratios = res.plan.base;
    res.report.ledger_total = res.ledger.total();
    res.report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    return res;
  }

 private:
  // Residuals are captured from the inflection scale on (t >= t*), or from
  // the scale before the first scheduled pruning in fixed-schedule modes.
  bool should_cache(std::size_t t, const EntropyTrace& trace) const {
    const auto& sc = config_.scheduler;
    switch (sc.mode) {
      case SchedulerMode::off:
        return false;
      case SchedulerMode::fixed:
      case SchedulerMode::layer_only: {
        const auto a = sc.fixed_activation();
        return a && t + 1 >= *a;
      }
      case SchedulerMode::nova:
      case SchedulerMode::scale_only:
        return trace.t_star && t >= *trace.t_star;
    }
    return false;
  }

  static Matrix merge_rows(const Matrix& kept_rows, const Matrix& fill_rows,
                           std::span<const std::size_t> kept, std::span<const std::size_t> fill) {
    Matrix out(kept.size() + fill.size(), kept_rows.cols);
    for (std::size_t i = 0; i < kept.size(); ++i)
      std::copy_n(kept_rows.row(i).begin(), out.cols, out.row(kept[i]).begin());
    for (std::size_t i = 0; i < fill.size(); ++i)
      std::copy_n(fill_rows.row(i).begin(), out.cols, out.row(fill[i]).begin());
    return out;
  }

  static bool wants_capture(const RunOptions& options, std::size_t t,
                            std::optional<std::size_t> layer) {
    for (const auto& [s, l] : options.capture)
      if (s == t && l == layer) return true;
    return false;
  }

  void capture_map(const RunOptions& options, RunResult& res, const Matrix& hidden, GridSize grid,
                   std::size_t t, std::size_t j) const {
    if (!wants_capture(options, t, j)) return;
    FlopCounter::Pause pause;
    res.captured.push_back(entropy_map(softmax_rows(readout_logits(model_, hidden)), grid, t, j));
  }

  RunConfig config_;
  Model model_;
};

struct ComparisonReport {
  double speedup = 1.0;      // reference ledger total / candidate ledger total
  double wall_ratio = 1.0;   // reference wall-clock / candidate wall-clock
  double feature_mse = 0.0;
  double psnr_db = std::numeric_limits<double>::infinity();  // infinite when identical
  std::vector<double> token_agreement;  // per scale
};

// Peak signal for PSNR is the value range of the reference feature map.
inline ComparisonReport compare_runs(const RunResult& reference, const RunResult& candidate,
                                     const ModelConfig& reference_model,
                                     const ModelConfig& candidate_model) {
  if (!(reference_model == candidate_model)) {
    throw UsageError("compare_runs: runs use different model configurations");
  }
  if (reference.tokens.size() != candidate.tokens.size() ||
      reference.feature.data.size() != candidate.feature.data.size()) {
    throw UsageError("compare_runs: runs have different shapes");
  }
  ComparisonReport cmp;
  cmp.speedup = static_cast<double>(reference.ledger.total()) /
                static_cast<double>(candidate.ledger.total());
  cmp.wall_ratio = candidate.report.wall_ms > 0.0
                       ? reference.report.wall_ms / candidate.report.wall_ms
                       : 1.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sq = 0.0;
  const auto& a = reference.feature.data;
  const auto& b = candidate.feature.data;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lo = std::min(lo, a[i]);
    hi = std::max(hi, a[i]);
    sq += (a[i] - b[i]) * (a[i] - b[i]);
  }
  cmp.feature_mse = a.empty() ? 0.0 : sq / static_cast<double>(a.size());
  if (cmp.feature_mse > 0.0) {
    const double peak = hi - lo;
    cmp.psnr_db = 10.0 * std::log10(peak * peak / cmp.feature_mse);
  }
  for (std::size_t s = 0; s < reference.tokens.size(); ++s) {
    const auto& x = reference.tokens[s].ids;
    const auto& y = candidate.tokens[s].ids;
    std::size_t same = 0;
    for (std::size_t i = 0; i < x.size(); ++i) same += x[i] == y[i];
    cmp.token_agreement.push_back(static_cast<double>(same) / static_cast<double>(x.size()));
  }
  return cmp;
}

inline RunConfig with_mode(RunConfig config, SchedulerMode mode) {
  config.scheduler.mode = mode;
  if (mode == SchedulerMode::off) config.selector = Selector::entropy;
  return config;
}

// Mean of every (scale, layer) ratio in a plan.
inline double mean_ratio(const ReductionPlan& plan) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& scale : plan.layers)
    for (const auto& l : scale) {
      sum += l.ratio;
      ++n;
    }
  return n ? sum / static_cast<double>(n) : 0.0;
}

struct ModeRow {
  SchedulerMode mode = SchedulerMode::off;
  RunReport report;
  ComparisonReport vs_dense;
  double mean_ratio = 0.0;
};

// Runs each requested mode on the same model and compares it to the dense
// (off) run. Rows come back in request order.
inline std::vector<ModeRow> compare_modes(const RunConfig& base,
                                          std::span<const SchedulerMode> modes,
                                          const RunOptions& options = {}) {
  if (modes.size() < 2) throw UsageError("compare_modes: need at least two modes");
  const RunConfig dense_cfg = with_mode(base, SchedulerMode::off);
  const RunResult dense = Engine(dense_cfg).run(options);
  std::vector<ModeRow> rows;
  for (auto mode : modes) {
    const RunConfig cfg = with_mode(base, mode);
    const RunResult r = mode == SchedulerMode::off ? dense : Engine(cfg).run(options);
    rows.push_back({mode, r.report, compare_runs(dense, r, dense_cfg.model, cfg.model),
                    mean_ratio(r.plan)});
  }
  return rows;
}

struct BenchResult {
  RunReport baseline;
  RunReport accelerated;
  ComparisonReport comparison;
  double baseline_median_ms = 0.0;
  double accelerated_median_ms = 0.0;
  std::size_t repeats = 0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

// Dense baseline vs. the configured mode, each run `repeats` times.
inline BenchResult bench(const RunConfig& config, std::size_t repeats,
                         const RunOptions& options = {}) {
  if (repeats < 1) throw ConfigError("repeats", "must be at least 1");
  const RunConfig dense_cfg = with_mode(config, SchedulerMode::off);
  const Engine dense_engine(dense_cfg);
  const Engine engine(config);
  std::vector<double> dense_ms, accel_ms;
  std::optional<RunResult> dense, accel;
  for (std::size_t i = 0; i < repeats; ++i) {
    dense = dense_engine.run(options);
    accel = engine.run(options);
    dense_ms.push_back(dense->report.wall_ms);
    accel_ms.push_back(accel->report.wall_ms);
  }
  BenchResult out{dense->report, accel->report,
                  compare_runs(*dense, *accel, dense_cfg.model, config.model), median(dense_ms),
                  median(accel_ms), repeats};
  out.comparison.wall_ratio =
      out.accelerated_median_ms > 0.0 ? out.baseline_median_ms / out.accelerated_median_ms : 1.0;
  return out;
}

}  // namespace nova
