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

// Closed-form FLOP model of one generation run. A multiply-add counts as 2,
// matching FlopCounter. Only matrix products are charged; norms, softmax,
// GELU and residual adds are O(N*d) and left out.
//
// Per (scale, layer), with q kept query rows, K = prefix + q key rows,
// p = N - q pruned rows, width d, MLP width f and vocabulary V:
//   attention = 4*q*K*d        scores (2qKd) + weighted values (2qKd)
//             + 8*q*d^2        Q, K, V, O projections of kept rows
//   mlp       = 4*q*d*f        up and down projections
//   readout   = 2*N*d*V        only when layer-input entropies are read
//   kv_fill   = 4*p*d^2        K, V projections of reconstructed rows
// Per scale, the final readout head costs 2*N*d*V.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nova {

inline std::uint64_t attention_flops(std::uint64_t kept_queries, std::uint64_t total_keys,
                                     std::uint64_t d, std::uint64_t /*heads*/) {
  // Per-head products sum to the same total for any head count.
  return 4 * kept_queries * total_keys * d + 8 * kept_queries * d * d;
}

// The part of attention_flops that scales with (queries x current-scale keys).
inline std::uint64_t intra_scale_attention_flops(std::uint64_t kept_queries, std::uint64_t d) {
  return 4 * kept_queries * kept_queries * d;
}

inline std::uint64_t mlp_flops(std::uint64_t rows, std::uint64_t d, std::uint64_t mlp_dim) {
  return 4 * rows * d * mlp_dim;
}

inline std::uint64_t readout_flops(std::uint64_t rows, std::uint64_t d, std::uint64_t vocab) {
  return 2 * rows * d * vocab;
}

inline std::uint64_t kv_fill_flops(std::uint64_t pruned_rows, std::uint64_t d) {
  return 4 * pruned_rows * d * d;
}

struct LayerFlops {
  std::uint64_t attention = 0;
  std::uint64_t mlp = 0;
  std::uint64_t readout = 0;
  std::uint64_t kv_fill = 0;

  std::uint64_t total() const noexcept { return attention + mlp + readout + kv_fill; }
  bool operator==(const LayerFlops&) const = default;
};

struct FlopLedger {
  std::vector<std::vector<LayerFlops>> layers;  // [scale][layer]
  std::vector<std::uint64_t> head;              // final readout, per scale

  std::uint64_t scale_total(std::size_t s) const {
    std::uint64_t sum = head.at(s);
    for (const auto& l : layers.at(s)) sum += l.total();
    return sum;
  }

  std::uint64_t total() const {
    std::uint64_t sum = 0;
    for (std::size_t s = 0; s < layers.size(); ++s) sum += scale_total(s);
    return sum;
  }

  LayerFlops component_totals() const {
    LayerFlops sum;
    for (const auto& scale : layers)
      for (const auto& l : scale) {
        sum.attention += l.attention;
        sum.mlp += l.mlp;
        sum.readout += l.readout;
        sum.kv_fill += l.kv_fill;
      }
    return sum;
  }

  std::uint64_t head_total() const {
    std::uint64_t sum = 0;
    for (auto h : head) sum += h;
    return sum;
  }

  bool operator==(const FlopLedger&) const = default;
};

// Speedup of `accelerated` relative to `reference` (ratio of totals).
inline double ledger_speedup(const FlopLedger& reference, const FlopLedger& accelerated) {
  return static_cast<double>(reference.total()) / static_cast<double>(accelerated.total());
}

}  // namespace nova
