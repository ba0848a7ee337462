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

#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nova/errors.hpp"
#include "nova/numerics.hpp"
#include "nova/scale_model.hpp"

namespace nova {

struct KeepMask {
  std::size_t scale = 0;
  std::size_t layer = 0;
  std::vector<std::size_t> kept;  // strictly ascending

  bool operator==(const KeepMask&) const = default;
};

// Rows of [0, tokens) that are not in `mask`.
inline std::vector<std::size_t> pruned_rows(const KeepMask& mask, std::size_t tokens) {
  std::vector<std::size_t> out;
  out.reserve(tokens - mask.kept.size());
  std::size_t next = 0;
  for (std::size_t r = 0; r < tokens; ++r) {
    if (next < mask.kept.size() && mask.kept[next] == r) {
      ++next;
    } else {
      out.push_back(r);
    }
  }
  return out;
}

// Indices of all tokens ordered by descending importance; equal scores keep
// the lower index first.
inline std::vector<std::size_t> rank_by_importance(std::span<const double> importance) {
  std::vector<std::size_t> order(importance.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return importance[a] > importance[b];
  });
  return order;
}

// First `kept_count` entries of a ranking, sorted ascending.
inline KeepMask mask_from_ranking(std::span<const std::size_t> ranking, std::size_t kept_count,
                                  std::size_t scale, std::size_t layer) {
  if (kept_count < 1 || kept_count > ranking.size()) {
    throw InvalidInputError("kept count " + std::to_string(kept_count) + " outside [1, " +
                            std::to_string(ranking.size()) + "]");
  }
  KeepMask mask{scale, layer, {ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(kept_count)}};
  std::sort(mask.kept.begin(), mask.kept.end());
  return mask;
}

// Keeps the `kept_count` highest-importance tokens.
inline KeepMask select_kept(std::span<const double> importance, std::size_t kept_count,
                            std::size_t scale = 0, std::size_t layer = 0) {
  if (kept_count < 1 || kept_count > importance.size()) {
    throw InvalidInputError("select_kept: kept count " + std::to_string(kept_count) +
                            " outside [1, " + std::to_string(importance.size()) + "]");
  }
  std::vector<std::size_t> order(importance.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    return importance[a] > importance[b] || (importance[a] == importance[b] && a < b);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kept_count - 1),
                   order.end(), before);
  order.resize(kept_count);
  std::sort(order.begin(), order.end());
  return {scale, layer, std::move(order)};
}

// Per-layer residual fields (output - input) captured at one scale.
struct ResidualCache {
  std::size_t scale = 0;      // scale the residuals were captured at
  std::vector<Grid2D> layers; // one (h, w, d) grid per layer
};

// Residual field of one layer, as an (h, w, d) grid, from the block update
// F(x) the layer reported. Rows listed in `reused` were not computed at this
// layer; their entry is taken from `reused_field` (the interpolated residual
// that rebuilt them) so the field stays dense. Blocks compute x + F(x), so
// input + field restores the output exactly.
inline Grid2D compute_cache(const Matrix& block_residual, GridSize grid,
                            std::span<const std::size_t> reused = {},
                            const Grid2D* reused_field = nullptr) {
  if (block_residual.rows != grid.tokens()) {
    throw InvalidInputError("compute_cache: residual rows do not match the grid");
  }
  Matrix residual = block_residual;
  if (!reused.empty()) {
    if (!reused_field || reused_field->height != grid.h || reused_field->width != grid.w ||
        reused_field->channels != residual.cols) {
      throw InvalidInputError("compute_cache: reused field missing or mis-shaped");
    }
    for (std::size_t r : reused) {
      std::copy_n(reused_field->data.begin() + static_cast<std::ptrdiff_t>(r * residual.cols),
                  residual.cols, residual.row(r).begin());
    }
  }
  return to_grid(residual, grid.h, grid.w);
}

// Same field from a recomputed output - input difference. Rounding can leave
// it an ulp away from F(x).
inline Grid2D compute_cache(const LayerState& input, const LayerState& output, GridSize grid,
                            std::span<const std::size_t> reused = {},
                            const Grid2D* reused_field = nullptr) {
  if (input.hidden.rows != output.hidden.rows || input.hidden.cols != output.hidden.cols) {
    throw InvalidInputError("compute_cache: input/output shapes differ");
  }
  if (input.hidden.rows != grid.tokens()) {
    throw InvalidInputError("compute_cache: state rows do not match the grid");
  }
  Matrix residual(input.hidden.rows, input.hidden.cols);
  for (std::size_t i = 0; i < residual.data.size(); ++i) {
    residual.data[i] = output.hidden.data[i] - input.hidden.data[i];
  }
  return compute_cache(residual, grid, reused, reused_field);
}

inline ResidualCache interpolate_cache(const ResidualCache& cache, GridSize target) {
  ResidualCache out{cache.scale, {}};
  out.layers.reserve(cache.layers.size());
  for (const auto& g : cache.layers) out.layers.push_back(bilinear_resize(g, target.h, target.w));
  return out;
}

// Rows outside `mask` get interp[row] + state[row]; kept rows are untouched.
// `state` is a forward_layer result, whose pruned rows still hold the input.
inline LayerState reconstruct_pruned(LayerState state, const Grid2D& interp,
                                     const KeepMask& mask) {
  const std::size_t d = state.hidden.cols;
  if (interp.height * interp.width != state.hidden.rows || interp.channels != d) {
    throw InternalStateError("reconstruct_pruned: residual cache does not match scale " +
                             std::to_string(state.scale));
  }
  for (std::size_t r : pruned_rows(mask, state.hidden.rows)) {
    auto row = state.hidden.row(r);
    for (std::size_t c = 0; c < d; ++c) row[c] += interp.data[r * d + c];
  }
  return state;
}

}  // namespace nova
