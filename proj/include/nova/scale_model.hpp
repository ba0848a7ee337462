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

// Toy next-scale autoregressive transformer.
//
// A generation walks a pyramid of token grids, coarse to fine. Scale t's
// per-token input is the running feature map (sum of all earlier scales'
// codebook lookups, each upsampled to the final resolution) resized to the
// scale's grid, plus a per-scale embedding. Every layer is pre-norm
// attention + GELU MLP; queries come from the current scale, keys/values
// from the start token, every completed scale, and the current scale.
//
// Scale indices in this API are 1-based (t = 1..T), layer indices 0-based.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nova/errors.hpp"
#include "nova/numerics.hpp"

namespace nova {

struct GridSize {
  std::size_t h = 1;
  std::size_t w = 1;
  std::size_t tokens() const noexcept { return h * w; }
  bool operator==(const GridSize&) const = default;
};

struct ScaleSchedule {
  std::vector<GridSize> grids;

  static ScaleSchedule square(std::span<const std::size_t> sides) {
    ScaleSchedule s;
    for (std::size_t side : sides) s.grids.push_back({side, side});
    return s;
  }

  std::size_t scales() const noexcept { return grids.size(); }
  const GridSize& grid(std::size_t t) const { return grids.at(t - 1); }
  std::size_t tokens(std::size_t t) const { return grid(t).tokens(); }
  const GridSize& final_grid() const { return grids.back(); }

  void validate() const {
    if (grids.size() < 4) throw ConfigError("scales", "need at least 4 scales");
    if (grids.front() != GridSize{1, 1}) throw ConfigError("scales", "first grid must be 1x1");
    for (std::size_t i = 0; i < grids.size(); ++i) {
      if (grids[i].h == 0 || grids[i].w == 0) {
        throw ConfigError("scales", "grid dimensions must be positive");
      }
      if (i > 0 && grids[i].tokens() < grids[i - 1].tokens()) {
        throw ConfigError("scales", "token count must be non-decreasing across scales");
      }
    }
  }

  bool operator==(const ScaleSchedule&) const = default;
};

struct ModelConfig {
  ScaleSchedule schedule;
  std::size_t vocab = 64;
  std::size_t dim = 64;
  std::size_t layers = 8;
  std::size_t heads = 4;
  std::uint64_t seed = 42;

  std::size_t head_dim() const noexcept { return dim / heads; }
  std::size_t mlp_dim() const noexcept { return 4 * dim; }

  void validate() const {
    schedule.validate();
    if (vocab < 2) throw ConfigError("vocab", "must be at least 2");
    if (dim == 0) throw ConfigError("dim", "must be positive");
    if (heads == 0) throw ConfigError("heads", "must be positive");
    if (dim % heads != 0) {
      throw ConfigError("heads", "dim " + std::to_string(dim) + " is not divisible by " +
                                     std::to_string(heads) + " heads");
    }
    if (layers < 2) throw ConfigError("layers", "must be at least 2");
  }

  bool operator==(const ModelConfig&) const = default;
};

struct TokenMap {
  std::size_t scale = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<std::uint32_t> ids;
  bool operator==(const TokenMap&) const = default;
};

struct Codebook {
  Matrix vectors;  // vocab x dim
};

struct LayerWeights {
  Matrix ln1_gain, ln1_bias;  // 1 x d
  Matrix wq, wk, wv, wo;      // d x d
  Matrix ln2_gain, ln2_bias;  // 1 x d
  Matrix w1;                  // d x 4d
  Matrix w2;                  // 4d x d
};

struct LayerState {
  std::size_t scale = 0;
  std::size_t layer = 0;
  Matrix hidden;  // N_t x d
};

// Per-layer keys/values for the start token and every completed scale.
struct KvStore {
  std::vector<Matrix> keys;
  std::vector<Matrix> values;

  std::size_t rows(std::size_t layer) const { return keys.at(layer).rows; }

  void append(std::size_t layer, const Matrix& k, const Matrix& v) {
    keys.at(layer) = vstack(keys[layer], k);
    values.at(layer) = vstack(values[layer], v);
  }

  void check_layer(std::size_t layer) const {
    if (layer >= keys.size() || keys.size() != values.size() ||
        keys[layer].rows != values[layer].rows) {
      throw InternalStateError("KvStore: inconsistent key/value lengths at layer " +
                               std::to_string(layer));
    }
  }
};

class Model {
 public:
  // Weights are drawn from one SplitMix64 stream seeded by config.seed, in
  // this order: codebook, scale embeddings, start embedding, readout weight,
  // readout bias, then per layer: ln1 (gain, bias), wq, wk, wv, wo,
  // ln2 (gain, bias), w1, w2. Every draw has stddev 1/sqrt(d); layer-norm
  // gains are centred on 1.
  explicit Model(ModelConfig config) : config_(std::move(config)) {
    config_.validate();
    const std::size_t d = config_.dim;
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));
    Rng rng(config_.seed);
    codebook_.vectors = seeded_gaussian(rng, config_.vocab, d, sd);
    scale_embed_ = seeded_gaussian(rng, config_.schedule.scales(), d, sd);
    start_ = seeded_gaussian(rng, 1, d, sd);
    readout_w_ = seeded_gaussian(rng, d, config_.vocab, sd);
    readout_b_ = seeded_gaussian(rng, 1, config_.vocab, sd);
    auto gain = [&] {
      Matrix g = seeded_gaussian(rng, 1, d, sd);
      for (double& v : g.data) v += 1.0;
      return g;
    };
    layers_.resize(config_.layers);
    for (auto& lw : layers_) {
      lw.ln1_gain = gain();
      lw.ln1_bias = seeded_gaussian(rng, 1, d, sd);
      lw.wq = seeded_gaussian(rng, d, d, sd);
      lw.wk = seeded_gaussian(rng, d, d, sd);
      lw.wv = seeded_gaussian(rng, d, d, sd);
      lw.wo = seeded_gaussian(rng, d, d, sd);
      lw.ln2_gain = gain();
      lw.ln2_bias = seeded_gaussian(rng, 1, d, sd);
      lw.w1 = seeded_gaussian(rng, d, config_.mlp_dim(), sd);
      lw.w2 = seeded_gaussian(rng, config_.mlp_dim(), d, sd);
    }
  }

  const ModelConfig& config() const noexcept { return config_; }
  const Codebook& codebook() const noexcept { return codebook_; }
  const Matrix& scale_embedding() const noexcept { return scale_embed_; }
  const Matrix& start_embedding() const noexcept { return start_; }
  const Matrix& readout_weight() const noexcept { return readout_w_; }
  const Matrix& readout_bias() const noexcept { return readout_b_; }
  const LayerWeights& layer(std::size_t j) const { return layers_.at(j); }

  // Every tensor by a stable name, in draw order. Used by weight export/import.
  std::vector<std::pair<std::string, Matrix*>> named_tensors() {
    std::vector<std::pair<std::string, Matrix*>> out = {
        {"codebook", &codebook_.vectors}, {"scale_embedding", &scale_embed_},
        {"start_embedding", &start_},     {"readout.weight", &readout_w_},
        {"readout.bias", &readout_b_}};
    for (std::size_t j = 0; j < layers_.size(); ++j) {
      auto& lw = layers_[j];
      const std::string p = "layers." + std::to_string(j) + ".";
      for (auto [name, m] : {std::pair{"ln1.gain", &lw.ln1_gain}, {"ln1.bias", &lw.ln1_bias},
                             {"wq", &lw.wq}, {"wk", &lw.wk}, {"wv", &lw.wv}, {"wo", &lw.wo},
                             {"ln2.gain", &lw.ln2_gain}, {"ln2.bias", &lw.ln2_bias},
                             {"w1", &lw.w1}, {"w2", &lw.w2}}) {
        out.emplace_back(p + name, m);
      }
    }
    return out;
  }

 private:
  ModelConfig config_;
  Codebook codebook_;
  Matrix scale_embed_;
  Matrix start_;
  Matrix readout_w_;
  Matrix readout_b_;
  std::vector<LayerWeights> layers_;
};

namespace detail {

inline void layer_norm_row(std::span<const double> x, const Matrix& gain, const Matrix& bias,
                           std::span<double> out) {
  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  const double inv = 1.0 / std::sqrt(var + 1e-5);
  for (std::size_t c = 0; c < x.size(); ++c) {
    out[c] = (x[c] - mean) * inv * gain.data[c] + bias.data[c];
  }
}

inline Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias) {
  Matrix out(x.rows, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) layer_norm_row(x.row(r), gain, bias, out.row(r));
  return out;
}

inline double gelu(double x) {
  constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
  return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
}

}  // namespace detail

// Key/value projections of the given layer inputs (pre-norm applied here).
inline std::pair<Matrix, Matrix> project_kv(const Model& model, std::size_t layer,
                                            const Matrix& inputs) {
  const auto& lw = model.layer(layer);
  const Matrix normed = detail::layer_norm(inputs, lw.ln1_gain, lw.ln1_bias);
  return {matmul(normed, lw.wk), matmul(normed, lw.wv)};
}

// An empty store holding the start token's keys/values at every layer. The
// start token enters each layer as the raw start embedding; its projection is
// a constant of the model and is not charged to any run.
inline KvStore make_kv_store(const Model& model) {
  FlopCounter::Pause pause;
  KvStore kv;
  for (std::size_t j = 0; j < model.config().layers; ++j) {
    auto [k, v] = project_kv(model, j, model.start_embedding());
    kv.keys.push_back(std::move(k));
    kv.values.push_back(std::move(v));
  }
  return kv;
}

// Records which query rows ran and how much attention each key received.
struct AttentionProbe {
  std::vector<std::size_t> query_rows;
  // One entry per key (prefix first, then current-scale kept rows): sum over
  // queries of the head-averaged attention probability.
  std::vector<double> key_mass;
};

struct LayerOutput {
  LayerState state;  // rows outside `keep` are the input rows, untouched
  Matrix keys;       // kept rows only, in keep order
  Matrix values;
  Matrix residual;   // N x d block update F(x); zero outside `keep`
};

// One transformer block over the kept rows of `state`. `keep` lists row
// indices in ascending order; std::nullopt means every row.
inline LayerOutput forward_layer(const Model& model, const LayerState& state, const KvStore& kv,
                                 std::optional<std::span<const std::size_t>> keep = std::nullopt,
                                 AttentionProbe* probe = nullptr) {
  const auto& cfg = model.config();
  const std::size_t j = state.layer;
  if (state.hidden.cols != cfg.dim) throw InvalidInputError("forward_layer: hidden width != dim");
  kv.check_layer(j);

  std::vector<std::size_t> rows;
  if (keep) {
    rows.assign(keep->begin(), keep->end());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] >= state.hidden.rows || (i > 0 && rows[i] <= rows[i - 1])) {
        throw InvalidInputError("forward_layer: keep indices must be ascending and in range");
      }
    }
  } else {
    rows.resize(state.hidden.rows);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }

  const auto& lw = model.layer(j);
  const Matrix x = gather_rows(state.hidden, rows);
  const Matrix a = detail::layer_norm(x, lw.ln1_gain, lw.ln1_bias);
  const Matrix q = matmul(a, lw.wq);
  Matrix k = matmul(a, lw.wk);
  Matrix v = matmul(a, lw.wv);
  const Matrix all_k = vstack(kv.keys[j], k);
  const Matrix all_v = vstack(kv.values[j], v);

  const std::size_t dh = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix context(rows.size(), cfg.dim);
  if (probe) {
    probe->query_rows = rows;
    probe->key_mass.assign(all_k.rows, 0.0);
  }
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    const Matrix qh = column_block(q, h * dh, dh);
    const Matrix kh_t = transpose(column_block(all_k, h * dh, dh));
    const Matrix vh = column_block(all_v, h * dh, dh);
    Matrix scores = matmul(qh, kh_t);
    for (double& s : scores.data) s *= scale;
    const Matrix probs = softmax_rows(std::move(scores));
    if (probe) {
      for (std::size_t r = 0; r < probs.rows; ++r)
        for (std::size_t c = 0; c < probs.cols; ++c)
          probe->key_mass[c] += probs(r, c) / static_cast<double>(cfg.heads);
    }
    const Matrix oh = matmul(probs, vh);
    for (std::size_t r = 0; r < oh.rows; ++r)
      for (std::size_t c = 0; c < dh; ++c) context(r, h * dh + c) = oh(r, c);
  }
  const Matrix attn = matmul(context, lw.wo);

  Matrix x1 = x;
  for (std::size_t i = 0; i < x1.data.size(); ++i) x1.data[i] += attn.data[i];
  const Matrix b = detail::layer_norm(x1, lw.ln2_gain, lw.ln2_bias);
  Matrix hidden = matmul(b, lw.w1);
  for (double& e : hidden.data) e = detail::gelu(e);
  const Matrix mlp = matmul(hidden, lw.w2);

  // The block is written as x + F(x) with F(x) = attn + mlp, so the stored
  // residual added back to the input gives the output bit for bit.
  LayerOutput out{state, std::move(k), std::move(v), Matrix(state.hidden.rows, cfg.dim)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto dst = out.state.hidden.row(rows[i]);
    auto res = out.residual.row(rows[i]);
    for (std::size_t c = 0; c < cfg.dim; ++c) {
      res[c] = attn(i, c) + mlp(i, c);
      dst[c] = x(i, c) + res[c];
    }
  }
  return out;
}

// Shared readout head: hidden (N x d) -> logits (N x V).
inline Matrix readout_logits(const Model& model, const Matrix& hidden) {
  if (hidden.cols != model.config().dim) {
    throw InvalidInputError("readout_logits: hidden width " + std::to_string(hidden.cols) +
                            " != dim " + std::to_string(model.config().dim));
  }
  Matrix logits = matmul(hidden, model.readout_weight());
  const auto& bias = model.readout_bias().data;
  for (std::size_t r = 0; r < logits.rows; ++r)
    for (std::size_t c = 0; c < logits.cols; ++c) logits(r, c) += bias[c];
  return logits;
}

enum class SamplingMode { argmax, categorical };

// argmax breaks ties toward the lower token id. categorical draws one uniform
// per token from `rng` and inverts the softmax CDF.
inline TokenMap sample_tokens(const Matrix& logits, std::size_t scale, GridSize grid,
                              SamplingMode mode, Rng* rng = nullptr) {
  if (logits.rows != grid.tokens()) {
    throw InvalidInputError("sample_tokens: logits rows != grid tokens");
  }
  TokenMap map{scale, grid.h, grid.w, std::vector<std::uint32_t>(logits.rows)};
  if (mode == SamplingMode::argmax) {
    for (std::size_t r = 0; r < logits.rows; ++r) {
      auto row = logits.row(r);
      std::size_t best = 0;
      for (std::size_t c = 1; c < row.size(); ++c)
        if (row[c] > row[best]) best = c;
      map.ids[r] = static_cast<std::uint32_t>(best);
    }
    return map;
  }
  if (!rng) throw InvalidInputError("sample_tokens: categorical mode needs an Rng");
  const Matrix probs = softmax_rows(logits);
  for (std::size_t r = 0; r < probs.rows; ++r) {
    const double u = rng->next_unit();
    auto row = probs.row(r);
    std::size_t pick = row.size() - 1;
    double cum = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      cum += row[c];
      if (u < cum) {
        pick = c;
        break;
      }
    }
    map.ids[r] = static_cast<std::uint32_t>(pick);
  }
  return map;
}

// Codebook lookup of a token map as an (h, w, d) grid.
inline Grid2D lookup_tokens(const TokenMap& tokens, const Codebook& codebook) {
  const std::size_t d = codebook.vectors.cols;
  Grid2D g(tokens.h, tokens.w, d);
  for (std::size_t i = 0; i < tokens.ids.size(); ++i) {
    const std::uint32_t id = tokens.ids[i];
    if (id >= codebook.vectors.rows) {
      throw InvalidInputError("token id " + std::to_string(id) + " outside vocabulary of " +
                              std::to_string(codebook.vectors.rows));
    }
    std::copy_n(codebook.vectors.row(id).begin(), d, g.data.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return g;
}

// acc += upsample(codebook[tokens]) at acc's resolution.
inline Grid2D accumulate_feature(Grid2D acc, const TokenMap& tokens, const Codebook& codebook) {
  const Grid2D up = bilinear_resize(lookup_tokens(tokens, codebook), acc.height, acc.width);
  if (up.channels != acc.channels) {
    throw InvalidInputError("accumulate_feature: channel count mismatch");
  }
  for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += up.data[i];
  return acc;
}

// Scale-1 input: start embedding plus the first scale embedding (1 x d).
inline Matrix first_scale_input(const Model& model) {
  Matrix x = model.start_embedding();
  for (std::size_t c = 0; c < x.cols; ++c) x(0, c) += model.scale_embedding()(0, c);
  return x;
}

// Input embeddings for scale t >= 2: the accumulated feature resized to the
// scale's grid, flattened row-major, plus the scale embedding.
inline Matrix next_scale_input(const Model& model, const Grid2D& prev_feature, std::size_t t) {
  const auto& sched = model.config().schedule;
  if (t < 2 || t > sched.scales()) {
    throw InvalidInputError("next_scale_input: scale index " + std::to_string(t) +
                            " out of range [2, " + std::to_string(sched.scales()) + "]");
  }
  const GridSize g = sched.grid(t);
  Matrix x = to_matrix(bilinear_resize(prev_feature, g.h, g.w));
  const auto emb = model.scale_embedding().row(t - 1);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) x(r, c) += emb[c];
  return x;
}

}  // namespace nova
