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

// Dense row-major linear algebra and resampling primitives. Everything is
// 64-bit and single-threaded; no BLAS. matmul() reports its floating-point
// work to the calling thread's active FlopCounter, which is how the engine's
// cost ledger is cross-checked against real arithmetic.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nova/errors.hpp"

namespace nova {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }

  bool operator==(const Matrix&) const = default;
};

// Spatial feature map, layout [y][x][channel].
struct Grid2D {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  Grid2D() = default;
  Grid2D(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
      : height(h), width(w), channels(c), data(h * w * c, fill) {
    if (h == 0 || w == 0 || c == 0) {
      throw InvalidInputError("Grid2D dimensions must be positive");
    }
  }

  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return data[(y * width + x) * channels + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data[(y * width + x) * channels + c];
  }
  std::span<const double> site(std::size_t y, std::size_t x) const {
    return {data.data() + (y * width + x) * channels, channels};
  }

  bool operator==(const Grid2D&) const = default;
};

// Reinterprets an (h*w) x c matrix as an h x w x c grid (same memory order).
inline Grid2D to_grid(const Matrix& m, std::size_t h, std::size_t w) {
  if (m.rows != h * w) {
    throw InvalidInputError("to_grid: row count " + std::to_string(m.rows) +
                            " != " + std::to_string(h) + "x" + std::to_string(w));
  }
  Grid2D g(h, w, m.cols);
  g.data = m.data;
  return g;
}

inline Matrix to_matrix(const Grid2D& g) {
  Matrix m(g.height * g.width, g.channels);
  m.data = g.data;
  return m;
}

// SplitMix64 (Steele, Lea, Flood 2014). Public-domain constants; the stream
// depends only on the seed, never on the platform or standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Counts floating-point operations (a multiply-add is 2) issued by matmul()
// on this thread while the counter is alive. Counters nest; the innermost
// one receives the counts.
class FlopCounter {
 public:
  FlopCounter() : previous_(active()) { active() = &count_; }
  ~FlopCounter() { active() = previous_; }
  FlopCounter(const FlopCounter&) = delete;
  FlopCounter& operator=(const FlopCounter&) = delete;

  std::uint64_t count() const noexcept { return count_; }

  static void record(std::uint64_t flops) noexcept {
    if (auto* c = active()) *c += flops;
  }

  // Suspends counting for work that is not part of a measured run
  // (diagnostic readouts, weight construction).
  class Pause {
   public:
    Pause() : previous_(active()) { active() = nullptr; }
    ~Pause() { active() = previous_; }
    Pause(const Pause&) = delete;
    Pause& operator=(const Pause&) = delete;

   private:
    std::uint64_t* previous_;
  };

 private:
  static std::uint64_t*& active() noexcept {
    thread_local std::uint64_t* current = nullptr;
    return current;
  }

  std::uint64_t count_ = 0;
  std::uint64_t* previous_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw InvalidInputError("matmul: inner dimensions differ (" + std::to_string(a.cols) +
                            " vs " + std::to_string(b.rows) + ")");
  }
  Matrix out(a.rows, b.cols);
  // i-k-j order; each output element still accumulates over k ascending.
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* o = out.data.data() + i * b.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.data[i * a.cols + k];
      const double* brow = b.data.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) o[j] += aik * brow[j];
    }
  }
  FlopCounter::record(2ULL * a.rows * a.cols * b.cols);
  return out;
}

inline Matrix transpose(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) t(c, r) = m(r, c);
  return t;
}

// Copies the given rows, in order.
inline Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(m.data.begin() + static_cast<std::ptrdiff_t>(rows[i] * m.cols), m.cols,
                out.data.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
  }
  return out;
}

inline Matrix column_block(const Matrix& m, std::size_t first, std::size_t count) {
  Matrix out(m.rows, count);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = m(r, first + c);
  return out;
}

inline Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.rows == 0) return bottom;
  if (bottom.rows == 0) return top;
  if (top.cols != bottom.cols) throw InvalidInputError("vstack: column count differs");
  Matrix out = top;
  out.rows += bottom.rows;
  out.data.insert(out.data.end(), bottom.data.begin(), bottom.data.end());
  return out;
}

inline void softmax_in_place(std::span<double> row) {
  double peak = row[0];
  for (double v : row) peak = std::max(peak, v);
  double total = 0.0;
  for (double& v : row) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : row) v /= total;
}

inline Matrix softmax_rows(Matrix logits) {
  if (logits.cols == 0) return logits;
  for (std::size_t r = 0; r < logits.rows; ++r) softmax_in_place(logits.row(r));
  return logits;
}

namespace detail {

// Align-corners source coordinate of output index i.
inline double source_coord(std::size_t i, std::size_t in, std::size_t out) {
  if (out == 1) return 0.0;
  return static_cast<double>(i * (in - 1)) / static_cast<double>(out - 1);
}

inline double lerp_exact(double a, double b, double f) {
  return f == 0.0 ? a : a + f * (b - a);
}

}  // namespace detail

// Align-corners bilinear resampling, applied independently per channel.
// Corner samples of the source land exactly on corners of the target.
inline Grid2D bilinear_resize(const Grid2D& src, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) {
    throw InvalidInputError("bilinear_resize: target dimensions must be positive");
  }
  Grid2D dst(out_h, out_w, src.channels);
  for (std::size_t y = 0; y < out_h; ++y) {
    const double sy = detail::source_coord(y, src.height, out_h);
    const auto y0 = static_cast<std::size_t>(std::floor(sy));
    const std::size_t y1 = std::min(y0 + 1, src.height - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < out_w; ++x) {
      const double sx = detail::source_coord(x, src.width, out_w);
      const auto x0 = static_cast<std::size_t>(std::floor(sx));
      const std::size_t x1 = std::min(x0 + 1, src.width - 1);
      const double fx = sx - static_cast<double>(x0);
      for (std::size_t c = 0; c < src.channels; ++c) {
        const double top = detail::lerp_exact(src.at(y0, x0, c), src.at(y0, x1, c), fx);
        const double bottom = detail::lerp_exact(src.at(y1, x0, c), src.at(y1, x1, c), fx);
        dst.at(y, x, c) = detail::lerp_exact(top, bottom, fy);
      }
    }
  }
  return dst;
}

inline Matrix seeded_gaussian(Rng& rng, std::size_t rows, std::size_t cols, double stddev) {
  if (!(stddev > 0.0)) throw InvalidInputError("seeded_gaussian: stddev must be positive");
  Matrix m(rows, cols);
  for (double& v : m.data) v = stddev * rng.next_gaussian();
  return m;
}

}  // namespace nova
