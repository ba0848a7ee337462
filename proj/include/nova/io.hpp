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

// File formats: run-config JSON, report/tokens/debug/trace/compare/bench
// emitters, 8-bit PGM/PPM encoders and raw weight export. Everything written
// here is a pure function of its inputs, so files are byte-reproducible.
// Wall-clock numbers only ever appear in bench output.

#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nova/defaults.hpp"
#include "nova/engine.hpp"

namespace nova::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------- config

inline Json model_config_json(const ModelConfig& m) {
  Json scales = Json::array();
  for (const auto& g : m.schedule.grids) scales.push_back(Json::array({g.h, g.w}));
  return Json{{"seed", m.seed},   {"vocab", m.vocab}, {"dim", m.dim},
              {"layers", m.layers}, {"heads", m.heads}, {"scales", scales}};
}

inline Json config_to_json(const RunConfig& c) {
  Json j = model_config_json(c.model);
  j.update(Json{{"t_est", c.activation.t_est},
              {"alpha", c.activation.alpha},
              {"tau", c.scheduler.linkage.tau},
              {"lambda", c.scheduler.linkage.lambda},
              {"r_max", c.scheduler.linkage.r_max},
              {"mode", to_string(c.scheduler.mode)},
              {"selector", to_string(c.selector)},
              {"sampling", to_string(c.sampling)},
              {"sample_seed", c.sample_seed},
              {"shared_mask", c.shared_mask},
              {"fixed_ratios", c.scheduler.fixed_ratios}});
  return j;
}

namespace detail {

template <class T>
T field(const Json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(name, std::string("wrong type: ") + e.what());
  }
}

inline std::size_t count_field(const Json& j, const char* name) {
  const Json& v = j.at(name);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(name, "must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

inline double number_field(const Json& j, const char* name) {
  if (!j.at(name).is_number()) throw ConfigError(name, "must be a number");
  return j.at(name).get<double>();
}

// Either square sides [1, 2, 4] or explicit pairs [[1, 1], [2, 3]].
inline ScaleSchedule parse_scales(const Json& v) {
  if (!v.is_array() || v.empty()) throw ConfigError("scales", "must be a non-empty array");
  ScaleSchedule s;
  for (const Json& e : v) {
    if (e.is_number_integer() && e.get<std::int64_t>() > 0) {
      const auto side = e.get<std::size_t>();
      s.grids.push_back({side, side});
    } else if (e.is_array() && e.size() == 2 && e[0].is_number_integer() &&
               e[1].is_number_integer() && e[0].get<std::int64_t>() > 0 &&
               e[1].get<std::int64_t>() > 0) {
      s.grids.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
    } else {
      throw ConfigError("scales", "entries must be positive sides or [h, w] pairs");
    }
  }
  return s;
}

}  // namespace detail

// Overlays the keys present in `j` onto `c`. Unknown keys are rejected so a
// typo cannot silently fall back to a default.
inline void apply_config_json(RunConfig& c, const Json& j) {
  if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
  bool scales_changed = false;
  for (const auto& [key, value] : j.items()) {
    const char* k = key.c_str();
    if (key == "seed") c.model.seed = detail::count_field(j, k);
    else if (key == "vocab") c.model.vocab = detail::count_field(j, k);
    else if (key == "dim") c.model.dim = detail::count_field(j, k);
    else if (key == "layers") c.model.layers = detail::count_field(j, k);
    else if (key == "heads") c.model.heads = detail::count_field(j, k);
    else if (key == "scales") {
      c.model.schedule = detail::parse_scales(value);
      scales_changed = true;
    } else if (key == "t_est") c.activation.t_est = detail::count_field(j, k);
    else if (key == "alpha") c.activation.alpha = detail::number_field(j, k);
    else if (key == "tau") c.scheduler.linkage.tau = detail::number_field(j, k);
    else if (key == "lambda") c.scheduler.linkage.lambda = detail::number_field(j, k);
    else if (key == "r_max") c.scheduler.linkage.r_max = detail::number_field(j, k);
    else if (key == "mode") c.scheduler.mode = parse_scheduler_mode(detail::field<std::string>(j, k));
    else if (key == "selector") c.selector = parse_selector(detail::field<std::string>(j, k));
    else if (key == "sampling") c.sampling = parse_sampling(detail::field<std::string>(j, k));
    else if (key == "sample_seed") c.sample_seed = detail::count_field(j, k);
    else if (key == "shared_mask") c.shared_mask = detail::field<bool>(j, k);
    else if (key == "fixed_ratios") c.scheduler.fixed_ratios = detail::field<std::vector<double>>(j, k);
    else throw ConfigError(key, "unknown config key");
  }
  // A new schedule length invalidates the old per-scale ratios.
  if (scales_changed && !j.contains("fixed_ratios") &&
      c.scheduler.fixed_ratios.size() != c.model.schedule.scales()) {
    c.scheduler.fixed_ratios = default_fixed_ratios(c.model.schedule.scales());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

inline RunConfig load_run_config(const std::filesystem::path& path,
                                 RunConfig base = default_run_config()) {
  const std::string text = read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  apply_config_json(base, j);
  return base;
}

// ---------------------------------------------------------------- text

// Shortest representation that round-trips.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("write failed: " + path.string());
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
}

// Header t,mean,growth,smoothed; undefined values are empty fields.
inline std::string trace_csv(const EntropyTrace& trace) {
  std::string out = "t,mean,growth,smoothed\n";
  for (std::size_t i = 0; i < trace.scales(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(trace.means[i]) + ",";
    if (trace.growth[i]) out += format_double(*trace.growth[i]);
    out += ",";
    if (trace.smoothed[i]) out += format_double(*trace.smoothed[i]);
    out += "\n";
  }
  return out;
}

inline Json trace_sidecar(const EntropyTrace& trace, const ActivationParams& params,
                          std::size_t scales) {
  Json j{{"schema_version", kSchemaVersion}, {"t_est", params.t_est}, {"alpha", params.alpha},
         {"scales", scales}};
  j["eta"] = trace.baseline ? Json(*trace.baseline) : Json(nullptr);
  j["t_star"] = trace.t_star ? Json(*trace.t_star) : Json(nullptr);
  const auto a = activation_scale(trace, scales);
  j["activation_scale"] = a ? Json(*a) : Json(nullptr);
  return j;
}

// ---------------------------------------------------------------- images

struct ByteImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;
};

inline std::uint8_t to_byte(double unit) {
  const double c = std::clamp(unit, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

inline std::string encode_pnm(const ByteImage& img) {
  if (img.channels != 1 && img.channels != 3) throw InvalidInputError("encode_pnm: 1 or 3 channels");
  std::string out = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

// value -> byte is round(255 * (value - lo) / (hi - lo)), clamped; a
// degenerate range maps everything to 128.
struct AffineMapping {
  double lo = 0.0;
  double hi = 0.0;
  bool constant = false;
};

inline Json mapping_json(const AffineMapping& m) {
  return Json{{"lo", m.lo}, {"hi", m.hi}, {"constant", m.constant},
              {"rule", m.constant ? "all pixels 128" : "round(255*(v-lo)/(hi-lo)), clamped"}};
}

inline std::uint8_t map_value(double v, const AffineMapping& m) {
  return m.constant ? std::uint8_t{128} : to_byte((v - m.lo) / (m.hi - m.lo));
}

// Channels 0..2 of the feature map as RGB, one shared range over all three.
inline ByteImage feature_to_rgb(const Grid2D& f, AffineMapping* mapping = nullptr) {
  if (f.channels < 3) throw InvalidInputError("feature_to_rgb: need at least 3 channels");
  AffineMapping m{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < f.height * f.width; ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      m.lo = std::min(m.lo, f.data[i * f.channels + c]);
      m.hi = std::max(m.hi, f.data[i * f.channels + c]);
    }
  m.constant = !(m.hi > m.lo);
  ByteImage img{f.height, f.width, 3, {}};
  img.pixels.reserve(f.height * f.width * 3);
  for (std::size_t i = 0; i < f.height * f.width; ++i)
    for (std::size_t c = 0; c < 3; ++c) img.pixels.push_back(map_value(f.data[i * f.channels + c], m));
  if (mapping) *mapping = m;
  return img;
}

enum class HeatmapRange { fixed, per_map };

inline HeatmapRange parse_heatmap_range(std::string_view s) {
  if (s == "fixed") return HeatmapRange::fixed;
  if (s == "per-map") return HeatmapRange::per_map;
  throw ConfigError("norm", "expected 'fixed' or 'per-map', got '" + std::string(s) + "'");
}

// fixed: [0, ln V]; per_map: [min, max] of this map, 128 when constant.
inline ByteImage heatmap_image(const EntropyMap& map, HeatmapRange range, std::size_t vocab,
                               AffineMapping* mapping = nullptr) {
  AffineMapping m;
  if (range == HeatmapRange::fixed) {
    m = {0.0, std::log(static_cast<double>(vocab)), false};
  } else {
    const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
    m = {*lo, *hi, !(*hi > *lo)};
  }
  ByteImage img{map.h, map.w, 1, {}};
  for (double v : map.values) img.pixels.push_back(map_value(v, m));
  if (mapping) *mapping = m;
  return img;
}

// ---------------------------------------------------------------- reports

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json ledger_json(const FlopLedger& ledger) {
  const LayerFlops c = ledger.component_totals();
  Json per_scale = Json::array();
  for (std::size_t s = 0; s < ledger.layers.size(); ++s) per_scale.push_back(ledger.scale_total(s));
  return Json{{"total", ledger.total()},
              {"attention", c.attention},
              {"mlp", c.mlp},
              {"readout", c.readout},
              {"kv_fill", c.kv_fill},
              {"head", ledger.head_total()},
              {"per_scale", per_scale}};
}

inline Json report_json(const RunResult& r, const RunConfig& config,
                        const AffineMapping& feature_mapping) {
  Json j{{"schema_version", kSchemaVersion},
         {"defaults_version", kDefaultsVersion},
         {"config", config_to_json(config)},
         {"mode", to_string(r.report.mode)},
         {"selector", to_string(r.report.selector)},
         {"digest", r.report.digest}};
  // Absent rather than null when no inflection was found.
  if (r.report.t_star) j["t_star"] = *r.report.t_star;
  if (r.report.trace.baseline) j["eta"] = *r.report.trace.baseline;
  if (r.report.activation) j["activation_scale"] = *r.report.activation;
  j["scale_ratios"] = r.report.scale_ratios;
  j["mean_ratio"] = mean_ratio(r.plan);
  j["activation_safe"] = r.report.activation_safe;
  j["ledger"] = ledger_json(r.ledger);
  j["feature_mapping"] = mapping_json(feature_mapping);
  return j;
}

inline Json tokens_json(std::span<const TokenMap> tokens) {
  Json scales = Json::array();
  for (const auto& m : tokens) {
    scales.push_back(Json{{"t", m.scale}, {"h", m.h}, {"w", m.w}, {"ids", m.ids}});
  }
  return Json{{"schema_version", kSchemaVersion}, {"scales", scales}};
}

// Per-scale trace, plan, mask sizes, ledger rows and cache norms.
inline Json debug_json(const RunResult& r) {
  Json scales = Json::array();
  const auto& tr = r.report.trace;
  for (std::size_t s = 0; s < r.plan.layers.size(); ++s) {
    Json layers = Json::array();
    for (std::size_t j = 0; j < r.plan.layers[s].size(); ++j) {
      const auto& d = r.plan.layers[s][j];
      const auto& l = r.ledger.layers[s][j];
      Json row{{"layer", j + 1}, {"ratio", d.ratio}, {"kept", d.kept},
               {"attention", l.attention}, {"mlp", l.mlp}, {"readout", l.readout},
               {"kv_fill", l.kv_fill}};
      if (j < r.layer_means[s].size()) row["input_entropy"] = r.layer_means[s][j];
      if (j < r.cache_norms[s].size()) row["cache_norm"] = r.cache_norms[s][j];
      layers.push_back(row);
    }
    scales.push_back(Json{{"t", s + 1},
                          {"mean_entropy", tr.means[s]},
                          {"growth", optional_json(tr.growth[s])},
                          {"smoothed", optional_json(tr.smoothed[s])},
                          {"base_ratio", r.plan.base[s]},
                          {"head", r.ledger.head[s]},
                          {"layers", layers}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"eta", optional_json(tr.baseline)},
              {"t_star", optional_json(tr.t_star)},
              {"activation_scale", optional_json(r.plan.activation)},
              {"scales", scales}};
}

inline Json comparison_json(const ComparisonReport& c, bool with_wall) {
  Json j{{"speedup", c.speedup}, {"feature_mse", c.feature_mse}};
  // JSON has no infinity: null marks identical feature maps.
  j["psnr_db"] = std::isinf(c.psnr_db) ? Json(nullptr) : Json(c.psnr_db);
  j["token_agreement"] = c.token_agreement;
  if (with_wall) j["wall_ratio"] = c.wall_ratio;
  return j;
}

inline Json compare_json(std::span<const ModeRow> rows, const RunConfig& config) {
  Json out = Json::array();
  for (const auto& row : rows) {
    Json j{{"mode", to_string(row.mode)},
           {"ledger_total", row.report.ledger_total},
           {"vs_dense", comparison_json(row.vs_dense, false)},
           {"t_star", optional_json(row.report.t_star)},
           {"activation_scale", optional_json(row.report.activation)},
           {"mean_ratio", row.mean_ratio},
           {"digest", row.report.digest}};
    out.push_back(j);
  }
  return Json{{"schema_version", kSchemaVersion}, {"config", config_to_json(config)}, {"rows", out}};
}

inline Json bench_json(const BenchResult& b, const RunConfig& config) {
  return Json{{"schema_version", kSchemaVersion},
              {"config", config_to_json(config)},
              {"repeats", b.repeats},
              {"baseline", {{"mode", to_string(b.baseline.mode)},
                            {"ledger_total", b.baseline.ledger_total},
                            {"median_ms", b.baseline_median_ms}}},
              {"accelerated", {{"mode", to_string(b.accelerated.mode)},
                               {"ledger_total", b.accelerated.ledger_total},
                               {"median_ms", b.accelerated_median_ms},
                               {"t_star", optional_json(b.accelerated.t_star)}}},
              {"ledger_speedup", b.comparison.speedup},
              {"fidelity", comparison_json(b.comparison, true)}};
}

// ---------------------------------------------------------------- weights

// Flat little-endian float64, tensors in Model::named_tensors() order,
// plus a JSON sidecar with names, shapes and element offsets.
inline void export_weights(Model& model, const std::filesystem::path& bin,
                           const std::filesystem::path& sidecar) {
  std::string bytes;
  Json tensors = Json::array();
  std::size_t offset = 0;
  for (auto& [name, m] : model.named_tensors()) {
    tensors.push_back(Json{{"name", name}, {"rows", m->rows}, {"cols", m->cols}, {"offset", offset}});
    for (double v : m->data) {
      auto u = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
    }
    offset += m->data.size();
  }
  write_file(bin, bytes);
  write_file(sidecar, dump(Json{{"format", "float64-le"}, {"elements", offset},
                                {"model", model_config_json(model.config())},
                                {"tensors", tensors}}));
}

// Overwrites `model`'s tensors; names, shapes and total size must match.
inline void import_weights(Model& model, const std::filesystem::path& bin,
                           const std::filesystem::path& sidecar) {
  Json side;
  try {
    side = Json::parse(read_file(sidecar));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("weights", std::string("invalid sidecar: ") + e.what());
  }
  const std::string bytes = read_file(bin);
  auto named = model.named_tensors();
  if (!side.contains("tensors") || side["tensors"].size() != named.size()) {
    throw ConfigError("weights", "sidecar tensor list does not match the model");
  }
  std::size_t total = 0;
  for (auto& [name, m] : named) total += m->data.size();
  if (bytes.size() != total * 8) throw ConfigError("weights", "binary size does not match the model");
  for (std::size_t i = 0; i < named.size(); ++i) {
    const Json& t = side["tensors"][i];
    Matrix* m = named[i].second;
    if (t.value("name", "") != named[i].first || t.value("rows", 0u) != m->rows ||
        t.value("cols", 0u) != m->cols) {
      throw ConfigError("weights", "tensor " + named[i].first + " has a different name or shape");
    }
    const std::size_t offset = t.value("offset", std::size_t{0});
    if (offset + m->data.size() > total) throw ConfigError("weights", "tensor offset out of range");
    for (std::size_t e = 0; e < m->data.size(); ++e) {
      std::uint64_t u = 0;
      for (int b = 0; b < 8; ++b) {
        u |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[(offset + e) * 8 + b]))
             << (8 * b);
      }
      m->data[e] = std::bit_cast<double>(u);
    }
  }
}

}  // namespace nova::io
