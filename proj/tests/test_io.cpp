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

#include <cmath>
#include <filesystem>

#include "nova/io.hpp"

namespace nova {
namespace {

namespace fs = std::filesystem;
using io::Json;

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nova_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Config, RoundTripThroughJson) {
  RunConfig c = default_run_config();
  c.activation.alpha = 0.25;
  c.scheduler.mode = SchedulerMode::layer_only;
  c.selector = Selector::mse;
  c.model.schedule = ScaleSchedule{{{1, 1}, {2, 3}, {4, 4}}};
  c.scheduler.fixed_ratios = {0.0, 0.1, 0.2};
  c.activation.t_est = 2;
  RunConfig back = default_run_config();
  io::apply_config_json(back, io::config_to_json(c));
  EXPECT_EQ(io::config_to_json(back).dump(), io::config_to_json(c).dump());
  EXPECT_EQ(back.model, c.model);
}

TEST(Config, DefaultsEcho) {
  const Json j = io::config_to_json(default_run_config());
  EXPECT_EQ(j["alpha"], 0.5);
  EXPECT_EQ(j["tau"], 0.8);
  EXPECT_EQ(j["lambda"], 0.1);
  EXPECT_EQ(j["t_est"], 5);
  EXPECT_EQ(j["mode"], "nova");
}

TEST(Config, ErrorsNameTheField) {
  RunConfig c = default_run_config();
  try {
    io::apply_config_json(c, Json{{"alpah", 0.5}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "alpah");
  }
  try {
    io::apply_config_json(c, Json{{"alpha", "high"}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "alpha");
  }
  EXPECT_THROW(io::apply_config_json(c, Json{{"layers", -2}}), ConfigError);
  EXPECT_THROW(io::apply_config_json(c, Json{{"scales", Json::array({0})}}), ConfigError);
  EXPECT_THROW(io::apply_config_json(c, Json{{"mode", "warp"}}), ConfigError);
  EXPECT_THROW(io::apply_config_json(c, Json::array()), ConfigError);
}

TEST(Config, NewScheduleResetsFixedRatiosOnlyWhenLengthChanges) {
  RunConfig c = default_run_config();
  io::apply_config_json(c, Json{{"scales", Json::array({1, 2, 3, 4})}});
  EXPECT_EQ(c.scheduler.fixed_ratios, default_fixed_ratios(4));
  io::apply_config_json(c, Json{{"fixed_ratios", Json::array({0.0, 0.0, 0.3, 0.3})}});
  io::apply_config_json(c, Json{{"scales", Json::array({1, 3, 5, 7})}});
  EXPECT_EQ(c.scheduler.fixed_ratios, (std::vector<double>{0.0, 0.0, 0.3, 0.3}));
}

TEST(Config, LoadFromFile) {
  const fs::path dir = temp_dir("config");
  io::write_file(dir / "run.json", R"({"alpha": 0.3, "seed": 7, "scales": [1, [2, 3], 4]})");
  const RunConfig c = io::load_run_config(dir / "run.json");
  EXPECT_EQ(c.activation.alpha, 0.3);
  EXPECT_EQ(c.model.seed, 7u);
  EXPECT_EQ(c.model.schedule.grid(2), (GridSize{2, 3}));
  io::write_file(dir / "bad.json", "{ not json");
  EXPECT_THROW(io::load_run_config(dir / "bad.json"), ConfigError);
  EXPECT_THROW(io::load_run_config(dir / "missing.json"), IoError);
}

TEST(Text, ShortestDoubles) {
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(-2.0), "-2");
  const double v = 4.158883083359672;
  EXPECT_EQ(std::stod(io::format_double(v)), v);
}

TEST(Text, TraceCsvLayout) {
  const EntropyTrace tr = build_trace(std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0, 5.4, 5.5}, {5, 0.5});
  const std::string csv = io::trace_csv(tr);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,mean,growth,smoothed");
  EXPECT_NE(csv.find("\n1,1,,\n"), std::string::npos);
  EXPECT_NE(csv.find("\n2,2,1,\n"), std::string::npos);
  EXPECT_NE(csv.find("\n7,5.5,"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 8);
  const Json side = io::trace_sidecar(tr, {5, 0.5}, 10);
  EXPECT_EQ(side["t_star"], 7);
  EXPECT_EQ(side["eta"], 1.0);
  EXPECT_EQ(side["activation_scale"], 8);
}

TEST(Images, PgmHeaderAndFixedRange) {
  EntropyMap m{3, std::nullopt, 2, 3, {0.0, std::log(64.0), std::log(64.0) / 2, 9.0, -1.0, 1.0}};
  io::AffineMapping mapping;
  const auto img = io::heatmap_image(m, io::HeatmapRange::fixed, 64, &mapping);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{0, 255, 128, 255, 0, 61}));
  const std::string bytes = io::encode_pnm(img);
  EXPECT_EQ(bytes.substr(0, 11), "P5\n3 2\n255\n");
  EXPECT_EQ(bytes.size(), 11u + 6u);
}

TEST(Images, PerMapRangeAndConstantSentinel) {
  EntropyMap m{1, 0, 1, 3, {1.0, 2.0, 3.0}};
  const auto img = io::heatmap_image(m, io::HeatmapRange::per_map, 64);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{0, 128, 255}));
  EntropyMap flat{1, 0, 2, 2, std::vector<double>(4, 0.7)};
  io::AffineMapping mapping;
  const auto gray = io::heatmap_image(flat, io::HeatmapRange::per_map, 64, &mapping);
  EXPECT_TRUE(mapping.constant);
  for (auto p : gray.pixels) EXPECT_EQ(p, 128);
  EXPECT_THROW(io::parse_heatmap_range("log"), ConfigError);
}

TEST(Images, FeaturePpm) {
  Grid2D f(1, 2, 4);
  f.data = {0.0, 1.0, 2.0, 99.0, 4.0, 3.0, 2.0, -99.0};
  io::AffineMapping mapping;
  const auto img = io::feature_to_rgb(f, &mapping);
  EXPECT_EQ(mapping.lo, 0.0);
  EXPECT_EQ(mapping.hi, 4.0);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{0, 64, 128, 255, 191, 128}));
  EXPECT_EQ(io::encode_pnm(img).substr(0, 11), "P6\n2 1\n255\n");
}

TEST(Weights, ExportImportRoundTrip) {
  const fs::path dir = temp_dir("weights");
  ModelConfig small = default_model_config();
  small.dim = 8;
  small.heads = 2;
  small.layers = 2;
  small.vocab = 5;
  Model a(small);
  io::export_weights(a, dir / "w.bin", dir / "w.json");
  std::size_t elements = 0;
  for (auto& [name, m] : a.named_tensors()) elements += m->data.size();
  EXPECT_EQ(fs::file_size(dir / "w.bin"), elements * 8);

  ModelConfig other = small;
  other.seed = 1234;
  Model b(other);
  EXPECT_NE(b.codebook().vectors, a.codebook().vectors);
  io::import_weights(b, dir / "w.bin", dir / "w.json");
  auto ta = a.named_tensors();
  auto tb = b.named_tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) EXPECT_EQ(*ta[i].second, *tb[i].second) << ta[i].first;

  ModelConfig wider = small;
  wider.dim = 10;
  Model c(wider);
  EXPECT_THROW(io::import_weights(c, dir / "w.bin", dir / "w.json"), ConfigError);
}

TEST(Weights, ImportedModelRunsLikeTheOriginal) {
  const fs::path dir = temp_dir("weights_run");
  RunConfig cfg = default_run_config();
  cfg.model.schedule = ScaleSchedule{{{1, 1}, {2, 2}, {3, 3}, {4, 4}}};
  cfg.model.dim = 16;
  cfg.model.heads = 2;
  cfg.activation.t_est = 2;
  cfg.scheduler.fixed_ratios = default_fixed_ratios(4);
  Model m(cfg.model);
  io::export_weights(m, dir / "w.bin", dir / "w.json");
  ModelConfig shifted = cfg.model;
  Model loaded(shifted);
  io::import_weights(loaded, dir / "w.bin", dir / "w.json");
  EXPECT_EQ(Engine(cfg, std::move(loaded)).run().report.digest, Engine(cfg).run().report.digest);
  RunConfig mismatch = cfg;
  mismatch.model.seed = 9;
  EXPECT_THROW(Engine(mismatch, Model(cfg.model)), ConfigError);
}

TEST(Reports, ReportOmitsTStarWhenOff) {
  RunConfig c = with_mode(default_run_config(), SchedulerMode::off);
  c.model.schedule = ScaleSchedule{{{1, 1}, {2, 2}, {3, 3}, {4, 4}}};
  c.activation.t_est = 2;
  c.scheduler.fixed_ratios = default_fixed_ratios(4);
  const RunResult r = Engine(c).run();
  io::AffineMapping m;
  io::feature_to_rgb(r.feature, &m);
  const Json j = io::report_json(r, c, m);
  EXPECT_FALSE(j.contains("t_star"));
  EXPECT_FALSE(j.contains("activation_scale"));
  EXPECT_EQ(j["ledger"]["total"], r.ledger.total());
  EXPECT_EQ(j["config"]["mode"], "off");
  const Json t = io::tokens_json(r.tokens);
  EXPECT_EQ(t["scales"].size(), 4u);
  EXPECT_EQ(t["scales"][3]["ids"].size(), 16u);
  const Json d = io::debug_json(r);
  EXPECT_EQ(d["scales"][0]["layers"].size(), c.model.layers);
}

TEST(Reports, ComparisonEncodesIdenticalAsNull) {
  ComparisonReport c;
  c.token_agreement = {1.0};
  const Json j = io::comparison_json(c, false);
  EXPECT_TRUE(j["psnr_db"].is_null());
  EXPECT_FALSE(j.contains("wall_ratio"));
  EXPECT_TRUE(io::comparison_json(c, true).contains("wall_ratio"));
}

TEST(Files, WriteFailureIsIoError) {
  EXPECT_THROW(io::write_file("/nonexistent_dir_for_nova/x.json", "{}"), IoError);
  const fs::path dir = temp_dir("ensure");
  io::write_file(dir / "plain", "x");
  EXPECT_THROW(io::ensure_dir(dir / "plain"), IoError);
}

}  // namespace
}  // namespace nova
