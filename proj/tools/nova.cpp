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

// nova: generate | bench | trace | heatmap | compare
//
// Exit codes: 0 success, 2 configuration or usage, 3 I/O, 4 internal state.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nova/io.hpp"

namespace {

using nova::io::Json;
namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

// Every RunConfig scalar a flag can override. Unset flags leave the file or
// default value alone.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<double> alpha, tau, lambda, r_max;
  std::optional<std::size_t> t_est, layers, dim, vocab, heads;
  std::optional<std::uint64_t> seed, sample_seed;
  std::optional<std::string> mode, selector, sampling, scales;
  bool shared_mask = false;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Run-config JSON file");
  cmd->add_option("--alpha", o.alpha, "Inflection threshold fraction (0, 1)");
  cmd->add_option("--tau", o.tau, "Scale-linkage temperature");
  cmd->add_option("--lambda", o.lambda, "Growth-rate adjustment weight [0, 1)");
  cmd->add_option("--t-est", o.t_est, "Last scale of the growth baseline window");
  cmd->add_option("--r-max", o.r_max, "Upper clamp for every reduction ratio");
  cmd->add_option("--mode", o.mode, "nova | scale_only | layer_only | fixed | off");
  cmd->add_option("--selector", o.selector, "entropy | attention | mse");
  cmd->add_option("--sampling", o.sampling, "argmax | categorical");
  cmd->add_option("--seed", o.seed, "Weight seed");
  cmd->add_option("--sample-seed", o.sample_seed, "Seed for categorical sampling");
  cmd->add_option("--scales", o.scales, "Comma list of square sides or HxW grids, e.g. 1,2,3x4");
  cmd->add_option("--layers", o.layers, "Transformer layers");
  cmd->add_option("--dim", o.dim, "Model width");
  cmd->add_option("--heads", o.heads, "Attention heads");
  cmd->add_option("--vocab", o.vocab, "Codebook size");
  cmd->add_flag("--shared-mask", o.shared_mask, "Rank tokens once per scale");
  cmd->add_option("--out-dir", o.out_dir, "Output directory (falls back to $NOVA_OUT_DIR, then .)");
}

Json parse_scales_flag(const std::string& text) {
  Json out = Json::array();
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    try {
      std::size_t used = 0;
      const auto x = item.find('x');
      if (x == std::string::npos) {
        const auto side = std::stoull(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        out.push_back(side);
      } else {
        const auto h = std::stoull(item.substr(0, x), &used);
        if (used != x) throw std::invalid_argument(item);
        const auto w = std::stoull(item.substr(x + 1), &used);
        if (used != item.size() - x - 1) throw std::invalid_argument(item);
        out.push_back(Json::array({h, w}));
      }
    } catch (const std::logic_error&) {
      throw nova::ConfigError("scales", "cannot parse '" + item + "'");
    }
    start = end + 1;
  }
  return out;
}

nova::RunConfig effective_config(const Overrides& o) {
  nova::RunConfig c = o.config_path ? nova::io::load_run_config(*o.config_path)
                                    : nova::default_run_config();
  Json j = Json::object();
  if (o.seed) j["seed"] = *o.seed;
  if (o.vocab) j["vocab"] = *o.vocab;
  if (o.dim) j["dim"] = *o.dim;
  if (o.layers) j["layers"] = *o.layers;
  if (o.heads) j["heads"] = *o.heads;
  if (o.scales) j["scales"] = parse_scales_flag(*o.scales);
  if (o.t_est) j["t_est"] = *o.t_est;
  if (o.alpha) j["alpha"] = *o.alpha;
  if (o.tau) j["tau"] = *o.tau;
  if (o.lambda) j["lambda"] = *o.lambda;
  if (o.r_max) j["r_max"] = *o.r_max;
  if (o.mode) j["mode"] = *o.mode;
  if (o.selector) j["selector"] = *o.selector;
  if (o.sampling) j["sampling"] = *o.sampling;
  if (o.sample_seed) j["sample_seed"] = *o.sample_seed;
  if (o.shared_mask) j["shared_mask"] = true;
  nova::io::apply_config_json(c, j);
  c.validate();
  return c;
}

fs::path output_dir(const Overrides& o) {
  fs::path dir = ".";
  if (o.out_dir) {
    dir = *o.out_dir;
  } else if (const char* env = std::getenv("NOVA_OUT_DIR"); env && *env) {
    dir = env;
  }
  nova::io::ensure_dir(dir);
  return dir;
}

void write_json(const fs::path& path, const Json& j) { nova::io::write_file(path, nova::io::dump(j)); }

int cmd_generate(const Overrides& o) {
  const nova::RunConfig c = effective_config(o);
  const fs::path dir = output_dir(o);
  const nova::RunResult r = nova::Engine(c).run();
  nova::io::AffineMapping mapping;
  const auto rgb = nova::io::feature_to_rgb(r.feature, &mapping);
  write_json(dir / "report.json", nova::io::report_json(r, c, mapping));
  write_json(dir / "tokens.json", nova::io::tokens_json(r.tokens));
  nova::io::write_file(dir / "feature.ppm", nova::io::encode_pnm(rgb));
  nova::io::write_file(dir / "trace.csv", nova::io::trace_csv(r.report.trace));
  write_json(dir / "debug.json", nova::io::debug_json(r));
  std::cout << "generate: mode=" << to_string(c.scheduler.mode) << " digest=" << r.report.digest
            << " ledger=" << r.ledger.total() << " -> " << dir.string() << "\n";
  return 0;
}

int cmd_trace(const Overrides& o) {
  const nova::RunConfig c = effective_config(o);
  const fs::path dir = output_dir(o);
  const nova::RunResult r = nova::Engine(c).run();
  Json side = nova::io::trace_sidecar(r.report.trace, c.activation, c.model.schedule.scales());
  side["config"] = nova::io::config_to_json(c);
  nova::io::write_file(dir / "trace.csv", nova::io::trace_csv(r.report.trace));
  write_json(dir / "trace.json", side);
  std::cout << "trace: " << r.report.trace.scales() << " scales -> " << dir.string() << "\n";
  return 0;
}

// "all" or a comma list of 1-based indices bounded by `limit`.
std::vector<std::size_t> parse_index_list(const std::string& text, std::size_t limit,
                                          const std::string& field) {
  std::vector<std::size_t> out;
  if (text == "all") {
    for (std::size_t i = 1; i <= limit; ++i) out.push_back(i);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    std::size_t value = 0;
    try {
      std::size_t used = 0;
      value = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw nova::ConfigError(field, "cannot parse '" + item + "'");
    }
    if (value < 1 || value > limit) {
      throw nova::ConfigError(field, "index " + item + " outside 1.." + std::to_string(limit));
    }
    out.push_back(value);
    start = end + 1;
  }
  return out;
}

struct HeatmapFlags {
  std::string scales = "all";
  std::string layers = "scale";
  std::string norm = "fixed";
};

int cmd_heatmap(const Overrides& o, const HeatmapFlags& h) {
  const nova::RunConfig c = effective_config(o);
  const auto range = nova::io::parse_heatmap_range(h.norm);
  const auto scales = parse_index_list(h.scales, c.model.schedule.scales(), "heat-scales");
  // Layer indices are 1-based on the command line; "scale" is the final readout.
  std::vector<std::optional<std::size_t>> layers;
  if (h.layers == "scale") {
    layers.push_back(std::nullopt);
  } else {
    for (std::size_t l : parse_index_list(h.layers, c.model.layers, "heat-layers")) layers.push_back(l - 1);
  }
  const fs::path dir = output_dir(o);
  nova::RunOptions opt;
  for (std::size_t t : scales)
    for (const auto& l : layers) opt.capture.emplace_back(t, l);
  const nova::RunResult r = nova::Engine(c).run(opt);

  Json files = Json::array();
  for (const auto& map : r.captured) {
    nova::io::AffineMapping m;
    const auto img = nova::io::heatmap_image(map, range, c.model.vocab, &m);
    const std::string name = "heatmap_t" + std::to_string(map.scale) +
                             (map.layer ? "_l" + std::to_string(*map.layer + 1) : "_scale") + ".pgm";
    nova::io::write_file(dir / name, nova::io::encode_pnm(img));
    files.push_back(Json{{"file", name},
                         {"t", map.scale},
                         {"layer", map.layer ? Json(*map.layer + 1) : Json("scale")},
                         {"height", map.h},
                         {"width", map.w},
                         {"mapping", nova::io::mapping_json(m)}});
  }
  write_json(dir / "heatmaps.json", Json{{"schema_version", nova::io::kSchemaVersion},
                                         {"norm", h.norm},
                                         {"config", nova::io::config_to_json(c)},
                                         {"maps", files}});
  std::cout << "heatmap: " << files.size() << " maps -> " << dir.string() << "\n";
  return 0;
}

int cmd_compare(const Overrides& o, const std::string& modes_text) {
  const nova::RunConfig c = effective_config(o);
  std::vector<nova::SchedulerMode> modes;
  std::size_t start = 0;
  while (start <= modes_text.size()) {
    const std::size_t end = std::min(modes_text.find(',', start), modes_text.size());
    modes.push_back(nova::parse_scheduler_mode(modes_text.substr(start, end - start)));
    start = end + 1;
  }
  if (modes.size() < 2) throw nova::ConfigError("modes", "need at least two modes");
  const fs::path dir = output_dir(o);
  const auto rows = nova::compare_modes(c, modes);
  write_json(dir / "compare.json", nova::io::compare_json(rows, c));
  for (const auto& row : rows) {
    std::cout << "compare: " << to_string(row.mode) << " speedup=" << row.vs_dense.speedup << "\n";
  }
  return 0;
}

int cmd_bench(const Overrides& o, std::size_t repeats) {
  const nova::RunConfig c = effective_config(o);
  const fs::path dir = output_dir(o);
  const auto b = nova::bench(c, repeats);
  write_json(dir / "bench.json", nova::io::bench_json(b, c));
  std::cout << "bench: ledger speedup " << b.comparison.speedup << ", median "
            << b.baseline_median_ms << " ms -> " << b.accelerated_median_ms << " ms\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nova: entropy-linked token reduction for next-scale generation"};
  app.require_subcommand(1);
  Overrides o;
  HeatmapFlags heat;
  std::string modes = "off,fixed,scale_only,layer_only,nova";
  std::size_t repeats = 5;

  auto* generate = app.add_subcommand("generate", "Run once; write report, tokens, feature, trace, debug");
  auto* trace = app.add_subcommand("trace", "Write the entropy trace CSV and its sidecar");
  auto* heatmap = app.add_subcommand("heatmap", "Write entropy heatmaps as 8-bit PGM");
  auto* compare = app.add_subcommand("compare", "Compare scheduler modes against the dense run");
  auto* bench_cmd = app.add_subcommand("bench", "Time dense vs. the configured mode");
  for (auto* cmd : {generate, trace, heatmap, compare, bench_cmd}) add_common(cmd, o);
  heatmap->add_option("--heat-scales", heat.scales, "'all' or comma list of scales (1-based)");
  heatmap->add_option("--heat-layers", heat.layers,
                      "'scale' for the final readout, or comma list of layers (1-based)");
  heatmap->add_option("--norm", heat.norm, "fixed ([0, ln V]) | per-map");
  compare->add_option("--modes", modes, "Comma list of modes (at least two)");
  bench_cmd->add_option("--repeats", repeats, "Runs per mode (>= 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*generate) return cmd_generate(o);
    if (*trace) return cmd_trace(o);
    if (*heatmap) return cmd_heatmap(o, heat);
    if (*compare) return cmd_compare(o, modes);
    if (*bench_cmd) return cmd_bench(o, repeats);
  } catch (const nova::ConfigError& e) {
    std::cerr << "nova: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nova::UsageError& e) {
    std::cerr << "nova: usage error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nova::InvalidInputError& e) {
    std::cerr << "nova: invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nova::IoError& e) {
    std::cerr << "nova: i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "nova: i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "nova: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
