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

// Runs the nova binary as a subprocess and compares its output directories
// against checked-in golden files.

#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace nova::testing {

namespace fs = std::filesystem;

// The golden command set. Each entry is (golden subdirectory, arguments).
inline const std::vector<std::pair<std::string, std::string>>& golden_commands() {
  static const std::vector<std::pair<std::string, std::string>> cmds = {
      {"generate", "generate"},
      {"trace", "trace"},
      {"heatmap", "heatmap --heat-scales all"},
      {"compare", "compare"},
  };
  return cmds;
}

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

// Exit status of `nova <args>`; stdout and stderr go to `log` when given.
inline int run_cli(const std::string& cli, const std::string& args, const fs::path& log = {}) {
  std::string cmd = shell_quote(cli) + " " + args;
  cmd += log.empty() ? " >/dev/null 2>&1" : " >" + shell_quote(log.string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out[e.path().filename().string()] = slurp(e.path());
  }
  return out;
}

inline fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nova_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Names of files that are missing, extra or differ; empty when identical.
inline std::vector<std::string> diff_dirs(const fs::path& expected, const fs::path& actual) {
  const auto a = dir_contents(expected);
  const auto b = dir_contents(actual);
  std::vector<std::string> bad;
  if (a.empty()) bad.push_back("(no golden files in " + expected.string() + ")");
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end()) bad.push_back(name + " (missing)");
    else if (it->second != bytes) bad.push_back(name + " (differs)");
  }
  for (const auto& [name, bytes] : b)
    if (!a.count(name)) bad.push_back(name + " (unexpected)");
  return bad;
}

// Width and height from a binary PGM header, or {0, 0} when malformed.
inline std::pair<std::size_t, std::size_t> pgm_dims(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 255) return {0, 0};
  const std::size_t header = static_cast<std::size_t>(in.tellg()) + 1;
  if (bytes.size() != header + w * h) return {0, 0};
  return {w, h};
}

}  // namespace nova::testing
