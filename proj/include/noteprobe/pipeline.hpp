// Copyright 2026 The noteprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "noteprobe/analysis.hpp"
#include "noteprobe/inference.hpp"
#include "noteprobe/perturb.hpp"

namespace noteprobe {

// Settings shared by the pipeline stages. Each stage reads what it needs and
// ignores the rest.
struct RunConfig {
  std::optional<std::filesystem::path> input;
  std::string characteristic;
  std::optional<std::filesystem::path> spec;
  std::string over90_token = kDefaultOver90Token;

  // Model source: exactly one of these for `predict`.
  std::optional<std::string> endpoint;
  std::optional<std::filesystem::path> predictions;
  std::optional<std::filesystem::path> mock;

  std::filesystem::path out;
  std::size_t top_k = 24;
  std::uint64_t seed = 0;
  std::vector<std::string> table_labels;  // empty: every label

  std::size_t max_parallel = 4;
  std::size_t max_batch = 16;
  int timeout_ms = 30000;
  int retries = 3;
  std::optional<std::string> bearer_token;
};

// Built-in name or spec file, validated and compiled.
Characteristic resolve_characteristic(const RunConfig& config);

// <out>/<characteristic name>
std::filesystem::path stage_dir(const RunConfig& config);

// Group files: <dir>/<group>.jsonl with {"id", "text", "op"} per line, plus
// excluded.json, oplog.json and characteristic.json.
void write_grouped_dataset(const GroupedDataset& dataset, const Characteristic& characteristic,
                           const std::filesystem::path& dir);
GroupedDataset read_grouped_dataset(const std::filesystem::path& dir);

// Pipeline stages. Each throws the library's error types; run_cli maps them
// to exit codes. Progress lines go to `log`.
void cmd_generate(const RunConfig& config, std::ostream& log);
void cmd_predict(const RunConfig& config, std::ostream& log);
void cmd_analyze(const RunConfig& config, std::ostream& log);
void cmd_report(const RunConfig& config, std::ostream& log);
void cmd_baseline(const RunConfig& config, std::ostream& log);
// generate, predict, analyze, report, and baseline when the corpus has labels.
void cmd_run(const RunConfig& config, std::ostream& log);

struct SelftestCheck {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<SelftestCheck> checks;
  bool passed() const;
};

inline constexpr std::uint64_t kSelftestSeed = 20200805;

// Synthetic corpus plus mock models with injected biases; recovered
// deviations are compared with their closed forms.
SelftestReport run_selftest(std::uint64_t seed = kSelftestSeed, std::size_t n = 2000);
std::string format_selftest(const SelftestReport& report);

// 0 success, 1 selftest failure, 2 validation error, 3 protocol/transport.
int exit_code_for(const std::exception& error);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace noteprobe
