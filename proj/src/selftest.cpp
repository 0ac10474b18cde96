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

#include <cmath>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "noteprobe/corpus.hpp"
#include "noteprobe/error.hpp"
#include "noteprobe/pipeline.hpp"
#include "noteprobe/report.hpp"

namespace noteprobe {

namespace fs = std::filesystem;

bool SelftestReport::passed() const {
  if (checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

namespace {

constexpr double kBaseRate = 0.30;
constexpr double kShift = 0.05;
constexpr double kTolerance = 1e-6;
constexpr double kZeroTolerance = 1e-9;

class ScratchDir {
 public:
  ScratchDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / fmt::format("noteprobe-selftest-{:08x}{:08x}", rd(), rd());
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Mock with "mortality" at kBaseRate everywhere except texts containing
// `token`, which land at kBaseRate + shift.
MockLexicalModel biased_mock(const std::string& token, double shift) {
  MockLexicalModel m;
  const double b = logit(kBaseRate);
  m.base_logits = {{"mortality", b}, {"Essential hypertension", logit(0.35)}};
  m.lexicon[token]["mortality"] = shift == 0.0 ? 0.0 : logit(kBaseRate + shift) - b;
  return m;
}

void expect(SelftestReport& report, std::string name, double expected, double actual,
            double tolerance) {
  const bool ok = std::isfinite(actual) && std::abs(actual - expected) <= tolerance;
  report.checks.push_back({std::move(name), expected, actual, tolerance, ok, {}});
}

DeviationMatrix file_pipeline(const RunConfig& config, const MockLexicalModel& model) {
  write_text_file(*config.mock, mock_model_to_json(model));
  std::ostringstream log;
  cmd_predict(config, log);
  cmd_analyze(config, log);
  cmd_report(config, log);
  return analysis_from_json(read_text_file(stage_dir(config) / "analysis.json")).deviations;
}

DeviationMatrix memory_pipeline(const GroupedDataset& ds, const Characteristic& ch,
                                const MockLexicalModel& model) {
  return deviation(aggregate(predict_mock(ds, model), ch.name(), ch.group_names()));
}

// The biased group must read +shift and every other group -shift/(G-1).
void expect_single_shift(SelftestReport& report, const std::string& scenario,
                         const DeviationMatrix& d, const std::string& biased, double shift) {
  const double others = -shift / static_cast<double>(d.group_count() - 1);
  double sum = 0.0;
  for (const auto& g : d.cells.groups()) {
    const double c = d.cells.at(g, "mortality");
    sum += c;
    expect(report, fmt::format("{}: c[{}, mortality]", scenario, g), g == biased ? shift : others, c,
           kTolerance);
  }
  expect(report, scenario + ": sum of c over groups", 0.0, sum,
         1e-12 * static_cast<double>(d.group_count()));
}

}  // namespace

SelftestReport run_selftest(std::uint64_t seed, std::size_t n) {
  SelftestReport report;
  ScratchDir scratch;
  const Corpus corpus = generate_synthetic_corpus(seed, n, SyntheticProfile::defaults());
  save_corpus(corpus, scratch.path() / "notes.jsonl");

  RunConfig config;
  config.input = scratch.path() / "notes.jsonl";
  config.characteristic = "gender";
  config.out = scratch.path() / "run";
  config.mock = scratch.path() / "mock.json";
  std::ostringstream log;
  cmd_generate(config, log);

  {
    const DeviationMatrix d = file_pipeline(config, biased_mock("transgender", 0.0));
    double worst = 0.0;
    for (std::size_t g = 0; g < d.cells.group_count(); ++g)
      for (std::size_t l = 0; l < d.cells.label_count(); ++l)
        worst = std::max(worst, std::abs(d.cells.at(g, l)));
    expect(report, "zero lexicon: max |c| over all cells", 0.0, worst, kZeroTolerance);
  }
  expect_single_shift(report, "gender +0.05", file_pipeline(config, biased_mock("transgender", kShift)),
                      "transgender", kShift);
  {
    const DeviationMatrix d = file_pipeline(config, biased_mock("transgender", -kShift));
    const double c = d.cells.at("transgender", "mortality");
    expect(report, "gender -0.05: c[transgender, mortality]", -kShift, c, kTolerance);
    report.checks.push_back({"gender -0.05: transgender mortality deviation is negative", -1.0,
                             c < 0 ? -1.0 : 1.0, 0.0, c < 0, {}});
  }

  const Characteristic ethnicity(ethnicity_spec());
  const GroupedDataset eth = generate_groups(corpus, ethnicity);
  expect_single_shift(report, "ethnicity +0.05",
                      memory_pipeline(eth, ethnicity, biased_mock("hispanic", kShift)), "hispanic",
                      kShift);

  const Characteristic age(age_spec());
  const GroupedDataset ages = age_groups(corpus);
  // The de-identification token tokenizes to "age", "over", "90"; only the
  // over-90 copies contain "90".
  const DeviationMatrix da = memory_pipeline(ages, age, biased_mock("90", kShift));
  expect(report, "age de-id token: c[over90, mortality]", kShift, da.cells.at("over90", "mortality"),
         kTolerance);
  double worst_other = 0.0;
  for (const auto& g : da.cells.groups()) {
    if (g == "over90") continue;
    worst_other = std::max(worst_other, std::abs(da.cells.at(g, "mortality") + kShift / 72.0));
  }
  expect(report, "age de-id token: max |c + 0.05/72| over numeric ages", 0.0, worst_other, kTolerance);
  return report;
}

std::string format_selftest(const SelftestReport& report) {
  std::size_t width = 5;
  for (const auto& c : report.checks) width = std::max(width, c.name.size());
  std::string out = fmt::format("{:<{}}  {:>13}  {:>13}  {:>8}  result\n", "check", width, "expected",
                                "actual", "tol");
  for (const auto& c : report.checks) {
    out += fmt::format("{:<{}}  {:>+13.9f}  {:>+13.9f}  {:>8.0e}  {}\n", c.name, width, c.expected,
                       c.actual, c.tolerance, c.passed ? "PASS" : "FAIL");
  }
  std::size_t failed = 0;
  for (const auto& c : report.checks) failed += !c.passed;
  out += failed ? fmt::format("selftest FAILED ({} of {} checks)\n", failed, report.checks.size())
                : fmt::format("selftest passed ({} checks)\n", report.checks.size());
  return out;
}

}  // namespace noteprobe
