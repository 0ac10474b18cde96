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

#include <cstdlib>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "noteprobe/corpus.hpp"
#include "noteprobe/error.hpp"
#include "noteprobe/pipeline.hpp"
#include "noteprobe/report.hpp"

namespace noteprobe {

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ProtocolError*>(&error) || dynamic_cast<const TransportError*>(&error))
    return 3;
  return 2;
}

namespace {

struct CliState {
  RunConfig config;
  std::string input, spec, predictions, mock, out, endpoint, profile, config_file;
  std::vector<std::string> labels;
  std::size_t n = 1000;
  bool seed_given = false;

  RunConfig resolved() const {
    RunConfig c = config;
    if (!input.empty()) c.input = input;
    if (!spec.empty()) c.spec = spec;
    if (!predictions.empty()) c.predictions = predictions;
    if (!mock.empty()) c.mock = mock;
    if (!endpoint.empty()) c.endpoint = endpoint;
    c.out = out;
    c.table_labels = labels;
    if (const char* token = std::getenv("NOTEPROBE_TOKEN"); token && *token) c.bearer_token = token;
    return c;
  }
};

enum class Flag { input, characteristic, spec, over90, source, out, top_k, label, remote };

void add_flags(CLI::App* app, CliState& s, std::initializer_list<Flag> flags) {
  for (Flag f : flags) {
    switch (f) {
      case Flag::input:
        app->add_option("--input", s.input, "Corpus JSONL with id, text and optional labels");
        break;
      case Flag::characteristic:
        app->add_option("--characteristic", s.config.characteristic,
                        "Built-in characteristic: gender, age or ethnicity");
        break;
      case Flag::spec:
        app->add_option("--spec", s.spec, "Characteristic spec JSON (instead of a built-in)");
        break;
      case Flag::over90:
        app->add_option("--over90-token", s.config.over90_token,
                        "De-identification token for ages over 89");
        break;
      case Flag::source:
        app->add_option("--endpoint", s.endpoint, "Model server base URL");
        app->add_option("--predictions", s.predictions, "Precomputed predictions JSONL");
        app->add_option("--mock", s.mock, "Mock lexical model JSON");
        break;
      case Flag::out:
        app->add_option("--out", s.out, "Output directory");
        break;
      case Flag::top_k:
        app->add_option("--top-k", s.config.top_k, "Heatmap rows (most frequent labels)")
            ->capture_default_str();
        break;
      case Flag::label:
        app->add_option("--label", s.labels, "Labels that get a group table (default: all)");
        break;
      case Flag::remote:
        app->add_option("--max-parallel", s.config.max_parallel, "Requests in flight")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        app->add_option("--max-batch", s.config.max_batch, "Texts per request")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        app->add_option("--timeout-ms", s.config.timeout_ms, "Per-request timeout")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        app->add_option("--retries", s.config.retries, "Retries per batch")->capture_default_str();
        break;
    }
  }
  app->add_option("--config", s.config_file, "JSON file with default flag values");
}

// Appends "--key value" for every config entry whose flag the subcommand knows
// and the command line does not already set.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app) {
  std::string sub_name, config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (sub_name.empty() && !args[i].empty() && args[i][0] != '-') sub_name = args[i];
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty() || sub_name.empty()) return args;
  CLI::App* sub = app.get_subcommand_no_throw(sub_name);
  if (!sub) return args;

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config file " + config_path + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config file " + config_path + " must hold an object");

  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
  }
  std::vector<std::string> merged = args;
  for (const auto& [key, value] : j.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin() + 2, flag.end(), '_', '-');
    if (flag == "--config" || given.count(flag)) continue;
    if (!sub->get_option_no_throw(flag))
      throw ValidationError("config key \"" + key + "\" is not an option of `" + sub_name + "`");
    auto as_text = [](const nlohmann::json& v) {
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) {
        merged.push_back(flag);
        merged.push_back(as_text(v));
      }
    } else {
      merged.push_back(flag);
      merged.push_back(as_text(value));
    }
  }
  return merged;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Behavioral testing of clinical outcome prediction models", "noteprobe"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "noteprobe 0.1.0");
  CliState s;

  auto* synth = app.add_subcommand("synth", "Write a synthetic labeled corpus");
  synth->add_option("--seed", s.config.seed, "Random seed")->capture_default_str();
  synth->add_option("--n", s.n, "Number of notes")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--profile", s.profile, "Generator profile JSON");
  synth->add_option("--out", s.out, "Output JSONL file")->required();
  synth->add_option("--config", s.config_file, "JSON file with default flag values");

  auto* generate = app.add_subcommand("generate", "Write one altered copy of the corpus per test group");
  add_flags(generate, s, {Flag::input, Flag::characteristic, Flag::spec, Flag::over90, Flag::out});
  auto* predict = app.add_subcommand("predict", "Collect model predictions for every group file");
  add_flags(predict, s, {Flag::characteristic, Flag::spec, Flag::source, Flag::out, Flag::remote});
  auto* analyze = app.add_subcommand("analyze", "Group means and deviations (plus age curves)");
  add_flags(analyze, s, {Flag::input, Flag::characteristic, Flag::spec, Flag::out});
  auto* report = app.add_subcommand("report", "CSV tables, heatmap and age plot from the analysis");
  add_flags(report, s, {Flag::input, Flag::characteristic, Flag::spec, Flag::out, Flag::top_k, Flag::label});
  auto* baseline = app.add_subcommand("baseline", "Label prevalence per group in the original corpus");
  add_flags(baseline, s, {Flag::input, Flag::characteristic, Flag::spec, Flag::over90, Flag::out, Flag::top_k});
  auto* run = app.add_subcommand("run", "generate, predict, analyze, report and baseline in one go");
  add_flags(run, s, {Flag::input, Flag::characteristic, Flag::spec, Flag::over90, Flag::source,
                     Flag::out, Flag::top_k, Flag::label, Flag::remote});

  auto* selftest = app.add_subcommand("selftest", "Recover injected mock-model biases end to end");
  selftest->add_option("--seed", s.config.seed, "Corpus seed")->default_val(kSelftestSeed);
  selftest->add_option("--n", s.n, "Corpus size")->default_val(2000)->check(CLI::PositiveNumber);

  auto* dump_spec = app.add_subcommand("dump-spec", "Print a built-in characteristic spec as JSON");
  add_flags(dump_spec, s, {Flag::characteristic, Flag::over90});
  dump_spec->add_option("--out", s.out, "Write to this file instead of stdout");

  auto* conformance = app.add_subcommand("conformance", "Check a model server against the wire protocol");
  conformance->add_option("--endpoint", s.endpoint, "Model server base URL")->required();
  conformance->add_option("--timeout-ms", s.config.timeout_ms, "Per-request timeout")->capture_default_str();

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = merge_config(args, app);
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "noteprobe: " << e.what() << "\n";
    if (!app.get_subcommands().empty()) err << app.get_subcommands().front()->help();
    return 2;
  } catch (const std::exception& e) {
    err << "noteprobe: " << e.what() << "\n";
    return exit_code_for(e);
  }

  try {
    const RunConfig config = s.resolved();
    if (synth->parsed()) {
      const SyntheticProfile profile =
          s.profile.empty() ? SyntheticProfile::defaults() : load_profile(s.profile);
      const Corpus corpus = generate_synthetic_corpus(config.seed, s.n, profile);
      save_corpus(corpus, s.out);
      out << fmt::format("synth: {} notes (seed {}) -> {}\n", corpus.size(), config.seed, s.out);
    } else if (generate->parsed()) {
      cmd_generate(config, out);
    } else if (predict->parsed()) {
      cmd_predict(config, out);
    } else if (analyze->parsed()) {
      cmd_analyze(config, out);
    } else if (report->parsed()) {
      cmd_report(config, out);
    } else if (baseline->parsed()) {
      cmd_baseline(config, out);
    } else if (run->parsed()) {
      cmd_run(config, out);
    } else if (selftest->parsed()) {
      const SelftestReport result = run_selftest(config.seed, s.n);
      out << format_selftest(result);
      return result.passed() ? 0 : 1;
    } else if (dump_spec->parsed()) {
      const std::string json = characteristic_spec_to_json(resolve_characteristic(config).spec());
      if (s.out.empty())
        out << json;
      else
        write_text_file(s.out, json);
    } else if (conformance->parsed()) {
      ModelEndpoint endpoint;
      endpoint.base_url = s.endpoint;
      endpoint.timeout_ms = config.timeout_ms;
      endpoint.bearer_token = config.bearer_token;
      const ConformanceReport result = check_conformance(endpoint);
      for (const auto& c : result.checks)
        out << fmt::format("{:<26} {}  {}\n", c.name, c.passed ? "PASS" : "FAIL", c.detail);
      out << (result.passed() ? "conformance passed\n" : "conformance FAILED\n");
      return result.passed() ? 0 : 3;
    }
  } catch (const std::exception& e) {
    err << "noteprobe: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}

}  // namespace noteprobe
