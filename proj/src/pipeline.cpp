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

#include "noteprobe/pipeline.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "noteprobe/corpus.hpp"
#include "noteprobe/error.hpp"
#include "noteprobe/report.hpp"

namespace noteprobe {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool safe_file_stem(const std::string& name) {
  if (name.empty() || name == "." || name == "..") return false;
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '_' || c == '-' || c == '.')) return false;
  }
  return true;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void require_file(const fs::path& path, const std::string& produced_by) {
  if (!fs::is_regular_file(path)) {
    throw ValidationError("missing " + path.string() + " (run `" + produced_by + "` first)");
  }
}

std::string slug(const std::string& label) {
  std::string out;
  for (char c : label) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out += static_cast<char>(std::tolower(u));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "label" : out;
}

bool is_age_axis(const std::vector<std::string>& groups) { return groups == age_group_names(); }

Corpus load_input(const RunConfig& config) {
  if (!config.input) throw ValidationError("--input is required");
  return load_corpus(*config.input);
}

ModelEndpoint endpoint_from(const RunConfig& config) {
  ModelEndpoint e;
  e.base_url = *config.endpoint;
  e.timeout_ms = config.timeout_ms;
  e.max_batch = config.max_batch;
  e.max_parallel = config.max_parallel;
  e.retries = config.retries;
  e.bearer_token = config.bearer_token;
  return e;
}

std::map<std::string, std::size_t> label_frequency(const RunConfig& config) {
  if (!config.input) return {};
  const Corpus corpus = load_corpus(*config.input);
  return corpus.has_labels() ? corpus.label_frequencies() : std::map<std::string, std::size_t>{};
}

}  // namespace

Characteristic resolve_characteristic(const RunConfig& config) {
  if (config.spec) {
    const auto spec = characteristic_spec_from_json(read_text_file(*config.spec));
    if (!config.characteristic.empty() && config.characteristic != spec.name) {
      throw ValidationError("--characteristic \"" + config.characteristic +
                            "\" does not match the spec name \"" + spec.name + "\"");
    }
    return Characteristic(spec);
  }
  if (config.characteristic.empty())
    throw ValidationError("--characteristic or --spec is required");
  if (config.characteristic == "age") return Characteristic(age_spec(config.over90_token));
  return Characteristic(builtin_spec(config.characteristic));
}

fs::path stage_dir(const RunConfig& config) {
  if (config.out.empty()) throw ValidationError("--out is required");
  std::string name = config.characteristic;
  if (config.spec) name = characteristic_spec_from_json(read_text_file(*config.spec)).name;
  if (name.empty()) throw ValidationError("--characteristic or --spec is required");
  if (!safe_file_stem(name))
    throw ValidationError("characteristic name \"" + name + "\" is not usable as a directory name");
  return config.out / name;
}

void write_grouped_dataset(const GroupedDataset& dataset, const Characteristic& characteristic,
                           const fs::path& dir) {
  for (const auto& g : dataset.groups) {
    if (!safe_file_stem(g.name))
      throw ValidationError("group name \"" + g.name + "\" is not usable as a file name");
  }
  ensure_dir(dir);
  write_text_file(dir / "characteristic.json", characteristic_spec_to_json(characteristic.spec()));

  ordered_json oplog;
  oplog["characteristic"] = dataset.characteristic;
  oplog["cohort_size"] = dataset.cohort_size();
  oplog["excluded"] = dataset.excluded.size();
  oplog["groups"] = ordered_json::object();
  for (const auto& g : dataset.groups) {
    std::map<AlterOp, std::size_t> ops;
    std::string lines;
    for (const auto& s : g.samples) {
      ++ops[s.op];
      json j;
      j["id"] = s.id;
      j["text"] = s.text;
      j["op"] = to_string(s.op);
      lines += j.dump() + "\n";
    }
    write_text_file(dir / (g.name + ".jsonl"), lines);
    ordered_json counts;
    for (AlterOp op : {AlterOp::change, AlterOp::add, AlterOp::keep}) counts[to_string(op)] = ops[op];
    oplog["groups"][g.name] = std::move(counts);
  }
  write_text_file(dir / "oplog.json", oplog.dump(2) + "\n");

  ordered_json excluded = ordered_json::array();
  for (const auto& e : dataset.excluded)
    excluded.push_back(ordered_json{{"id", e.id}, {"group", e.group}, {"reason", e.reason}});
  write_text_file(dir / "excluded.json", excluded.dump(2) + "\n");
}

GroupedDataset read_grouped_dataset(const fs::path& dir) {
  require_file(dir / "characteristic.json", "generate");
  const Characteristic ch(characteristic_spec_from_json(read_text_file(dir / "characteristic.json")));
  GroupedDataset ds;
  ds.characteristic = ch.name();
  for (const auto& name : ch.group_names()) {
    const fs::path path = dir / (name + ".jsonl");
    require_file(path, "generate");
    std::ifstream in(path, std::ios::binary);
    GroupedDataset::Group group{name, {}};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const json j = json::parse(line);
        group.samples.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                                 alter_op_from_string(j.at("op").get<std::string>())});
      } catch (const std::exception& e) {
        throw ParseError(path.string(), line_no, e.what());
      }
    }
    ds.groups.push_back(std::move(group));
  }
  const auto& reference = ds.groups.front().samples;
  for (const auto& g : ds.groups) {
    bool same = g.samples.size() == reference.size();
    for (std::size_t i = 0; same && i < reference.size(); ++i) same = g.samples[i].id == reference[i].id;
    if (!same)
      throw ValidationError("group file " + g.name + ".jsonl does not hold the same cohort as " +
                            ds.groups.front().name + ".jsonl");
  }
  if (fs::is_regular_file(dir / "excluded.json")) {
    try {
      for (const auto& e : json::parse(read_text_file(dir / "excluded.json")))
        ds.excluded.push_back({e.at("id").get<std::string>(), e.at("group").get<std::string>(),
                               e.at("reason").get<std::string>()});
    } catch (const json::exception& e) {
      throw ValidationError("excluded.json: " + std::string(e.what()));
    }
  }
  return ds;
}

void cmd_generate(const RunConfig& config, std::ostream& log) {
  const Characteristic ch = resolve_characteristic(config);
  const fs::path dir = stage_dir(config);
  const Corpus corpus = load_input(config);
  const GroupedDataset ds = generate_groups(corpus, ch);
  write_grouped_dataset(ds, ch, dir);
  log << fmt::format("generate: {} groups x {} notes ({} excluded) -> {}\n", ds.groups.size(),
                     ds.cohort_size(), ds.excluded.size(), dir.string());
}

void cmd_predict(const RunConfig& config, std::ostream& log) {
  const int sources = config.endpoint.has_value() + config.predictions.has_value() +
                      config.mock.has_value();
  if (sources != 1)
    throw ValidationError("exactly one of --endpoint, --predictions, --mock is required");
  const fs::path dir = stage_dir(config);
  const GroupedDataset ds = read_grouped_dataset(dir);

  std::vector<PredictionRecord> records;
  std::string source;
  if (config.mock) {
    records = predict_mock(ds, load_mock_model(*config.mock));
    source = "mock " + config.mock->string();
  } else if (config.endpoint) {
    records = predict_remote(ds, endpoint_from(config));
    source = *config.endpoint;
  } else {
    records = load_predictions(*config.predictions);
    source = config.predictions->string();
    std::set<std::pair<std::string, std::string>> expected, given;
    for (const auto& g : ds.groups)
      for (const auto& s : g.samples) expected.emplace(g.name, s.id);
    for (const auto& r : records) given.emplace(r.group, r.sample_id);
    std::string missing, extra;
    std::size_t n_missing = 0, n_extra = 0;
    for (const auto& [g, id] : expected)
      if (!given.count({g, id})) missing += (n_missing++ ? " (" : "(") + g + ", " + id + ")";
    for (const auto& [g, id] : given)
      if (!expected.count({g, id})) extra += (n_extra++ ? " (" : "(") + g + ", " + id + ")";
    if (n_missing)
      throw ValidationError(fmt::format("{} predictions missing from {}: {}", n_missing, source, missing));
    if (n_extra)
      throw ValidationError(fmt::format("{} predictions in {} match no sample: {}", n_extra, source, extra));
    sort_records(records);
  }

  const fs::path pdir = dir / "predictions";
  ensure_dir(pdir);
  for (const auto& g : ds.groups) {
    std::vector<PredictionRecord> group_records;
    for (const auto& r : records)
      if (r.group == g.name) group_records.push_back(r);
    save_predictions(group_records, pdir / (g.name + ".jsonl"));
  }
  log << fmt::format("predict: {} records from {} -> {}\n", records.size(), source, pdir.string());
}

void cmd_analyze(const RunConfig& config, std::ostream& log) {
  const fs::path dir = stage_dir(config);
  require_file(dir / "characteristic.json", "generate");
  const Characteristic ch(characteristic_spec_from_json(read_text_file(dir / "characteristic.json")));
  std::vector<PredictionRecord> records;
  for (const auto& g : ch.group_names()) {
    const fs::path path = dir / "predictions" / (g + ".jsonl");
    require_file(path, "predict");
    auto part = load_predictions(path);
    for (auto& r : part) {
      if (r.group != g)
        throw ValidationError(path.string() + " holds a record of group \"" + r.group + "\"");
      records.push_back(std::move(r));
    }
  }
  const GroupMeans means = aggregate(records, ch.name(), ch.group_names());
  const DeviationMatrix dev = deviation(means);
  write_text_file(dir / "analysis.json", analysis_to_json(means, dev));
  log << fmt::format("analyze: {} groups x {} labels, cohort {} -> {}\n", means.means.group_count(),
                     means.means.label_count(), means.cohort_size, (dir / "analysis.json").string());

  if (is_age_axis(ch.group_names())) {
    std::optional<Corpus> corpus;
    if (config.input) {
      corpus = load_corpus(*config.input);
      if (!corpus->has_labels()) corpus.reset();
    }
    const auto curves = age_sweep(records, corpus ? &*corpus : nullptr);
    write_text_file(dir / "age_curves.json", age_curves_to_json(curves));
    log << fmt::format("analyze: {} age curves -> {}\n", curves.size(),
                       (dir / "age_curves.json").string());
  }
}

void cmd_report(const RunConfig& config, std::ostream& log) {
  const fs::path dir = stage_dir(config);
  require_file(dir / "analysis.json", "analyze");
  const AnalysisResult result = analysis_from_json(read_text_file(dir / "analysis.json"));

  emit_csv(result.means, dir / "means.csv");
  emit_csv(result.deviations, dir / "deviations.csv");

  HeatmapSpec spec;
  spec.top_k = config.top_k;
  spec.label_frequency = label_frequency(config);
  spec.title = "Influence of " + result.means.characteristic + " on predictions (deviation c)";
  emit_heatmap_svg(result.deviations, spec, dir / "heatmap.svg");

  std::vector<std::string> labels = config.table_labels;
  if (labels.empty()) labels = result.means.means.labels();
  std::set<std::string> used;
  for (const auto& label : labels) {
    result.means.means.label_index(label);  // unknown label -> ValidationError
    std::string stem = "table_" + slug(label);
    for (int k = 2; used.count(stem); ++k) stem = "table_" + slug(label) + "_" + std::to_string(k);
    used.insert(stem);
    emit_group_table(result.means, label, dir / (stem + ".md"), TableFormat::markdown);
    emit_group_table(result.means, label, dir / (stem + ".csv"), TableFormat::csv);
  }

  std::size_t files = 3 + 2 * labels.size();
  if (fs::is_regular_file(dir / "age_curves.json")) {
    emit_age_plot_svg(age_curves_from_json(read_text_file(dir / "age_curves.json")),
                      dir / "age_curves.svg");
    ++files;
  }
  log << fmt::format("report: {} files -> {}\n", files, dir.string());
}

void cmd_baseline(const RunConfig& config, std::ostream& log) {
  const Characteristic ch = resolve_characteristic(config);
  const fs::path dir = stage_dir(config);
  const Corpus corpus = load_input(config);
  const BaselineDistribution b = baseline_distribution(corpus, ch);
  ensure_dir(dir);
  write_text_file(dir / "baseline.json", baseline_to_json(b));
  emit_csv(b, dir / "baseline.csv");
  emit_counts_csv(b, dir / "baseline_counts.csv");
  if (b.deviations) {
    HeatmapSpec spec;
    spec.top_k = config.top_k;
    spec.label_frequency = corpus.label_frequencies();
    spec.title = "Training distribution by " + ch.name() + " (deviation of prevalence)";
    emit_heatmap_svg(*b.deviations, spec, dir / "baseline_heatmap.svg");
  }
  for (const auto& w : b.warnings) log << "baseline: warning: " << w << "\n";
  log << fmt::format("baseline: {} groups -> {}\n", b.prevalence.group_count(), dir.string());
}

void cmd_run(const RunConfig& config, std::ostream& log) {
  cmd_generate(config, log);
  cmd_predict(config, log);
  cmd_analyze(config, log);
  cmd_report(config, log);
  if (load_input(config).has_labels()) cmd_baseline(config, log);
}

}  // namespace noteprobe
