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

#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "noteprobe/analysis.hpp"
#include "noteprobe/corpus.hpp"
#include "noteprobe/error.hpp"
#include "noteprobe/inference.hpp"
#include "noteprobe/perturb.hpp"
#include "noteprobe/pipeline.hpp"
#include "noteprobe/report.hpp"

namespace py = pybind11;
using namespace noteprobe;

namespace {

std::vector<std::vector<double>> matrix_values(const GroupLabelMatrix& m) {
  std::vector<std::vector<double>> rows(m.group_count(), std::vector<double>(m.label_count()));
  for (std::size_t g = 0; g < m.group_count(); ++g)
    for (std::size_t l = 0; l < m.label_count(); ++l) rows[g][l] = m.at(g, l);
  return rows;
}

GroupLabelMatrix matrix_from(const std::vector<std::string>& groups,
                             const std::vector<std::string>& labels,
                             const std::vector<std::vector<double>>& values) {
  GroupLabelMatrix m(groups, labels);
  if (values.size() != groups.size())
    throw ValidationError("values must have one row per group");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (values[g].size() != labels.size())
      throw ValidationError("values row " + std::to_string(g) + " must have one entry per label");
    for (std::size_t l = 0; l < labels.size(); ++l) m.at(g, l) = values[g][l];
  }
  return m;
}

ModelEndpoint make_endpoint(const std::string& url, int timeout_ms, std::size_t max_batch,
                            std::size_t max_parallel, int retries,
                            std::optional<std::string> bearer_token) {
  ModelEndpoint e;
  e.base_url = url;
  e.timeout_ms = timeout_ms;
  e.max_batch = max_batch;
  e.max_parallel = max_parallel;
  e.retries = retries;
  e.bearer_token = std::move(bearer_token);
  return e;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Behavioral testing of clinical outcome prediction models";

  auto error = py::register_exception<Error>(m, "Error");
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", error);
  py::register_exception<ParseError>(m, "ParseError", validation);
  py::register_exception<IoError>(m, "IoError", error);
  py::register_exception<ProtocolError>(m, "ProtocolError", error);
  py::register_exception<TransportError>(m, "TransportError", error);

  // Corpus

  py::class_<PatientNote>(m, "PatientNote")
      .def(py::init([](std::string id, std::string text,
                       std::optional<std::vector<std::string>> labels) {
             return PatientNote{std::move(id), std::move(text), std::move(labels)};
           }),
           py::arg("id"), py::arg("text"), py::arg("labels") = py::none())
      .def_readwrite("id", &PatientNote::id)
      .def_readwrite("text", &PatientNote::text)
      .def_readwrite("labels", &PatientNote::labels)
      .def("__eq__", [](const PatientNote& a, const PatientNote& b) { return a == b; })
      .def("__repr__", [](const PatientNote& n) { return "<PatientNote " + n.id + ">"; });

  py::class_<Corpus>(m, "Corpus")
      .def(py::init<std::vector<PatientNote>, std::optional<std::vector<std::string>>>(),
           py::arg("notes"), py::arg("label_vocabulary") = py::none())
      .def_property_readonly("notes", &Corpus::notes)
      .def_property_readonly("label_vocabulary", &Corpus::label_vocabulary)
      .def("has_labels", &Corpus::has_labels)
      .def("label_frequencies", &Corpus::label_frequencies)
      .def("__len__", &Corpus::size);

  m.def("load_corpus", &load_corpus, py::arg("path"), py::arg("vocabulary_path") = py::none());
  m.def("save_corpus", &save_corpus, py::arg("corpus"), py::arg("path"));
  m.def("default_profile_json", [] { return profile_to_json(SyntheticProfile::defaults()); });
  m.def(
      "synthetic_corpus",
      [](std::uint64_t seed, std::size_t n, std::optional<std::string> profile_json) {
        const SyntheticProfile profile =
            profile_json ? profile_from_json(*profile_json) : SyntheticProfile::defaults();
        return generate_synthetic_corpus(seed, n, profile);
      },
      py::arg("seed"), py::arg("n"), py::arg("profile_json") = py::none(),
      "Deterministic synthetic admission notes; `profile_json` overrides the default profile.");

  // Perturbation

  py::enum_<MentionKind>(m, "MentionKind")
      .value("noun_phrase", MentionKind::noun_phrase)
      .value("pronoun", MentionKind::pronoun)
      .value("age_numeral", MentionKind::age_numeral)
      .value("deid_token", MentionKind::deid_token);
  py::enum_<AlterOp>(m, "AlterOp")
      .value("change", AlterOp::change)
      .value("add", AlterOp::add)
      .value("keep", AlterOp::keep);

  py::class_<MentionSpan>(m, "MentionSpan")
      .def_readonly("start", &MentionSpan::start)
      .def_readonly("end", &MentionSpan::end)
      .def_readonly("group", &MentionSpan::group)
      .def_readonly("kind", &MentionSpan::kind)
      .def("__repr__", [](const MentionSpan& s) {
        return "<MentionSpan " + s.group + " [" + std::to_string(s.start) + ", " +
               std::to_string(s.end) + ")>";
      });

  py::class_<Characteristic>(m, "Characteristic")
      .def_static("builtin", [](const std::string& name) { return Characteristic(builtin_spec(name)); },
                  py::arg("name"))
      .def_static("age", [](const std::string& token) { return Characteristic(age_spec(token)); },
                  py::arg("over90_token") = std::string(kDefaultOver90Token))
      .def_static("from_json",
                  [](const std::string& text) { return Characteristic(characteristic_spec_from_json(text)); },
                  py::arg("json_text"))
      .def("to_json", [](const Characteristic& c) { return characteristic_spec_to_json(c.spec()); })
      .def_property_readonly("name", &Characteristic::name)
      .def_property_readonly("group_names", &Characteristic::group_names);
  m.def("builtin_characteristics", &builtin_characteristic_names);

  m.def("detect", py::overload_cast<const std::string&, const Characteristic&>(&detect),
        py::arg("text"), py::arg("characteristic"));
  m.def("resolve_groups", &resolve_groups, py::arg("spans"));
  m.def(
      "alter",
      [](const std::string& text, const Characteristic& ch, const std::string& target) -> py::object {
        const AlterResult result = alter(text, ch, target);
        if (const auto* excluded = std::get_if<CohortExclusion>(&result))
          return py::dict(py::arg("excluded") = true, py::arg("reason") = excluded->reason);
        const auto& a = std::get<Alteration>(result);
        return py::dict(py::arg("excluded") = false, py::arg("text") = a.text,
                        py::arg("op") = std::string(to_string(a.op)));
      },
      py::arg("text"), py::arg("characteristic"), py::arg("target"),
      "Returns {'excluded': False, 'text', 'op'} or {'excluded': True, 'reason'}.");

  py::class_<AlteredSample>(m, "AlteredSample")
      .def_readonly("id", &AlteredSample::id)
      .def_readonly("text", &AlteredSample::text)
      .def_readonly("op", &AlteredSample::op);
  py::class_<ExcludedSample>(m, "ExcludedSample")
      .def_readonly("id", &ExcludedSample::id)
      .def_readonly("group", &ExcludedSample::group)
      .def_readonly("reason", &ExcludedSample::reason);
  py::class_<GroupedDataset::Group>(m, "TestGroupData")
      .def_readonly("name", &GroupedDataset::Group::name)
      .def_readonly("samples", &GroupedDataset::Group::samples);
  py::class_<GroupedDataset>(m, "GroupedDataset")
      .def_readonly("characteristic", &GroupedDataset::characteristic)
      .def_readonly("groups", &GroupedDataset::groups)
      .def_readonly("excluded", &GroupedDataset::excluded)
      .def_property_readonly("cohort_size", &GroupedDataset::cohort_size)
      .def("group", &GroupedDataset::group, py::return_value_policy::reference_internal);

  m.def("generate_groups", &generate_groups, py::arg("corpus"), py::arg("characteristic"),
        py::call_guard<py::gil_scoped_release>());

  // Inference

  py::class_<PredictionRecord>(m, "PredictionRecord")
      .def(py::init([](std::string id, std::string group, std::map<std::string, double> p) {
             return PredictionRecord{std::move(id), std::move(group), std::move(p)};
           }),
           py::arg("sample_id"), py::arg("group"), py::arg("probabilities"))
      .def_readwrite("sample_id", &PredictionRecord::sample_id)
      .def_readwrite("group", &PredictionRecord::group)
      .def_readwrite("probabilities", &PredictionRecord::probabilities)
      .def("__eq__", [](const PredictionRecord& a, const PredictionRecord& b) { return a == b; });

  m.def("load_predictions", &load_predictions, py::arg("path"));
  m.def("save_predictions", &save_predictions, py::arg("records"), py::arg("path"));

  py::class_<MockLexicalModel>(m, "MockModel")
      .def_static("from_json", &mock_model_from_json, py::arg("json_text"))
      .def("to_json", [](const MockLexicalModel& model) { return mock_model_to_json(model); })
      .def_property_readonly("labels", &MockLexicalModel::labels)
      .def("predict", &MockLexicalModel::predict, py::arg("text"));
  m.def("predict_mock", &predict_mock, py::arg("dataset"), py::arg("model"));

  py::class_<ModelInfo>(m, "ModelInfo")
      .def_readonly("model_id", &ModelInfo::model_id)
      .def_readonly("task", &ModelInfo::task)
      .def_readonly("labels", &ModelInfo::labels);
  m.def(
      "fetch_model_info",
      [](const std::string& url, int timeout_ms, std::optional<std::string> token) {
        py::gil_scoped_release release;
        return fetch_model_info(make_endpoint(url, timeout_ms, 16, 1, 0, std::move(token)));
      },
      py::arg("url"), py::arg("timeout_ms") = 30000, py::arg("bearer_token") = py::none());
  m.def(
      "predict_remote",
      [](const GroupedDataset& ds, const std::string& url, int timeout_ms, std::size_t max_batch,
         std::size_t max_parallel, int retries, std::optional<std::string> token) {
        const ModelEndpoint e =
            make_endpoint(url, timeout_ms, max_batch, max_parallel, retries, std::move(token));
        py::gil_scoped_release release;
        return predict_remote(ds, e);
      },
      py::arg("dataset"), py::arg("url"), py::arg("timeout_ms") = 30000, py::arg("max_batch") = 16,
      py::arg("max_parallel") = 4, py::arg("retries") = 3, py::arg("bearer_token") = py::none());
  m.def(
      "check_conformance",
      [](const std::string& url, int timeout_ms) {
        ConformanceReport report;
        {
          py::gil_scoped_release release;
          report = check_conformance(make_endpoint(url, timeout_ms, 16, 1, 0, std::nullopt));
        }
        py::list checks;
        for (const auto& c : report.checks)
          checks.append(py::dict(py::arg("name") = c.name, py::arg("passed") = c.passed,
                                 py::arg("detail") = c.detail));
        return checks;
      },
      py::arg("url"), py::arg("timeout_ms") = 30000);

  // Analysis

  py::class_<GroupLabelMatrix>(m, "GroupLabelMatrix")
      .def(py::init(&matrix_from), py::arg("groups"), py::arg("labels"), py::arg("values"))
      .def_property_readonly("groups", &GroupLabelMatrix::groups)
      .def_property_readonly("labels", &GroupLabelMatrix::labels)
      .def("at", py::overload_cast<const std::string&, const std::string&>(&GroupLabelMatrix::at, py::const_),
           py::arg("group"), py::arg("label"))
      .def("values", &matrix_values, "Row-major values, one row per group.");

  py::class_<GroupMeans>(m, "GroupMeans")
      .def_readonly("characteristic", &GroupMeans::characteristic)
      .def_readonly("means", &GroupMeans::means)
      .def_readonly("cohort_size", &GroupMeans::cohort_size);
  py::class_<DeviationMatrix>(m, "DeviationMatrix")
      .def_readonly("characteristic", &DeviationMatrix::characteristic)
      .def_readonly("cells", &DeviationMatrix::cells);
  py::class_<BaselineDistribution>(m, "BaselineDistribution")
      .def_readonly("characteristic", &BaselineDistribution::characteristic)
      .def_readonly("prevalence", &BaselineDistribution::prevalence)
      .def_readonly("group_counts", &BaselineDistribution::group_counts)
      .def_readonly("label_counts", &BaselineDistribution::label_counts)
      .def_readonly("deviations", &BaselineDistribution::deviations)
      .def_readonly("warnings", &BaselineDistribution::warnings);
  py::class_<AgeCurve::Point>(m, "AgeCurvePoint")
      .def_readonly("age", &AgeCurve::Point::age)
      .def_readonly("mean", &AgeCurve::Point::mean)
      .def_readonly("prevalence", &AgeCurve::Point::prevalence);
  py::class_<AgeCurve>(m, "AgeCurve")
      .def_readonly("label", &AgeCurve::label)
      .def_readonly("points", &AgeCurve::points)
      .def_readonly("has_overlay", &AgeCurve::has_overlay);

  m.def("aggregate", &aggregate, py::arg("records"), py::arg("characteristic") = "",
        py::arg("group_order") = std::vector<std::string>{});
  m.def("deviation", py::overload_cast<const GroupMeans&>(&deviation), py::arg("means"));
  m.def(
      "deviation_of",
      [](const std::vector<std::string>& groups, const std::vector<std::string>& labels,
         const std::vector<std::vector<double>>& values) {
        return deviation("", matrix_from(groups, labels, values));
      },
      py::arg("groups"), py::arg("labels"), py::arg("values"),
      "Deviation of a plain (group x label) table of means.");
  m.def("baseline_distribution", &baseline_distribution, py::arg("corpus"), py::arg("characteristic"));
  m.def(
      "age_sweep",
      [](const std::vector<PredictionRecord>& records, const Corpus* corpus) {
        return age_sweep(records, corpus);
      },
      py::arg("records"), py::arg("corpus") = nullptr);
  m.def(
      "auroc",
      [](const std::vector<double>& scores, const std::vector<bool>& labels) {
        if (scores.size() != labels.size())
          throw ValidationError("scores and labels differ in length");
        std::vector<ScoredLabel> s(scores.size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = {scores[i], labels[i]};
        return auroc(s);
      },
      py::arg("scores"), py::arg("labels"));

  m.def("analysis_to_json", &analysis_to_json, py::arg("means"), py::arg("deviations"));
  m.def("baseline_to_json", &baseline_to_json, py::arg("baseline"));
  m.def("age_curves_to_json", &age_curves_to_json, py::arg("curves"));

  // Reports

  m.def("to_csv", &to_csv, py::arg("matrix"));
  m.def(
      "render_heatmap_svg",
      [](const DeviationMatrix& d, std::size_t top_k, std::map<std::string, std::size_t> freq,
         std::string title) {
        HeatmapSpec spec;
        spec.top_k = top_k;
        spec.label_frequency = std::move(freq);
        spec.title = std::move(title);
        return render_heatmap_svg(d, spec);
      },
      py::arg("deviations"), py::arg("top_k") = 24,
      py::arg("label_frequency") = std::map<std::string, std::size_t>{}, py::arg("title") = "");
  m.def(
      "render_group_table",
      [](const GroupMeans& means, const std::string& label, const std::string& format) {
        if (format != "markdown" && format != "csv")
          throw ValidationError("format must be \"markdown\" or \"csv\"");
        return render_group_table(means, label,
                                  format == "csv" ? TableFormat::csv : TableFormat::markdown);
      },
      py::arg("means"), py::arg("label"), py::arg("format") = "markdown");
  m.def("render_age_plot_svg", &render_age_plot_svg, py::arg("curves"));
  m.def(
      "diverging_color", [](double t) { return to_hex(diverging_color(t)); }, py::arg("t"));

  // Pipeline

  m.attr("SELFTEST_SEED") = kSelftestSeed;
  m.def(
      "run_selftest",
      [](std::uint64_t seed, std::size_t n) {
        SelftestReport report;
        {
          py::gil_scoped_release release;
          report = run_selftest(seed, n);
        }
        py::list checks;
        for (const auto& c : report.checks)
          checks.append(py::dict(py::arg("name") = c.name, py::arg("expected") = c.expected,
                                 py::arg("actual") = c.actual, py::arg("tolerance") = c.tolerance,
                                 py::arg("passed") = c.passed, py::arg("detail") = c.detail));
        return py::make_tuple(report.passed(), checks, format_selftest(report));
      },
      py::arg("seed") = kSelftestSeed, py::arg("n") = 2000,
      "Returns (passed, checks, printable table).");
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"noteprobe"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI command in process; returns (exit_code, stdout, stderr).");
}
