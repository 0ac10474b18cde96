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

#include <nlohmann/json.hpp>

#include "noteprobe/analysis.hpp"
#include "noteprobe/error.hpp"

namespace noteprobe {

using nlohmann::ordered_json;

namespace {

ordered_json matrix_to_json(const GroupLabelMatrix& m) {
  ordered_json j = ordered_json::object();
  for (std::size_t g = 0; g < m.group_count(); ++g) {
    ordered_json row = ordered_json::object();
    for (std::size_t l = 0; l < m.label_count(); ++l) row[m.labels()[l]] = m.at(g, l);
    j[m.groups()[g]] = std::move(row);
  }
  return j;
}

GroupLabelMatrix matrix_from_json(const ordered_json& j, const std::vector<std::string>& groups,
                                  const std::vector<std::string>& labels) {
  GroupLabelMatrix m(groups, labels);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t l = 0; l < labels.size(); ++l)
      m.at(g, l) = j.at(groups[g]).at(labels[l]).get<double>();
  return m;
}

template <typename F>
auto parse_or_throw(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

}  // namespace

std::string analysis_to_json(const GroupMeans& means, const DeviationMatrix& deviations) {
  ordered_json j;
  j["characteristic"] = means.characteristic;
  j["cohort_size"] = means.cohort_size;
  j["groups"] = means.means.groups();
  j["labels"] = means.means.labels();
  j["means"] = matrix_to_json(means.means);
  j["deviations"] = matrix_to_json(deviations.cells);
  return j.dump(2) + "\n";
}

AnalysisResult analysis_from_json(const std::string& json_text) {
  return parse_or_throw("analysis file", [&] {
    const auto j = ordered_json::parse(json_text);
    AnalysisResult r;
    const auto groups = j.at("groups").get<std::vector<std::string>>();
    const auto labels = j.at("labels").get<std::vector<std::string>>();
    r.means.characteristic = j.at("characteristic").get<std::string>();
    r.means.cohort_size = j.at("cohort_size").get<std::size_t>();
    r.means.means = matrix_from_json(j.at("means"), groups, labels);
    r.deviations.characteristic = r.means.characteristic;
    r.deviations.cells = matrix_from_json(j.at("deviations"), groups, labels);
    return r;
  });
}

std::string baseline_to_json(const BaselineDistribution& b) {
  std::size_t assigned = 0;
  for (const auto& [_, n] : b.group_counts) assigned += n;
  ordered_json j;
  j["characteristic"] = b.characteristic;
  j["cohort_size"] = assigned;
  j["groups"] = b.prevalence.groups();
  j["labels"] = b.prevalence.labels();
  j["means"] = matrix_to_json(b.prevalence);
  j["deviations"] = b.deviations ? matrix_to_json(b.deviations->cells) : ordered_json(nullptr);
  ordered_json group_counts = ordered_json::object();
  ordered_json counts = ordered_json::object();
  for (const auto& g : b.prevalence.groups()) {
    group_counts[g] = b.group_counts.at(g);
    ordered_json row = ordered_json::object();
    for (const auto& l : b.prevalence.labels()) row[l] = b.label_counts.at(g).at(l);
    counts[g] = std::move(row);
  }
  j["group_counts"] = std::move(group_counts);
  j["counts"] = std::move(counts);
  j["warnings"] = b.warnings;
  return j.dump(2) + "\n";
}

BaselineDistribution baseline_from_json(const std::string& json_text) {
  return parse_or_throw("baseline file", [&] {
    const auto j = ordered_json::parse(json_text);
    BaselineDistribution b;
    const auto groups = j.at("groups").get<std::vector<std::string>>();
    const auto labels = j.at("labels").get<std::vector<std::string>>();
    b.characteristic = j.at("characteristic").get<std::string>();
    b.prevalence = matrix_from_json(j.at("means"), groups, labels);
    if (!j.at("deviations").is_null()) {
      b.deviations = DeviationMatrix{b.characteristic,
                                     matrix_from_json(j.at("deviations"), groups, labels)};
    }
    for (const auto& g : groups) {
      b.group_counts[g] = j.at("group_counts").at(g).get<std::size_t>();
      for (const auto& l : labels)
        b.label_counts[g][l] = j.at("counts").at(g).at(l).get<std::size_t>();
    }
    b.warnings = j.value("warnings", std::vector<std::string>{});
    return b;
  });
}

std::string age_curves_to_json(const std::vector<AgeCurve>& curves) {
  ordered_json j;
  j["ages"] = ordered_json::array();
  if (!curves.empty())
    for (const auto& p : curves.front().points) j["ages"].push_back(p.age);
  j["curves"] = ordered_json::array();
  for (const auto& c : curves) {
    ordered_json jc;
    jc["label"] = c.label;
    jc["means"] = ordered_json::array();
    for (const auto& p : c.points) jc["means"].push_back(p.mean);
    if (c.has_overlay) {
      jc["prevalence"] = ordered_json::array();
      for (const auto& p : c.points)
        jc["prevalence"].push_back(p.prevalence ? ordered_json(*p.prevalence) : ordered_json(nullptr));
    }
    j["curves"].push_back(std::move(jc));
  }
  return j.dump(2) + "\n";
}

std::vector<AgeCurve> age_curves_from_json(const std::string& json_text) {
  return parse_or_throw("age curve file", [&] {
    const auto j = ordered_json::parse(json_text);
    const auto ages = j.at("ages").get<std::vector<std::string>>();
    std::vector<AgeCurve> curves;
    for (const auto& jc : j.at("curves")) {
      AgeCurve c;
      c.label = jc.at("label").get<std::string>();
      const auto& means = jc.at("means");
      if (means.size() != ages.size())
        throw ValidationError("age curve \"" + c.label + "\" does not match the age axis");
      c.has_overlay = jc.contains("prevalence");
      for (std::size_t i = 0; i < ages.size(); ++i) {
        AgeCurve::Point p{ages[i], means.at(i).get<double>(), std::nullopt};
        if (c.has_overlay && !jc.at("prevalence").at(i).is_null())
          p.prevalence = jc.at("prevalence").at(i).get<double>();
        c.points.push_back(std::move(p));
      }
      curves.push_back(std::move(c));
    }
    return curves;
  });
}

}  // namespace noteprobe
