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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "noteprobe/analysis.hpp"
#include "noteprobe/error.hpp"

namespace noteprobe {

GroupLabelMatrix::GroupLabelMatrix(std::vector<std::string> groups,
                                   std::vector<std::string> labels, double fill)
    : groups_(std::move(groups)),
      labels_(std::move(labels)),
      values_(groups_.size() * labels_.size(), fill) {}

std::size_t GroupLabelMatrix::group_index(const std::string& group) const {
  auto it = std::find(groups_.begin(), groups_.end(), group);
  if (it == groups_.end()) throw ValidationError("unknown group \"" + group + "\"");
  return static_cast<std::size_t>(it - groups_.begin());
}

std::size_t GroupLabelMatrix::label_index(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ValidationError("unknown label \"" + label + "\"");
  return static_cast<std::size_t>(it - labels_.begin());
}

double GroupLabelMatrix::at(const std::string& group, const std::string& label) const {
  return at(group_index(group), label_index(label));
}

GroupMeans aggregate(const std::vector<PredictionRecord>& records,
                     const std::string& characteristic,
                     const std::vector<std::string>& group_order) {
  if (records.empty()) throw ValidationError("no prediction records to aggregate");
  validate_records(records);

  // group -> id -> record, so summation runs in sample-id order.
  std::map<std::string, std::map<std::string, const PredictionRecord*>> by_group;
  std::set<std::string> all_ids;
  for (const auto& r : records) {
    by_group[r.group][r.sample_id] = &r;
    all_ids.insert(r.sample_id);
  }

  std::vector<std::string> groups;
  if (group_order.empty()) {
    for (const auto& [g, _] : by_group) groups.push_back(g);
  } else {
    groups = group_order;
    std::set<std::string> listed(groups.begin(), groups.end());
    if (listed.size() != groups.size()) throw ValidationError("group order lists a group twice");
    for (const auto& [g, _] : by_group) {
      if (!listed.count(g)) throw ValidationError("records contain unexpected group \"" + g + "\"");
    }
  }

  std::vector<std::string> missing;
  for (const auto& g : groups) {
    const auto it = by_group.find(g);
    for (const auto& id : all_ids) {
      if (it == by_group.end() || !it->second.count(id)) missing.push_back("(" + g + ", " + id + ")");
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : " ") + m;
    throw ValidationError("incomplete cohort, " + std::to_string(missing.size()) +
                          " predictions missing: " + list);
  }

  std::vector<std::string> labels;
  for (const auto& [label, _] : records.front().probabilities) labels.push_back(label);

  GroupMeans out;
  out.characteristic = characteristic;
  out.cohort_size = all_ids.size();
  out.means = GroupLabelMatrix(groups, labels);
  const double n = static_cast<double>(all_ids.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& samples = by_group.at(groups[gi]);
    for (std::size_t li = 0; li < labels.size(); ++li) {
      double sum = 0.0;
      for (const auto& [id, r] : samples) sum += r->probabilities.at(labels[li]);
      out.means.at(gi, li) = sum / n;
    }
  }
  return out;
}

namespace {

// Neumaier-compensated sum of the values in ascending order; equal multisets
// give bit-identical results.
double stable_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0, compensation = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      compensation += (sum - t) + v;
    else
      compensation += (v - t) + sum;
    sum = t;
  }
  return sum + compensation;
}

}  // namespace

DeviationMatrix deviation(const std::string& characteristic, const GroupLabelMatrix& values) {
  const std::size_t g_count = values.group_count();
  if (g_count < 2)
    throw ValidationError("deviation needs at least two groups, got " + std::to_string(g_count));
  DeviationMatrix out;
  out.characteristic = characteristic;
  out.cells = GroupLabelMatrix(values.groups(), values.labels());
  const double others = static_cast<double>(g_count - 1);
  std::vector<double> rest;
  for (std::size_t li = 0; li < values.label_count(); ++li) {
    for (std::size_t i = 0; i < g_count; ++i) {
      rest.clear();
      for (std::size_t j = 0; j < g_count; ++j)
        if (j != i) rest.push_back(values.at(j, li));
      out.cells.at(i, li) = values.at(i, li) - stable_sum(rest) / others;
    }
  }
  return out;
}

DeviationMatrix deviation(const GroupMeans& means) {
  return deviation(means.characteristic, means.means);
}

BaselineDistribution baseline_distribution(const Corpus& corpus,
                                           const Characteristic& characteristic) {
  if (!corpus.has_labels())
    throw ValidationError("baseline needs a labeled corpus; no note carries labels");

  const TestGroup* absent = characteristic.absent_marker_group();
  const std::string no_mention = absent ? absent->name : "no_mention";
  std::vector<std::string> order = characteristic.group_names();
  if (!absent) order.push_back(no_mention);

  BaselineDistribution out;
  out.characteristic = characteristic.name();
  const auto& labels = corpus.label_vocabulary();
  std::map<std::string, std::size_t> counts;
  std::map<std::string, std::map<std::string, std::size_t>> label_counts;
  std::size_t ambiguous = 0, unlabeled = 0;
  for (const auto& note : corpus.notes()) {
    if (!note.labels) {
      ++unlabeled;
      continue;
    }
    const auto groups = resolve_groups(detect(note.text, characteristic));
    if (groups.size() > 1) {
      ++ambiguous;
      continue;
    }
    const std::string& group = groups.empty() ? no_mention : *groups.begin();
    ++counts[group];
    for (const auto& label : *note.labels) ++label_counts[group][label];
  }
  if (unlabeled)
    out.warnings.push_back(std::to_string(unlabeled) + " notes without labels were skipped");
  if (ambiguous)
    out.warnings.push_back(std::to_string(ambiguous) +
                           " notes mentioning several groups were skipped");

  std::vector<std::string> present;
  for (const auto& g : order) {
    if (counts[g] == 0) {
      out.warnings.push_back("group \"" + g + "\" has no notes and was left out");
      continue;
    }
    present.push_back(g);
  }
  if (present.empty()) throw ValidationError("baseline: no labeled note could be assigned");

  out.prevalence = GroupLabelMatrix(present, labels);
  for (std::size_t gi = 0; gi < present.size(); ++gi) {
    const auto& g = present[gi];
    out.group_counts[g] = counts[g];
    for (std::size_t li = 0; li < labels.size(); ++li) {
      const std::size_t c = label_counts[g][labels[li]];
      out.label_counts[g][labels[li]] = c;
      out.prevalence.at(gi, li) = static_cast<double>(c) / static_cast<double>(counts[g]);
    }
  }
  if (present.size() >= 2) {
    out.deviations = deviation(out.characteristic, out.prevalence);
  } else {
    out.warnings.emplace_back("fewer than two groups have notes; no deviations computed");
  }
  return out;
}

std::vector<AgeCurve> age_sweep(const std::vector<PredictionRecord>& records,
                                const Corpus* corpus) {
  const auto ages = age_group_names();
  std::set<std::string> present;
  for (const auto& r : records) present.insert(r.group);
  std::string missing;
  for (const auto& a : ages)
    if (!present.count(a)) missing += (missing.empty() ? "" : ", ") + a;
  if (!missing.empty()) throw ValidationError("age sweep is missing age groups: " + missing);

  const GroupMeans means = aggregate(records, "age", ages);

  // Training prevalence per exact age bucket.
  std::map<std::string, std::size_t> age_counts;
  std::map<std::string, std::map<std::string, std::size_t>> age_label_counts;
  if (corpus) {
    if (!corpus->has_labels())
      throw ValidationError("prevalence overlay needs a labeled corpus");
    const Characteristic age(age_spec());
    for (const auto& note : corpus->notes()) {
      if (!note.labels) continue;
      const auto groups = resolve_groups(detect(note.text, age));
      if (groups.size() != 1) continue;
      ++age_counts[*groups.begin()];
      for (const auto& label : *note.labels) ++age_label_counts[*groups.begin()][label];
    }
  }

  std::vector<AgeCurve> curves;
  for (std::size_t li = 0; li < means.means.label_count(); ++li) {
    AgeCurve curve;
    curve.label = means.means.labels()[li];
    curve.has_overlay = corpus != nullptr;
    for (std::size_t gi = 0; gi < ages.size(); ++gi) {
      AgeCurve::Point p{ages[gi], means.means.at(gi, li), std::nullopt};
      if (corpus && age_counts[ages[gi]] > 0) {
        p.prevalence = static_cast<double>(age_label_counts[ages[gi]][curve.label]) /
                       static_cast<double>(age_counts[ages[gi]]);
      }
      curve.points.push_back(std::move(p));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace noteprobe
