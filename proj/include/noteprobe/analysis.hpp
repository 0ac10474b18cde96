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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "noteprobe/corpus.hpp"
#include "noteprobe/inference.hpp"
#include "noteprobe/perturb.hpp"

namespace noteprobe {

// Dense (group x label) table of doubles with name lookup.
class GroupLabelMatrix {
 public:
  GroupLabelMatrix() = default;
  GroupLabelMatrix(std::vector<std::string> groups,
                   std::vector<std::string> labels, double fill = 0.0);

  const std::vector<std::string>& groups() const noexcept { return groups_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t group_count() const noexcept { return groups_.size(); }
  std::size_t label_count() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& at(std::size_t group, std::size_t label) {
    return values_[group * labels_.size() + label];
  }
  double at(std::size_t group, std::size_t label) const {
    return values_[group * labels_.size() + label];
  }
  // Throws ValidationError for unknown names.
  double at(const std::string& group, const std::string& label) const;
  std::size_t group_index(const std::string& group) const;
  std::size_t label_index(const std::string& label) const;

  friend bool operator==(const GroupLabelMatrix&,
                         const GroupLabelMatrix&) = default;

 private:
  std::vector<std::string> groups_;
  std::vector<std::string> labels_;
  std::vector<double> values_;
};

struct GroupMeans {
  std::string characteristic;
  GroupLabelMatrix means;
  std::size_t cohort_size = 0;
};

// c = p_i - mean of the other groups' p, per label.
struct DeviationMatrix {
  std::string characteristic;
  GroupLabelMatrix cells;

  std::size_t group_count() const noexcept { return cells.group_count(); }
};

struct BaselineDistribution {
  std::string characteristic;
  GroupLabelMatrix prevalence;
  std::map<std::string, std::size_t> group_counts;
  // (group, label) -> number of notes of the group carrying the label
  std::map<std::string, std::map<std::string, std::size_t>> label_counts;
  // Deviation of prevalences; absent when fewer than two groups have notes.
  std::optional<DeviationMatrix> deviations;
  std::vector<std::string> warnings;
};

struct AgeCurve {
  struct Point {
    std::string age;  // "18".."89" or "over90"
    double mean = 0.0;
    // Training prevalence at this exact age; nullopt when no note has it.
    std::optional<double> prevalence;
  };

  std::string label;
  std::vector<Point> points;
  bool has_overlay = false;
};

// Arithmetic mean per (group, label), summed in sample-id order. Groups are
// ordered by `group_order` when given (every group must be listed), else
// lexicographically. Throws ValidationError on incomplete cohorts.
GroupMeans aggregate(const std::vector<PredictionRecord>& records,
                     const std::string& characteristic = "",
                     const std::vector<std::string>& group_order = {});

// Throws ValidationError when fewer than two groups are present.
DeviationMatrix deviation(const GroupMeans& means);
DeviationMatrix deviation(const std::string& characteristic,
                          const GroupLabelMatrix& values);

// Groups are assigned by detection on the unaltered notes; notes without a
// mention land in the absent-marker group when the characteristic has one,
// else in "no_mention". Notes resolving to several groups are skipped with a
// warning. Empty groups are dropped with a warning.
BaselineDistribution baseline_distribution(const Corpus& corpus,
                                           const Characteristic& characteristic);

// Curves over "18".."89", "over90" for every label. With a labeled corpus
// the training prevalence per exact age is overlaid.
std::vector<AgeCurve> age_sweep(const std::vector<PredictionRecord>& records,
                                const Corpus* corpus = nullptr);

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
};

// Mann-Whitney formulation with ties counted one half. Throws
// ValidationError unless both classes are present.
double auroc(const std::vector<ScoredLabel>& scores);

// Analysis result file:
//   {"characteristic", "cohort_size", "groups", "labels",
//    "means": {group: {label: p}}, "deviations": {group: {label: c}}}
// The baseline file mirrors it: "means" holds the prevalences, "deviations"
// is null below two groups, and "group_counts", "counts" and "warnings" are
// added.
struct AnalysisResult {
  GroupMeans means;
  DeviationMatrix deviations;
};

std::string analysis_to_json(const GroupMeans& means,
                             const DeviationMatrix& deviations);
AnalysisResult analysis_from_json(const std::string& json_text);

std::string baseline_to_json(const BaselineDistribution& baseline);
BaselineDistribution baseline_from_json(const std::string& json_text);

std::string age_curves_to_json(const std::vector<AgeCurve>& curves);
std::vector<AgeCurve> age_curves_from_json(const std::string& json_text);

}  // namespace noteprobe
