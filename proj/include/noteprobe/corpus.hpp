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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace noteprobe {

// One admission note. `labels` is absent for unlabeled notes; an empty
// vector means "labeled, no positive outcome".
struct PatientNote {
  std::string id;
  std::string text;
  std::optional<std::vector<std::string>> labels;

  bool has_label(const std::string& label) const;

  friend bool operator==(const PatientNote&, const PatientNote&) = default;
};

// Ordered, validated collection of notes. Immutable after construction.
class Corpus {
 public:
  Corpus() = default;

  // Validates ids (non-empty, unique), texts (non-empty) and label
  // membership. Without an explicit vocabulary the sorted union of all note
  // labels is used.
  explicit Corpus(std::vector<PatientNote> notes,
                  std::optional<std::vector<std::string>> label_vocabulary =
                      std::nullopt);

  const std::vector<PatientNote>& notes() const noexcept { return notes_; }
  const std::vector<std::string>& label_vocabulary() const noexcept {
    return label_vocabulary_;
  }
  std::size_t size() const noexcept { return notes_.size(); }
  bool empty() const noexcept { return notes_.empty(); }

  // True when at least one note carries a `labels` field.
  bool has_labels() const;

  // Number of notes carrying each vocabulary label.
  std::map<std::string, std::size_t> label_frequencies() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<PatientNote> notes_;
  std::vector<std::string> label_vocabulary_;
};

// JSONL, one object per line: {"id": str, "text": str, "labels": [str]?}.
// `vocabulary_path`, when given, is a JSON array of label strings.
Corpus load_corpus(const std::filesystem::path& path,
                   const std::optional<std::filesystem::path>& vocabulary_path =
                       std::nullopt);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Parameters of the synthetic admission-note generator.
//
// Every note gets one header sentence "<age phrase> [<ethnicity>] <gender
// term> <verb> with <complaint>." followed by templated history sentences
// that refer to the patient only through pronouns. Labels are Bernoulli draws
// whose rate is looked up, per label, in this order: the note's gender group,
// its ethnicity group ("no_mention" when none was planted), "over90" for
// de-identified ages, and finally "default".
struct SyntheticProfile {
  struct LabelRates {
    double default_rate = 0.0;
    std::map<std::string, double> by_group;
  };

  std::vector<std::pair<std::string, double>> gender_weights = {
      {"female", 0.5}, {"male", 0.5}, {"transgender", 0.0}};
  double ethnicity_mention_rate = 0.3;
  std::vector<std::pair<std::string, double>> ethnicity_weights = {
      {"white", 0.45}, {"african_american", 0.25}, {"hispanic", 0.15},
      {"asian", 0.15}};
  int age_min = 18;
  int age_max = 89;
  double over90_rate = 0.03;
  // Iteration order of this map is the generated label vocabulary.
  std::map<std::string, LabelRates> labels;

  // Defaults use a handful of discharge-diagnosis groups plus "mortality".
  static SyntheticProfile defaults();

  void validate() const;
};

SyntheticProfile profile_from_json(const std::string& json_text);
SyntheticProfile load_profile(const std::filesystem::path& path);
std::string profile_to_json(const SyntheticProfile& profile);

// Pure function of (seed, n, profile). Ids are "syn-<zero padded index>" so
// lexicographic and numeric order agree.
Corpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n,
                                 const SyntheticProfile& profile);

}  // namespace noteprobe
