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
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "noteprobe/corpus.hpp"

namespace noteprobe {

enum class MentionKind { noun_phrase, pronoun, age_numeral, deid_token };
enum class AlterOp { change, add, keep };

const char* to_string(MentionKind kind);
const char* to_string(AlterOp op);
AlterOp alter_op_from_string(const std::string& name);

// One manifestation of a characteristic ("female", "73", "no_mention").
struct TestGroup {
  std::string name;
  // Perl-syntax patterns, matched case-insensitively. `(?-i:...)` switches
  // case sensitivity back on locally (used for the single-letter forms).
  std::vector<std::string> patterns;
  std::string canonical;
  // Foreign token -> this group's token. "a/b" picks `a` before a nominal
  // and `b` otherwise. The tokens appearing as values are owned by this group
  // and detected note-wide.
  std::map<std::string, std::string> pronouns;
  // Lowercased foreign surface form -> this group's form ("woman" -> "man").
  std::map<std::string, std::string> swaps;
  bool absent_marker = false;
  // Canonical is a modifier placed in front of the existing noun.
  bool modifier = false;
  MentionKind kind = MentionKind::noun_phrase;

  friend bool operator==(const TestGroup&, const TestGroup&) = default;
};

// Plain-data description of a characteristic; see `Characteristic` for the
// validated, compiled form.
struct CharacteristicSpec {
  std::string name;
  std::vector<TestGroup> groups;
  std::size_t detection_window_chars = 600;
  // Pattern whose match (or its `insert` named group, when present) marks
  // where a missing mention is inserted. Empty: insertion never possible.
  std::string insertion_anchor;
  // Only `exclude_cohort` exists.
  std::string fallback_policy = "exclude_cohort";

  friend bool operator==(const CharacteristicSpec&,
                         const CharacteristicSpec&) = default;
};

CharacteristicSpec characteristic_spec_from_json(const std::string& json_text);
std::string characteristic_spec_to_json(const CharacteristicSpec& spec);

struct MentionSpan {
  std::size_t start = 0;  // byte offsets, [start, end)
  std::size_t end = 0;
  std::string group;
  MentionKind kind = MentionKind::noun_phrase;

  friend bool operator==(const MentionSpan&, const MentionSpan&) = default;
};

// Compiled, validated characteristic. Cheap to share between threads.
class Characteristic {
 public:
  explicit Characteristic(CharacteristicSpec spec);
  ~Characteristic();
  Characteristic(const Characteristic&);
  Characteristic& operator=(const Characteristic&);
  Characteristic(Characteristic&&) noexcept;
  Characteristic& operator=(Characteristic&&) noexcept;

  const CharacteristicSpec& spec() const noexcept { return spec_; }
  const std::string& name() const noexcept { return spec_.name; }
  const std::vector<TestGroup>& groups() const noexcept { return spec_.groups; }
  std::vector<std::string> group_names() const;

  // Throws ValidationError for unknown names.
  const TestGroup& group(const std::string& name) const;
  bool has_group(const std::string& name) const;
  const TestGroup* absent_marker_group() const;

 private:
  struct Compiled;
  friend std::vector<MentionSpan> detect(const std::string&,
                                         const Characteristic&);
  friend struct AlterAccess;

  CharacteristicSpec spec_;
  std::shared_ptr<const Compiled> compiled_;
};

// Non-pronoun mentions whose match starts inside the head window, plus
// pronoun mentions anywhere. Sorted by start, non-overlapping.
std::vector<MentionSpan> detect(const std::string& text,
                                const Characteristic& characteristic);
std::vector<MentionSpan> detect(const PatientNote& note,
                                const Characteristic& characteristic);

// Groups a note is resolved to: the groups of its non-pronoun mentions, or of
// its pronoun mentions when it has none. Empty when nothing was detected.
std::set<std::string> resolve_groups(const std::vector<MentionSpan>& spans);

struct TextEdit {
  std::size_t start = 0;  // byte range replaced in the input text
  std::size_t end = 0;
  std::string replacement;
};

struct Alteration {
  std::string text;
  AlterOp op = AlterOp::keep;
  std::vector<TextEdit> edits;
};

// The note cannot be brought into the target group; the caller must drop it
// from every group of the characteristic.
struct CohortExclusion {
  std::string reason;
};

using AlterResult = std::variant<Alteration, CohortExclusion>;

AlterResult alter(const std::string& text, const Characteristic& characteristic,
                  const std::string& target);
AlterResult alter(const PatientNote& note, const Characteristic& characteristic,
                  const std::string& target);

struct AlteredSample {
  std::string id;
  std::string text;
  AlterOp op = AlterOp::keep;

  friend bool operator==(const AlteredSample&, const AlteredSample&) = default;
};

struct ExcludedSample {
  std::string id;
  std::string group;  // first group that failed
  std::string reason;

  friend bool operator==(const ExcludedSample&, const ExcludedSample&) = default;
};

// One altered copy of the cohort per test group. Groups appear in spec
// order; samples inside a group are sorted by id and every group holds the
// same ids.
struct GroupedDataset {
  struct Group {
    std::string name;
    std::vector<AlteredSample> samples;

    friend bool operator==(const Group&, const Group&) = default;
  };

  std::string characteristic;
  std::vector<Group> groups;
  std::vector<ExcludedSample> excluded;

  std::size_t cohort_size() const {
    return groups.empty() ? 0 : groups.front().samples.size();
  }
  const Group& group(const std::string& name) const;
  std::vector<std::string> excluded_ids() const;

  friend bool operator==(const GroupedDataset&, const GroupedDataset&) = default;
};

GroupedDataset generate_groups(const Corpus& corpus,
                               const Characteristic& characteristic);

// Built-in characteristics. Group names: gender {female, male, transgender};
// ethnicity {no_mention, white, african_american, hispanic, asian};
// age {"18".."89", over90}.
inline constexpr const char* kDefaultOver90Token = "[**Age over 90 **]";

CharacteristicSpec gender_spec();
CharacteristicSpec ethnicity_spec();
CharacteristicSpec age_spec(const std::string& over90_token = kDefaultOver90Token);
std::vector<std::string> builtin_characteristic_names();
// Throws ValidationError naming the built-ins for unknown names.
CharacteristicSpec builtin_spec(const std::string& name);

// Age groups in axis order: "18" ... "89", "over90".
std::vector<std::string> age_group_names();

GroupedDataset age_groups(const Corpus& corpus,
                          const std::string& over90_token = kDefaultOver90Token);

}  // namespace noteprobe
