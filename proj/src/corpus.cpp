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

#include "noteprobe/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "noteprobe/error.hpp"

namespace noteprobe {

using nlohmann::json;

bool PatientNote::has_label(const std::string& label) const {
  return labels && std::find(labels->begin(), labels->end(), label) != labels->end();
}

Corpus::Corpus(std::vector<PatientNote> notes,
               std::optional<std::vector<std::string>> label_vocabulary)
    : notes_(std::move(notes)) {
  std::unordered_set<std::string> ids;
  std::set<std::string> seen_labels;
  for (const auto& note : notes_) {
    if (note.id.empty()) throw ValidationError("note with empty id");
    if (!ids.insert(note.id).second)
      throw ValidationError("duplicate note id \"" + note.id + "\"");
    if (note.text.empty())
      throw ValidationError("note \"" + note.id + "\" has empty text");
    if (note.labels) seen_labels.insert(note.labels->begin(), note.labels->end());
  }
  if (label_vocabulary) {
    label_vocabulary_ = std::move(*label_vocabulary);
    std::unordered_set<std::string> vocab(label_vocabulary_.begin(),
                                          label_vocabulary_.end());
    if (vocab.size() != label_vocabulary_.size())
      throw ValidationError("label vocabulary contains duplicates");
    for (const auto& label : seen_labels) {
      if (!vocab.count(label))
        throw ValidationError("label \"" + label + "\" is not in the vocabulary");
    }
  } else {
    label_vocabulary_.assign(seen_labels.begin(), seen_labels.end());
  }
}

bool Corpus::has_labels() const {
  return std::any_of(notes_.begin(), notes_.end(),
                     [](const PatientNote& n) { return n.labels.has_value(); });
}

std::map<std::string, std::size_t> Corpus::label_frequencies() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& label : label_vocabulary_) counts[label] = 0;
  for (const auto& note : notes_) {
    if (!note.labels) continue;
    for (const auto& label : *note.labels) ++counts[label];
  }
  return counts;
}

namespace {

PatientNote note_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
  PatientNote note;
  if (!j.contains("id") || !j["id"].is_string())
    throw std::invalid_argument("missing string field \"id\"");
  if (!j.contains("text") || !j["text"].is_string())
    throw std::invalid_argument("missing string field \"text\"");
  note.id = j["id"].get<std::string>();
  note.text = j["text"].get<std::string>();
  if (j.contains("labels") && !j["labels"].is_null()) {
    if (!j["labels"].is_array())
      throw std::invalid_argument("\"labels\" must be an array of strings");
    std::vector<std::string> labels;
    for (const auto& l : j["labels"]) {
      if (!l.is_string())
        throw std::invalid_argument("\"labels\" must be an array of strings");
      labels.push_back(l.get<std::string>());
    }
    note.labels = std::move(labels);
  }
  return note;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path,
                   const std::optional<std::filesystem::path>& vocabulary_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());

  std::vector<PatientNote> notes;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    PatientNote note;
    try {
      note = note_from_json(json::parse(line));
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    auto [it, inserted] = first_line.emplace(note.id, line_no);
    if (!inserted) {
      throw ParseError(path.string(), line_no,
                       "duplicate id \"" + note.id + "\" (first seen on line " +
                           std::to_string(it->second) + ")");
    }
    notes.push_back(std::move(note));
  }

  std::optional<std::vector<std::string>> vocab;
  if (vocabulary_path) {
    std::ifstream vin(*vocabulary_path, std::ios::binary);
    if (!vin) throw IoError("cannot open vocabulary file " + vocabulary_path->string());
    try {
      vocab = json::parse(vin).get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw ValidationError("vocabulary file " + vocabulary_path->string() +
                            ": " + e.what());
    }
  }
  return Corpus(std::move(notes), std::move(vocab));
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write corpus file " + path.string());
  for (const auto& note : corpus.notes()) {
    json j = json::object();
    j["id"] = note.id;
    j["text"] = note.text;
    if (note.labels) j["labels"] = *note.labels;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace noteprobe
