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
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "noteprobe/error.hpp"
#include "noteprobe/inference.hpp"

namespace noteprobe {

using nlohmann::json;

void sort_records(std::vector<PredictionRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const PredictionRecord& a, const PredictionRecord& b) {
              return std::tie(a.group, a.sample_id) < std::tie(b.group, b.sample_id);
            });
}

namespace {

std::string key_of(const PredictionRecord& r) {
  return "(" + r.group + ", " + r.sample_id + ")";
}

void check_probabilities(const PredictionRecord& r) {
  for (const auto& [label, p] : r.probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("record " + key_of(r) + ": probability for \"" + label +
                            "\" is outside [0, 1]");
    }
  }
}

}  // namespace

void validate_records(const std::vector<PredictionRecord>& records) {
  std::set<std::pair<std::string, std::string>> seen;
  const PredictionRecord* first = nullptr;
  for (const auto& r : records) {
    check_probabilities(r);
    if (!seen.emplace(r.group, r.sample_id).second)
      throw ValidationError("duplicate prediction record " + key_of(r));
    if (!first) {
      first = &r;
      continue;
    }
    bool same = r.probabilities.size() == first->probabilities.size() &&
                std::equal(r.probabilities.begin(), r.probabilities.end(),
                           first->probabilities.begin(),
                           [](const auto& a, const auto& b) { return a.first == b.first; });
    if (!same) {
      throw ValidationError("record " + key_of(r) + " has a different label set than " +
                            key_of(*first));
    }
  }
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open predictions file " + path.string());
  std::vector<PredictionRecord> records;
  std::map<std::pair<std::string, std::string>, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    PredictionRecord r;
    try {
      const json j = json::parse(line);
      r.sample_id = j.at("id").get<std::string>();
      r.group = j.at("group").get<std::string>();
      const auto& probs = j.at("probabilities");
      if (!probs.is_object()) throw std::invalid_argument("\"probabilities\" must be an object");
      for (auto it = probs.begin(); it != probs.end(); ++it) {
        if (!it.value().is_number())
          throw std::invalid_argument("probability for \"" + it.key() + "\" is not a number");
        r.probabilities[it.key()] = it.value().get<double>();
      }
      check_probabilities(r);
    } catch (const ValidationError& e) {
      throw ParseError(path.string(), line_no, e.what());
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    auto [it, inserted] = first_line.emplace(std::pair{r.group, r.sample_id}, line_no);
    if (!inserted) {
      throw ParseError(path.string(), line_no,
                       "duplicate record " + key_of(r) + " (first seen on line " +
                           std::to_string(it->second) + ")");
    }
    records.push_back(std::move(r));
  }
  validate_records(records);
  return records;
}

void save_predictions(const std::vector<PredictionRecord>& records,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write predictions file " + path.string());
  for (const auto& r : records) {
    json j = json::object();
    j["id"] = r.sample_id;
    j["group"] = r.group;
    j["probabilities"] = json::object();
    for (const auto& [label, p] : r.probabilities) j["probabilities"][label] = p;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace noteprobe
