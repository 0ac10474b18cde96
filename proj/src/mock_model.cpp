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

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "noteprobe/error.hpp"
#include "noteprobe/inference.hpp"

namespace noteprobe {

using nlohmann::ordered_json;

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("logit needs p in (0, 1)");
  return std::log(p / (1.0 - p));
}

std::vector<std::string> tokenize(const std::string& text, bool case_sensitive) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      current += case_sensitive ? ch : static_cast<char>(std::tolower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> MockLexicalModel::labels() const {
  std::vector<std::string> out;
  for (const auto& [label, _] : base_logits) out.push_back(label);
  return out;
}

std::map<std::string, double> MockLexicalModel::predict(const std::string& text) const {
  std::map<std::string, double> z = base_logits;
  const auto tokens = tokenize(text, case_sensitive);
  const std::set<std::string> present(tokens.begin(), tokens.end());
  for (const auto& token : present) {
    auto it = lexicon.find(token);
    if (it == lexicon.end()) continue;
    for (const auto& [label, w] : it->second) z[label] += w;
  }
  std::map<std::string, double> p;
  for (const auto& [label, value] : z) p[label] = logistic(value);
  return p;
}

namespace {

void validate_model(const MockLexicalModel& m) {
  if (m.base_logits.empty()) throw ValidationError("mock model: no labels in base_logits");
  for (const auto& [label, z] : m.base_logits) {
    if (!std::isfinite(z))
      throw ValidationError("mock model: base logit for \"" + label + "\" is not finite");
  }
  for (const auto& [token, weights] : m.lexicon) {
    const auto split = tokenize(token, m.case_sensitive);
    if (split.size() != 1 || split.front() != token) {
      throw ValidationError("mock model: lexicon entry \"" + token +
                            "\" is not a single " +
                            (m.case_sensitive ? "" : "lowercase ") + "token");
    }
    for (const auto& [label, w] : weights) {
      if (!m.base_logits.count(label))
        throw ValidationError("mock model: lexicon label \"" + label + "\" has no base logit");
      if (!std::isfinite(w))
        throw ValidationError("mock model: weight " + token + "/" + label + " is not finite");
    }
  }
}

}  // namespace

MockLexicalModel mock_model_from_json(const std::string& json_text) {
  MockLexicalModel m;
  try {
    const auto j = ordered_json::parse(json_text);
    m.base_logits = j.at("base_logits").get<std::map<std::string, double>>();
    if (j.contains("lexicon"))
      m.lexicon = j.at("lexicon").get<std::map<std::string, std::map<std::string, double>>>();
    m.case_sensitive = j.value("case_sensitive", false);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("mock model: ") + e.what());
  }
  validate_model(m);
  return m;
}

MockLexicalModel load_mock_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mock model " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return mock_model_from_json(buffer.str());
}

std::string mock_model_to_json(const MockLexicalModel& model) {
  ordered_json j;
  j["base_logits"] = model.base_logits;
  j["lexicon"] = model.lexicon;
  j["case_sensitive"] = model.case_sensitive;
  return j.dump(2) + "\n";
}

std::vector<PredictionRecord> predict_mock(const GroupedDataset& dataset,
                                           const MockLexicalModel& model) {
  validate_model(model);
  std::vector<PredictionRecord> records;
  records.reserve(dataset.groups.size() * dataset.cohort_size());
  for (const auto& g : dataset.groups) {
    for (const auto& s : g.samples)
      records.push_back({s.id, g.name, model.predict(s.text)});
  }
  sort_records(records);
  return records;
}

}  // namespace noteprobe
