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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "noteprobe/perturb.hpp"

namespace noteprobe {

struct PredictionRecord {
  std::string sample_id;
  std::string group;
  std::map<std::string, double> probabilities;

  friend bool operator==(const PredictionRecord&,
                         const PredictionRecord&) = default;
};

// Sorts by (group, sample id), the canonical record order.
void sort_records(std::vector<PredictionRecord>& records);

// Range, label-set and (group, id) uniqueness checks. Throws ValidationError.
void validate_records(const std::vector<PredictionRecord>& records);

// JSONL: {"id": str, "group": str, "probabilities": {label: p}}.
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);
void save_predictions(const std::vector<PredictionRecord>& records,
                      const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Mock lexical model

// P(label | text) = logistic(base_logit[label] + sum of lexicon weights of the
// distinct tokens present in the text). Tokens are maximal runs of ASCII
// letters/digits, lowercased unless `case_sensitive`.
struct MockLexicalModel {
  std::map<std::string, double> base_logits;
  // token -> label -> weight
  std::map<std::string, std::map<std::string, double>> lexicon;
  bool case_sensitive = false;

  std::vector<std::string> labels() const;
  std::map<std::string, double> predict(const std::string& text) const;
};

double logistic(double z);
double logit(double p);
std::vector<std::string> tokenize(const std::string& text, bool case_sensitive);

MockLexicalModel mock_model_from_json(const std::string& json_text);
MockLexicalModel load_mock_model(const std::filesystem::path& path);
std::string mock_model_to_json(const MockLexicalModel& model);

std::vector<PredictionRecord> predict_mock(const GroupedDataset& dataset,
                                           const MockLexicalModel& model);

// ---------------------------------------------------------------------------
// Remote model over the HTTP wire protocol
//
//   GET  /v1/info     -> {"model_id", "task": "multilabel"|"binary", "labels"}
//   POST /v1/predict  {"texts": [...]} -> {"labels", "probabilities": [[...]]}

struct ModelEndpoint {
  std::string base_url;  // http://host:port[/prefix]
  int timeout_ms = 30000;
  std::size_t max_batch = 16;
  std::size_t max_parallel = 4;
  int retries = 3;
  std::optional<std::string> bearer_token;
  int retry_backoff_ms = 50;

  void validate() const;
};

struct ModelInfo {
  std::string model_id;
  std::string task;
  std::vector<std::string> labels;
};

ModelInfo fetch_model_info(const ModelEndpoint& endpoint);

// One record per (group, sample), in canonical order regardless of the order
// in which batches complete. Transport failures are retried per batch; any
// batch still failing aborts the run with a TransportError listing the
// missing (group, id) pairs. Responses violating the protocol raise
// ProtocolError immediately.
std::vector<PredictionRecord> predict_remote(const GroupedDataset& dataset,
                                             const ModelEndpoint& endpoint);

// Checks a server against the wire protocol. Each check is independent.
struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCheck> checks;
  bool passed() const;
};

ConformanceReport check_conformance(const ModelEndpoint& endpoint);

}  // namespace noteprobe
