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
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "internal/http.hpp"
#include "internal/wire.hpp"
#include "noteprobe/error.hpp"
#include "noteprobe/inference.hpp"

namespace noteprobe {

using nlohmann::json;

void ModelEndpoint::validate() const {
  if (base_url.empty()) throw ValidationError("endpoint URL is empty");
  if (timeout_ms < 1) throw ValidationError("timeout_ms must be >= 1");
  if (max_batch < 1) throw ValidationError("max_batch must be >= 1");
  if (max_parallel < 1) throw ValidationError("max_parallel must be >= 1");
  if (retries < 0) throw ValidationError("retries must be >= 0");
  if (retry_backoff_ms < 0) throw ValidationError("retry_backoff_ms must be >= 0");
}

namespace detail {

std::string error_message(const std::string& body) {
  try {
    const json j = json::parse(body);
    if (j.is_object() && j.contains("error") && j["error"].is_string())
      return j["error"].get<std::string>();
  } catch (const json::exception&) {
  }
  return body.substr(0, 200);
}

ModelInfo parse_model_info(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("/v1/info: body is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("/v1/info: body is not an object");
  ModelInfo info;
  if (!j.contains("model_id") || !j["model_id"].is_string())
    throw ProtocolError("/v1/info: missing string \"model_id\"");
  info.model_id = j["model_id"].get<std::string>();
  if (!j.contains("task") || !j["task"].is_string())
    throw ProtocolError("/v1/info: missing string \"task\"");
  info.task = j["task"].get<std::string>();
  if (info.task != "multilabel" && info.task != "binary")
    throw ProtocolError("/v1/info: task must be \"multilabel\" or \"binary\", got \"" +
                        info.task + "\"");
  if (!j.contains("labels") || !j["labels"].is_array() || j["labels"].empty())
    throw ProtocolError("/v1/info: \"labels\" must be a non-empty array");
  for (const auto& l : j["labels"]) {
    if (!l.is_string()) throw ProtocolError("/v1/info: labels must be strings");
    info.labels.push_back(l.get<std::string>());
  }
  auto sorted = info.labels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ProtocolError("/v1/info: duplicate labels");
  if (info.task == "binary" && info.labels.size() != 1)
    throw ProtocolError("/v1/info: a binary task exposes exactly one label");
  return info;
}

std::string predict_request_body(const std::vector<std::string>& texts) {
  json j;
  j["texts"] = texts;
  return j.dump();
}

std::vector<std::vector<double>> parse_predict_response(
    const std::string& body, const std::vector<std::string>& expected_labels,
    std::size_t expected_rows, const std::function<std::string(std::size_t)>& describe_row) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("/v1/predict: body is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("labels") || !j.contains("probabilities"))
    throw ProtocolError("/v1/predict: expected {\"labels\", \"probabilities\"}");
  std::vector<std::string> labels;
  try {
    labels = j["labels"].get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw ProtocolError("/v1/predict: \"labels\" must be an array of strings");
  }
  if (labels != expected_labels) {
    std::string got, want;
    for (const auto& l : labels) got += (got.empty() ? "" : ",") + l;
    for (const auto& l : expected_labels) want += (want.empty() ? "" : ",") + l;
    throw ProtocolError("/v1/predict: labels [" + got + "] differ from /v1/info [" + want + "]");
  }
  const auto& rows = j["probabilities"];
  if (!rows.is_array()) throw ProtocolError("/v1/predict: \"probabilities\" must be an array");
  if (rows.size() != expected_rows) {
    throw ProtocolError("/v1/predict: " + std::to_string(rows.size()) + " rows for " +
                        std::to_string(expected_rows) + " texts");
  }
  std::vector<std::vector<double>> out;
  out.reserve(expected_rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || row.size() != labels.size()) {
      throw ProtocolError("/v1/predict: row for " + describe_row(i) + " has " +
                          (row.is_array() ? std::to_string(row.size()) : "no") +
                          " values, expected " + std::to_string(labels.size()));
    }
    std::vector<double> values;
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double p = row[k].is_number() ? row[k].get<double>() : std::nan("");
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ProtocolError("/v1/predict: probability " + row[k].dump() + " for label \"" +
                            labels[k] + "\" of " + describe_row(i) +
                            " is outside [0, 1]");
      }
      values.push_back(p);
    }
    out.push_back(std::move(values));
  }
  return out;
}

}  // namespace detail

namespace {

bool retryable(int status) { return status >= 500 || status == 429 || status == 408; }

void backoff(const ModelEndpoint& endpoint, int attempt) {
  const int ms = endpoint.retry_backoff_ms * (1 << std::min(attempt, 10));
  if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

// Runs the request with retries. Returns nullopt when every attempt failed at
// the transport level (or with a retryable status); `last_error` says why.
// Non-retryable error statuses raise ProtocolError.
template <typename Request>
std::optional<detail::HttpResponse> with_retries(const ModelEndpoint& endpoint,
                                                 const std::string& what, Request request,
                                                 std::string& last_error) {
  for (int attempt = 0; attempt <= endpoint.retries; ++attempt) {
    if (attempt > 0) backoff(endpoint, attempt - 1);
    auto response = request();
    if (!response) {
      last_error = "transport error";
      continue;
    }
    if (response->status == 200) return response;
    if (retryable(response->status)) {
      last_error = "HTTP " + std::to_string(response->status) + ": " +
                   detail::error_message(response->body);
      continue;
    }
    throw ProtocolError(what + ": HTTP " + std::to_string(response->status) + ": " +
                        detail::error_message(response->body));
  }
  return std::nullopt;
}

}  // namespace

ModelInfo fetch_model_info(const ModelEndpoint& endpoint) {
  endpoint.validate();
  detail::HttpSession session(endpoint);
  std::string last_error;
  auto response = with_retries(
      endpoint, "GET /v1/info",
      [&] {
        auto r = session.get("/v1/info");
        if (!r) last_error = session.last_error();
        return r;
      },
      last_error);
  if (!response) {
    throw TransportError("GET " + endpoint.base_url + "/v1/info failed after " +
                         std::to_string(endpoint.retries + 1) + " attempts: " + last_error);
  }
  return detail::parse_model_info(response->body);
}

std::vector<PredictionRecord> predict_remote(const GroupedDataset& dataset,
                                             const ModelEndpoint& endpoint) {
  const ModelInfo info = fetch_model_info(endpoint);

  struct Item {
    const std::string* group;
    const AlteredSample* sample;
  };
  std::vector<Item> items;
  for (const auto& g : dataset.groups)
    for (const auto& s : g.samples) items.push_back({&g.name, &s});

  const std::size_t batch_count = (items.size() + endpoint.max_batch - 1) / endpoint.max_batch;
  std::vector<std::vector<std::vector<double>>> results(batch_count);
  std::vector<char> done(batch_count, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::exception_ptr protocol_error;
  std::string transport_detail;

  auto worker = [&] {
    std::optional<detail::HttpSession> session;
    try {
      session.emplace(endpoint);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!protocol_error) protocol_error = std::current_exception();
      abort = true;
      return;
    }
    for (;;) {
      if (abort) return;
      const std::size_t b = next.fetch_add(1);
      if (b >= batch_count) return;
      const std::size_t begin = b * endpoint.max_batch;
      const std::size_t end = std::min(items.size(), begin + endpoint.max_batch);
      std::vector<std::string> texts;
      for (std::size_t i = begin; i < end; ++i) texts.push_back(items[i].sample->text);
      const std::string body = detail::predict_request_body(texts);
      std::string last_error;
      try {
        auto response = with_retries(
            endpoint, "POST /v1/predict",
            [&] {
              auto r = session->post_json("/v1/predict", body);
              if (!r) last_error = session->last_error();
              return r;
            },
            last_error);
        if (!response) {
          std::lock_guard lock(error_mutex);
          if (transport_detail.empty()) transport_detail = last_error;
          continue;
        }
        results[b] = detail::parse_predict_response(
            response->body, info.labels, texts.size(), [&](std::size_t row) {
              const auto& item = items[begin + row];
              return "(" + *item.group + ", " + item.sample->id + ")";
            });
        done[b] = 1;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!protocol_error) protocol_error = std::current_exception();
        abort = true;
        return;
      }
    }
  };

  const std::size_t threads = std::min(endpoint.max_parallel, std::max<std::size_t>(1, batch_count));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (protocol_error) std::rethrow_exception(protocol_error);

  std::vector<std::string> missing;
  for (std::size_t b = 0; b < batch_count; ++b) {
    if (done[b]) continue;
    const std::size_t begin = b * endpoint.max_batch;
    const std::size_t end = std::min(items.size(), begin + endpoint.max_batch);
    for (std::size_t i = begin; i < end; ++i)
      missing.push_back("(" + *items[i].group + ", " + items[i].sample->id + ")");
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : " ") + m;
    throw TransportError(std::to_string(missing.size()) +
                         " predictions missing after retries (" + transport_detail +
                         "): " + list);
  }

  std::vector<PredictionRecord> records;
  records.reserve(items.size());
  for (std::size_t b = 0; b < batch_count; ++b) {
    const std::size_t begin = b * endpoint.max_batch;
    for (std::size_t row = 0; row < results[b].size(); ++row) {
      const auto& item = items[begin + row];
      PredictionRecord r{item.sample->id, *item.group, {}};
      for (std::size_t k = 0; k < info.labels.size(); ++k)
        r.probabilities[info.labels[k]] = results[b][row][k];
      records.push_back(std::move(r));
    }
  }
  sort_records(records);
  return records;
}

}  // namespace noteprobe
