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

#include <cmath>
#include <functional>

#include <nlohmann/json.hpp>

#include "internal/http.hpp"
#include "internal/wire.hpp"
#include "noteprobe/error.hpp"
#include "noteprobe/inference.hpp"

namespace noteprobe {

using nlohmann::json;

bool ConformanceReport::passed() const {
  if (checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

namespace {

const std::vector<std::string>& probe_texts() {
  static const std::vector<std::string> texts = {
      "58 yo F with chest pain. She reports symptoms for 3 days.",
      "[**Age over 90 **] year old Hispanic man admitted with sepsis.",
      "Pt is a 41 y/o transgender woman \xE2\x80\x94 \"no acute distress\".",
  };
  return texts;
}

std::string row_name(std::size_t i) { return "text " + std::to_string(i); }

// A well-formed 4xx answer: status in [400, 500) and an {"error": str} body.
std::string client_error_problem(const std::optional<detail::HttpResponse>& r,
                                 const std::string& transport_error) {
  if (!r) return "no response: " + transport_error;
  if (r->status < 400 || r->status >= 500)
    return "expected a 4xx status, got " + std::to_string(r->status);
  try {
    const json j = json::parse(r->body);
    if (j.is_object() && j.contains("error") && j["error"].is_string()) return {};
  } catch (const json::exception&) {
  }
  return "4xx body is not {\"error\": <string>}";
}

}  // namespace

ConformanceReport check_conformance(const ModelEndpoint& endpoint) {
  endpoint.validate();
  ConformanceReport report;
  detail::HttpSession session(endpoint);
  std::optional<ModelInfo> info;

  auto run = [&](const std::string& name, const std::function<std::string()>& body) {
    ConformanceCheck check{name, false, {}};
    try {
      check.detail = body();
      check.passed = check.detail.empty();
      if (check.passed) check.detail = "ok";
    } catch (const Error& e) {
      check.detail = e.what();
    }
    report.checks.push_back(std::move(check));
  };

  auto predict = [&](const std::vector<std::string>& texts) {
    auto r = session.post_json("/v1/predict", detail::predict_request_body(texts));
    if (!r) throw TransportError("POST /v1/predict: " + session.last_error());
    if (r->status != 200) {
      throw ProtocolError("POST /v1/predict: HTTP " + std::to_string(r->status) + ": " +
                          detail::error_message(r->body));
    }
    return detail::parse_predict_response(r->body, info->labels, texts.size(), row_name);
  };

  run("info_schema", [&]() -> std::string {
    auto r = session.get("/v1/info");
    if (!r) return "no response: " + session.last_error();
    if (r->status != 200) return "HTTP " + std::to_string(r->status);
    info = detail::parse_model_info(r->body);
    return {};
  });
  if (!info) return report;

  std::vector<std::vector<double>> batch;
  run("predict_schema", [&]() -> std::string {
    batch = predict(probe_texts());
    return {};
  });

  run("single_text", [&]() -> std::string {
    predict({probe_texts().front()});
    return {};
  });

  run("row_order", [&]() -> std::string {
    if (batch.empty()) return "skipped: predict_schema failed";
    std::vector<std::string> reversed(probe_texts().rbegin(), probe_texts().rend());
    const auto rows = predict(reversed);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& expected = batch[rows.size() - 1 - i];
      for (std::size_t k = 0; k < rows[i].size(); ++k) {
        if (std::abs(rows[i][k] - expected[k]) > 1e-6)
          return "row " + std::to_string(i) + " of a reversed batch does not match";
      }
    }
    return {};
  });

  run("deterministic", [&]() -> std::string {
    const auto first = predict(probe_texts());
    const auto second = predict(probe_texts());
    return first == second ? std::string() : "identical requests gave different responses";
  });

  run("rejects_malformed_json", [&]() -> std::string {
    return client_error_problem(session.post_json("/v1/predict", "{\"texts\": [\"unterminated"),
                                session.last_error());
  });

  run("rejects_missing_texts", [&]() -> std::string {
    return client_error_problem(session.post_json("/v1/predict", "{}"), session.last_error());
  });

  run("rejects_non_string_texts", [&]() -> std::string {
    return client_error_problem(session.post_json("/v1/predict", "{\"texts\": [1, 2]}"),
                                session.last_error());
  });

  return report;
}

}  // namespace noteprobe
