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

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace noteprobe::testing {

// In-process model server speaking the wire protocol. Row i, label k gets
// probability ((bytes(text_i) + k) mod 100) / 100.
struct StubOptions {
  std::string model_id = "stub-echo";
  std::string task = "multilabel";
  std::vector<std::string> labels = {"mortality"};
  // Sleep a pseudo-random 0..max_delay_ms before answering each predict call,
  // so batches complete out of order.
  int max_delay_ms = 0;
  // The first N predict calls answer 503.
  int transient_failures = 0;
  // Every predict call answers 503.
  bool always_unavailable = false;
  // Rows whose text contains this marker report probability 1.2.
  std::optional<std::string> out_of_range_marker;
  // Response labels come back in reverse order.
  bool reorder_labels = false;
  // Answer with one row fewer than requested.
  bool drop_last_row = false;
  // Requests must carry "Authorization: Bearer <token>", else 401.
  std::optional<std::string> required_token;
  // Malformed requests get 200 and an empty result instead of 4xx.
  bool lax_validation = false;
};

class StubServer {
 public:
  explicit StubServer(StubOptions options = {});
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  std::string url() const;
  int port() const { return port_; }
  int predict_calls() const { return predict_calls_.load(); }
  int max_in_flight() const { return max_in_flight_.load(); }
  std::size_t largest_batch() const { return largest_batch_.load(); }

  static double expected_probability(const std::string& text, std::size_t label_index);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> predict_calls_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
  std::atomic<std::size_t> largest_batch_{0};
};

}  // namespace noteprobe::testing
