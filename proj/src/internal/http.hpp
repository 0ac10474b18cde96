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

#include <memory>
#include <optional>
#include <string>

#include "noteprobe/inference.hpp"

namespace noteprobe::detail {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// One keep-alive connection to a model endpoint. Not thread-safe; use one
// session per worker.
class HttpSession {
 public:
  explicit HttpSession(const ModelEndpoint& endpoint);
  ~HttpSession();

  // nullopt when no HTTP response was received; see last_error().
  std::optional<HttpResponse> get(const std::string& path);
  std::optional<HttpResponse> post_json(const std::string& path, const std::string& body);
  const std::string& last_error() const { return last_error_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string prefix_;
  std::string last_error_;
};

}  // namespace noteprobe::detail
