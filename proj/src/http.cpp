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

#include "internal/http.hpp"

#include <httplib.h>

#include "noteprobe/error.hpp"

namespace noteprobe::detail {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // "" or "/path" without trailing slash
};

ParsedUrl parse_base_url(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0)
    throw ValidationError("endpoint URL must start with http:// (got \"" + url + "\")");
  const auto slash = url.find('/', scheme.size());
  ParsedUrl parsed;
  parsed.origin = url.substr(0, slash);
  if (parsed.origin.size() == scheme.size())
    throw ValidationError("endpoint URL has no host: \"" + url + "\"");
  if (slash != std::string::npos) parsed.prefix = url.substr(slash);
  while (!parsed.prefix.empty() && parsed.prefix.back() == '/') parsed.prefix.pop_back();
  return parsed;
}

}  // namespace

struct HttpSession::Impl {
  explicit Impl(const std::string& origin) : client(origin) {}
  httplib::Client client;
};

HttpSession::HttpSession(const ModelEndpoint& endpoint) {
  const ParsedUrl url = parse_base_url(endpoint.base_url);
  impl_ = std::make_unique<Impl>(url.origin);
  if (!impl_->client.is_valid())
    throw ValidationError("invalid endpoint URL \"" + endpoint.base_url + "\"");
  prefix_ = url.prefix;
  const auto timeout = std::chrono::milliseconds(endpoint.timeout_ms);
  impl_->client.set_connection_timeout(timeout);
  impl_->client.set_read_timeout(timeout);
  impl_->client.set_write_timeout(timeout);
  impl_->client.set_keep_alive(true);
  impl_->client.set_tcp_nodelay(true);
  if (endpoint.bearer_token) impl_->client.set_bearer_token_auth(*endpoint.bearer_token);
}

HttpSession::~HttpSession() = default;

namespace {

std::optional<HttpResponse> unpack(const httplib::Result& result, std::string& error) {
  if (!result) {
    error = httplib::to_string(result.error());
    return std::nullopt;
  }
  error.clear();
  return HttpResponse{result->status, result->body};
}

}  // namespace

std::optional<HttpResponse> HttpSession::get(const std::string& path) {
  return unpack(impl_->client.Get(prefix_ + path), last_error_);
}

std::optional<HttpResponse> HttpSession::post_json(const std::string& path,
                                                   const std::string& body) {
  return unpack(impl_->client.Post(prefix_ + path, body, "application/json"), last_error_);
}

}  // namespace noteprobe::detail
