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

#include <functional>
#include <string>
#include <vector>

#include "noteprobe/inference.hpp"

namespace noteprobe::detail {

// `{"error": msg}` payload of an error response, or a prefix of the raw body.
std::string error_message(const std::string& body);

// Strict parsers for the wire protocol; violations raise ProtocolError.
ModelInfo parse_model_info(const std::string& body);
std::string predict_request_body(const std::vector<std::string>& texts);
std::vector<std::vector<double>> parse_predict_response(
    const std::string& body, const std::vector<std::string>& expected_labels,
    std::size_t expected_rows, const std::function<std::string(std::size_t)>& describe_row);

}  // namespace noteprobe::detail
