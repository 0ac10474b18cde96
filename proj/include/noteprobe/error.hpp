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
#include <stdexcept>
#include <string>

namespace noteprobe {

// Base for every error the library raises. The CLI maps the concrete
// subclasses onto exit codes (validation 2, protocol/transport 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: invariants violated, unknown names, malformed configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A line-oriented file could not be parsed. `line()` is 1-based.
class ParseError : public ValidationError {
 public:
  ParseError(std::string path, std::size_t line, const std::string& what)
      : ValidationError(path + ":" + std::to_string(line) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// The model server answered, but not according to the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// The model server could not be reached (after retries).
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace noteprobe
