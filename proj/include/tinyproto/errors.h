// Copyright 2026 The TinyProto Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tinyproto {

// Dimension mismatch between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the documented domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class AggregationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A participant was asked to act without the state the round protocol
// should have delivered to it (e.g. no masks yet).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecodeError : public std::runtime_error {
 public:
  enum class Kind { kTruncated, kCrcMismatch, kUnknownFrameType, kTrailingBytes };

  DecodeError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Carries every validation failure found in a config, one per field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::runtime_error(Join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string Join(const std::vector<std::string>& problems) {
    std::string out = "invalid config:";
    for (const auto& p : problems) {
      out += "\n  ";
      out += p;
    }
    return out;
  }

  std::vector<std::string> problems_;
};

}  // namespace tinyproto
