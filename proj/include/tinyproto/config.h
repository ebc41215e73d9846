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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tinyproto/aggregation.h"
#include "tinyproto/numerics.h"

namespace tinyproto {

// Everything a simulation run needs. Parsed from a flat `key = value` file;
// `#` starts a comment. Keys match the field names below (M, K, D, d, s,
// alpha, lambda, ...).
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t M = 20;  // clients
  std::size_t K = 10;  // classes
  std::size_t D = 32;  // input dimension
  std::size_t hidden = 64;
  std::size_t d = 64;  // prototype dimension
  std::size_t s = 8;   // kept coordinates per class
  double alpha = 0.1;
  double lambda = 1.0;
  double mu = 1.0;
  double lr = 0.01;
  std::size_t batch_size = 32;
  std::size_t local_epochs = 1;
  std::size_t rounds = 30;
  double participation = 1.0;
  Aggregator aggregator = Aggregator::kScaled;
  bool cps = true;
  Rho rho = Rho::kSquaredL2;
  RegProtos reg_protos = RegProtos::kEpoch;

  // Synthetic data (ignored when `data` names a CSV file).
  std::size_t per_class = 100;
  double sigma = 1.0;
  std::string data;
  double train_fraction = 0.75;

  // Local-update threads per round; 1 runs clients inline.
  std::size_t workers = 1;

  // Prototype values exchanged per class: s with sparsification, d without.
  std::size_t payload_dim() const { return cps ? s : d; }

  bool operator==(const ExperimentConfig&) const = default;
};

// Parses and validates. Every problem is reported as `config.<field>: ...`
// in a single ConfigError.
ExperimentConfig ParseConfig(std::istream& in);
ExperimentConfig ParseConfigText(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);

// Returns the list of validation problems (empty when valid).
std::vector<std::string> ValidateConfig(const ExperimentConfig& cfg);

// Canonical `key = value` rendering; ParseConfigText(ToText(c)) == c.
std::string ToText(const ExperimentConfig& cfg);

}  // namespace tinyproto
