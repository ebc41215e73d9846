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

// Closed-form per-round communication cost, in exchanged parameters, for
// prototype-based and related federated algorithms.
//
//   LG-FedAvg        sum_i |phi_i| * 2
//   FML              M * (|theta_aux| + |phi_aux|) * 2
//   FedKD            M * (|theta_aux| + |phi_aux|) * 2 * r   (rounded)
//   FedDistill       sum_i (K_i + K) * K
//   FedProto/FedTGP  sum_i (K_i + K) * d
//   TinyProto        sum_i (K_i + K) * s
//   FedAvg           2 * M * |model|
//
// The factor 2 is upload plus download. K_i is the number of classes
// present on client i: it uploads K_i prototypes and downloads all K.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tinyproto {

enum class Algorithm {
  kLgFedAvg,
  kFml,
  kFedKd,
  kFedDistill,
  kFedProto,
  kFedTgp,
  kTinyProto,
  kFedAvg,
};

Algorithm ParseAlgorithm(std::string_view name);
std::string_view AlgorithmName(Algorithm a);

struct CostQuery {
  Algorithm algorithm = Algorithm::kTinyProto;
  std::optional<std::uint64_t> M;
  std::optional<std::uint64_t> K;
  std::optional<std::vector<std::uint64_t>> K_i;
  std::optional<std::uint64_t> d;
  std::optional<std::uint64_t> s;
  std::optional<std::vector<std::uint64_t>> classifier_params;  // |phi_i| per client
  std::optional<std::uint64_t> theta_aux;
  std::optional<std::uint64_t> phi_aux;
  std::optional<double> r;
  std::optional<std::uint64_t> full_model_params;
};

// Throws ArgumentError naming the first missing field.
std::uint64_t Cost(const CostQuery& q);

// Parameter count in millions, two decimals ("0.15", "<0.01").
std::string FormatMillions(std::uint64_t params);

// Reads blank-line separated blocks of `key = value` lines. Lists are comma
// separated; `VxN` repeats V N times (e.g. `K_i = 10x20`).
std::vector<CostQuery> ParseCostQueries(std::istream& in);

// `algorithm,cost,cost_millions` with a header row.
std::string CostCsv(const std::vector<CostQuery>& queries);

// FedAvg versus prototype exchange for one client in one direction, for a
// model whose layers up to the penultimate one hold `backbone_params`
// parameters followed by a K-way linear head on d features.
struct CrossoverRow {
  std::uint64_t K = 0;
  std::uint64_t d = 0;
  std::uint64_t fedavg = 0;  // backbone + d*K + K
  std::uint64_t pbfl = 0;    // K*d
  // Prototype traffic has reached the backbone size, so exchanging
  // prototypes saves at most about 2x over sending the whole model.
  bool crossover = false;
};

std::vector<CrossoverRow> CrossoverTable(std::uint64_t backbone_params,
                                     const std::vector<std::uint64_t>& K_range,
                                     const std::vector<std::uint64_t>& d_range);

std::string CrossoverCsv(const std::vector<CrossoverRow>& rows);

}  // namespace tinyproto
