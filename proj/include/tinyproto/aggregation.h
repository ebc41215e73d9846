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

// Server-side global prototype computation. All three rules operate on
// whatever vectors the clients upload (length s when compressed, d when
// dense); with a fixed mask they commute with compression.
//
// Summation runs in ascending client id regardless of input order, so
// results are bit-for-bit reproducible.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tinyproto/prototypes.h"

namespace tinyproto {

enum class Aggregator {
  kWeighted,  // count-weighted; clients send n_{i,j} in the clear
  kSimple,    // unweighted mean over contributing clients
  kScaled,    // mean of client-side pre-scaled n_{i,j} * c_{i,j}
};

Aggregator ParseAggregator(std::string_view name);
std::string_view AggregatorName(Aggregator a);

struct ClassContribution {
  int client_id = 0;
  int class_id = 0;
  Vector payload;
  // Present only for the weighted rule.
  std::optional<std::uint64_t> sample_count;
};

// (1/|N_j|) * sum_i (n_{i,j} / sum_i n_{i,j}) * c_{i,j}
//
// N_j is the set of contributors with n_{i,j} > 0. The 1/|N_j| factor is
// kept, so with more than one contributor this is not a convex combination
// and differs from the simple mean even when all counts are equal.
Prototype AggregateWeighted(std::span<const ClassContribution> contribs);

// (1/|N_j|) * sum_i c_{i,j}
Prototype AggregateSimple(std::span<const ClassContribution> contribs);

// (1/|N_j|) * sum_i payload_i, with payload_i = n_{i,j} * c_{i,j} already
// applied by the client. The counts never reach the server.
CompressedPrototype AggregateScaled(std::span<const ClassContribution> contribs);

// Dispatches on the rule; returns the aggregated payload values.
Vector Aggregate(Aggregator rule, std::span<const ClassContribution> contribs);

}  // namespace tinyproto
