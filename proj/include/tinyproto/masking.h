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
#include <optional>
#include <string>
#include <vector>

#include "tinyproto/prototypes.h"

namespace tinyproto {

// One mask per class, shared by the server and every client.
struct MaskSet {
  std::vector<Mask> masks;  // masks[j].class_id() == j
  std::size_t d = 0;
  std::size_t s = 0;
  std::uint64_t seed = 0;

  // Minimum pairwise Hamming distance of the seeded random draw before local
  // search. Only set in the overlapping regime (K * s > d).
  std::optional<std::size_t> pre_search_min_hamming;
  // Candidate swaps evaluated by the local search.
  std::size_t search_evaluations = 0;

  std::size_t classes() const { return masks.size(); }
  const Mask& at(int class_id) const;

  // Dense masks for the no-sparsification baseline: every class keeps all
  // d coordinates, so s == d.
  static MaskSet Dense(std::size_t K, std::size_t d);

  // One line per class, d characters of '0'/'1'.
  std::string ToText() const;
};

// Masks with popcount s maximizing the minimum pairwise Hamming distance.
//
// When K * s <= d the masks are contiguous disjoint blocks (class j owns
// [j*s, (j+1)*s)), so every pair is at the maximum distance 2s. Otherwise
// each class draws a uniform s-subset and a hill climber moves single set
// bits of the tightest pairs, accepting a move only if it raises the minimum
// distance or lowers the number of pairs at the minimum. The climber stops
// after 10*K*d candidate moves or when no candidate improves.
MaskSet GenerateMasks(std::size_t K, std::size_t d, std::size_t s, std::uint64_t seed);

std::size_t HammingDistance(const Mask& a, const Mask& b);

// Exact minimum over all class pairs. Requires K >= 2.
std::size_t MinPairwiseHamming(const MaskSet& set);

}  // namespace tinyproto
