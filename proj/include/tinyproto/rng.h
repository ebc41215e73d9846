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

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <random>
#include <vector>

namespace tinyproto {

// All randomness flows through this engine. Distributions come from
// Boost.Random so draws are identical across standard libraries.
using Rng = std::mt19937_64;

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a root seed and a path of ids,
// e.g. DeriveSeed(seed, {client_id, round, epoch}).
inline std::uint64_t DeriveSeed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = SplitMix64(root);
  for (std::uint64_t p : path) h = SplitMix64(h ^ SplitMix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

// Uniform integer in [0, bound) by rejection; independent of the stdlib.
inline std::uint64_t UniformBelow(Rng& rng, std::uint64_t bound) {
  // 2^64 mod bound values at the bottom are rejected.
  const std::uint64_t threshold = (std::uint64_t{0} - bound) % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v < threshold);
  return v % bound;
}

// Fisher-Yates with UniformBelow, so the permutation for a given seed is
// the same everywhere.
template <typename T>
void Shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(UniformBelow(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

inline std::vector<std::size_t> Permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  Shuffle(order, rng);
  return order;
}

}  // namespace tinyproto
