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

#include "tinyproto/masking.h"

#include <algorithm>
#include <numeric>

#include "tinyproto/errors.h"
#include "tinyproto/rng.h"

namespace tinyproto {
namespace {

using Bits = std::vector<std::uint8_t>;

Bits RandomSubset(std::size_t d, std::size_t s, Rng& rng) {
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first s slots are a uniform s-subset.
  for (std::size_t i = 0; i < s; ++i) {
    std::size_t j = i + static_cast<std::size_t>(UniformBelow(rng, d - i));
    std::swap(idx[i], idx[j]);
  }
  Bits bits(d, 0);
  for (std::size_t i = 0; i < s; ++i) bits[idx[i]] = 1;
  return bits;
}

std::size_t Distance(const Bits& a, const Bits& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != b[i]);
  return n;
}

// Pairwise distances plus a histogram, so the objective (min distance,
// number of pairs at the min) can be re-evaluated in O(K + s) per move.
class HillClimber {
 public:
  HillClimber(std::vector<Bits> masks, std::size_t s)
      : masks_(std::move(masks)), k_(masks_.size()), dist_(k_ * k_, 0), hist_(2 * s + 1, 0) {
    for (std::size_t a = 0; a < k_; ++a) {
      for (std::size_t b = a + 1; b < k_; ++b) {
        const std::size_t dd = Distance(masks_[a], masks_[b]);
        dist_[a * k_ + b] = dist_[b * k_ + a] = dd;
        ++hist_[dd];
      }
    }
  }

  std::pair<std::size_t, std::size_t> Objective() const { return ObjectiveOf(hist_); }

  std::size_t Run(std::size_t budget) {
    std::size_t evals = 0;
    while (evals < budget) {
      if (!ImproveOnce(budget, evals)) break;
    }
    return evals;
  }

  std::vector<Bits> Release() { return std::move(masks_); }

 private:
  std::pair<std::size_t, std::size_t> ObjectiveOf(const std::vector<long>& hist) const {
    for (std::size_t v = 0; v < hist.size(); ++v)
      if (hist[v] > 0) return {v, static_cast<std::size_t>(hist[v])};
    return {hist.size(), 0};
  }

  std::size_t NewDistance(std::size_t a, std::size_t b, std::size_t p, std::size_t q) const {
    // a loses bit p and gains bit q.
    long dd = static_cast<long>(dist_[a * k_ + b]);
    dd += masks_[b][p] ? 1 : -1;
    dd += masks_[b][q] ? -1 : 1;
    return static_cast<std::size_t>(dd);
  }

  bool Improves(std::size_t a, std::size_t p, std::size_t q) {
    const auto before = Objective();
    scratch_ = hist_;
    for (std::size_t b = 0; b < k_; ++b) {
      if (b == a) continue;
      --scratch_[dist_[a * k_ + b]];
      ++scratch_[NewDistance(a, b, p, q)];
    }
    const auto after = ObjectiveOf(scratch_);
    return after.first > before.first ||
           (after.first == before.first && after.second < before.second);
  }

  void Apply(std::size_t a, std::size_t p, std::size_t q) {
    for (std::size_t b = 0; b < k_; ++b) {
      if (b == a) continue;
      const std::size_t old_d = dist_[a * k_ + b];
      const std::size_t new_d = NewDistance(a, b, p, q);
      --hist_[old_d];
      ++hist_[new_d];
      dist_[a * k_ + b] = dist_[b * k_ + a] = new_d;
    }
    masks_[a][p] = 0;
    masks_[a][q] = 1;
  }

  // Tries moves on the tightest pairs in (a, b) lexicographic order. Only
  // moves that take an overlapping bit of one side to a position unused by
  // both can widen the pair, so only those are enumerated.
  bool ImproveOnce(std::size_t budget, std::size_t& evals) {
    const std::size_t min_d = Objective().first;
    const std::size_t d = masks_.empty() ? 0 : masks_[0].size();
    for (std::size_t a = 0; a < k_; ++a) {
      for (std::size_t b = a + 1; b < k_; ++b) {
        if (dist_[a * k_ + b] != min_d) continue;
        for (std::size_t side : {a, b}) {
          const std::size_t other = side == a ? b : a;
          for (std::size_t p = 0; p < d; ++p) {
            if (!(masks_[side][p] && masks_[other][p])) continue;
            for (std::size_t q = 0; q < d; ++q) {
              if (masks_[side][q] || masks_[other][q]) continue;
              if (evals >= budget) return false;
              ++evals;
              if (Improves(side, p, q)) {
                Apply(side, p, q);
                return true;
              }
            }
          }
        }
      }
    }
    return false;
  }

  std::vector<Bits> masks_;
  std::size_t k_;
  std::vector<std::size_t> dist_;
  std::vector<long> hist_;
  std::vector<long> scratch_;
};

}  // namespace

const Mask& MaskSet::at(int class_id) const {
  if (class_id < 0 || static_cast<std::size_t>(class_id) >= masks.size()) {
    throw ArgumentError("no mask for class " + std::to_string(class_id));
  }
  return masks[static_cast<std::size_t>(class_id)];
}

MaskSet MaskSet::Dense(std::size_t K, std::size_t d) {
  MaskSet set;
  set.d = d;
  set.s = d;
  for (std::size_t j = 0; j < K; ++j) set.masks.push_back(Mask::AllOnes(static_cast<int>(j), d));
  return set;
}

std::string MaskSet::ToText() const {
  std::string out;
  out.reserve(masks.size() * (d + 1));
  for (const Mask& m : masks) {
    for (std::uint8_t b : m.bits()) out.push_back(b ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

MaskSet GenerateMasks(std::size_t K, std::size_t d, std::size_t s, std::uint64_t seed) {
  if (K < 1) throw ArgumentError("need at least one class");
  if (s < 1 || s > d) throw ArgumentError("mask popcount s must satisfy 1 <= s <= d");

  MaskSet set;
  set.d = d;
  set.s = s;
  set.seed = seed;
  std::vector<Bits> bits;
  bits.reserve(K);

  if (K * s <= d) {
    for (std::size_t j = 0; j < K; ++j) {
      Bits b(d, 0);
      std::fill(b.begin() + static_cast<long>(j * s), b.begin() + static_cast<long>((j + 1) * s), 1);
      bits.push_back(std::move(b));
    }
  } else {
    Rng rng(seed);
    for (std::size_t j = 0; j < K; ++j) bits.push_back(RandomSubset(d, s, rng));
    HillClimber climber(std::move(bits), s);
    set.pre_search_min_hamming = climber.Objective().first;
    set.search_evaluations = climber.Run(10 * K * d);
    bits = climber.Release();
  }

  for (std::size_t j = 0; j < K; ++j) set.masks.emplace_back(static_cast<int>(j), std::move(bits[j]));
  return set;
}

std::size_t HammingDistance(const Mask& a, const Mask& b) {
  if (a.dim() != b.dim()) throw ShapeError("masks differ in dimension");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) n += (a.test(i) != b.test(i));
  return n;
}

std::size_t MinPairwiseHamming(const MaskSet& set) {
  if (set.masks.size() < 2) throw ArgumentError("minimum pairwise distance needs K >= 2");
  std::size_t best = set.masks[0].dim() + 1;
  for (std::size_t a = 0; a < set.masks.size(); ++a)
    for (std::size_t b = a + 1; b < set.masks.size(); ++b)
      best = std::min(best, HammingDistance(set.masks[a], set.masks[b]));
  return best;
}

}  // namespace tinyproto
