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

// Class prototypes and the class-wise sparsification operators that act on
// them. A mask fixes, per class, which coordinates survive; compression
// keeps only those coordinates in ascending index order, which is also the
// wire layout.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tinyproto/numerics.h"

namespace tinyproto {

// Mean feature vector of one class, length d.
struct Prototype {
  int class_id = 0;
  Vector values;

  bool operator==(const Prototype&) const = default;
};

class Mask {
 public:
  Mask() = default;
  // Throws ArgumentError if any entry is not 0 or 1.
  Mask(int class_id, std::vector<std::uint8_t> bits);

  static Mask AllOnes(int class_id, std::size_t d);

  int class_id() const { return class_id_; }
  std::size_t dim() const { return bits_.size(); }
  std::size_t popcount() const { return popcount_; }
  bool test(std::size_t i) const { return bits_[i] != 0; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  // Indices of set bits, ascending.
  std::vector<std::size_t> Support() const;

  bool operator==(const Mask&) const = default;

 private:
  int class_id_ = 0;
  std::vector<std::uint8_t> bits_;
  std::size_t popcount_ = 0;
};

// Length-s payload: the prototype entries at the mask's set bits.
struct CompressedPrototype {
  int class_id = 0;
  Vector values;

  bool operator==(const CompressedPrototype&) const = default;
};

// Length-d vector that is zero wherever the class mask is zero.
struct SparseProto {
  int class_id = 0;
  Vector values;

  bool operator==(const SparseProto&) const = default;
};

SparseProto Sparsify(const Prototype& proto, const Mask& mask);

CompressedPrototype Compress(const Prototype& proto, const Mask& mask);

SparseProto Reconstruct(const CompressedPrototype& comp, const Mask& mask);

// Fraction of entries with |v| <= tol. A ReLU unit that never fires for a
// class leaves an exact zero in that class's prototype.
double DeadUnitFraction(const Prototype& proto, double tol = 0.0);

}  // namespace tinyproto
