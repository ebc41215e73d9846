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

#include "tinyproto/prototypes.h"

#include <cmath>
#include <string>

#include "tinyproto/errors.h"

namespace tinyproto {
namespace {

void CheckPair(int proto_class, std::size_t proto_dim, const Mask& mask) {
  if (proto_class != mask.class_id()) {
    throw ArgumentError("prototype class " + std::to_string(proto_class) +
                        " does not match mask class " + std::to_string(mask.class_id()));
  }
  if (proto_dim != mask.dim()) {
    throw ArgumentError("prototype dimension " + std::to_string(proto_dim) +
                        " does not match mask dimension " + std::to_string(mask.dim()));
  }
}

}  // namespace

Mask::Mask(int class_id, std::vector<std::uint8_t> bits)
    : class_id_(class_id), bits_(std::move(bits)) {
  for (std::uint8_t b : bits_) {
    if (b > 1) throw ArgumentError("mask entries must be 0 or 1");
    popcount_ += b;
  }
}

Mask Mask::AllOnes(int class_id, std::size_t d) {
  return Mask(class_id, std::vector<std::uint8_t>(d, 1));
}

std::vector<std::size_t> Mask::Support() const {
  std::vector<std::size_t> out;
  out.reserve(popcount_);
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

SparseProto Sparsify(const Prototype& proto, const Mask& mask) {
  CheckPair(proto.class_id, proto.values.size(), mask);
  SparseProto out{proto.class_id, Vector(mask.dim(), 0.0)};
  for (std::size_t i = 0; i < mask.dim(); ++i)
    if (mask.test(i)) out.values[i] = proto.values[i];
  return out;
}

CompressedPrototype Compress(const Prototype& proto, const Mask& mask) {
  CheckPair(proto.class_id, proto.values.size(), mask);
  CompressedPrototype out{proto.class_id, {}};
  out.values.reserve(mask.popcount());
  for (std::size_t i = 0; i < mask.dim(); ++i)
    if (mask.test(i)) out.values.push_back(proto.values[i]);
  return out;
}

SparseProto Reconstruct(const CompressedPrototype& comp, const Mask& mask) {
  if (comp.class_id != mask.class_id()) {
    throw ArgumentError("compressed prototype class " + std::to_string(comp.class_id) +
                        " does not match mask class " + std::to_string(mask.class_id()));
  }
  if (comp.values.size() != mask.popcount()) {
    throw ArgumentError("compressed length " + std::to_string(comp.values.size()) +
                        " != mask popcount " + std::to_string(mask.popcount()));
  }
  SparseProto out{comp.class_id, Vector(mask.dim(), 0.0)};
  std::size_t k = 0;
  for (std::size_t i = 0; i < mask.dim(); ++i)
    if (mask.test(i)) out.values[i] = comp.values[k++];
  return out;
}

double DeadUnitFraction(const Prototype& proto, double tol) {
  if (proto.values.empty()) return 0.0;
  std::size_t dead = 0;
  for (double v : proto.values)
    if (std::abs(v) <= tol) ++dead;
  return static_cast<double>(dead) / static_cast<double>(proto.values.size());
}

}  // namespace tinyproto
