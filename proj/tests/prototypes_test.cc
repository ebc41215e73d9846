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

#include <gtest/gtest.h>

#include "test_util.h"
#include "tinyproto/errors.h"

namespace tinyproto {
namespace {

using tptest::IntIn;
using tptest::Norm;
using tptest::RandomMask;
using tptest::RandomVector;

Mask M(std::vector<std::uint8_t> bits, int cls = 0) { return Mask(cls, std::move(bits)); }

TEST(Sparsify, Examples) {
  EXPECT_EQ(Sparsify({0, {3, -1, 2}}, M({1, 0, 1})).values, (Vector{3, 0, 2}));
  EXPECT_EQ(Sparsify({0, {3, -1, 2}}, Mask::AllOnes(0, 3)).values, (Vector{3, -1, 2}));
  EXPECT_EQ(Sparsify({0, {5, 4, 3, 2, 1}}, M({1, 0, 0, 0, 0})).values, (Vector{5, 0, 0, 0, 0}));
}

TEST(Compress, Examples) {
  EXPECT_EQ(Compress({0, {3, -1, 2}}, M({1, 0, 1})).values, (Vector{3, 2}));
  EXPECT_EQ(Compress({0, {3, -1, 2}}, Mask::AllOnes(0, 3)).values, (Vector{3, -1, 2}));
  EXPECT_EQ(Compress({0, {7, 8, 9, 10}}, M({0, 1, 1, 0})).values, (Vector{8, 9}));
}

TEST(Reconstruct, Examples) {
  EXPECT_EQ(Reconstruct({0, {3, 2}}, M({1, 0, 1})).values, (Vector{3, 0, 2}));
  EXPECT_EQ(Reconstruct({0, {}}, M({0, 0, 0, 0})).values, (Vector{0, 0, 0, 0}));
}

TEST(Operators, Errors) {
  EXPECT_THROW(Sparsify({1, {1, 2}}, M({1, 0}, 0)), ArgumentError);
  EXPECT_THROW(Sparsify({0, {1, 2, 3}}, M({1, 0})), ArgumentError);
  EXPECT_THROW(Compress({0, {1, 2, 3}}, M({1, 0})), ArgumentError);
  EXPECT_THROW(Reconstruct({0, {1, 2}}, M({1, 0, 0})), ArgumentError);
  EXPECT_THROW(Reconstruct({2, {1}}, M({1, 0, 0})), ArgumentError);
  EXPECT_THROW(M({1, 2, 0}), ArgumentError);
}

TEST(Mask, PopcountAndSupport) {
  const Mask m = M({0, 1, 1, 0, 1});
  EXPECT_EQ(m.popcount(), 3u);
  EXPECT_EQ(m.Support(), (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(Mask::AllOnes(3, 4).popcount(), 4u);
}

TEST(DeadUnits, Examples) {
  EXPECT_EQ(DeadUnitFraction({0, {0, 0.5, 0, 1.2}}), 0.5);
  EXPECT_EQ(DeadUnitFraction({0, {0, 0, 0}}), 1.0);
  EXPECT_EQ(DeadUnitFraction({0, {1e-9, 2, 3, 4}}, 1e-6), 0.25);
}

// 1000 randomized cases per property, d <= 64.
constexpr int kCases = 1000;

TEST(Algebra, FixedSupport) {
  Rng rng(1);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t d = IntIn(rng, 1, 64);
    const Mask m = RandomMask(rng, 0, d);
    const SparseProto s = Sparsify({0, RandomVector(rng, d, 10.0)}, m);
    for (std::size_t i = 0; i < d; ++i)
      if (!m.test(i)) ASSERT_EQ(s.values[i], 0.0);
  }
}

TEST(Algebra, NonExpansive) {
  Rng rng(2);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t d = IntIn(rng, 1, 64);
    const Mask m = RandomMask(rng, 0, d);
    const Vector a = RandomVector(rng, d, 10.0), b = RandomVector(rng, d, 10.0);
    const Vector sa = Sparsify({0, a}, m).values, sb = Sparsify({0, b}, m).values;
    Vector da(d), ds(d);
    for (std::size_t i = 0; i < d; ++i) {
      da[i] = a[i] - b[i];
      ds[i] = sa[i] - sb[i];
    }
    ASSERT_LE(Norm(ds), Norm(da) + 1e-12);
  }
}

TEST(Algebra, Linearity) {
  Rng rng(3);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t d = IntIn(rng, 1, 64);
    const std::size_t n = IntIn(rng, 1, 6);
    const Mask m = RandomMask(rng, 0, d);
    Vector combo(d, 0.0), combo_of_sparse(d, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double q = tptest::Uniform(rng, -3.0, 3.0);
      const Vector v = RandomVector(rng, d, 5.0);
      const Vector sv = Sparsify({0, v}, m).values;
      for (std::size_t i = 0; i < d; ++i) {
        combo[i] += q * v[i];
        combo_of_sparse[i] += q * sv[i];
      }
    }
    const Vector lhs = Sparsify({0, combo}, m).values;
    for (std::size_t i = 0; i < d; ++i) ASSERT_NEAR(lhs[i], combo_of_sparse[i], 1e-12);
  }
}

TEST(Algebra, Idempotent) {
  Rng rng(4);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t d = IntIn(rng, 1, 64);
    const Mask m = RandomMask(rng, 0, d);
    const SparseProto once = Sparsify({0, RandomVector(rng, d)}, m);
    ASSERT_EQ(Sparsify({0, once.values}, m), once);
  }
}

TEST(Algebra, RoundTrip) {
  Rng rng(5);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t d = IntIn(rng, 1, 64);
    const int cls = static_cast<int>(IntIn(rng, 0, 9));
    const Mask m = RandomMask(rng, cls, d);
    const Prototype p{cls, RandomVector(rng, d)};
    const CompressedPrototype comp = Compress(p, m);
    ASSERT_EQ(comp.values.size(), m.popcount());
    ASSERT_EQ(Reconstruct(comp, m), Sparsify(p, m));
  }
}

}  // namespace
}  // namespace tinyproto
