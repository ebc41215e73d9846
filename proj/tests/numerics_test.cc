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

#include "tinyproto/numerics.h"

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "test_util.h"
#include "tinyproto/errors.h"

namespace tinyproto {
namespace {

using tptest::IntIn;
using tptest::RandomBatch;
using tptest::RandomParams;
using tptest::RandomVector;

// Written independently of the library: explicit index loops, column-major
// traversal of the weights.
struct Oracle {
  static Vector Layer(const Matrix& w, const Vector& b, const Vector& in, bool relu) {
    Vector out(w.cols());
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double acc = b[j];
      for (std::size_t i = 0; i < w.rows(); ++i) acc += in[i] * w(i, j);
      out[j] = relu ? std::max(acc, 0.0) : acc;
    }
    return out;
  }
  static Vector Features(const ModelParams& p, const Vector& x) {
    return Layer(p.proj_weights, p.proj_bias, Layer(p.extractor_weights, p.extractor_bias, x, true), true);
  }
  static Vector Logits(const ModelParams& p, const Vector& f) {
    return Layer(p.classifier_weights, p.classifier_bias, f, false);
  }
  static double Loss(const ModelParams& p, const std::vector<Sample>& batch,
                     const std::map<int, Vector>& globals, double lambda, double mu, Rho rho) {
    double ce = 0.0;
    std::map<int, Vector> sums;
    std::map<int, int> counts;
    for (const Sample& s : batch) {
      const Vector f = Features(p, s.x);
      const Vector z = Logits(p, f);
      double m = z[0];
      for (double v : z) m = std::max(m, v);
      double se = 0.0;
      for (double v : z) se += std::exp(v - m);
      ce += m + std::log(se) - z[s.y];
      auto& acc = sums[s.y];
      if (acc.empty()) acc.assign(f.size(), 0.0);
      for (std::size_t i = 0; i < f.size(); ++i) acc[i] += f[i];
      ++counts[s.y];
    }
    ce /= static_cast<double>(batch.size());
    double r = 0.0;
    for (auto& [cls, acc] : sums) {
      auto it = globals.find(cls);
      if (it == globals.end()) continue;
      double sq = 0.0;
      for (std::size_t i = 0; i < acc.size(); ++i) {
        const double diff = acc[i] / counts[cls] - mu * it->second[i];
        sq += diff * diff;
      }
      r += rho == Rho::kSquaredL2 ? sq : std::sqrt(sq + 1e-8);
    }
    return ce + lambda * r;
  }
};

TEST(Forward, IdentityWeightsKillNegatives) {
  ModelParams p = ModelParams::Zeros({2, 2, 2, 2});
  for (Matrix* m : {&p.extractor_weights, &p.proj_weights}) {
    (*m)(0, 0) = 1.0;
    (*m)(1, 1) = 1.0;
  }
  EXPECT_EQ(ForwardFeatures(p, Vector{1.0, -1.0}), (Vector{1.0, 0.0}));
}

TEST(Forward, LogitsExamples) {
  ModelParams p = ModelParams::Zeros({2, 2, 3, 3});
  for (std::size_t i = 0; i < 3; ++i) p.classifier_weights(i, i) = 1.0;
  EXPECT_EQ(ForwardLogits(p, Vector{1.0, 0.0, 0.0}), (Vector{1.0, 0.0, 0.0}));

  ModelParams q = ModelParams::Zeros({2, 2, 3, 3});
  q.classifier_bias = {0.5, -1.0, 2.0};
  EXPECT_EQ(ForwardLogits(q, Vector{3.0, 4.0, 5.0}), q.classifier_bias);
}

TEST(Forward, MatchesIndependentEvaluator) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const ModelDims dims{IntIn(rng, 1, 8), IntIn(rng, 1, 8), IntIn(rng, 1, 8), IntIn(rng, 1, 8)};
    const ModelParams p = RandomParams(rng, dims);
    const Vector x = RandomVector(rng, dims.input, 3.0);
    const Vector f = ForwardFeatures(p, x);
    const Vector f_ref = Oracle::Features(p, x);
    const Vector z = ForwardLogits(p, f);
    const Vector z_ref = Oracle::Logits(p, f);
    ASSERT_EQ(f.size(), f_ref.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_NEAR(f[i], f_ref[i], 1e-12);
      EXPECT_GE(f[i], 0.0);
    }
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(z[i], z_ref[i], 1e-12);
  }
}

TEST(Forward, ShapeErrors) {
  const ModelParams p = InitParams({3, 4, 5, 2}, 1);
  EXPECT_THROW(ForwardFeatures(p, Vector{1.0, 2.0}), ShapeError);
  EXPECT_THROW(ForwardLogits(p, Vector(4, 0.0)), ShapeError);
  EXPECT_THROW(InitParams({0, 4, 5, 2}, 1), ArgumentError);
}

TEST(Init, DeterministicAndFinite) {
  const ModelDims dims{8, 32, 16, 4};
  EXPECT_EQ(InitParams(dims, 5), InitParams(dims, 5));
  EXPECT_NE(InitParams(dims, 5), InitParams(dims, 6));
  EXPECT_TRUE(InitParams(dims, 5).AllFinite());
  EXPECT_EQ(InitParams(dims, 5).ParameterCount(), 8u * 32 + 32 + 32 * 16 + 16 + 16 * 4 + 4);
}

TEST(Loss, LambdaZeroIsPlainCrossEntropy) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const ModelDims dims{4, 6, 5, 3};
    const ModelParams p = RandomParams(rng, dims);
    const auto batch = RandomBatch(rng, 7, dims.input, dims.classes);
    std::map<int, Vector> globals{{0, RandomVector(rng, dims.feature)}};
    RegularizerSpec reg{&globals, 0.0, 1.0, Rho::kSquaredL2};
    const auto [loss, grads] = LossAndGrad(p, batch, reg);
    EXPECT_EQ(loss.total, CrossEntropy(p, batch));
    EXPECT_EQ(loss.total, loss.cross_entropy);
  }
}

TEST(Loss, RegularizerZeroWhenLocalEqualsScaledGlobal) {
  Rng rng(4);
  const ModelDims dims{3, 5, 4, 2};
  const ModelParams p = RandomParams(rng, dims);
  const auto batch = RandomBatch(rng, 6, dims.input, dims.classes);
  const double mu = 2.5;
  std::map<int, Vector> globals;
  for (const auto& [cls, proto] : [&] {
         std::map<int, Vector> sums;
         std::map<int, int> n;
         for (const Sample& s : batch) {
           const Vector f = ForwardFeatures(p, s.x);
           auto& acc = sums[s.y];
           if (acc.empty()) acc.assign(f.size(), 0.0);
           for (std::size_t i = 0; i < f.size(); ++i) acc[i] += f[i];
           ++n[s.y];
         }
         for (auto& [c, acc] : sums)
           for (double& v : acc) v /= n[c];
         return sums;
       }()) {
    Vector g = proto;
    for (double& v : g) v /= mu;
    globals.emplace(cls, g);
  }
  const auto [loss, grads] = LossAndGrad(p, batch, {&globals, 1.0, mu, Rho::kSquaredL2});
  EXPECT_NEAR(loss.regularizer, 0.0, 1e-24);
  EXPECT_NEAR(loss.total, loss.cross_entropy, 1e-12);
}

TEST(Loss, MissingGlobalContributesNothing) {
  Rng rng(5);
  const ModelDims dims{3, 5, 4, 3};
  const ModelParams p = RandomParams(rng, dims);
  const std::vector<Sample> batch{{RandomVector(rng, 3), 1}, {RandomVector(rng, 3), 2}};
  std::map<int, Vector> none;
  const auto [loss, grads] = LossAndGrad(p, batch, {&none, 3.0, 1.0, Rho::kSquaredL2});
  EXPECT_EQ(loss.regularizer, 0.0);
  EXPECT_EQ(loss.total, loss.cross_entropy);
}

TEST(Loss, FixedLocalPrototypesAddNoGradient) {
  Rng rng(6);
  const ModelDims dims{3, 5, 4, 3};
  const ModelParams p = RandomParams(rng, dims);
  const auto batch = RandomBatch(rng, 8, dims.input, dims.classes);
  std::map<int, Vector> globals, locals;
  for (int c = 0; c < 3; ++c) {
    globals.emplace(c, RandomVector(rng, dims.feature));
    locals.emplace(c, RandomVector(rng, dims.feature));
  }
  RegularizerSpec fixed{&globals, 2.0, 0.5, Rho::kSquaredL2, &locals};
  RegularizerSpec none{&globals, 0.0, 0.5, Rho::kSquaredL2};
  const auto [lf, gf] = LossAndGrad(p, batch, fixed);
  const auto [ln, gn] = LossAndGrad(p, batch, none);
  EXPECT_EQ(gf, gn);
  double r = 0.0;
  std::set<int> present;
  for (const Sample& s : batch) present.insert(s.y);
  for (int c : present) {
    Vector target = globals[c];
    for (double& v : target) v *= 0.5;
    r += RhoDistance(Rho::kSquaredL2, locals[c], target);
  }
  EXPECT_NEAR(lf.regularizer, r, 1e-12);
  EXPECT_NEAR(lf.total, ln.total + 2.0 * r, 1e-12);

  std::map<int, Vector> missing;
  RegularizerSpec bad{&globals, 1.0, 1.0, Rho::kSquaredL2, &missing};
  EXPECT_THROW(LossAndGrad(p, batch, bad), ArgumentError);
  EXPECT_EQ(ParseRegProtos(RegProtosName(RegProtos::kEpoch)), RegProtos::kEpoch);
}

TEST(Loss, ArgumentErrors) {
  const ModelParams p = InitParams({2, 3, 4, 2}, 0);
  std::map<int, Vector> g;
  EXPECT_THROW(LossAndGrad(p, std::vector<Sample>{}, {&g, 1.0, 1.0, Rho::kSquaredL2}), ArgumentError);
  const std::vector<Sample> batch{{{1.0, 2.0}, 0}};
  EXPECT_THROW(LossAndGrad(p, batch, {&g, -1.0, 1.0, Rho::kSquaredL2}), ArgumentError);
  EXPECT_THROW(LossAndGrad(p, batch, {&g, 1.0, 0.0, Rho::kSquaredL2}), ArgumentError);
  const std::vector<Sample> bad_label{{{1.0, 2.0}, 5}};
  EXPECT_THROW(LossAndGrad(p, bad_label, {&g, 1.0, 1.0, Rho::kSquaredL2}), ArgumentError);
}

TEST(Loss, TotalMatchesOracle) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const ModelDims dims{IntIn(rng, 1, 8), IntIn(rng, 1, 8), IntIn(rng, 1, 8), IntIn(rng, 2, 8)};
    const ModelParams p = RandomParams(rng, dims);
    const auto batch = RandomBatch(rng, IntIn(rng, 1, 6), dims.input, dims.classes);
    std::map<int, Vector> globals;
    for (std::size_t c = 0; c < dims.classes; ++c)
      if (IntIn(rng, 0, 3) > 0) globals.emplace(static_cast<int>(c), RandomVector(rng, dims.feature));
    const Rho rho = trial % 2 ? Rho::kL2Eps : Rho::kSquaredL2;
    const double lambda = tptest::Uniform(rng, 0.0, 2.0);
    const double mu = tptest::Uniform(rng, 0.1, 2.0);
    const auto [loss, grads] = LossAndGrad(p, batch, {&globals, lambda, mu, rho});
    EXPECT_NEAR(loss.total, Oracle::Loss(p, batch, globals, lambda, mu, rho), 1e-10);
  }
}

// Minimum |pre-activation| over the batch; finite differences across a ReLU
// kink do not estimate the one-sided derivative.
double KinkMargin(const ModelParams& p, const std::vector<Sample>& batch) {
  double margin = std::numeric_limits<double>::infinity();
  for (const Sample& s : batch) {
    Vector z1(p.extractor_bias);
    for (std::size_t i = 0; i < p.extractor_weights.rows(); ++i)
      for (std::size_t j = 0; j < p.extractor_weights.cols(); ++j) z1[j] += s.x[i] * p.extractor_weights(i, j);
    Vector a1(z1.size());
    for (std::size_t j = 0; j < z1.size(); ++j) {
      margin = std::min(margin, std::abs(z1[j]));
      a1[j] = std::max(z1[j], 0.0);
    }
    Vector z2(p.proj_bias);
    for (std::size_t i = 0; i < p.proj_weights.rows(); ++i)
      for (std::size_t j = 0; j < p.proj_weights.cols(); ++j) z2[j] += a1[i] * p.proj_weights(i, j);
    for (double v : z2) margin = std::min(margin, std::abs(v));
  }
  return margin;
}

TEST(Gradient, MatchesCentralFiniteDifferences) {
  Rng rng(2024);
  constexpr double kStep = 1e-5;
  int instances = 0;
  while (instances < 100) {
    const ModelDims dims{IntIn(rng, 1, 8), IntIn(rng, 1, 8), IntIn(rng, 1, 8), IntIn(rng, 2, 8)};
    const ModelParams p = RandomParams(rng, dims);
    const auto batch = RandomBatch(rng, IntIn(rng, 1, 4), dims.input, dims.classes);
    if (KinkMargin(p, batch) < 1e-3) continue;
    std::map<int, Vector> globals;
    for (std::size_t c = 0; c < dims.classes; ++c) globals.emplace(static_cast<int>(c), RandomVector(rng, dims.feature));
    const RegularizerSpec reg{&globals, tptest::Uniform(rng, 0.0, 2.0), tptest::Uniform(rng, 0.2, 2.0),
                              instances % 3 == 2 ? Rho::kL2Eps : Rho::kSquaredL2};
    ++instances;

    const auto [loss, grads] = LossAndGrad(p, batch, reg);
    std::vector<double> analytic;
    grads.ForEachTensor([&](std::span<const double> t) { analytic.insert(analytic.end(), t.begin(), t.end()); });

    std::size_t flat = 0;
    ModelParams probe = p;
    std::vector<std::span<double>> tensors;
    probe.ForEachTensor([&](std::span<double> t) { tensors.push_back(t); });
    for (auto t : tensors) {
      for (double& v : t) {
        const double orig = v;
        v = orig + kStep;
        const double up = LossAndGrad(probe, batch, reg).first.total;
        v = orig - kStep;
        const double down = LossAndGrad(probe, batch, reg).first.total;
        v = orig;
        const double numeric = (up - down) / (2 * kStep);
        const double a = analytic[flat++];
        const double scale = std::max(std::abs(a), std::abs(numeric));
        ASSERT_LE(std::abs(a - numeric), std::max(1e-4 * scale, 1e-7))
            << "instance " << instances << " param " << flat - 1 << " analytic " << a << " numeric " << numeric;
      }
    }
  }
}

TEST(Sgd, Examples) {
  Rng rng(1);
  const ModelParams p = RandomParams(rng, {3, 4, 5, 2});
  const ModelParams g = RandomParams(rng, {3, 4, 5, 2});
  EXPECT_EQ(SgdStep(p, g, 0.0), p);
  EXPECT_EQ(SgdStep(p, ModelParams::Zeros({3, 4, 5, 2}), 0.1), p);

  ModelParams one = ModelParams::Zeros({1, 1, 1, 1});
  one.extractor_weights(0, 0) = 1.0;
  ModelParams grad = ModelParams::Zeros({1, 1, 1, 1});
  grad.extractor_weights(0, 0) = 2.0;
  EXPECT_EQ(SgdStep(one, grad, 0.5).extractor_weights(0, 0), 0.0);

  EXPECT_THROW(SgdStep(p, ModelParams::Zeros({3, 4, 6, 2}), 0.1), ShapeError);
  EXPECT_THROW(SgdStep(p, g, -1.0), ArgumentError);
}

TEST(Sgd, Elementwise) {
  Rng rng(9);
  const ModelParams p = RandomParams(rng, {2, 3, 4, 2});
  const ModelParams g = RandomParams(rng, {2, 3, 4, 2});
  const ModelParams out = SgdStep(p, g, 0.25);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      EXPECT_EQ(out.proj_weights(i, j), p.proj_weights(i, j) - 0.25 * g.proj_weights(i, j));
}

TEST(Rho, Distances) {
  EXPECT_EQ(RhoDistance(Rho::kSquaredL2, Vector{1, 2}, Vector{4, 6}), 25.0);
  EXPECT_NEAR(RhoDistance(Rho::kL2Eps, Vector{1, 2}, Vector{4, 6}), 5.0, 1e-8);
  EXPECT_EQ(ParseRho("l2_eps"), Rho::kL2Eps);
  EXPECT_EQ(RhoName(Rho::kSquaredL2), "squared_l2");
  EXPECT_THROW(ParseRho("l1"), ArgumentError);
}

}  // namespace
}  // namespace tinyproto
