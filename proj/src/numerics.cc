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

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/uniform_real_distribution.hpp>

#include "tinyproto/errors.h"
#include "tinyproto/rng.h"

namespace tinyproto {
namespace {

constexpr double kRhoEps = 1e-8;

void CheckLength(std::span<const double> v, std::size_t expected, const char* what) {
  if (v.size() != expected) {
    throw ShapeError(std::string(what) + ": expected length " + std::to_string(expected) +
                     ", got " + std::to_string(v.size()));
  }
}

// out = v * W + b, summed in ascending row order.
Vector Affine(std::span<const double> v, const Matrix& w, const Vector& b) {
  Vector out(b);
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    for (std::size_t j = 0; j < w.cols(); ++j) out[j] += vi * w(i, j);
  }
  return out;
}

// Same as Affine but without skipping zero inputs, so +0.0 vs -0.0 and
// NaN propagation are identical to the naive sum.
Vector AffineDense(std::span<const double> v, const Matrix& w, const Vector& b) {
  Vector out(b);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) out[j] += v[i] * w(i, j);
  return out;
}

void ReluInPlace(Vector& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

double LogSumExp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void CheckParams(const ModelParams& p) {
  const ModelDims d = p.dims();
  if (p.extractor_bias.size() != d.hidden || p.proj_weights.rows() != d.hidden ||
      p.proj_bias.size() != d.feature || p.classifier_weights.rows() != d.feature ||
      p.classifier_bias.size() != d.classes) {
    throw ShapeError("model parameters have inconsistent shapes");
  }
}

void CheckSample(const Sample& s, const ModelDims& dims) {
  CheckLength(s.x, dims.input, "sample input");
  if (s.y < 0 || static_cast<std::size_t>(s.y) >= dims.classes) {
    throw ArgumentError("label " + std::to_string(s.y) + " outside [0, " +
                        std::to_string(dims.classes) + ")");
  }
}

void AddOuter(Matrix& m, std::span<const double> left, std::span<const double> right) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double l = left[i];
    if (l == 0.0) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) += l * right[j];
  }
}

// r = W * g, i.e. backprop through v * W.
Vector BackThrough(const Matrix& w, std::span<const double> g) {
  Vector out(w.rows(), 0.0);
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < w.cols(); ++j) acc += w(i, j) * g[j];
    out[i] = acc;
  }
  return out;
}

struct Activations {
  Vector z1, a1, z2, features;
};

}  // namespace

ModelParams ModelParams::Zeros(const ModelDims& dims) {
  ModelParams p;
  p.extractor_weights = Matrix(dims.input, dims.hidden);
  p.extractor_bias.assign(dims.hidden, 0.0);
  p.proj_weights = Matrix(dims.hidden, dims.feature);
  p.proj_bias.assign(dims.feature, 0.0);
  p.classifier_weights = Matrix(dims.feature, dims.classes);
  p.classifier_bias.assign(dims.classes, 0.0);
  return p;
}

ModelDims ModelParams::dims() const {
  return ModelDims{extractor_weights.rows(), extractor_weights.cols(), proj_weights.cols(),
                   classifier_weights.cols()};
}

std::size_t ModelParams::ParameterCount() const {
  std::size_t n = 0;
  ForEachTensor([&](std::span<const double> t) { n += t.size(); });
  return n;
}

bool ModelParams::AllFinite() const {
  bool ok = true;
  ForEachTensor([&](std::span<const double> t) {
    for (double v : t) ok = ok && std::isfinite(v);
  });
  return ok;
}

ModelParams InitParams(const ModelDims& dims, std::uint64_t seed) {
  if (dims.input == 0 || dims.hidden == 0 || dims.feature == 0 || dims.classes == 0) {
    throw ArgumentError("model dimensions must be positive");
  }
  ModelParams p = ModelParams::Zeros(dims);
  Rng rng(seed);
  auto fill = [&rng](Matrix& m) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows()));
    boost::random::uniform_real_distribution<double> u(-bound, bound);
    for (double& v : m.data()) v = u(rng);
  };
  fill(p.extractor_weights);
  fill(p.proj_weights);
  fill(p.classifier_weights);
  return p;
}

Rho ParseRho(std::string_view name) {
  if (name == "squared_l2") return Rho::kSquaredL2;
  if (name == "l2_eps") return Rho::kL2Eps;
  throw ArgumentError("unknown rho '" + std::string(name) + "' (expected squared_l2 | l2_eps)");
}

std::string_view RhoName(Rho rho) {
  return rho == Rho::kSquaredL2 ? "squared_l2" : "l2_eps";
}

RegProtos ParseRegProtos(std::string_view name) {
  if (name == "batch") return RegProtos::kBatch;
  if (name == "epoch") return RegProtos::kEpoch;
  throw ArgumentError("unknown reg_protos '" + std::string(name) + "' (expected batch | epoch)");
}

std::string_view RegProtosName(RegProtos r) {
  return r == RegProtos::kBatch ? "batch" : "epoch";
}

double RhoDistance(Rho rho, std::span<const double> a, std::span<const double> b) {
  CheckLength(b, a.size(), "rho operand");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sq += diff * diff;
  }
  return rho == Rho::kSquaredL2 ? sq : std::sqrt(sq + kRhoEps);
}

Vector ForwardFeatures(const ModelParams& params, std::span<const double> x) {
  CheckParams(params);
  CheckLength(x, params.extractor_weights.rows(), "input");
  Vector a1 = Affine(x, params.extractor_weights, params.extractor_bias);
  ReluInPlace(a1);
  Vector f = Affine(a1, params.proj_weights, params.proj_bias);
  ReluInPlace(f);
  return f;
}

Vector ForwardLogits(const ModelParams& params, std::span<const double> features) {
  CheckParams(params);
  CheckLength(features, params.classifier_weights.rows(), "features");
  return AffineDense(features, params.classifier_weights, params.classifier_bias);
}

double CrossEntropy(const ModelParams& params, std::span<const Sample> batch) {
  if (batch.empty()) throw ArgumentError("empty batch");
  const ModelDims dims = params.dims();
  double sum = 0.0;
  for (const Sample& s : batch) {
    CheckSample(s, dims);
    const Vector logits = ForwardLogits(params, ForwardFeatures(params, s.x));
    sum += LogSumExp(logits) - logits[static_cast<std::size_t>(s.y)];
  }
  return sum / static_cast<double>(batch.size());
}

std::pair<LossTerms, Gradients> LossAndGrad(const ModelParams& params,
                                            std::span<const Sample> batch,
                                            const RegularizerSpec& reg) {
  if (batch.empty()) throw ArgumentError("empty batch");
  if (!(reg.lambda >= 0.0)) throw ArgumentError("lambda must be >= 0");
  if (!(reg.mu > 0.0)) throw ArgumentError("mu must be > 0");
  CheckParams(params);
  const ModelDims dims = params.dims();
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<Activations> acts(n);
  LossTerms loss;
  double ce_sum = 0.0;
  std::vector<Vector> dlogits(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Sample& s = batch[k];
    CheckSample(s, dims);
    Activations& a = acts[k];
    a.z1 = Affine(s.x, params.extractor_weights, params.extractor_bias);
    a.a1 = a.z1;
    ReluInPlace(a.a1);
    a.z2 = Affine(a.a1, params.proj_weights, params.proj_bias);
    a.features = a.z2;
    ReluInPlace(a.features);
    const Vector logits = AffineDense(a.features, params.classifier_weights, params.classifier_bias);
    const double lse = LogSumExp(logits);
    ce_sum += lse - logits[static_cast<std::size_t>(s.y)];
    Vector& g = dlogits[k];
    g.resize(dims.classes);
    for (std::size_t c = 0; c < dims.classes; ++c) g[c] = std::exp(logits[c] - lse) * inv_n;
    g[static_cast<std::size_t>(s.y)] -= inv_n;
  }
  loss.cross_entropy = ce_sum / static_cast<double>(n);

  // Per-class batch means and d(lambda * R)/d(class mean).
  std::map<int, Vector> reg_grad_per_sample;
  if (reg.lambda > 0.0 && reg.global_protos != nullptr) {
    std::map<int, std::pair<Vector, std::size_t>> means;
    for (std::size_t k = 0; k < n; ++k) {
      auto& [sum, count] = means[batch[k].y];
      if (sum.empty()) sum.assign(dims.feature, 0.0);
      for (std::size_t i = 0; i < dims.feature; ++i) sum[i] += acts[k].features[i];
      ++count;
    }
    for (auto& [cls, entry] : means) {
      auto it = reg.global_protos->find(cls);
      if (it == reg.global_protos->end()) continue;
      CheckLength(it->second, dims.feature, "global prototype");
      auto& [mean, count] = entry;
      const double inv_count = 1.0 / static_cast<double>(count);
      for (double& v : mean) v *= inv_count;
      const bool fixed = reg.local_protos != nullptr;
      if (fixed) {
        auto local = reg.local_protos->find(cls);
        if (local == reg.local_protos->end()) {
          throw ArgumentError("no local prototype for class " + std::to_string(cls));
        }
        CheckLength(local->second, dims.feature, "local prototype");
        mean = local->second;
      }
      Vector diff(dims.feature);
      double sq = 0.0;
      for (std::size_t i = 0; i < dims.feature; ++i) {
        diff[i] = mean[i] - reg.mu * it->second[i];
        sq += diff[i] * diff[i];
      }
      double scale;
      if (reg.rho == Rho::kSquaredL2) {
        loss.regularizer += sq;
        scale = 2.0;
      } else {
        const double dist = std::sqrt(sq + kRhoEps);
        loss.regularizer += dist;
        scale = 1.0 / dist;
      }
      if (fixed) continue;
      // Each of the `count` samples contributes 1/count to the mean.
      for (double& v : diff) v *= reg.lambda * scale * inv_count;
      reg_grad_per_sample.emplace(cls, std::move(diff));
    }
  }
  loss.total = reg.lambda == 0.0 ? loss.cross_entropy
                                 : loss.cross_entropy + reg.lambda * loss.regularizer;

  Gradients grads = ModelParams::Zeros(dims);
  for (std::size_t k = 0; k < n; ++k) {
    const Activations& a = acts[k];
    const Vector& dl = dlogits[k];
    AddOuter(grads.classifier_weights, a.features, dl);
    for (std::size_t c = 0; c < dims.classes; ++c) grads.classifier_bias[c] += dl[c];

    Vector dz2 = BackThrough(params.classifier_weights, dl);
    if (auto it = reg_grad_per_sample.find(batch[k].y); it != reg_grad_per_sample.end()) {
      for (std::size_t i = 0; i < dims.feature; ++i) dz2[i] += it->second[i];
    }
    for (std::size_t i = 0; i < dims.feature; ++i)
      if (!(a.z2[i] > 0.0)) dz2[i] = 0.0;
    AddOuter(grads.proj_weights, a.a1, dz2);
    for (std::size_t i = 0; i < dims.feature; ++i) grads.proj_bias[i] += dz2[i];

    Vector dz1 = BackThrough(params.proj_weights, dz2);
    for (std::size_t i = 0; i < dims.hidden; ++i)
      if (!(a.z1[i] > 0.0)) dz1[i] = 0.0;
    AddOuter(grads.extractor_weights, batch[k].x, dz1);
    for (std::size_t i = 0; i < dims.hidden; ++i) grads.extractor_bias[i] += dz1[i];
  }
  return {loss, std::move(grads)};
}

ModelParams SgdStep(const ModelParams& params, const Gradients& grads, double lr) {
  if (!(lr >= 0.0)) throw ArgumentError("learning rate must be >= 0");
  if (params.dims() != grads.dims() || grads.extractor_bias.size() != params.extractor_bias.size() ||
      grads.proj_bias.size() != params.proj_bias.size() ||
      grads.classifier_bias.size() != params.classifier_bias.size()) {
    throw ShapeError("gradient shape does not match parameters");
  }
  ModelParams out = params;
  std::vector<std::span<const double>> g;
  grads.ForEachTensor([&](std::span<const double> t) { g.push_back(t); });
  std::size_t idx = 0;
  out.ForEachTensor([&](std::span<double> t) {
    const auto& gt = g[idx++];
    for (std::size_t i = 0; i < t.size(); ++i) t[i] -= lr * gt[i];
  });
  return out;
}

}  // namespace tinyproto
