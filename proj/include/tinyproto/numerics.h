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

// Dense linear algebra and the fixed input -> hidden -> feature -> logits
// network used by every client. Gradients are derived by hand for the
// combined cross-entropy + prototype-regularization loss.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace tinyproto {

using Vector = std::vector<double>;

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct ModelDims {
  std::size_t input = 0;     // D
  std::size_t hidden = 0;    // h
  std::size_t feature = 0;   // d, the prototype dimension
  std::size_t classes = 0;   // K

  bool operator==(const ModelDims&) const = default;
};

// Feature extractor (two ReLU layers) and linear classifier.
struct ModelParams {
  Matrix extractor_weights;   // D x h
  Vector extractor_bias;      // h
  Matrix proj_weights;        // h x d
  Vector proj_bias;           // d
  Matrix classifier_weights;  // d x K
  Vector classifier_bias;     // K

  static ModelParams Zeros(const ModelDims& dims);

  ModelDims dims() const;

  // Visits every tensor as a flat span, in declaration order.
  template <typename F>
  void ForEachTensor(F&& f) {
    f(extractor_weights.data());
    f(std::span<double>(extractor_bias));
    f(proj_weights.data());
    f(std::span<double>(proj_bias));
    f(classifier_weights.data());
    f(std::span<double>(classifier_bias));
  }
  template <typename F>
  void ForEachTensor(F&& f) const {
    f(extractor_weights.data());
    f(std::span<const double>(extractor_bias));
    f(proj_weights.data());
    f(std::span<const double>(proj_bias));
    f(classifier_weights.data());
    f(std::span<const double>(classifier_bias));
  }

  std::size_t ParameterCount() const;
  bool AllFinite() const;

  bool operator==(const ModelParams&) const = default;
};

// Same layout as the parameters they differentiate.
using Gradients = ModelParams;

// He-uniform weights, zero biases.
ModelParams InitParams(const ModelDims& dims, std::uint64_t seed);

// Distance used by the prototype regularizer.
enum class Rho {
  kSquaredL2,  // ||a - b||^2
  kL2Eps,      // sqrt(||a - b||^2 + 1e-8)
};

Rho ParseRho(std::string_view name);
std::string_view RhoName(Rho rho);

double RhoDistance(Rho rho, std::span<const double> a, std::span<const double> b);

// Source of the local prototype c_j inside the regularizer.
enum class RegProtos {
  kBatch,  // class means of the current minibatch features (differentiable)
  kEpoch,  // fixed prototypes supplied by the caller; no gradient
};

RegProtos ParseRegProtos(std::string_view name);
std::string_view RegProtosName(RegProtos r);

struct Sample {
  Vector x;
  int y = 0;

  bool operator==(const Sample&) const = default;
};

// ReLU(ReLU(x W1 + b1) W2 + b2).
Vector ForwardFeatures(const ModelParams& params, std::span<const double> x);

// features Wc + bc.
Vector ForwardLogits(const ModelParams& params, std::span<const double> features);

// Mean cross-entropy of softmax(logits) against the labels.
double CrossEntropy(const ModelParams& params, std::span<const Sample> batch);

struct LossTerms {
  double total = 0.0;
  double cross_entropy = 0.0;
  double regularizer = 0.0;  // R before multiplying by lambda
};

struct RegularizerSpec {
  // Reconstructed (dense, length d) global prototypes by class. A class
  // without an entry contributes nothing to the regularizer.
  const std::map<int, Vector>* global_protos = nullptr;
  double lambda = 0.0;
  double mu = 1.0;
  Rho rho = Rho::kSquaredL2;
  // When set, c_j is taken from here instead of the batch, so the
  // regularizer adds to the loss but not to the gradient.
  const std::map<int, Vector>* local_protos = nullptr;
};

// Loss = mean CE over the batch + lambda * sum_j rho(c_j, mu * g_j) over the
// classes j present in the batch, where g_j is the global prototype and c_j
// is either the mean feature vector of the batch samples labelled j (the
// minibatch estimate of the class-j local prototype under the current
// parameters) or, with RegularizerSpec::local_protos, a fixed vector.
// Gradients are exact for the returned total.
std::pair<LossTerms, Gradients> LossAndGrad(const ModelParams& params,
                                            std::span<const Sample> batch,
                                            const RegularizerSpec& reg);

// params - lr * grads.
ModelParams SgdStep(const ModelParams& params, const Gradients& grads, double lr);

}  // namespace tinyproto
