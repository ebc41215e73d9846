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

#include "tinyproto/client.h"

#include <algorithm>
#include <limits>
#include <string>

#include <spdlog/spdlog.h>

#include "tinyproto/errors.h"
#include "tinyproto/rng.h"

namespace tinyproto {

ClientState MakeClient(int client_id, std::vector<Sample> train, std::vector<Sample> test,
                       const ModelDims& dims, std::uint64_t init_seed) {
  ClientState state;
  state.client_id = client_id;
  state.params = InitParams(dims, init_seed);
  state.train = std::move(train);
  state.test = std::move(test);
  state.class_counts = CountClasses(state.train);
  state.local_protos = ComputeLocalPrototypes(state);
  return state;
}

std::map<int, Prototype> ComputeLocalPrototypes(const ModelParams& params,
                                                std::span<const Sample> shard) {
  std::map<int, std::pair<Vector, std::uint64_t>> sums;
  for (const Sample& s : shard) {
    const Vector f = ForwardFeatures(params, s.x);
    auto& [sum, n] = sums[s.y];
    if (sum.empty()) sum.assign(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) sum[i] += f[i];
    ++n;
  }
  std::map<int, Prototype> out;
  for (auto& [cls, entry] : sums) {
    auto& [sum, n] = entry;
    for (double& v : sum) v /= static_cast<double>(n);
    out.emplace(cls, Prototype{cls, std::move(sum)});
  }
  return out;
}

std::map<int, Prototype> ComputeLocalPrototypes(const ClientState& state) {
  return ComputeLocalPrototypes(state.params, state.train);
}

LocalUpdateResult LocalUpdate(ClientState& state,
                              const std::map<int, CompressedPrototype>& global_comp,
                              const TrainConfig& cfg, bool first_round,
                              std::uint64_t shuffle_seed) {
  if (!state.mask_set) {
    throw ProtocolError("client " + std::to_string(state.client_id) + " has no masks");
  }
  if (cfg.batch_size == 0) throw ArgumentError("batch_size must be >= 1");
  const MaskSet& masks = *state.mask_set;

  state.global_sparse.clear();
  std::map<int, Vector> targets;
  for (const auto& [cls, comp] : global_comp) {
    SparseProto sparse = Reconstruct(comp, masks.at(cls));
    const bool empty = std::all_of(sparse.values.begin(), sparse.values.end(),
                                   [](double v) { return v == 0.0; });
    if (empty) continue;
    targets.emplace(cls, sparse.values);
    state.global_sparse.emplace(cls, std::move(sparse));
  }

  LocalUpdateResult result;
  if (state.train.empty()) {
    spdlog::warn("client {} has an empty training shard; skipping", state.client_id);
    return result;
  }

  RegularizerSpec reg;
  reg.global_protos = &targets;
  reg.lambda = first_round ? 0.0 : cfg.lambda;
  reg.mu = cfg.mu;
  reg.rho = cfg.rho;

  const std::size_t n = state.train.size();
  std::vector<Sample> batch;
  double loss_sum = 0.0;
  std::map<int, Vector> epoch_protos;
  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    if (cfg.reg_protos == RegProtos::kEpoch) {
      epoch_protos.clear();
      for (auto& [cls, proto] : ComputeLocalPrototypes(state.params, state.train))
        epoch_protos.emplace(cls, std::move(proto.values));
      reg.local_protos = &epoch_protos;
    }
    const auto order = Permutation(n, DeriveSeed(shuffle_seed, {epoch}));
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(state.train[order[k]]);
      auto [loss, grads] = LossAndGrad(state.params, batch, reg);
      state.params = SgdStep(state.params, grads, cfg.lr);
      loss_sum += loss.total;
      ++result.steps;
    }
  }
  result.mean_loss = result.steps ? loss_sum / static_cast<double>(result.steps) : 0.0;

  state.local_protos = ComputeLocalPrototypes(state);
  for (const auto& [cls, proto] : state.local_protos) {
    CompressedPrototype comp = Compress(proto, masks.at(cls));
    if (cfg.scale_uploads) {
      const double count = static_cast<double>(state.class_counts.at(cls));
      for (double& v : comp.values) v *= count;
    }
    result.uploads.emplace(cls, std::move(comp));
  }
  return result;
}

int PredictFromFeatures(const std::map<int, Prototype>& protos, std::span<const double> features) {
  if (protos.empty()) throw InferenceError("no local prototypes to predict with");
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& [cls, proto] : protos) {
    if (proto.values.size() != features.size()) throw ShapeError("prototype/feature length mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      const double diff = features[i] - proto.values[i];
      sq += diff * diff;
    }
    // Strict comparison keeps the lowest class id on ties.
    if (best < 0 || sq < best_dist) {
      best = cls;
      best_dist = sq;
    }
  }
  return best;
}

int Predict(const ClientState& state, std::span<const double> x) {
  return PredictFromFeatures(state.local_protos, ForwardFeatures(state.params, x));
}

double Accuracy(const ClientState& state, std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const Sample& s : samples) correct += (Predict(state, s.x) == s.y);
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace tinyproto
