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
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tinyproto/datagen.h"
#include "tinyproto/masking.h"
#include "tinyproto/numerics.h"
#include "tinyproto/prototypes.h"

namespace tinyproto {

struct TrainConfig {
  double lambda = 1.0;
  double mu = 1.0;  // global prototype scaling constant
  double lr = 0.01;
  std::size_t batch_size = 32;
  std::size_t local_epochs = 1;
  Rho rho = Rho::kSquaredL2;
  RegProtos reg_protos = RegProtos::kEpoch;
  // Multiply each upload by the local class count (scaled aggregation).
  bool scale_uploads = true;
};

struct ClientState {
  int client_id = 0;
  ModelParams params;
  std::vector<Sample> train;
  std::vector<Sample> test;
  ClassCounts class_counts;  // of `train`
  std::optional<MaskSet> mask_set;
  // Reconstructed global prototypes from the last download. Classes whose
  // global prototype is identically zero (never aggregated) are absent.
  std::map<int, SparseProto> global_sparse;
  // Dense local prototypes after the last local update.
  std::map<int, Prototype> local_protos;
};

// Fresh client with independently initialized weights and prototypes from
// the initial model, so it can answer predictions before its first round.
ClientState MakeClient(int client_id, std::vector<Sample> train, std::vector<Sample> test,
                       const ModelDims& dims, std::uint64_t init_seed);

struct LocalUpdateResult {
  // Compressed local prototypes for classes with n_{i,j} > 0, multiplied by
  // n_{i,j} when TrainConfig::scale_uploads is set.
  std::map<int, CompressedPrototype> uploads;
  double mean_loss = 0.0;
  std::size_t steps = 0;
};

// One round of client work: reconstruct the downloaded global prototypes,
// train for local_epochs epochs of minibatch SGD on cross-entropy plus
// lambda * sum_j rho(c_j, mu * g_j) (lambda forced to 0 on the first
// round), recompute local prototypes and compress them for upload.
//
// With RegProtos::kEpoch (the default) the regularizer compares against the
// local prototypes recomputed over the whole shard at the start of each
// epoch. They are constants, so the term is reported in the loss but does
// not move the parameters. RegProtos::kBatch uses the differentiable batch
// class means instead.
//
// Each epoch visits the training set in the order Permutation(n,
// DeriveSeed(shuffle_seed, {epoch})). Throws ProtocolError if the client
// has no masks yet. An empty training shard yields an empty result.
LocalUpdateResult LocalUpdate(ClientState& state,
                              const std::map<int, CompressedPrototype>& global_comp,
                              const TrainConfig& cfg, bool first_round,
                              std::uint64_t shuffle_seed);

// Per-class mean of the feature extractor over the training shard.
std::map<int, Prototype> ComputeLocalPrototypes(const ModelParams& params,
                                                std::span<const Sample> shard);
std::map<int, Prototype> ComputeLocalPrototypes(const ClientState& state);

// Nearest local prototype in L2, over locally present classes only; ties go
// to the lowest class id. Throws InferenceError if there are no prototypes.
int Predict(const ClientState& state, std::span<const double> x);
int PredictFromFeatures(const std::map<int, Prototype>& protos, std::span<const double> features);

// Fraction of `samples` that Predict labels correctly; 0 for an empty set.
double Accuracy(const ClientState& state, std::span<const Sample> samples);

}  // namespace tinyproto
