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

// Round orchestration. Every exchange between the server and a client goes
// through EncodeFrame/DecodeFrame, and the traffic numbers in RoundReport
// are counted from the decoded frames.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "tinyproto/aggregation.h"
#include "tinyproto/client.h"
#include "tinyproto/frame.h"
#include "tinyproto/masking.h"

namespace tinyproto {

struct ServerState {
  MaskSet mask_set;
  // One entry per class, length payload_dim. Classes that never received a
  // contribution stay at zero.
  std::map<int, CompressedPrototype> global_comp;
  std::set<int> selected_ever;  // S^t
  std::uint32_t round = 0;
  bool cps = true;  // when false masks are all-ones and never transmitted
};

// Masks and zero global prototypes for K classes.
ServerState InitServer(MaskSet masks, bool cps);

struct RoundConfig {
  double participation = 1.0;
  TrainConfig train;
  Aggregator aggregator = Aggregator::kScaled;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

enum class Direction { kDownlink, kUplink };

struct FrameEvent {
  std::uint32_t round = 0;
  int client_id = 0;
  Direction direction = Direction::kDownlink;
  std::span<const std::uint8_t> bytes;
};

using FrameObserver = std::function<void(const FrameEvent&)>;

struct RoundReport {
  std::uint32_t round = 0;
  std::vector<int> sampled_clients;
  // Pooled over every client's test split.
  double mean_test_accuracy = 0.0;
  std::vector<double> per_client_accuracy;  // indexed like the clients list
  double mean_train_loss = 0.0;

  // Prototype values exchanged, counted as parameters.
  std::uint64_t uplink_params = 0;
  std::uint64_t downlink_params = 0;
  // Mask entries sent to first-time participants.
  std::uint64_t mask_params = 0;
  // Sample counts sent in the clear (weighted aggregation only).
  std::uint64_t count_values = 0;

  std::uint64_t uplink_bytes = 0;
  std::uint64_t downlink_bytes = 0;
  std::uint64_t mask_bytes = 0;

  std::chrono::duration<double> wall_time{0};

  std::uint64_t prototype_params() const { return uplink_params + downlink_params; }
};

// The ceil(participation * M) clients sampled for round t, ascending by
// position in the clients list.
std::vector<std::size_t> SampleClients(std::size_t M, double participation, std::uint64_t seed,
                                       std::uint32_t round);

// One communication round:
//   1. sample clients;
//   2. send MASKS to first-time participants, GLOBALS to everyone sampled;
//   3. run LocalUpdate on each sampled client (in parallel when workers > 1);
//   4. after all uploads arrive, aggregate per class in ascending client order
//      (classes with no contribution keep their previous global prototype);
//   5. extend S^t;
//   6. evaluate every client on its test split.
RoundReport RunRound(ServerState& server, std::vector<ClientState>& clients,
                     const RoundConfig& cfg, const FrameObserver& observer = {});

}  // namespace tinyproto
