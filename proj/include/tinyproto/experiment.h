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

#include <cstdint>
#include <string>
#include <vector>

#include "tinyproto/client.h"
#include "tinyproto/config.h"
#include "tinyproto/server.h"

namespace tinyproto {

// Clients and server ready for round 1.
struct Federation {
  ServerState server;
  std::vector<ClientState> clients;
  // Clients dropped at setup because their shard could not be split.
  std::vector<int> skipped_clients;
};

// Builds the dataset (blobs or CSV), partitions it, splits each shard and
// initializes one model per client. Shards with fewer than two samples are
// skipped with a warning.
Federation BuildFederation(const ExperimentConfig& cfg);

struct ExperimentSummary {
  double best_mean_test_accuracy = 0.0;
  std::uint32_t best_round = 0;
  std::uint64_t total_uplink_params = 0;
  std::uint64_t total_downlink_params = 0;
  std::uint64_t total_mask_params = 0;
  std::uint64_t total_params = 0;  // uplink + downlink + masks
  std::size_t active_clients = 0;
  double wall_time_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<RoundReport> rounds;
  ExperimentSummary summary;
  Federation federation;  // final state
};

RoundConfig MakeRoundConfig(const ExperimentConfig& cfg);

ExperimentResult RunExperiment(const ExperimentConfig& cfg, const FrameObserver& observer = {});
// Runs rounds on an already-built federation.
ExperimentResult RunExperiment(const ExperimentConfig& cfg, Federation federation,
                               const FrameObserver& observer = {});

// One RoundReport per row. Excludes wall time so identical runs give
// identical bytes.
std::string RoundsCsv(const std::vector<RoundReport>& rounds);

std::string SummaryJson(const ExperimentConfig& cfg, const ExperimentSummary& summary);

// Writes rounds.csv, summary.json and masks.txt into `dir` (created if needed).
void WriteOutputs(const std::string& dir, const ExperimentConfig& cfg, const ExperimentResult& result);

}  // namespace tinyproto
