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

#include "tinyproto/experiment.h"

#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include "json.hpp"
#include <spdlog/spdlog.h>

#include "tinyproto/datagen.h"
#include "tinyproto/errors.h"
#include "tinyproto/masking.h"
#include "tinyproto/rng.h"

namespace tinyproto {
namespace {

enum Stream : std::uint64_t {
  kDataStream = 1,
  kPartitionStream = 2,
  kSplitStream = 3,
  kInitStream = 4,
  kMaskStream = 5,
  kRoundStream = 6,
};

}  // namespace

Federation BuildFederation(const ExperimentConfig& cfg) {
  if (auto bad = ValidateConfig(cfg); !bad.empty()) throw ConfigError(std::move(bad));

  Dataset ds;
  if (!cfg.data.empty()) {
    ds = ReadCsvDataset(cfg.data);
    std::vector<std::string> bad;
    if (ds.input_dim != cfg.D)
      bad.push_back(fmt::format("config.D: {} but '{}' has {} features", cfg.D, cfg.data, ds.input_dim));
    if (ds.classes > cfg.K)
      bad.push_back(fmt::format("config.K: {} but '{}' has labels up to {}", cfg.K, cfg.data, ds.classes - 1));
    if (!bad.empty()) throw ConfigError(std::move(bad));
    ds.classes = cfg.K;
  } else {
    ds = MakeBlobs(cfg.K, cfg.D, cfg.per_class, cfg.sigma, DeriveSeed(cfg.seed, {kDataStream}));
  }

  PartitionSpec spec;
  spec.clients = cfg.M;
  spec.alpha = cfg.alpha;
  spec.seed = DeriveSeed(cfg.seed, {kPartitionStream});
  spec.train_fraction = cfg.train_fraction;
  Partition part = DirichletPartition(ds, spec);

  const ModelDims dims{cfg.D, cfg.hidden, cfg.d, cfg.K};
  Federation fed;
  for (std::size_t i = 0; i < part.shards.size(); ++i) {
    const int id = static_cast<int>(i);
    if (part.shards[i].size() < 2) {
      spdlog::warn("client {} has {} samples; skipping", id, part.shards[i].size());
      fed.skipped_clients.push_back(id);
      continue;
    }
    auto [train, test] = SplitTrainTest(part.shards[i], cfg.train_fraction,
                                        DeriveSeed(cfg.seed, {kSplitStream, i}));
    fed.clients.push_back(MakeClient(id, std::move(train), std::move(test), dims,
                                     DeriveSeed(cfg.seed, {kInitStream, i})));
  }
  if (fed.clients.empty()) throw RoundError("every client shard is too small to train on");

  MaskSet masks = cfg.cps ? GenerateMasks(cfg.K, cfg.d, cfg.s, DeriveSeed(cfg.seed, {kMaskStream}))
                          : MaskSet::Dense(cfg.K, cfg.d);
  fed.server = InitServer(std::move(masks), cfg.cps);
  return fed;
}

RoundConfig MakeRoundConfig(const ExperimentConfig& cfg) {
  RoundConfig rc;
  rc.participation = cfg.participation;
  rc.train.lambda = cfg.lambda;
  rc.train.mu = cfg.mu;
  rc.train.lr = cfg.lr;
  rc.train.batch_size = cfg.batch_size;
  rc.train.local_epochs = cfg.local_epochs;
  rc.train.rho = cfg.rho;
  rc.train.reg_protos = cfg.reg_protos;
  rc.aggregator = cfg.aggregator;
  rc.seed = DeriveSeed(cfg.seed, {kRoundStream});
  rc.workers = cfg.workers;
  return rc;
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg, const FrameObserver& observer) {
  return RunExperiment(cfg, BuildFederation(cfg), observer);
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg, Federation federation,
                               const FrameObserver& observer) {
  const RoundConfig rc = MakeRoundConfig(cfg);
  ExperimentResult result;
  result.federation = std::move(federation);
  ExperimentSummary& sum = result.summary;
  sum.active_clients = result.federation.clients.size();
  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    RoundReport rep = RunRound(result.federation.server, result.federation.clients, rc, observer);
    spdlog::info("round {:>4}  acc {:.4f}  loss {:.4f}  up {}  down {}  masks {}", rep.round,
                 rep.mean_test_accuracy, rep.mean_train_loss, rep.uplink_params,
                 rep.downlink_params, rep.mask_params);
    if (rep.mean_test_accuracy > sum.best_mean_test_accuracy || sum.best_round == 0) {
      sum.best_mean_test_accuracy = rep.mean_test_accuracy;
      sum.best_round = rep.round;
    }
    sum.total_uplink_params += rep.uplink_params;
    sum.total_downlink_params += rep.downlink_params;
    sum.total_mask_params += rep.mask_params;
    sum.wall_time_seconds += rep.wall_time.count();
    result.rounds.push_back(std::move(rep));
  }
  sum.total_params = sum.total_uplink_params + sum.total_downlink_params + sum.total_mask_params;
  return result;
}

std::string RoundsCsv(const std::vector<RoundReport>& rounds) {
  std::string out =
      "round,mean_test_accuracy,mean_train_loss,uplink_params,downlink_params,mask_params,"
      "count_values,uplink_bytes,downlink_bytes,mask_bytes,sampled_clients,per_client_accuracy\n";
  for (const RoundReport& r : rounds) {
    std::string sampled, per_client;
    for (int id : r.sampled_clients) sampled += (sampled.empty() ? "" : ";") + std::to_string(id);
    for (double a : r.per_client_accuracy)
      per_client += (per_client.empty() ? "" : ";") + fmt::format("{:.6f}", a);
    out += fmt::format("{},{:.6f},{:.6f},{},{},{},{},{},{},{},{},{}\n", r.round, r.mean_test_accuracy,
                       r.mean_train_loss, r.uplink_params, r.downlink_params, r.mask_params,
                       r.count_values, r.uplink_bytes, r.downlink_bytes, r.mask_bytes, sampled,
                       per_client);
  }
  return out;
}

std::string SummaryJson(const ExperimentConfig& cfg, const ExperimentSummary& s) {
  nlohmann::ordered_json j;
  j["best_mean_test_accuracy"] = s.best_mean_test_accuracy;
  j["best_round"] = s.best_round;
  j["rounds"] = cfg.rounds;
  j["active_clients"] = s.active_clients;
  j["total_uplink_params"] = s.total_uplink_params;
  j["total_downlink_params"] = s.total_downlink_params;
  j["total_mask_params"] = s.total_mask_params;
  j["total_params"] = s.total_params;
  j["total_params_millions"] = static_cast<double>(s.total_params) / 1e6;
  j["wall_time_seconds"] = s.wall_time_seconds;
  nlohmann::ordered_json c;
  c["seed"] = cfg.seed;
  c["M"] = cfg.M;
  c["K"] = cfg.K;
  c["D"] = cfg.D;
  c["hidden"] = cfg.hidden;
  c["d"] = cfg.d;
  c["s"] = cfg.s;
  c["alpha"] = cfg.alpha;
  c["lambda"] = cfg.lambda;
  c["mu"] = cfg.mu;
  c["lr"] = cfg.lr;
  c["batch_size"] = cfg.batch_size;
  c["local_epochs"] = cfg.local_epochs;
  c["participation"] = cfg.participation;
  c["aggregator"] = std::string(AggregatorName(cfg.aggregator));
  c["cps"] = cfg.cps ? "on" : "off";
  c["rho"] = std::string(RhoName(cfg.rho));
  c["reg_protos"] = std::string(RegProtosName(cfg.reg_protos));
  j["config"] = std::move(c);
  return j.dump(2) + "\n";
}

void WriteOutputs(const std::string& dir, const ExperimentConfig& cfg, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write = [&](const char* name, const std::string& body) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}/{}", dir, name));
    out << body;
  };
  write("rounds.csv", RoundsCsv(result.rounds));
  write("summary.json", SummaryJson(cfg, result.summary));
  write("masks.txt", result.federation.server.mask_set.ToText());
}

}  // namespace tinyproto
