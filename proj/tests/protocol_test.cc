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

#include "tinyproto/server.h"

#include <gtest/gtest.h>

#include "tinyproto/costmodel.h"
#include "tinyproto/errors.h"
#include "tinyproto/experiment.h"
#include "tinyproto/frame.h"

namespace tinyproto {
namespace {

ExperimentConfig SmallConfig() {
  ExperimentConfig cfg;
  cfg.seed = 3;
  cfg.M = 5;
  cfg.K = 4;
  cfg.D = 6;
  cfg.hidden = 12;
  cfg.d = 16;
  cfg.s = 3;
  cfg.alpha = 0.5;
  cfg.per_class = 40;
  cfg.rounds = 4;
  return cfg;
}

struct Recorder {
  std::vector<std::pair<FrameEvent, std::vector<std::uint8_t>>> events;
  FrameObserver observer() {
    return [this](const FrameEvent& e) { events.emplace_back(e, std::vector(e.bytes.begin(), e.bytes.end())); };
  }
};

const ClientState& ById(const Federation& fed, int id) {
  for (const auto& c : fed.clients)
    if (c.client_id == id) return c;
  throw std::out_of_range("no client " + std::to_string(id));
}

std::uint64_t ExpectedPrototypeTraffic(const Federation& fed, const std::vector<int>& sampled, std::size_t K,
                                       std::size_t s) {
  std::uint64_t total = 0;
  for (int id : sampled)
    for (const auto& c : fed.clients)
      if (c.client_id == id) total += (c.class_counts.size() + K) * s;
  return total;
}

TEST(SampleClients, FullAndPartial) {
  const auto all = SampleClients(20, 1.0, 1, 1);
  ASSERT_EQ(all.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(all[i], i);
  const auto some = SampleClients(20, 0.25, 1, 1);
  EXPECT_EQ(some.size(), 5u);
  EXPECT_TRUE(std::is_sorted(some.begin(), some.end()));
  EXPECT_EQ(some, SampleClients(20, 0.25, 1, 1));
  EXPECT_EQ(SampleClients(7, 0.3, 1, 1).size(), 3u);
  EXPECT_THROW(SampleClients(5, 0.0, 1, 1), ArgumentError);
}

TEST(RunRound, TwoClientsUplinkExample) {
  ExperimentConfig cfg = SmallConfig();
  Federation fed = BuildFederation(cfg);
  fed.clients.resize(2);
  for (auto& c : fed.clients) {
    std::vector<Sample> keep;
    for (const Sample& s : c.train)
      if (s.y < 2) keep.push_back(s);
    // Make sure both classes are present.
    keep.push_back({c.train[0].x, 0});
    keep.push_back({c.train[0].x, 1});
    c.train = keep;
    c.class_counts = CountClasses(c.train);
  }
  const RoundReport rep = RunRound(fed.server, fed.clients, MakeRoundConfig(cfg));
  EXPECT_EQ(rep.uplink_params, 2u * 2 * 3);
  EXPECT_EQ(rep.downlink_params, 2u * 4 * 3);
  EXPECT_EQ(rep.mask_params, 2u * 4 * 16);
}

TEST(RunRound, MasksOnlyOnFirstParticipation) {
  ExperimentConfig cfg = SmallConfig();
  cfg.participation = 0.4;
  cfg.rounds = 12;
  Recorder rec;
  const ExperimentResult res = RunExperiment(cfg, rec.observer());
  std::map<int, int> mask_frames;
  for (const auto& [e, bytes] : rec.events)
    if (DecodeFrame(bytes).type == FrameType::kMasks) ++mask_frames[e.client_id];
  for (const auto& [id, n] : mask_frames) EXPECT_EQ(n, 1) << "client " << id;

  std::set<int> seen;
  for (const RoundReport& r : res.rounds) {
    std::uint64_t fresh = 0;
    for (int id : r.sampled_clients) fresh += seen.insert(id).second ? 1 : 0;
    EXPECT_EQ(r.mask_params, fresh * cfg.K * cfg.d) << "round " << r.round;
  }
  EXPECT_EQ(res.federation.server.selected_ever, seen);
}

TEST(RunRound, RoundTwoHasNoMaskCost) {
  ExperimentConfig cfg = SmallConfig();
  cfg.rounds = 2;
  const ExperimentResult res = RunExperiment(cfg);
  EXPECT_GT(res.rounds[0].mask_params, 0u);
  EXPECT_EQ(res.rounds[1].mask_params, 0u);
  EXPECT_EQ(res.rounds[0].sampled_clients.size(), res.federation.clients.size());
}

TEST(RunRound, AccountingMatchesFramesAndFormula) {
  ExperimentConfig cfg = SmallConfig();
  cfg.participation = 0.6;
  cfg.rounds = 5;
  Recorder rec;
  const ExperimentResult res = RunExperiment(cfg, rec.observer());
  for (const RoundReport& r : res.rounds) {
    std::uint64_t up = 0, down = 0;
    for (const auto& [e, bytes] : rec.events) {
      if (e.round != r.round) continue;
      const Frame f = DecodeFrame(bytes);
      if (f.type == FrameType::kUpload) up += f.ValueCount();
      if (f.type == FrameType::kGlobals) down += f.ValueCount();
    }
    EXPECT_EQ(r.uplink_params, up);
    EXPECT_EQ(r.downlink_params, down);
    EXPECT_EQ(r.prototype_params(), ExpectedPrototypeTraffic(res.federation, r.sampled_clients, cfg.K, cfg.s));

    CostQuery q;
    q.algorithm = Algorithm::kTinyProto;
    q.K = cfg.K;
    q.s = cfg.s;
    q.K_i.emplace();
    for (int id : r.sampled_clients) q.K_i->push_back(ById(res.federation, id).class_counts.size());
    EXPECT_EQ(Cost(q), r.prototype_params());
  }
}

TEST(RunRound, WorkerCountDoesNotChangeResults) {
  ExperimentConfig one = SmallConfig();
  ExperimentConfig many = one;
  many.workers = 4;
  EXPECT_EQ(RoundsCsv(RunExperiment(one).rounds), RoundsCsv(RunExperiment(many).rounds));
}

TEST(RunExperiment, DeterministicCsv) {
  const ExperimentConfig cfg = SmallConfig();
  const std::string a = RoundsCsv(RunExperiment(cfg).rounds);
  const std::string b = RoundsCsv(RunExperiment(cfg).rounds);
  EXPECT_EQ(a, b);
  ExperimentConfig other = cfg;
  other.seed = 4;
  EXPECT_NE(a, RoundsCsv(RunExperiment(other).rounds));
}

TEST(RunExperiment, SingleRoundSummary) {
  ExperimentConfig cfg = SmallConfig();
  cfg.rounds = 1;
  cfg.lambda = 0.0;
  const ExperimentResult res = RunExperiment(cfg);
  ASSERT_EQ(res.rounds.size(), 1u);
  EXPECT_EQ(res.summary.best_round, 1u);
  EXPECT_EQ(res.summary.best_mean_test_accuracy, res.rounds[0].mean_test_accuracy);
  EXPECT_EQ(res.summary.total_params, res.rounds[0].uplink_params + res.rounds[0].downlink_params +
                                          res.rounds[0].mask_params);
  const std::string json = SummaryJson(cfg, res.summary);
  EXPECT_NE(json.find("\"best_mean_test_accuracy\""), std::string::npos);
}

TEST(RunExperiment, CompressionRatioIsSOverD) {
  ExperimentConfig sparse = SmallConfig();
  ExperimentConfig dense = sparse;
  dense.cps = false;
  const auto a = RunExperiment(sparse), b = RunExperiment(dense);
  for (std::size_t r = 0; r < a.rounds.size(); ++r) {
    EXPECT_EQ(a.rounds[r].uplink_params * dense.d, b.rounds[r].uplink_params * sparse.s);
    EXPECT_EQ(b.rounds[r].mask_params, 0u);
  }
}

TEST(RunExperiment, WeightedSendsCountsSeparately) {
  ExperimentConfig cfg = SmallConfig();
  cfg.aggregator = Aggregator::kWeighted;
  const auto res = RunExperiment(cfg);
  for (const RoundReport& r : res.rounds) {
    std::uint64_t classes = 0;
    for (int id : r.sampled_clients) classes += ById(res.federation, id).class_counts.size();
    EXPECT_EQ(r.count_values, classes);
    EXPECT_EQ(r.uplink_params, classes * cfg.s);
  }
}

TEST(RunExperiment, UnaggregatedClassesKeepPreviousGlobal) {
  ExperimentConfig cfg = SmallConfig();
  cfg.alpha = 0.01;
  cfg.rounds = 2;
  const auto res = RunExperiment(cfg);
  std::set<int> present;
  for (const auto& c : res.federation.clients)
    for (const auto& [cls, n] : c.class_counts) present.insert(cls);
  for (const auto& [cls, g] : res.federation.server.global_comp) {
    const bool zero = std::all_of(g.values.begin(), g.values.end(), [](double v) { return v == 0.0; });
    if (!present.contains(cls)) EXPECT_TRUE(zero);
  }
}

}  // namespace
}  // namespace tinyproto
