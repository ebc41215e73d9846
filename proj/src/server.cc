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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "tinyproto/errors.h"
#include "tinyproto/rng.h"

namespace tinyproto {
namespace {

constexpr std::uint64_t kSamplingStream = 0x5a;
constexpr std::uint64_t kShuffleStream = 0x5b;

template <typename Job>
void ParallelFor(std::size_t n, std::size_t workers, Job&& job) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  const std::size_t count = std::min(workers, n);
  pool.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

ServerState InitServer(MaskSet masks, bool cps) {
  ServerState server;
  const std::size_t width = masks.s;
  for (std::size_t j = 0; j < masks.classes(); ++j) {
    const int cls = static_cast<int>(j);
    server.global_comp.emplace(cls, CompressedPrototype{cls, Vector(width, 0.0)});
  }
  server.mask_set = std::move(masks);
  server.cps = cps;
  return server;
}

std::vector<std::size_t> SampleClients(std::size_t M, double participation, std::uint64_t seed,
                                       std::uint32_t round) {
  if (!(participation > 0.0 && participation <= 1.0)) {
    throw ArgumentError("participation must be in (0, 1]");
  }
  const auto m = static_cast<std::size_t>(std::ceil(participation * static_cast<double>(M) - 1e-9));
  auto order = Permutation(M, DeriveSeed(seed, {kSamplingStream, round}));
  order.resize(std::min(m, M));
  std::sort(order.begin(), order.end());
  return order;
}

RoundReport RunRound(ServerState& server, std::vector<ClientState>& clients,
                     const RoundConfig& cfg, const FrameObserver& observer) {
  const auto started = std::chrono::steady_clock::now();
  const std::uint32_t t = server.round + 1;
  const auto sampled = SampleClients(clients.size(), cfg.participation, cfg.seed, t);
  if (sampled.empty()) throw RoundError("round " + std::to_string(t) + " sampled no clients");
  server.round = t;

  RoundReport report;
  report.round = t;
  auto emit = [&](int client_id, Direction dir, const std::vector<std::uint8_t>& bytes) {
    if (observer) observer(FrameEvent{t, client_id, dir, bytes});
  };

  // Downlink. Decoded copies are what the clients act on.
  const Frame globals_frame = MakeGlobalsFrame(t, server.global_comp);
  const auto globals_bytes = EncodeFrame(globals_frame);
  std::vector<std::map<int, CompressedPrototype>> downloads(sampled.size());
  for (std::size_t k = 0; k < sampled.size(); ++k) {
    ClientState& client = clients[sampled[k]];
    if (!server.selected_ever.contains(client.client_id)) {
      if (server.cps) {
        const auto bytes = EncodeFrame(MakeMasksFrame(t, server.mask_set));
        emit(client.client_id, Direction::kDownlink, bytes);
        const Frame received = DecodeFrame(bytes);
        report.mask_params += received.ValueCount();
        report.mask_bytes += bytes.size();
        client.mask_set = ParseMasksFrame(received);
      } else {
        client.mask_set = server.mask_set;
      }
    }
    emit(client.client_id, Direction::kDownlink, globals_bytes);
    const Frame received = DecodeFrame(globals_bytes);
    report.downlink_params += received.ValueCount();
    report.downlink_bytes += globals_bytes.size();
    downloads[k] = ParseGlobalsFrame(received);
  }

  // Local updates; each worker owns exactly one client.
  const bool weighted = cfg.aggregator == Aggregator::kWeighted;
  TrainConfig train = cfg.train;
  train.scale_uploads = cfg.aggregator == Aggregator::kScaled;
  std::vector<std::vector<std::uint8_t>> upload_bytes(sampled.size());
  std::vector<LocalUpdateResult> results(sampled.size());
  ParallelFor(sampled.size(), cfg.workers, [&](std::size_t k) {
    ClientState& client = clients[sampled[k]];
    results[k] = LocalUpdate(client, downloads[k], train, t == 1,
                             DeriveSeed(cfg.seed, {kShuffleStream,
                                                   static_cast<std::uint64_t>(client.client_id), t}));
    upload_bytes[k] = EncodeFrame(
        MakeUploadFrame(t, results[k].uploads, weighted ? &client.class_counts : nullptr));
  });

  // Barrier passed: decode uploads in ascending client order.
  std::map<int, std::vector<ClassContribution>> by_class;
  double loss_sum = 0.0;
  std::size_t trained = 0;
  for (std::size_t k = 0; k < sampled.size(); ++k) {
    const int client_id = clients[sampled[k]].client_id;
    emit(client_id, Direction::kUplink, upload_bytes[k]);
    const Frame frame = DecodeFrame(upload_bytes[k]);
    const ParsedUpload upload = ParseUploadFrame(frame, weighted);
    report.count_values += upload.counts.size();
    report.uplink_params += frame.ValueCount() - upload.counts.size();
    report.uplink_bytes += upload_bytes[k].size();
    for (const auto& [cls, comp] : upload.prototypes) {
      ClassContribution c{client_id, cls, comp.values, std::nullopt};
      if (weighted) c.sample_count = upload.counts.at(cls);
      by_class[cls].push_back(std::move(c));
    }
    if (results[k].steps > 0) {
      loss_sum += results[k].mean_loss;
      ++trained;
    }
    report.sampled_clients.push_back(client_id);
  }
  report.mean_train_loss = trained ? loss_sum / static_cast<double>(trained) : 0.0;

  for (const auto& [cls, contribs] : by_class) {
    server.global_comp[cls] = CompressedPrototype{cls, Aggregate(cfg.aggregator, contribs)};
  }
  for (std::size_t idx : sampled) server.selected_ever.insert(clients[idx].client_id);

  std::size_t correct = 0;
  std::size_t total = 0;
  report.per_client_accuracy.reserve(clients.size());
  for (const ClientState& client : clients) {
    const double acc = Accuracy(client, client.test);
    report.per_client_accuracy.push_back(acc);
    correct += static_cast<std::size_t>(std::llround(acc * static_cast<double>(client.test.size())));
    total += client.test.size();
  }
  report.mean_test_accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  report.wall_time = std::chrono::steady_clock::now() - started;
  return report;
}

}  // namespace tinyproto
