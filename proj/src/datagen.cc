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

#include "tinyproto/datagen.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "tinyproto/errors.h"
#include "tinyproto/rng.h"

namespace tinyproto {
namespace {

constexpr double kBlobRadius = 4.0;

// Largest-remainder apportionment of n items by proportions p. Ties on the
// fractional part go to the lower index.
std::vector<std::size_t> Apportion(std::size_t n, const std::vector<double>& p) {
  std::vector<std::size_t> counts(p.size(), 0);
  std::vector<double> frac(p.size(), 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double quota = static_cast<double>(n) * p[i];
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    frac[i] = quota - std::floor(quota);
    assigned += counts[i];
  }
  // Float rounding can leave the floors summing slightly above n.
  while (assigned > n) {
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(p.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % order.size()) {
    ++counts[order[k]];
    ++assigned;
  }
  return counts;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::map<int, std::uint64_t> Dataset::ClassHistogram() const { return CountClasses(samples); }

ClassCounts CountClasses(const std::vector<Sample>& shard) {
  ClassCounts counts;
  for (const Sample& s : shard) ++counts[s.y];
  return counts;
}

Dataset MakeBlobs(std::size_t K, std::size_t D, std::size_t per_class, double sigma,
                  std::uint64_t seed) {
  if (K < 1 || D < 1 || per_class < 1) throw ArgumentError("K, D and per_class must be >= 1");
  if (!(sigma > 0.0)) throw ArgumentError("sigma must be > 0");

  Rng rng(seed);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> centers(K, Vector(D));
  for (Vector& c : centers) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : c) {
        v = normal(rng);
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : c) v = kBlobRadius * v / norm;
  }

  Dataset ds;
  ds.classes = K;
  ds.input_dim = D;
  ds.samples.reserve(K * per_class);
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t n = 0; n < per_class; ++n) {
      Sample s{Vector(D), static_cast<int>(j)};
      for (std::size_t i = 0; i < D; ++i) s.x[i] = centers[j][i] + sigma * normal(rng);
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

Partition DirichletPartition(const Dataset& ds, const PartitionSpec& spec) {
  if (spec.clients < 1) throw ArgumentError("need at least one client");
  if (!(spec.alpha > 0.0)) throw ArgumentError("alpha must be > 0");
  if (ds.samples.empty()) throw ArgumentError("dataset is empty");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) by_class[ds.samples[i].y].push_back(i);

  Partition part;
  part.shards.resize(spec.clients);
  Rng rng(spec.seed);
  boost::random::gamma_distribution<double> gamma(spec.alpha, 1.0);
  for (auto& [cls, indices] : by_class) {
    Shuffle(indices, rng);
    std::vector<double> p(spec.clients);
    double total = 0.0;
    for (double& v : p) {
      v = gamma(rng);
      total += v;
    }
    if (total > 0.0) {
      for (double& v : p) v /= total;
    } else {
      // Every draw underflowed (tiny alpha): the mass goes to one client.
      std::fill(p.begin(), p.end(), 0.0);
      p[static_cast<std::size_t>(UniformBelow(rng, spec.clients))] = 1.0;
    }
    const auto counts = Apportion(indices.size(), p);
    std::size_t next = 0;
    for (std::size_t c = 0; c < spec.clients; ++c)
      for (std::size_t k = 0; k < counts[c]; ++k) part.shards[c].push_back(ds.samples[indices[next++]]);
  }
  part.class_counts.reserve(spec.clients);
  for (const auto& shard : part.shards) part.class_counts.push_back(CountClasses(shard));
  return part;
}

std::pair<std::vector<Sample>, std::vector<Sample>> SplitTrainTest(const std::vector<Sample>& shard,
                                                                   double fraction,
                                                                   std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ArgumentError("train fraction must be in (0, 1)");
  if (shard.size() < 2) {
    throw ArgumentError("degenerate split: shard has " + std::to_string(shard.size()) + " samples");
  }
  const std::size_t n = shard.size();
  const auto order = Permutation(n, seed);
  auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  std::vector<Sample> train, test;
  train.reserve(n_train);
  test.reserve(n - n_train);
  for (std::size_t k = 0; k < n; ++k) (k < n_train ? train : test).push_back(shard[order[k]]);
  return {std::move(train), std::move(test)};
}

Dataset ReadCsvDataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("csv: missing header row");
  Dataset ds;
  int max_label = -1;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (Trim(line).empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      const std::string t = Trim(cell);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw ArgumentError("csv row " + std::to_string(row) + ", column " + std::to_string(col) +
                            ": '" + t + "' is not a number");
      }
      cells.push_back(v);
    }
    if (cells.size() < 2) {
      throw ArgumentError("csv row " + std::to_string(row) + ": need a label and at least one feature");
    }
    if (cells[0] < 0 || cells[0] != std::floor(cells[0])) {
      throw ArgumentError("csv row " + std::to_string(row) + ": label must be a non-negative integer");
    }
    if (ds.input_dim == 0) ds.input_dim = cells.size() - 1;
    if (cells.size() - 1 != ds.input_dim) {
      throw ArgumentError("csv row " + std::to_string(row) + ": expected " +
                          std::to_string(ds.input_dim) + " features, got " +
                          std::to_string(cells.size() - 1));
    }
    Sample s{Vector(cells.begin() + 1, cells.end()), static_cast<int>(cells[0])};
    max_label = std::max(max_label, s.y);
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.empty()) throw ArgumentError("csv: no data rows");
  ds.classes = static_cast<std::size_t>(max_label + 1);
  return ds;
}

Dataset ReadCsvDataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open csv '" + path + "'");
  return ReadCsvDataset(in);
}

}  // namespace tinyproto
