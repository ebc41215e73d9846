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
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tinyproto/numerics.h"

namespace tinyproto {

struct Dataset {
  std::vector<Sample> samples;
  std::size_t classes = 0;  // K
  std::size_t input_dim = 0;  // D

  std::map<int, std::uint64_t> ClassHistogram() const;
};

// Gaussian blobs: class j is centred on a seeded uniform point of the unit
// sphere scaled to radius 4, with isotropic noise of standard deviation
// sigma. Samples are emitted class by class.
Dataset MakeBlobs(std::size_t K, std::size_t D, std::size_t per_class, double sigma,
                  std::uint64_t seed);

struct PartitionSpec {
  std::size_t clients = 1;    // M
  double alpha = 0.1;         // Dirichlet concentration
  std::uint64_t seed = 0;
  double train_fraction = 0.75;
};

using ClassCounts = std::map<int, std::uint64_t>;

ClassCounts CountClasses(const std::vector<Sample>& shard);

struct Partition {
  std::vector<std::vector<Sample>> shards;
  std::vector<ClassCounts> class_counts;
};

// Label skew: for every class, client proportions are drawn from
// Dir(alpha * 1_M) and the class's (shuffled) samples are dealt out by
// largest-remainder rounding of those proportions.
Partition DirichletPartition(const Dataset& ds, const PartitionSpec& spec);

// Seeded shuffle, then the first round(fraction * n) samples (clamped to
// [1, n-1]) become the training split. Throws ArgumentError for n < 2.
std::pair<std::vector<Sample>, std::vector<Sample>> SplitTrainTest(const std::vector<Sample>& shard,
                                                                   double fraction,
                                                                   std::uint64_t seed);

// Reads `y,x_0,...,x_{D-1}` rows after a one-line header. K is one more than
// the largest label seen. Throws ArgumentError naming the offending row.
Dataset ReadCsvDataset(std::istream& in);
Dataset ReadCsvDataset(const std::string& path);

}  // namespace tinyproto
