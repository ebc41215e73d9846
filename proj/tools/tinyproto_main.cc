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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "tinyproto/costmodel.h"
#include "tinyproto/errors.h"
#include "tinyproto/experiment.h"
#include "tinyproto/masking.h"

namespace {

int RunCommand(const std::string& config_path, const std::string& out_dir, bool quiet) {
  const tinyproto::ExperimentConfig cfg = tinyproto::LoadConfig(config_path);
  const auto result = tinyproto::RunExperiment(cfg);
  if (!out_dir.empty()) tinyproto::WriteOutputs(out_dir, cfg, result);
  const auto& s = result.summary;
  if (!quiet) {
    fmt::print("best mean test accuracy {:.4f} (round {})\n", s.best_mean_test_accuracy, s.best_round);
    fmt::print("traffic: uplink {} + downlink {} + masks {} = {} params ({}M)\n",
               s.total_uplink_params, s.total_downlink_params, s.total_mask_params,
               s.total_params, tinyproto::FormatMillions(s.total_params));
  }
  return 0;
}

int MasksCommand(std::size_t K, std::size_t d, std::size_t s, std::uint64_t seed,
                 const std::string& out_dir, bool quiet) {
  const auto set = tinyproto::GenerateMasks(K, d, s, seed);
  const std::string text = set.ToText();
  if (!out_dir.empty()) {
    std::ofstream(out_dir + "/masks.txt", std::ios::binary) << text;
  } else {
    std::cout << text;
  }
  if (!quiet && K >= 2) {
    std::cerr << fmt::format("min pairwise Hamming distance {}", tinyproto::MinPairwiseHamming(set));
    if (set.pre_search_min_hamming) {
      std::cerr << fmt::format(" (random start {}, {} candidate swaps)", *set.pre_search_min_hamming,
                               set.search_evaluations);
    }
    std::cerr << "\n";
  }
  return 0;
}

int CostCommand(const std::string& query_path, const std::string& out_dir) {
  std::ifstream in(query_path);
  if (!in) throw tinyproto::ArgumentError("cannot open cost query file '" + query_path + "'");
  const std::string csv = tinyproto::CostCsv(tinyproto::ParseCostQueries(in));
  if (!out_dir.empty()) {
    std::ofstream(out_dir + "/cost.csv", std::ios::binary) << csv;
  } else {
    std::cout << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prototype-based federated learning simulator with class-wise prototype sparsification"};
  app.require_subcommand(1);
  std::string out_dir;
  bool quiet = false;
  app.add_option("--out", out_dir, "Directory for output files");
  app.add_flag("--quiet", quiet, "Only log warnings and errors");

  auto* run = app.add_subcommand("run", "Run a simulation from a key = value config file");
  std::string config_path;
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  auto* masks = app.add_subcommand("masks", "Print the class masks for K classes, dimension d, s ones");
  std::size_t K = 0, d = 0, s = 0;
  std::uint64_t seed = 0;
  masks->add_option("K", K, "Number of classes")->required();
  masks->add_option("d", d, "Prototype dimension")->required();
  masks->add_option("s", s, "Ones per mask")->required();
  masks->add_option("seed", seed, "Mask seed")->required();

  auto* cost = app.add_subcommand("cost", "Evaluate per-round communication cost queries as CSV");
  std::string query_path;
  cost->add_option("queries", query_path, "Query file")->required()->check(CLI::ExistingFile);

  auto* fig = app.add_subcommand("crossover", "FedAvg vs prototype exchange cost table as CSV");
  std::uint64_t backbone = 0;
  std::vector<std::uint64_t> k_range{10, 100, 1000};
  std::vector<std::uint64_t> d_range{64, 256, 512, 1024};
  fig->add_option("--backbone", backbone, "Parameters up to the penultimate layer")->required();
  fig->add_option("--K", k_range, "Class counts");
  fig->add_option("--d", d_range, "Prototype dimensions");

  for (auto* sub : {run, masks, cost, fig}) {
    sub->add_option("--out", out_dir, "Directory for output files");
    sub->add_flag("--quiet", quiet, "Only log warnings and errors");
  }

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*run) return RunCommand(config_path, out_dir, quiet);
    if (*masks) return MasksCommand(K, d, s, seed, out_dir, quiet);
    if (*cost) return CostCommand(query_path, out_dir);
    if (*fig) {
      std::cout << tinyproto::CrossoverCsv(tinyproto::CrossoverTable(backbone, k_range, d_range));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
