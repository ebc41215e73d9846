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

#include "tinyproto/costmodel.h"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "tinyproto/errors.h"

namespace tinyproto {
namespace {

template <typename T>
const T& Need(const std::optional<T>& field, const char* name, Algorithm a) {
  if (!field) {
    throw ArgumentError(fmt::format("cost query for {} is missing field '{}'", AlgorithmName(a), name));
  }
  return *field;
}

std::uint64_t PrototypeRows(const CostQuery& q) {
  const auto& k_i = Need(q.K_i, "K_i", q.algorithm);
  const std::uint64_t K = Need(q.K, "K", q.algorithm);
  if (q.M && *q.M != k_i.size()) {
    throw ArgumentError(fmt::format("cost query: M = {} but K_i lists {} clients", *q.M, k_i.size()));
  }
  std::uint64_t rows = 0;
  for (std::uint64_t k : k_i) rows += k + K;
  return rows;
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T ParseScalar(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ArgumentError(fmt::format("cost query field '{}': '{}' is not a valid number", key, text));
  }
  return v;
}

std::vector<std::uint64_t> ParseList(const std::string& key, const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (const auto x = item.find('x'); x != std::string::npos) {
      const auto value = ParseScalar<std::uint64_t>(key, Trim(item.substr(0, x)));
      const auto times = ParseScalar<std::uint64_t>(key, Trim(item.substr(x + 1)));
      out.insert(out.end(), times, value);
    } else {
      out.push_back(ParseScalar<std::uint64_t>(key, item));
    }
  }
  return out;
}

CostQuery ParseBlock(const std::map<std::string, std::string>& kv) {
  CostQuery q;
  auto it = kv.find("algorithm");
  if (it == kv.end()) throw ArgumentError("cost query is missing field 'algorithm'");
  q.algorithm = ParseAlgorithm(it->second);
  for (const auto& [key, value] : kv) {
    if (key == "algorithm") continue;
    else if (key == "M") q.M = ParseScalar<std::uint64_t>(key, value);
    else if (key == "K") q.K = ParseScalar<std::uint64_t>(key, value);
    else if (key == "K_i") q.K_i = ParseList(key, value);
    else if (key == "d") q.d = ParseScalar<std::uint64_t>(key, value);
    else if (key == "s") q.s = ParseScalar<std::uint64_t>(key, value);
    else if (key == "classifier_params") q.classifier_params = ParseList(key, value);
    else if (key == "theta_aux") q.theta_aux = ParseScalar<std::uint64_t>(key, value);
    else if (key == "phi_aux") q.phi_aux = ParseScalar<std::uint64_t>(key, value);
    else if (key == "r") q.r = ParseScalar<double>(key, value);
    else if (key == "full_model_params") q.full_model_params = ParseScalar<std::uint64_t>(key, value);
    else throw ArgumentError(fmt::format("cost query: unknown field '{}'", key));
  }
  return q;
}

}  // namespace

Algorithm ParseAlgorithm(std::string_view name) {
  static const std::map<std::string_view, Algorithm> table = {
      {"LG-FedAvg", Algorithm::kLgFedAvg}, {"FML", Algorithm::kFml},
      {"FedKD", Algorithm::kFedKd},        {"FedDistill", Algorithm::kFedDistill},
      {"FedProto", Algorithm::kFedProto},  {"FedTGP", Algorithm::kFedTgp},
      {"TinyProto", Algorithm::kTinyProto}, {"FedAvg", Algorithm::kFedAvg},
  };
  if (auto it = table.find(name); it != table.end()) return it->second;
  throw ArgumentError(fmt::format("unknown algorithm '{}'", name));
}

std::string_view AlgorithmName(Algorithm a) {
  switch (a) {
    case Algorithm::kLgFedAvg: return "LG-FedAvg";
    case Algorithm::kFml: return "FML";
    case Algorithm::kFedKd: return "FedKD";
    case Algorithm::kFedDistill: return "FedDistill";
    case Algorithm::kFedProto: return "FedProto";
    case Algorithm::kFedTgp: return "FedTGP";
    case Algorithm::kTinyProto: return "TinyProto";
    case Algorithm::kFedAvg: return "FedAvg";
  }
  return "?";
}

std::uint64_t Cost(const CostQuery& q) {
  switch (q.algorithm) {
    case Algorithm::kTinyProto:
      return PrototypeRows(q) * Need(q.s, "s", q.algorithm);
    case Algorithm::kFedProto:
    case Algorithm::kFedTgp:
      return PrototypeRows(q) * Need(q.d, "d", q.algorithm);
    case Algorithm::kFedDistill:
      return PrototypeRows(q) * Need(q.K, "K", q.algorithm);
    case Algorithm::kLgFedAvg: {
      std::uint64_t sum = 0;
      for (std::uint64_t p : Need(q.classifier_params, "classifier_params", q.algorithm)) sum += p;
      return sum * 2;
    }
    case Algorithm::kFml:
      return Need(q.M, "M", q.algorithm) *
             (Need(q.theta_aux, "theta_aux", q.algorithm) + Need(q.phi_aux, "phi_aux", q.algorithm)) * 2;
    case Algorithm::kFedKd: {
      const std::uint64_t base =
          Need(q.M, "M", q.algorithm) *
          (Need(q.theta_aux, "theta_aux", q.algorithm) + Need(q.phi_aux, "phi_aux", q.algorithm)) * 2;
      const double r = Need(q.r, "r", q.algorithm);
      if (!(r >= 0.0)) throw ArgumentError("cost query: r must be >= 0");
      return static_cast<std::uint64_t>(std::llround(static_cast<double>(base) * r));
    }
    case Algorithm::kFedAvg:
      return 2 * Need(q.M, "M", q.algorithm) * Need(q.full_model_params, "full_model_params", q.algorithm);
  }
  throw ArgumentError("unknown algorithm");
}

std::string FormatMillions(std::uint64_t params) {
  const double m = static_cast<double>(params) / 1e6;
  if (params > 0 && m < 0.005) return "<0.01";
  return fmt::format("{:.2f}", m);
}

std::vector<CostQuery> ParseCostQueries(std::istream& in) {
  std::vector<CostQuery> out;
  std::map<std::string, std::string> block;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (!block.empty()) out.push_back(ParseBlock(block));
    block.clear();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = Trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError(fmt::format("cost query line {}: expected key = value", lineno));
    }
    block[Trim(t.substr(0, eq))] = Trim(t.substr(eq + 1));
  }
  flush();
  return out;
}

std::string CostCsv(const std::vector<CostQuery>& queries) {
  std::string out = "algorithm,cost,cost_millions\n";
  for (const CostQuery& q : queries) {
    const std::uint64_t c = Cost(q);
    out += fmt::format("{},{},{}\n", AlgorithmName(q.algorithm), c, FormatMillions(c));
  }
  return out;
}

std::vector<CrossoverRow> CrossoverTable(std::uint64_t backbone_params,
                                     const std::vector<std::uint64_t>& K_range,
                                     const std::vector<std::uint64_t>& d_range) {
  std::vector<CrossoverRow> rows;
  rows.reserve(K_range.size() * d_range.size());
  for (std::uint64_t K : K_range) {
    for (std::uint64_t d : d_range) {
      CrossoverRow row{K, d, backbone_params + d * K + K, K * d, false};
      row.crossover = row.pbfl >= backbone_params;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string CrossoverCsv(const std::vector<CrossoverRow>& rows) {
  std::string out = "K,d,fedavg_params,pbfl_params,pbfl_over_fedavg,crossover\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{:.4f},{}\n", r.K, r.d, r.fedavg, r.pbfl,
                       static_cast<double>(r.pbfl) / static_cast<double>(r.fedavg),
                       r.crossover ? 1 : 0);
  }
  return out;
}

}  // namespace tinyproto
