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

#include "tinyproto/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "tinyproto/errors.h"

namespace tinyproto {
namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
bool ParseNumber(const std::string& text, T& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

using Setter = std::function<std::string(ExperimentConfig&, const std::string&)>;

template <typename T>
Setter Number(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& v) -> std::string {
    T parsed{};
    if (!ParseNumber(v, parsed)) return "'" + v + "' is not a valid number";
    c.*field = parsed;
    return {};
  };
}

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", Number(&ExperimentConfig::seed)},
      {"M", Number(&ExperimentConfig::M)},
      {"K", Number(&ExperimentConfig::K)},
      {"D", Number(&ExperimentConfig::D)},
      {"hidden", Number(&ExperimentConfig::hidden)},
      {"d", Number(&ExperimentConfig::d)},
      {"s", Number(&ExperimentConfig::s)},
      {"alpha", Number(&ExperimentConfig::alpha)},
      {"lambda", Number(&ExperimentConfig::lambda)},
      {"mu", Number(&ExperimentConfig::mu)},
      {"lr", Number(&ExperimentConfig::lr)},
      {"batch_size", Number(&ExperimentConfig::batch_size)},
      {"local_epochs", Number(&ExperimentConfig::local_epochs)},
      {"rounds", Number(&ExperimentConfig::rounds)},
      {"participation", Number(&ExperimentConfig::participation)},
      {"per_class", Number(&ExperimentConfig::per_class)},
      {"sigma", Number(&ExperimentConfig::sigma)},
      {"train_fraction", Number(&ExperimentConfig::train_fraction)},
      {"workers", Number(&ExperimentConfig::workers)},
      {"data", [](ExperimentConfig& c, const std::string& v) -> std::string {
         c.data = v;
         return {};
       }},
      {"aggregator", [](ExperimentConfig& c, const std::string& v) -> std::string {
         try {
           c.aggregator = ParseAggregator(v);
         } catch (const ArgumentError& e) {
           return e.what();
         }
         return {};
       }},
      {"cps", [](ExperimentConfig& c, const std::string& v) -> std::string {
         if (v == "on") c.cps = true;
         else if (v == "off") c.cps = false;
         else return "'" + v + "' (expected on | off)";
         return {};
       }},
      {"rho", [](ExperimentConfig& c, const std::string& v) -> std::string {
         try {
           c.rho = ParseRho(v);
         } catch (const ArgumentError& e) {
           return e.what();
         }
         return {};
       }},
      {"reg_protos", [](ExperimentConfig& c, const std::string& v) -> std::string {
         try {
           c.reg_protos = ParseRegProtos(v);
         } catch (const ArgumentError& e) {
           return e.what();
         }
         return {};
       }},
  };
  return table;
}

}  // namespace

std::vector<std::string> ValidateConfig(const ExperimentConfig& c) {
  std::vector<std::string> bad;
  auto need = [&bad](bool ok, const char* field, const std::string& msg) {
    if (!ok) bad.push_back(fmt::format("config.{}: {}", field, msg));
  };
  need(c.M >= 1, "M", "must be >= 1");
  need(c.K >= 1, "K", "must be >= 1");
  need(c.D >= 1, "D", "must be >= 1");
  need(c.hidden >= 1, "hidden", "must be >= 1");
  need(c.d >= 1, "d", "must be >= 1");
  need(c.s >= 1 && c.s <= c.d, "s", fmt::format("must satisfy 1 <= s <= d (s={}, d={})", c.s, c.d));
  need(c.alpha > 0.0, "alpha", "must be > 0");
  need(c.lambda >= 0.0, "lambda", "must be >= 0");
  need(c.mu > 0.0, "mu", "must be > 0");
  need(c.lr > 0.0, "lr", "must be > 0");
  need(c.batch_size >= 1, "batch_size", "must be >= 1");
  need(c.local_epochs >= 1, "local_epochs", "must be >= 1");
  need(c.rounds >= 1, "rounds", "must be >= 1");
  need(c.participation > 0.0 && c.participation <= 1.0, "participation", "must be in (0, 1]");
  need(c.per_class >= 1, "per_class", "must be >= 1");
  need(c.sigma > 0.0, "sigma", "must be > 0");
  need(c.train_fraction > 0.0 && c.train_fraction < 1.0, "train_fraction", "must be in (0, 1)");
  need(c.workers >= 1, "workers", "must be >= 1");
  return bad;
}

ExperimentConfig ParseConfig(std::istream& in) {
  ExperimentConfig cfg;
  std::vector<std::string> bad;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = Trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      bad.push_back(fmt::format("config: line {}: expected key = value", lineno));
      continue;
    }
    const std::string key = Trim(std::string_view(t).substr(0, eq));
    const std::string value = Trim(std::string_view(t).substr(eq + 1));
    const auto& setters = Setters();
    const auto it = setters.find(key);
    if (it == setters.end()) {
      bad.push_back(fmt::format("config.{}: unknown key (line {})", key, lineno));
      continue;
    }
    if (std::string err = it->second(cfg, value); !err.empty()) {
      bad.push_back(fmt::format("config.{}: {}", key, err));
    }
  }
  for (auto& p : ValidateConfig(cfg)) bad.push_back(std::move(p));
  if (!bad.empty()) throw ConfigError(std::move(bad));
  return cfg;
}

ExperimentConfig ParseConfigText(const std::string& text) {
  std::istringstream in(text);
  return ParseConfig(in);
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config: cannot open '" + path + "'"});
  return ParseConfig(in);
}

std::string ToText(const ExperimentConfig& c) {
  std::string out;
  auto kv = [&out](std::string_view k, const auto& v) { out += fmt::format("{} = {}\n", k, v); };
  kv("seed", c.seed);
  kv("M", c.M);
  kv("K", c.K);
  kv("D", c.D);
  kv("hidden", c.hidden);
  kv("d", c.d);
  kv("s", c.s);
  kv("alpha", c.alpha);
  kv("lambda", c.lambda);
  kv("mu", c.mu);
  kv("lr", c.lr);
  kv("batch_size", c.batch_size);
  kv("local_epochs", c.local_epochs);
  kv("rounds", c.rounds);
  kv("participation", c.participation);
  kv("aggregator", AggregatorName(c.aggregator));
  kv("cps", c.cps ? "on" : "off");
  kv("rho", RhoName(c.rho));
  kv("reg_protos", RegProtosName(c.reg_protos));
  kv("per_class", c.per_class);
  kv("sigma", c.sigma);
  if (!c.data.empty()) kv("data", c.data);
  kv("train_fraction", c.train_fraction);
  kv("workers", c.workers);
  return out;
}

}  // namespace tinyproto
