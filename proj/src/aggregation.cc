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

#include "tinyproto/aggregation.h"

#include <algorithm>
#include <string>

#include "tinyproto/errors.h"

namespace tinyproto {
namespace {

// Validates a single-class, equal-length contribution list and returns it
// sorted by client id.
std::vector<const ClassContribution*> Ordered(std::span<const ClassContribution> contribs) {
  if (contribs.empty()) throw AggregationError("no contributions to aggregate");
  std::vector<const ClassContribution*> out;
  out.reserve(contribs.size());
  for (const auto& c : contribs) {
    if (c.class_id != contribs.front().class_id) {
      throw AggregationError("contributions mix classes " + std::to_string(contribs.front().class_id) +
                             " and " + std::to_string(c.class_id));
    }
    if (c.payload.size() != contribs.front().payload.size()) {
      throw ShapeError("contribution payload lengths differ");
    }
    out.push_back(&c);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto* a, const auto* b) { return a->client_id < b->client_id; });
  return out;
}

}  // namespace

Aggregator ParseAggregator(std::string_view name) {
  if (name == "weighted") return Aggregator::kWeighted;
  if (name == "simple") return Aggregator::kSimple;
  if (name == "scaled") return Aggregator::kScaled;
  throw ArgumentError("unknown aggregator '" + std::string(name) +
                      "' (expected weighted | simple | scaled)");
}

std::string_view AggregatorName(Aggregator a) {
  switch (a) {
    case Aggregator::kWeighted: return "weighted";
    case Aggregator::kSimple: return "simple";
    case Aggregator::kScaled: return "scaled";
  }
  return "?";
}

Prototype AggregateWeighted(std::span<const ClassContribution> contribs) {
  const auto ordered = Ordered(contribs);
  std::uint64_t total = 0;
  std::size_t contributors = 0;
  for (const auto* c : ordered) {
    if (!c->sample_count) {
      throw AggregationError("weighted aggregation needs a sample count from client " +
                             std::to_string(c->client_id));
    }
    total += *c->sample_count;
    if (*c->sample_count > 0) ++contributors;
  }
  if (total == 0) throw AggregationError("all sample counts are zero");

  Prototype out{ordered.front()->class_id, Vector(ordered.front()->payload.size(), 0.0)};
  const double denom = static_cast<double>(total);
  for (const auto* c : ordered) {
    if (*c->sample_count == 0) continue;
    const double w = static_cast<double>(*c->sample_count) / denom;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += w * c->payload[i];
  }
  const double inv = 1.0 / static_cast<double>(contributors);
  for (double& v : out.values) v *= inv;
  return out;
}

Prototype AggregateSimple(std::span<const ClassContribution> contribs) {
  const auto ordered = Ordered(contribs);
  Prototype out{ordered.front()->class_id, Vector(ordered.front()->payload.size(), 0.0)};
  for (const auto* c : ordered)
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += c->payload[i];
  const double inv = 1.0 / static_cast<double>(ordered.size());
  for (double& v : out.values) v *= inv;
  return out;
}

CompressedPrototype AggregateScaled(std::span<const ClassContribution> contribs) {
  // Same arithmetic as the simple mean; the weighting lives in the payload.
  Prototype mean = AggregateSimple(contribs);
  return CompressedPrototype{mean.class_id, std::move(mean.values)};
}

Vector Aggregate(Aggregator rule, std::span<const ClassContribution> contribs) {
  switch (rule) {
    case Aggregator::kWeighted: return AggregateWeighted(contribs).values;
    case Aggregator::kSimple: return AggregateSimple(contribs).values;
    case Aggregator::kScaled: return AggregateScaled(contribs).values;
  }
  throw ArgumentError("unknown aggregator");
}

}  // namespace tinyproto
