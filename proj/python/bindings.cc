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

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <spdlog/spdlog.h>

#include "tinyproto/aggregation.h"
#include "tinyproto/config.h"
#include "tinyproto/costmodel.h"
#include "tinyproto/datagen.h"
#include "tinyproto/errors.h"
#include "tinyproto/experiment.h"
#include "tinyproto/frame.h"
#include "tinyproto/masking.h"
#include "tinyproto/prototypes.h"

namespace py = pybind11;
using namespace tinyproto;

namespace {

std::vector<ClassContribution> Contributions(int class_id, const std::vector<Vector>& payloads,
                                             const std::optional<std::vector<std::uint64_t>>& counts) {
  if (counts && counts->size() != payloads.size()) throw ArgumentError("counts and payloads differ in length");
  std::vector<ClassContribution> out;
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    std::optional<std::uint64_t> n;
    if (counts) n = (*counts)[i];
    out.push_back({static_cast<int>(i), class_id, payloads[i], n});
  }
  return out;
}

py::dict RoundDict(const RoundReport& r) {
  py::dict d;
  d["round"] = r.round;
  d["sampled_clients"] = r.sampled_clients;
  d["mean_test_accuracy"] = r.mean_test_accuracy;
  d["per_client_accuracy"] = r.per_client_accuracy;
  d["mean_train_loss"] = r.mean_train_loss;
  d["uplink_params"] = r.uplink_params;
  d["downlink_params"] = r.downlink_params;
  d["mask_params"] = r.mask_params;
  d["count_values"] = r.count_values;
  d["uplink_bytes"] = r.uplink_bytes;
  d["downlink_bytes"] = r.downlink_bytes;
  d["mask_bytes"] = r.mask_bytes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_tinyproto, m) {
  m.doc() = "Prototype-based federated learning with class-wise prototype sparsification";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<AggregationError>(m, "AggregationError", PyExc_RuntimeError);
  py::register_exception<InferenceError>(m, "InferenceError", PyExc_RuntimeError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);
  py::register_exception<RoundError>(m, "RoundError", PyExc_RuntimeError);
  py::register_exception<DecodeError>(m, "DecodeError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Mask>(m, "Mask")
      .def(py::init<int, std::vector<std::uint8_t>>(), py::arg("class_id"), py::arg("bits"))
      .def_property_readonly("class_id", &Mask::class_id)
      .def_property_readonly("dim", &Mask::dim)
      .def_property_readonly("popcount", &Mask::popcount)
      .def_property_readonly("bits", [](const Mask& k) {
        return std::vector<std::uint8_t>(k.bits().begin(), k.bits().end());
      })
      .def("support", &Mask::Support)
      .def("__eq__", [](const Mask& a, const Mask& b) { return a == b; })
      .def("__repr__", [](const Mask& k) {
        return "Mask(class_id=" + std::to_string(k.class_id()) + ", dim=" + std::to_string(k.dim()) +
               ", popcount=" + std::to_string(k.popcount()) + ")";
      });

  py::class_<MaskSet>(m, "MaskSet")
      .def_readonly("masks", &MaskSet::masks)
      .def_readonly("d", &MaskSet::d)
      .def_readonly("s", &MaskSet::s)
      .def_readonly("seed", &MaskSet::seed)
      .def_readonly("pre_search_min_hamming", &MaskSet::pre_search_min_hamming)
      .def_readonly("search_evaluations", &MaskSet::search_evaluations)
      .def("at", &MaskSet::at, py::arg("class_id"), py::return_value_policy::reference_internal)
      .def("to_text", &MaskSet::ToText)
      .def("__len__", &MaskSet::classes);

  m.def("generate_masks", &GenerateMasks, py::arg("K"), py::arg("d"), py::arg("s"), py::arg("seed"));
  m.def("dense_masks", &MaskSet::Dense, py::arg("K"), py::arg("d"));
  m.def("hamming_distance", &HammingDistance, py::arg("a"), py::arg("b"));
  m.def("min_pairwise_hamming", &MinPairwiseHamming, py::arg("masks"));

  m.def("sparsify", [](const Vector& v, const Mask& k) { return Sparsify({k.class_id(), v}, k).values; },
        py::arg("prototype"), py::arg("mask"));
  m.def("compress", [](const Vector& v, const Mask& k) { return Compress({k.class_id(), v}, k).values; },
        py::arg("prototype"), py::arg("mask"));
  m.def("reconstruct", [](const Vector& c, const Mask& k) { return Reconstruct({k.class_id(), c}, k).values; },
        py::arg("compressed"), py::arg("mask"));
  m.def("dead_unit_fraction", [](const Vector& v, double tol) { return DeadUnitFraction({0, v}, tol); },
        py::arg("prototype"), py::arg("tol") = 0.0);

  m.def("aggregate",
        [](const std::string& rule, const std::vector<Vector>& payloads,
           const std::optional<std::vector<std::uint64_t>>& counts) {
          const auto contribs = Contributions(0, payloads, counts);
          return Aggregate(ParseAggregator(rule), contribs);
        },
        py::arg("rule"), py::arg("payloads"), py::arg("counts") = py::none(),
        "Aggregates one class's payloads with rule weighted | simple | scaled.");

  m.def("cost",
        [](const std::string& algorithm, py::kwargs kw) {
          CostQuery q;
          q.algorithm = ParseAlgorithm(algorithm);
          for (auto [key, value] : kw) {
            const std::string k = py::str(key);
            if (k == "M") q.M = value.cast<std::uint64_t>();
            else if (k == "K") q.K = value.cast<std::uint64_t>();
            else if (k == "K_i") q.K_i = value.cast<std::vector<std::uint64_t>>();
            else if (k == "d") q.d = value.cast<std::uint64_t>();
            else if (k == "s") q.s = value.cast<std::uint64_t>();
            else if (k == "classifier_params") q.classifier_params = value.cast<std::vector<std::uint64_t>>();
            else if (k == "theta_aux") q.theta_aux = value.cast<std::uint64_t>();
            else if (k == "phi_aux") q.phi_aux = value.cast<std::uint64_t>();
            else if (k == "r") q.r = value.cast<double>();
            else if (k == "full_model_params") q.full_model_params = value.cast<std::uint64_t>();
            else throw ArgumentError("unknown cost field '" + k + "'");
          }
          return Cost(q);
        },
        py::arg("algorithm"), "Per-round communication cost in exchanged parameters.");
  m.def("format_millions", &FormatMillions, py::arg("params"));
  m.def("cost_csv", [](const std::string& text) {
    std::istringstream in(text);
    return CostCsv(ParseCostQueries(in));
  }, py::arg("queries"));

  m.def("make_blobs",
        [](std::size_t K, std::size_t D, std::size_t per_class, double sigma, std::uint64_t seed) {
          const Dataset ds = MakeBlobs(K, D, per_class, sigma, seed);
          std::vector<Vector> xs;
          std::vector<int> ys;
          for (const Sample& s : ds.samples) {
            xs.push_back(s.x);
            ys.push_back(s.y);
          }
          return py::make_tuple(xs, ys);
        },
        py::arg("K"), py::arg("D"), py::arg("per_class"), py::arg("sigma"), py::arg("seed"));

  m.def("dirichlet_partition",
        [](const std::vector<int>& labels, std::size_t clients, double alpha, std::uint64_t seed) {
          // Features do not affect the draw, so each sample carries its index.
          Dataset ds;
          for (std::size_t i = 0; i < labels.size(); ++i) ds.samples.push_back({{static_cast<double>(i)}, labels[i]});
          const Partition part = DirichletPartition(ds, {clients, alpha, seed});
          std::vector<std::vector<std::size_t>> out;
          for (const auto& shard : part.shards) {
            auto& idx = out.emplace_back();
            for (const Sample& s : shard) idx.push_back(static_cast<std::size_t>(s.x[0]));
          }
          return out;
        },
        py::arg("labels"), py::arg("clients"), py::arg("alpha"), py::arg("seed"),
        "Returns per-client lists of sample indices.");

  m.def("encode_frame",
        [](const std::string& type, std::uint32_t round, const std::map<std::uint32_t, Vector>& records) {
          Frame f;
          if (type == "masks") f.type = FrameType::kMasks;
          else if (type == "upload") f.type = FrameType::kUpload;
          else if (type == "globals") f.type = FrameType::kGlobals;
          else throw ArgumentError("unknown frame type '" + type + "'");
          f.round = round;
          for (const auto& [cls, values] : records) f.records.push_back({cls, values});
          const auto bytes = EncodeFrame(f);
          return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("type"), py::arg("round"), py::arg("records"));
  m.def("decode_frame", [](const py::bytes& data) {
    const std::string raw = data;
    const Frame f = DecodeFrame({reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()});
    std::map<std::uint32_t, Vector> records;
    for (const Record& r : f.records) records[r.class_id] = r.values;
    std::string name(FrameTypeName(f.type));
    for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return py::make_tuple(name, f.round, records);
  }, py::arg("data"));

  m.def("default_config", [] { return ToText(ExperimentConfig{}); });
  m.def("run_experiment",
        [](const std::string& config_text, bool verbose) {
          const ExperimentConfig cfg = ParseConfigText(config_text);
          ExperimentResult result;
          {
            py::gil_scoped_release release;
            const auto level = spdlog::get_level();
            spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);
            try {
              result = RunExperiment(cfg);
            } catch (...) {
              spdlog::set_level(level);
              throw;
            }
            spdlog::set_level(level);
          }
          py::list rounds;
          for (const RoundReport& r : result.rounds) rounds.append(RoundDict(r));
          py::dict summary;
          summary["best_mean_test_accuracy"] = result.summary.best_mean_test_accuracy;
          summary["best_round"] = result.summary.best_round;
          summary["total_uplink_params"] = result.summary.total_uplink_params;
          summary["total_downlink_params"] = result.summary.total_downlink_params;
          summary["total_mask_params"] = result.summary.total_mask_params;
          summary["total_params"] = result.summary.total_params;
          summary["active_clients"] = result.summary.active_clients;
          py::dict out;
          out["rounds"] = rounds;
          out["summary"] = summary;
          out["rounds_csv"] = RoundsCsv(result.rounds);
          return out;
        },
        py::arg("config_text"), py::arg("verbose") = false, "Runs a federation from `key = value` config text.");
}
