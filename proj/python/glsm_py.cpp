/*
 * Copyright 2026 The GLSM Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "glsm/cluster.hpp"
#include "glsm/corpus.hpp"
#include "glsm/experiment.hpp"
#include "glsm/graph.hpp"
#include "glsm/metrics.hpp"
#include "glsm/pipeline.hpp"
#include "glsm/synth.hpp"

namespace py = pybind11;
using namespace glsm;

namespace {

std::vector<ScoredRow> make_rows(const std::vector<UserId>& users, const std::vector<double>& scores,
                                 const std::vector<int>& labels) {
  if (scores.size() != labels.size() || (!users.empty() && users.size() != scores.size())) {
    throw InvalidArgument("users, scores and labels must have equal length");
  }
  std::vector<ScoredRow> rows(scores.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i] = {users.empty() ? UserId{1} : users[i], scores[i], labels[i]};
  }
  return rows;
}

std::vector<LabeledPoint> make_points(const std::vector<Vec>& points) {
  std::vector<LabeledPoint> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out.push_back({static_cast<ItemId>(i + 1), points[i]});
  return out;
}

}  // namespace

PYBIND11_MODULE(_glsm, m) {
  m.doc() = "CTR toolkit with graph retrieval over behavior histories.";

  auto base = py::register_exception<Error>(m, "GlsmError");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<NotFound>(m, "NotFound", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<MissingArtifact>(m, "MissingArtifact", base.ptr());

  py::class_<GeneratorConfig>(m, "GeneratorConfig")
      .def(py::init<>())
      .def_readwrite("users", &GeneratorConfig::users)
      .def_readwrite("items", &GeneratorConfig::items)
      .def_readwrite("interests", &GeneratorConfig::interests)
      .def_readwrite("events_per_user", &GeneratorConfig::events_per_user)
      .def_readwrite("impressions_per_user", &GeneratorConfig::impressions_per_user)
      .def_readwrite("label_noise", &GeneratorConfig::label_noise)
      .def("__repr__", [](const GeneratorConfig& c) { return format_generator_config(c); });

  m.def("synthesize",
        [](const GeneratorConfig& cfg, std::uint64_t seed) { return generate_synthetic_corpus(cfg, seed).to_log(); },
        py::arg("config"), py::arg("seed") = 7, "Planted-interest corpus as log text.");

  py::class_<BehaviorEvent>(m, "BehaviorEvent")
      .def_readonly("user", &BehaviorEvent::user)
      .def_readonly("item", &BehaviorEvent::item)
      .def_readonly("timestamp", &BehaviorEvent::timestamp)
      .def_readonly("category", &BehaviorEvent::category)
      .def_property_readonly("behavior", [](const BehaviorEvent& e) { return std::string(to_string(e.behavior)); })
      .def_readonly("scene", &BehaviorEvent::scene)
      .def_readonly("label", &BehaviorEvent::label);

  py::class_<BehaviorSequence>(m, "BehaviorSequence")
      .def_readonly("user", &BehaviorSequence::user)
      .def_readonly("events", &BehaviorSequence::events)
      .def("__len__", &BehaviorSequence::size);

  m.def("parse_events", [](const std::string& text) { return parse_events(text); }, py::arg("text"));
  m.def("group_by_user", &group_by_user, py::arg("events"));

  py::class_<ItemGraph>(m, "ItemGraph")
      .def_property_readonly("node_count", &ItemGraph::node_count)
      .def_property_readonly("edge_count", &ItemGraph::edge_count)
      .def_property_readonly("nodes", &ItemGraph::nodes)
      .def("weight", &ItemGraph::weight)
      .def("neighbors_within", [](const ItemGraph& g, ItemId start, int hops) { return neighbors_within(g, start, hops); })
      .def("degree_centrality", [](const ItemGraph& g, ItemId v) { return degree_centrality(g, v); })
      .def("edges", [](const ItemGraph& g) {
        std::vector<std::tuple<ItemId, ItemId, std::uint32_t>> out;
        for (const auto& e : g.edge_list()) out.emplace_back(e.a, e.b, e.weight);
        return out;
      });

  m.def("build_global_graph",
        [](const std::vector<BehaviorSequence>& seqs) { return build_global_graph(seqs); }, py::arg("sequences"));
  m.def("build_local_graph", &build_local_graph, py::arg("sequence"));

  m.def("auc", [](const std::vector<double>& s, const std::vector<int>& l) { return auc(make_rows({}, s, l)); },
        py::arg("scores"), py::arg("labels"));
  m.def("gauc",
        [](const std::vector<UserId>& u, const std::vector<double>& s, const std::vector<int>& l) {
          return gauc(make_rows(u, s, l));
        },
        py::arg("users"), py::arg("scores"), py::arg("labels"));
  m.def("logloss", [](const std::vector<double>& s, const std::vector<int>& l) { return logloss(make_rows({}, s, l)); },
        py::arg("scores"), py::arg("labels"));

  m.def("kmeans",
        [](const std::vector<Vec>& points, std::size_t k, std::uint64_t seed) {
          const auto model = kmeans(make_points(points), k, seed);
          return py::make_tuple(model.centers, model.assignments, model.inertia);
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 1, "Returns (centers, assignments, inertia).");
  m.def("select_cluster_count",
        [](const std::vector<Vec>& points, std::size_t k_min, std::size_t k_max, std::uint64_t seed) {
          const auto sel = select_cluster_count(make_points(points), k_min, k_max, seed);
          return py::make_tuple(sel.best_k, sel.scores);
        },
        py::arg("points"), py::arg("k_min") = 2, py::arg("k_max") = 8, py::arg("seed") = 1,
        "Returns (best_k, [(k, silhouette), ...]).");

  m.def("experiment_names", &experiment_names);
  m.def("run_experiment",
        [](const std::string& name, std::size_t users, std::size_t epochs) {
          auto cfg = default_experiment_config();
          if (users) cfg.generator.users = users;
          if (epochs) cfg.train.epochs = epochs;
          const auto report = run_experiment(name, cfg);
          py::list rows;
          for (const auto& r : report.rows) {
            py::dict d;
            d["config"] = r.config;
            d["auc"] = r.auc;
            d["gauc"] = r.gauc;
            d["logloss"] = r.logloss;
            d["test_rows"] = r.test_rows;
            rows.append(d);
          }
          return rows;
        },
        py::arg("name"), py::arg("users") = 0, py::arg("epochs") = 0,
        "Runs a named experiment; zero keeps the default for users/epochs.");

  m.def("run_stage",
        [](const std::string& stage, const std::filesystem::path& workdir, std::size_t users, std::uint64_t seed) {
          PipelineConfig cfg;
          cfg.workdir = workdir;
          cfg.seed = seed;
          if (users) cfg.generator.users = users;
          std::ostringstream log;
          return run_stage(parse_stage(stage), cfg, log).summary;
        },
        py::arg("stage"), py::arg("workdir"), py::arg("users") = 0, py::arg("seed") = 7);
}
