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

#include "glsm/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "glsm/graph.hpp"

namespace glsm {

namespace {

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Variant gate_variant(std::string name, std::size_t k) {
  return {std::move(name), Horizon::kLongShort, Fusion::kGate, k, LongSource::kGraph};
}

}  // namespace

std::vector<std::string> experiment_names() {
  return {"acceptance", "fusion-ablation", "topk-sweep", "horizons", "full"};
}

std::vector<Variant> experiment_variants(std::string_view name) {
  std::vector<Variant> v;
  if (name == "acceptance") {
    v.push_back(gate_variant("glsm", 15));
    v.push_back({"short-only", Horizon::kShortOnly, Fusion::kGate, 15, LongSource::kGraph});
    v.push_back({"concat", Horizon::kLongShort, Fusion::kConcat, 15, LongSource::kGraph});
  } else if (name == "fusion-ablation") {
    for (auto f : {Fusion::kAdd, Fusion::kWeight, Fusion::kMultiply, Fusion::kConcat,
                   Fusion::kGate}) {
      v.push_back({std::string(to_string(f)), Horizon::kLongShort, f, 15, LongSource::kGraph});
    }
  } else if (name == "topk-sweep") {
    for (auto k : kTopKGrid) v.push_back(gate_variant("topk=" + std::to_string(k), k));
  } else if (name == "horizons") {
    v.push_back({"short-only", Horizon::kShortOnly, Fusion::kGate, 15, LongSource::kGraph});
    v.push_back({"long-only", Horizon::kLongOnly, Fusion::kGate, 15, LongSource::kGraph});
    v.push_back({"long-category-only", Horizon::kLongOnly, Fusion::kGate, 15,
                 LongSource::kCategory});
    v.push_back(gate_variant("long+short", 15));
  } else if (name == "full") {
    std::set<std::string> seen;
    for (const auto& n : {"horizons", "fusion-ablation", "topk-sweep"}) {
      for (auto& x : experiment_variants(n)) {
        if (seen.insert(x.name).second) v.push_back(std::move(x));
      }
    }
  } else {
    std::string known;
    for (const auto& n : experiment_names()) known += (known.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown experiment '" + std::string(name) + "' (known: " + known + ")");
  }
  return v;
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig c;
  c.sage.dim = 16;
  c.sage.epochs = 5;
  c.sage.seed = 3;
  c.train.learning_rate = 0.05;
  c.train.momentum = 0.9;
  c.train.batch_size = 32;
  c.train.epochs = 8;
  c.train.seed = 11;
  return c;
}

const MetricsRow& MetricsReport::row(std::string_view config) const {
  for (const auto& r : rows) {
    if (r.config == config) return r;
  }
  throw NotFound("no report row '" + std::string(config) + "'");
}

std::string MetricsReport::to_delimited() const {
  std::string out = "config,auc,gauc,logloss,test_rows,final_train_loss\n";
  for (const auto& r : rows) {
    out += r.config + "," + fmt(r.auc, 6) + "," + fmt(r.gauc, 6) + "," + fmt(r.logloss, 6) + "," +
           std::to_string(r.test_rows) + "," + fmt(r.final_train_loss, 6) + "\n";
  }
  return out;
}

std::string MetricsReport::to_table() const {
  std::size_t w = 6;
  for (const auto& r : rows) w = std::max(w, r.config.size());
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %8s  %8s  %8s  %8s\n", static_cast<int>(w), "config",
                "AUC", "GAUC", "Logloss", "seconds");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-*s  %8.4f  %8.4f  %8.4f  %8.1f\n", static_cast<int>(w),
                  r.config.c_str(), r.auc, r.gauc, r.logloss, r.seconds);
    os << line;
  }
  return os.str();
}

std::string MetricsReport::scores_delimited() const {
  std::string out = "config,user,item,label,score\n";
  for (const auto& s : scores) {
    out += s.config + "," + std::to_string(s.user) + "," + std::to_string(s.item) + "," +
           std::to_string(s.label) + "," + fmt(s.score, 8) + "\n";
  }
  return out;
}

MetricsRow evaluate_scores(std::string config, std::span<const Sample> test,
                           std::span<const double> scores) {
  if (test.size() != scores.size()) throw InvalidArgument("score count does not match rows");
  std::vector<ScoredRow> rows;
  rows.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    rows.push_back({test[i].user_id, scores[i], test[i].label == 1.0 ? 1 : 0});
  }
  MetricsRow r;
  r.config = std::move(config);
  r.auc = auc(rows);
  r.gauc = gauc(rows);
  r.logloss = logloss(rows);
  r.test_rows = rows.size();
  return r;
}

MetricsReport run_experiment(std::string_view name, const ExperimentConfig& cfg,
                             const ProgressFn& progress) {
  const auto variants = experiment_variants(name);
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  using clock = std::chrono::steady_clock;

  say("generating corpus");
  const auto corpus = generate_synthetic_corpus(cfg.generator, cfg.data_seed);
  const auto split = split_impressions(corpus.impressions, cfg.test_fraction);
  const auto vocab = Vocabulary::build(corpus.histories, corpus.impressions);

  say("training graph embeddings");
  const auto graph = build_global_graph(corpus.histories);
  const auto table = train_graphsage(graph, cfg.sage).table;

  MetricsReport report;
  const auto selection =
      choose_cluster_count(corpus.histories, table, cfg.features.boundary_count, cfg.k_min,
                           cfg.k_max, cfg.cluster_sample_users, cfg.sage.seed);
  report.cluster_count = selection.best_k;
  say("cluster count " + std::to_string(selection.best_k));

  auto sub_cfg = cfg.subgraph;
  sub_cfg.clusters = selection.best_k;
  say("building subgraph store");
  const auto store =
      build_subgraph_store(corpus.histories, table, sub_cfg, cfg.features.boundary_count);

  std::map<std::tuple<std::size_t, LongSource>, std::pair<std::vector<Sample>, std::vector<Sample>>>
      cache;
  for (const auto& v : variants) {
    const auto key = std::make_tuple(v.top_k, v.long_source);
    auto it = cache.find(key);
    if (it == cache.end()) {
      auto fc = cfg.features;
      fc.top_k = v.top_k;
      fc.long_source = v.long_source;
      FeatureAssembler assembler(vocab, &store, &table, fc);
      it = cache
               .emplace(key, std::make_pair(build_samples(assembler, corpus.histories, split.train),
                                            build_samples(assembler, corpus.histories, split.test)))
               .first;
    }
    const auto& [train_rows, test_rows] = it->second;

    ModelConfig mc;
    mc.dims = cfg.dims;
    mc.dims.items = vocab.item_rows();
    mc.dims.categories = vocab.category_rows();
    mc.dims.users = vocab.user_rows();
    mc.dims.scene_count = cfg.features.scene_count;
    mc.horizon = v.horizon;
    mc.fusion = v.fusion;
    auto params = ParameterSet::create(mc);
    params.init(cfg.model_seed, cfg.init);

    say("training " + v.name);
    const auto t0 = clock::now();
    const auto result = train(params, train_rows, cfg.train);
    const auto scores = predict(params, test_rows);
    auto row = evaluate_scores(v.name, test_rows, scores);
    row.final_train_loss = result.epoch_loss.back();
    row.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    say(v.name + ": auc " + fmt(row.auc) + " gauc " + fmt(row.gauc) + " logloss " +
        fmt(row.logloss));
    report.rows.push_back(row);
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      report.scores.push_back({v.name, test_rows[i].user_id, test_rows[i].item_id,
                               test_rows[i].label == 1.0 ? 1 : 0, scores[i]});
    }
  }
  return report;
}

}  // namespace glsm
