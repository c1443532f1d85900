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

#include "glsm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "glsm/graph.hpp"

namespace glsm {

namespace fs = std::filesystem;

namespace {

constexpr std::pair<Stage, const char*> kStageNames[] = {
    {Stage::kSynth, "synth"},       {Stage::kIngest, "ingest"},
    {Stage::kBuildGraph, "build-graph"}, {Stage::kEmbed, "embed"},
    {Stage::kCenters, "centers"},   {Stage::kRetrieve, "retrieve"},
    {Stage::kTrain, "train"},       {Stage::kEval, "eval"},
    {Stage::kServeSim, "serve-sim"},
};

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string read_text(const fs::path& p) {
  const auto bytes = read_file_bytes(p);
  return std::string(bytes.begin(), bytes.end());
}

// Resolves an upstream artifact, failing with the stage that writes it.
fs::path need(const PipelineConfig& cfg, const char* name, Stage producer) {
  auto p = cfg.workdir / name;
  if (!fs::exists(p)) throw MissingArtifact(p, producer);
  return p;
}

std::string events_text(const std::vector<BehaviorEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += format_event_row(e);
    out += '\n';
  }
  return out;
}

struct Data {
  std::vector<BehaviorSequence> histories;
  std::vector<BehaviorEvent> impressions;
};

Data load_data(const PipelineConfig& cfg) {
  Data d;
  d.histories = parse_behavior_log(need(cfg, artifact::kHistories, Stage::kIngest),
                                   cfg.features.scene_count);
  d.impressions = parse_events(read_text(need(cfg, artifact::kImpressions, Stage::kIngest)),
                               cfg.features.scene_count);
  return d;
}

StageResult synth(const PipelineConfig& cfg, std::ostream& log) {
  log << "generating " << cfg.generator.users << " users, " << cfg.generator.items
      << " items, seed " << cfg.seed << "\n";
  const auto corpus = generate_synthetic_corpus(cfg.generator, cfg.seed);
  fs::create_directories(cfg.workdir);
  StageResult r;
  auto put = [&](const char* name, const std::string& text) {
    write_file_atomic(cfg.workdir / name, text);
    r.artifacts.push_back(cfg.workdir / name);
  };
  put(artifact::kCorpus, corpus.to_log());
  put(artifact::kGeneratorConfig, format_generator_config(cfg.generator));
  put(artifact::kTruth, format_ground_truth(corpus.truth));
  r.summary = std::to_string(corpus.histories.size()) + " histories, " +
              std::to_string(corpus.impressions.size()) + " labeled impressions";
  return r;
}

StageResult ingest(const PipelineConfig& cfg, std::ostream& log) {
  const fs::path src = cfg.input_log ? *cfg.input_log : cfg.workdir / artifact::kCorpus;
  if (!fs::exists(src)) {
    if (cfg.input_log) throw NotFound("input log " + src.string() + " does not exist");
    throw MissingArtifact(src, Stage::kSynth);
  }
  log << "parsing " << src.string() << "\n";
  auto contents = split_log(parse_events(read_text(src), cfg.features.scene_count));
  std::stable_sort(contents.impressions.begin(), contents.impressions.end(),
                   [](const BehaviorEvent& a, const BehaviorEvent& b) {
                     return a.user != b.user ? a.user < b.user : a.timestamp < b.timestamp;
                   });
  fs::create_directories(cfg.workdir);
  StageResult r;
  write_file_atomic(cfg.workdir / artifact::kHistories, serialize_sequences(contents.histories));
  write_file_atomic(cfg.workdir / artifact::kImpressions, events_text(contents.impressions));
  r.artifacts = {cfg.workdir / artifact::kHistories, cfg.workdir / artifact::kImpressions};
  std::size_t events = 0;
  for (const auto& h : contents.histories) events += h.size();
  r.summary = std::to_string(contents.histories.size()) + " users, " + std::to_string(events) +
              " behavior events, " + std::to_string(contents.impressions.size()) +
              " impressions";
  return r;
}

StageResult build_graph(const PipelineConfig& cfg, std::ostream& log) {
  const auto histories = parse_behavior_log(need(cfg, artifact::kHistories, Stage::kIngest),
                                            cfg.features.scene_count);
  log << "building global graph over " << histories.size() << " sequences\n";
  const auto g = build_global_graph(histories);
  save_graph(cfg.workdir / artifact::kGraph, g);
  return {{cfg.workdir / artifact::kGraph},
          std::to_string(g.node_count()) + " nodes, " + std::to_string(g.edge_count()) + " edges"};
}

StageResult embed(const PipelineConfig& cfg, std::ostream& log) {
  const auto graph = load_graph(need(cfg, artifact::kGraph, Stage::kBuildGraph));
  const auto histories = parse_behavior_log(need(cfg, artifact::kHistories, Stage::kIngest),
                                            cfg.features.scene_count);
  log << "training embeddings: dim " << cfg.sage.dim << ", epochs " << cfg.sage.epochs
      << ", seed " << cfg.sage.seed << "\n";
  const auto result = train_graphsage(graph, cfg.sage);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    log << "  epoch " << e << " loss " << fmt(result.epoch_loss[e], 5) << "\n";
  }
  const auto sel = choose_cluster_count(histories, result.table, cfg.features.boundary_count,
                                        cfg.k_min, cfg.k_max, cfg.cluster_sample_users,
                                        cfg.sage.seed);
  std::string csv = "k,silhouette,selected\n";
  for (const auto& [k, s] : sel.scores) {
    csv += std::to_string(k) + "," + fmt(s, 8) + "," + (k == sel.best_k ? "1" : "0") + "\n";
  }
  save_embeddings(cfg.workdir / artifact::kEmbeddings, result.table);
  write_file_atomic(cfg.workdir / artifact::kClusters, csv);
  return {{cfg.workdir / artifact::kEmbeddings, cfg.workdir / artifact::kClusters},
          std::to_string(result.table.size()) + " vectors; cluster count " +
              std::to_string(sel.best_k)};
}

StageResult centers(const PipelineConfig& cfg, std::ostream& log) {
  const auto table = load_embeddings(need(cfg, artifact::kEmbeddings, Stage::kEmbed));
  const auto k = read_cluster_choice(need(cfg, artifact::kClusters, Stage::kEmbed));
  const auto histories = parse_behavior_log(need(cfg, artifact::kHistories, Stage::kIngest),
                                            cfg.features.scene_count);
  SubgraphConfig sc;
  sc.centers = cfg.centers;
  sc.max_hops = cfg.max_hops;
  sc.clusters = k;
  sc.seed = cfg.seed;
  log << "selecting " << sc.centers << " centers per user with " << k << " clusters\n";
  const auto store = build_subgraph_store(histories, table, sc, cfg.features.boundary_count);
  std::string csv = "user,rank,node,l_im,g_im,l_norm,g_norm,union_im\n";
  for (const auto& [user, sub] : store.subgraphs()) {
    for (std::size_t i = 0; i < sub.centers.size(); ++i) {
      const auto& c = sub.centers.entries[i];
      csv += std::to_string(user) + "," + std::to_string(i) + "," + std::to_string(c.node) + "," +
             fmt(c.l_im) + "," + fmt(c.g_im) + "," + fmt(c.l_norm) + "," + fmt(c.g_norm) + "," +
             fmt(c.union_im) + "\n";
    }
  }
  store.save(cfg.workdir / artifact::kStore);
  write_file_atomic(cfg.workdir / artifact::kCenters, csv);
  return {{cfg.workdir / artifact::kStore, cfg.workdir / artifact::kCenters},
          std::to_string(store.size()) + " user subgraphs"};
}

StageResult retrieve_stage(const PipelineConfig& cfg, std::ostream& log) {
  const auto store = SubgraphStore::load(need(cfg, artifact::kStore, Stage::kCenters));
  const auto table = load_embeddings(need(cfg, artifact::kEmbeddings, Stage::kEmbed));
  std::vector<std::pair<UserId, ItemId>> queries;
  if (cfg.query_user || cfg.query_item) {
    if (!cfg.query_user || !cfg.query_item) {
      throw InvalidArgument("retrieve needs both --user and --item for a single query");
    }
    queries.emplace_back(*cfg.query_user, *cfg.query_item);
  } else {
    const auto imps = parse_events(read_text(need(cfg, artifact::kImpressions, Stage::kIngest)),
                                   cfg.features.scene_count);
    for (const auto& e : imps) queries.emplace_back(e.user, e.item);
  }
  log << "retrieving for " << queries.size() << " queries (k " << cfg.features.top_k << ", hops "
      << cfg.features.hops << ")\n";
  RetrievalOptions opts;
  opts.farthest_first = cfg.features.farthest_first;
  opts.result_cap = cfg.features.result_cap;
  std::string csv = "user,target,node,hop,source_center,center_distance\n";
  std::size_t rows = 0;
  for (const auto& [user, item] : queries) {
    const auto* sub = store.find(user);
    if (!sub) throw NotFound("user " + std::to_string(user) + " has no stored subgraph");
    const auto res = retrieve(*sub, table.at(item), cfg.features.top_k, cfg.features.hops, opts);
    for (const auto& n : res.nodes) {
      csv += std::to_string(user) + "," + std::to_string(item) + "," + std::to_string(n.node) +
             "," + std::to_string(n.hop) + "," + std::to_string(n.source_center) + "," +
             fmt(n.center_distance) + "\n";
      ++rows;
    }
  }
  write_file_atomic(cfg.workdir / artifact::kRetrieval, csv);
  StageResult r{{cfg.workdir / artifact::kRetrieval}, std::to_string(rows) + " retrieved nodes"};
  if (queries.size() == 1) r.summary += "\n" + csv;
  return r;
}

struct Prepared {
  Data data;
  SubgraphStore store;
  EmbeddingTable table;
};

Prepared prepare(const PipelineConfig& cfg) {
  Prepared p;
  p.data = load_data(cfg);
  p.table = load_embeddings(need(cfg, artifact::kEmbeddings, Stage::kEmbed));
  p.store = SubgraphStore::load(need(cfg, artifact::kStore, Stage::kCenters));
  return p;
}

StageResult train_stage(const PipelineConfig& cfg, std::ostream& log) {
  const auto prep = prepare(cfg);
  const auto split = split_impressions(prep.data.impressions, cfg.test_fraction);
  Checkpoint ck;
  ck.vocab = Vocabulary::build(prep.data.histories, prep.data.impressions);
  ck.features = cfg.features;
  FeatureAssembler assembler(ck.vocab, &prep.store, &prep.table, ck.features);
  const auto samples = build_samples(assembler, prep.data.histories, split.train);

  ModelConfig mc;
  mc.dims = cfg.dims;
  mc.dims.items = ck.vocab.item_rows();
  mc.dims.categories = ck.vocab.category_rows();
  mc.dims.users = ck.vocab.user_rows();
  mc.dims.scene_count = cfg.features.scene_count;
  mc.horizon = cfg.horizon;
  mc.fusion = cfg.fusion;
  ck.params = ParameterSet::create(mc);
  ck.params.init(cfg.model_seed, cfg.init);
  log << "training " << to_string(cfg.horizon) << "/" << to_string(cfg.fusion) << " on "
      << samples.size() << " rows, " << ck.params.parameter_count() << " parameters\n";
  const auto result = train(ck.params, samples, cfg.train, [&](std::size_t e, double loss) {
    log << "  epoch " << e << " loss " << fmt(loss, 5) << "\n";
  });
  std::string csv = "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    csv += std::to_string(e) + "," + fmt(result.epoch_loss[e], 8) + "\n";
  }
  save_checkpoint(cfg.workdir / artifact::kCheckpoint, ck);
  write_file_atomic(cfg.workdir / artifact::kLoss, csv);
  return {{cfg.workdir / artifact::kCheckpoint, cfg.workdir / artifact::kLoss},
          "final training loss " + fmt(result.epoch_loss.back(), 5)};
}

StageResult eval_stage(const PipelineConfig& cfg, std::ostream& log) {
  StageResult r;
  if (!cfg.experiment.empty()) {
    ExperimentConfig ec = default_experiment_config();
    ec.generator = cfg.generator;
    ec.data_seed = cfg.seed;
    ec.test_fraction = cfg.test_fraction;
    ec.sage = cfg.sage;
    ec.k_min = cfg.k_min;
    ec.k_max = cfg.k_max;
    ec.cluster_sample_users = cfg.cluster_sample_users;
    ec.subgraph.centers = cfg.centers;
    ec.subgraph.max_hops = cfg.max_hops;
    ec.subgraph.seed = cfg.seed;
    ec.features = cfg.features;
    ec.dims = cfg.dims;
    ec.train = cfg.train;
    ec.init = cfg.init;
    ec.model_seed = cfg.model_seed;
    const auto report =
        run_experiment(cfg.experiment, ec, [&](const std::string& m) { log << m << "\n"; });
    fs::create_directories(cfg.workdir);
    const auto metrics = cfg.workdir / ("report-" + cfg.experiment + ".csv");
    const auto scores = cfg.workdir / ("scores-" + cfg.experiment + ".csv");
    write_file_atomic(metrics, report.to_delimited());
    write_file_atomic(scores, report.scores_delimited());
    r.artifacts = {metrics, scores};
    r.summary = report.to_table();
    return r;
  }
  const auto ck = load_checkpoint(need(cfg, artifact::kCheckpoint, Stage::kTrain));
  const auto prep = prepare(cfg);
  const auto split = split_impressions(prep.data.impressions, cfg.test_fraction);
  FeatureAssembler assembler(ck.vocab, &prep.store, &prep.table, ck.features);
  const auto test = build_samples(assembler, prep.data.histories, split.test);
  log << "scoring " << test.size() << " held-out rows\n";
  const auto scores = predict(ck.params, test);
  const std::string name = std::string(to_string(ck.params.config.horizon)) + "/" +
                           std::string(to_string(ck.params.config.fusion));
  MetricsReport report;
  report.rows.push_back(evaluate_scores(name, test, scores));
  for (std::size_t i = 0; i < test.size(); ++i) {
    report.scores.push_back(
        {name, test[i].user_id, test[i].item_id, test[i].label == 1.0 ? 1 : 0, scores[i]});
  }
  write_file_atomic(cfg.workdir / artifact::kMetrics, report.to_delimited());
  write_file_atomic(cfg.workdir / artifact::kScores, report.scores_delimited());
  r.artifacts = {cfg.workdir / artifact::kMetrics, cfg.workdir / artifact::kScores};
  r.summary = report.to_table();
  return r;
}

StageResult serve_stage(const PipelineConfig& cfg, std::ostream& log) {
  const auto ck = load_checkpoint(need(cfg, artifact::kCheckpoint, Stage::kTrain));
  const auto prep = prepare(cfg);
  std::vector<ServeRequest> requests;
  if (cfg.requests) {
    if (!fs::exists(*cfg.requests)) {
      throw NotFound("request file " + cfg.requests->string() + " does not exist");
    }
    requests = parse_requests(read_text(*cfg.requests));
  } else {
    const auto split = split_impressions(prep.data.impressions, cfg.test_fraction);
    for (const auto& e : split.test) {
      if (requests.size() >= cfg.max_requests) break;
      requests.push_back({e.user, e.item, e.scene, e.timestamp});
    }
    write_file_atomic(cfg.workdir / artifact::kRequests, format_requests(requests));
  }
  log << "serving " << requests.size() << " requests (material " << cfg.serve.material_delay_ms
      << " ms, store fetch " << cfg.serve.store_delay_ms << " ms)\n";
  ServingSimulator sim(prep.store, ck, prep.table, prep.data.histories, cfg.serve);
  const auto seq = sim.run(requests, false);
  const auto par = sim.run(requests, true);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) mismatches += seq[i].score != par[i].score;

  std::vector<ServeTrace> all(seq);
  all.insert(all.end(), par.begin(), par.end());
  auto totals = [](const std::vector<ServeTrace>& ts) {
    std::vector<double> v;
    for (const auto& t : ts) v.push_back(t.total_ms);
    return summarize(v);
  };
  const auto s = totals(seq);
  const auto p = totals(par);
  std::string csv = "mode,count,p50_ms,p95_ms,p99_ms,mean_ms\n";
  for (const auto& [mode, sum] : {std::pair{"sequential", s}, std::pair{"parallel", p}}) {
    csv += std::string(mode) + "," + std::to_string(sum.count) + "," + fmt(sum.p50, 4) + "," +
           fmt(sum.p95, 4) + "," + fmt(sum.p99, 4) + "," + fmt(sum.mean, 4) + "\n";
  }
  write_file_atomic(cfg.workdir / artifact::kTrace, format_traces(all));
  write_file_atomic(cfg.workdir / artifact::kLatency, csv);
  StageResult r{{cfg.workdir / artifact::kTrace, cfg.workdir / artifact::kLatency}, csv};
  std::size_t fallbacks = 0;
  for (const auto& t : par) fallbacks += t.fallback;
  r.summary += "score mismatches between modes: " + std::to_string(mismatches) +
               "; short-term fallbacks: " + std::to_string(fallbacks);
  return r;
}

}  // namespace

std::string_view to_string(Stage s) {
  for (const auto& [stage, name] : kStageNames) {
    if (stage == s) return name;
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  for (const auto& [stage, n] : kStageNames) {
    if (name == n) return stage;
  }
  throw InvalidArgument("unknown stage '" + std::string(name) + "'");
}

std::size_t read_cluster_choice(const fs::path& clusters_csv) {
  std::istringstream in(read_text(clusters_csv));
  std::string line;
  while (std::getline(in, line)) {
    if (line.size() > 2 && line.compare(line.size() - 2, 2, ",1") == 0) {
      return static_cast<std::size_t>(std::stoull(line.substr(0, line.find(','))));
    }
  }
  throw InvalidArgument(clusters_csv.string() + " has no selected cluster count");
}

StageResult run_stage(Stage stage, const PipelineConfig& cfg, std::ostream& log) {
  switch (stage) {
    case Stage::kSynth: return synth(cfg, log);
    case Stage::kIngest: return ingest(cfg, log);
    case Stage::kBuildGraph: return build_graph(cfg, log);
    case Stage::kEmbed: return embed(cfg, log);
    case Stage::kCenters: return centers(cfg, log);
    case Stage::kRetrieve: return retrieve_stage(cfg, log);
    case Stage::kTrain: return train_stage(cfg, log);
    case Stage::kEval: return eval_stage(cfg, log);
    case Stage::kServeSim: return serve_stage(cfg, log);
  }
  throw InvalidArgument("unknown stage");
}

}  // namespace glsm
