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

// glsm: command-line driver for the pipeline stages and the serving
// simulator. Every option is global so a single key=value config file can
// hold them all; flags override the file.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "glsm/binary_io.hpp"
#include "glsm/pipeline.hpp"

namespace {

glsm::GeneratorConfig load_generator_file(const std::string& path) {
  const auto bytes = glsm::read_file_bytes(path);
  return glsm::parse_generator_config(std::string(bytes.begin(), bytes.end()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CTR pipeline with graph retrieval over behavior histories"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file with any of the options below");

  glsm::PipelineConfig cfg;
  std::string workdir = cfg.workdir.string();
  std::string generator_file, input_log, requests, horizon = "long+short", fusion = "gate";
  std::string init = "glorot", long_source = "graph";
  std::string hidden = "64,32";
  std::uint64_t user = 0, item = 0;

  app.add_option("-w,--workdir", workdir, "artifact directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "data and store seed")->capture_default_str();

  auto& g = cfg.generator;
  app.add_option("--generator-config", generator_file, "generator key=value file");
  app.add_option("--users", g.users)->capture_default_str();
  app.add_option("--items", g.items)->capture_default_str();
  app.add_option("--interests", g.interests)->capture_default_str();
  app.add_option("--events-per-user", g.events_per_user)->capture_default_str();
  app.add_option("--impressions-per-user", g.impressions_per_user)->capture_default_str();
  app.add_option("--label-noise", g.label_noise)->capture_default_str();

  app.add_option("--input", input_log, "log to ingest (default: workdir/corpus.log)");

  app.add_option("--dim", cfg.sage.dim, "graph embedding dimension")->capture_default_str();
  app.add_option("--embed-epochs", cfg.sage.epochs)->capture_default_str();
  app.add_option("--embed-seed", cfg.sage.seed)->capture_default_str();
  app.add_option("--k-min", cfg.k_min, "cluster count search range")->capture_default_str();
  app.add_option("--k-max", cfg.k_max)->capture_default_str();
  app.add_option("--cluster-sample-users", cfg.cluster_sample_users)->capture_default_str();

  app.add_option("--centers", cfg.centers, "center nodes per user (N)")->capture_default_str();
  app.add_option("--max-hops", cfg.max_hops, "hops precomputed in the store")
      ->capture_default_str();

  auto& f = cfg.features;
  app.add_option("--boundary", f.boundary_count, "short-term event count")->capture_default_str();
  app.add_option("--scenes", f.scene_count)->capture_default_str();
  app.add_option("--top-k", f.top_k, "centers used per retrieval (K)")->capture_default_str();
  app.add_option("--hops", f.hops)->capture_default_str();
  app.add_option("--result-cap", f.result_cap)->capture_default_str();
  app.add_flag("--farthest-first", f.farthest_first, "pick the K farthest centers instead");
  app.add_option("--long-source", long_source, "graph or category")->capture_default_str();

  app.add_option("--model-dim", cfg.dims.dim)->capture_default_str();
  app.add_option("--profile-dim", cfg.dims.profile_dim)->capture_default_str();
  app.add_option("--hidden", hidden, "DNN hidden sizes")->capture_default_str();
  app.add_option("--horizon", horizon, "short, long or long+short")->capture_default_str();
  app.add_option("--fusion", fusion, "add, weight, multiply, concat or gate")
      ->capture_default_str();
  app.add_option("--init", init, "uniform or glorot")->capture_default_str();
  app.add_option("--lr", cfg.train.learning_rate)->capture_default_str();
  app.add_option("--epochs", cfg.train.epochs)->capture_default_str();
  app.add_option("--batch", cfg.train.batch_size)->capture_default_str();
  app.add_option("--momentum", cfg.train.momentum)->capture_default_str();
  app.add_option("--train-seed", cfg.train.seed)->capture_default_str();
  app.add_option("--model-seed", cfg.model_seed)->capture_default_str();
  app.add_option("--test-fraction", cfg.test_fraction)->capture_default_str();

  app.add_option("--user", user, "retrieve: query user");
  app.add_option("--item", item, "retrieve: query target item");
  app.add_option("--experiment", cfg.experiment,
                 "eval: run a named matrix (acceptance, fusion-ablation, topk-sweep, horizons, "
                 "full)");
  app.add_option("--material-ms", cfg.serve.material_delay_ms)->capture_default_str();
  app.add_option("--store-ms", cfg.serve.store_delay_ms)->capture_default_str();
  app.add_option("--requests", requests, "serve-sim: user,item,scene,timestamp file");
  app.add_option("--max-requests", cfg.max_requests)->capture_default_str();

  const std::map<std::string, std::string> help = {
      {"synth", "generate a planted-interest corpus"},
      {"ingest", "parse a behavior log into histories and impressions"},
      {"build-graph", "build the global item co-transition graph"},
      {"embed", "train graph embeddings and choose the cluster count"},
      {"centers", "select center nodes and build the subgraph store"},
      {"retrieve", "run graph retrieval for one query or every impression"},
      {"train", "train the CTR model"},
      {"eval", "score held-out impressions, or run an experiment matrix"},
      {"serve-sim", "simulate sequential and parallel serving"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, text] : help) subs[name] = app.add_subcommand(name, text);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    cfg.workdir = workdir;
    if (!generator_file.empty()) {
      // Flags given explicitly still win over the file.
      auto file_cfg = load_generator_file(generator_file);
      if (app.count("--users")) file_cfg.users = g.users;
      if (app.count("--items")) file_cfg.items = g.items;
      if (app.count("--interests")) file_cfg.interests = g.interests;
      if (app.count("--events-per-user")) file_cfg.events_per_user = g.events_per_user;
      if (app.count("--impressions-per-user")) {
        file_cfg.impressions_per_user = g.impressions_per_user;
      }
      if (app.count("--label-noise")) file_cfg.label_noise = g.label_noise;
      g = file_cfg;
    }
    g.scene_count = f.scene_count;
    if (!input_log.empty()) cfg.input_log = input_log;
    if (!requests.empty()) cfg.requests = requests;
    if (app.count("--user")) cfg.query_user = user;
    if (app.count("--item")) cfg.query_item = item;
    cfg.horizon = glsm::parse_horizon(horizon);
    cfg.fusion = glsm::parse_fusion(fusion);
    if (init == "uniform") {
      cfg.init = glsm::InitScheme::kUniform;
    } else if (init == "glorot") {
      cfg.init = glsm::InitScheme::kGlorot;
    } else {
      throw glsm::InvalidArgument("--init must be uniform or glorot");
    }
    if (long_source == "graph") {
      f.long_source = glsm::LongSource::kGraph;
    } else if (long_source == "category") {
      f.long_source = glsm::LongSource::kCategory;
    } else {
      throw glsm::InvalidArgument("--long-source must be graph or category");
    }
    cfg.dims.hidden.clear();
    std::size_t pos = 0;
    while (pos <= hidden.size()) {
      const auto comma = hidden.find(',', pos);
      const auto tok = hidden.substr(pos, comma - pos);
      if (!tok.empty()) cfg.dims.hidden.push_back(std::stoul(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }

    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const auto stage = glsm::parse_stage(name);
      const auto result = glsm::run_stage(stage, cfg, std::cerr);
      for (const auto& a : result.artifacts) std::cerr << "wrote " << a.string() << "\n";
      std::cout << result.summary << (result.summary.empty() || result.summary.back() == '\n' ? "" : "\n");
    }
  } catch (const glsm::Error& e) {
    std::cerr << "glsm: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "glsm: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
