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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "glsm/embed.hpp"
#include "glsm/features.hpp"
#include "glsm/metrics.hpp"
#include "glsm/model.hpp"
#include "glsm/retrieval.hpp"
#include "glsm/synth.hpp"

namespace glsm {

/// One cell of a configuration matrix.
struct Variant {
  std::string name;
  Horizon horizon = Horizon::kLongShort;
  Fusion fusion = Fusion::kGate;
  std::size_t top_k = 15;
  LongSource long_source = LongSource::kGraph;
};

inline constexpr std::size_t kTopKGrid[] = {1, 3, 5, 10, 15, 20};

/// Named matrices: "acceptance", "fusion-ablation", "topk-sweep",
/// "horizons", "full". Throws InvalidArgument for other names.
std::vector<Variant> experiment_variants(std::string_view name);
std::vector<std::string> experiment_names();

struct ExperimentConfig {
  GeneratorConfig generator;
  std::uint64_t data_seed = 7;
  double test_fraction = 0.3;
  GraphSageConfig sage;
  std::size_t k_min = 2;
  std::size_t k_max = 8;
  std::size_t cluster_sample_users = 40;
  SubgraphConfig subgraph;
  FeatureConfig features;
  ModelDims dims;
  TrainConfig train;
  InitScheme init = InitScheme::kGlorot;
  std::uint64_t model_seed = 1;
};

/// Defaults used by the synthetic experiments.
ExperimentConfig default_experiment_config();

struct MetricsRow {
  std::string config;
  double auc = 0.0;
  double gauc = 0.0;
  double logloss = 0.0;
  std::size_t test_rows = 0;
  double final_train_loss = 0.0;
  double seconds = 0.0;
};

struct ScoreDump {
  std::string config;
  UserId user = 0;
  ItemId item = 0;
  int label = 0;
  double score = 0.0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::vector<ScoreDump> scores;
  std::size_t cluster_count = 0;

  const MetricsRow& row(std::string_view config) const;
  /// config,auc,gauc,logloss,test_rows,final_train_loss
  std::string to_delimited() const;
  std::string to_table() const;
  /// config,user,item,label,score
  std::string scores_delimited() const;
};

MetricsRow evaluate_scores(std::string config, std::span<const Sample> test,
                           std::span<const double> scores);

using ProgressFn = std::function<void(const std::string&)>;

/// Generates the corpus, trains embeddings, builds the store, then trains
/// and evaluates every variant of the named matrix with fixed seeds.
MetricsReport run_experiment(std::string_view name, const ExperimentConfig& cfg,
                             const ProgressFn& progress = {});

}  // namespace glsm
