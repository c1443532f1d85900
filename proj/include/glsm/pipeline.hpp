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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glsm/embed.hpp"
#include "glsm/experiment.hpp"
#include "glsm/features.hpp"
#include "glsm/serving.hpp"
#include "glsm/synth.hpp"

namespace glsm {

enum class Stage { kSynth, kIngest, kBuildGraph, kEmbed, kCenters, kRetrieve, kTrain, kEval, kServeSim };

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view name);

/// A consuming stage found no upstream artifact.
class MissingArtifact : public Error {
 public:
  MissingArtifact(const std::filesystem::path& path, Stage producer)
      : Error("missing " + path.string() + "; run the `" + std::string(to_string(producer)) +
              "` stage first"),
        producer_(producer) {}
  Stage producer() const { return producer_; }

 private:
  Stage producer_;
};

// Artifact file names inside the work directory.
namespace artifact {
inline constexpr const char* kCorpus = "corpus.log";
inline constexpr const char* kGeneratorConfig = "generator.cfg";
inline constexpr const char* kTruth = "truth.txt";
inline constexpr const char* kHistories = "histories.log";
inline constexpr const char* kImpressions = "impressions.log";
inline constexpr const char* kGraph = "graph.bin";
inline constexpr const char* kEmbeddings = "embeddings.bin";
inline constexpr const char* kClusters = "clusters.csv";
inline constexpr const char* kStore = "store.bin";
inline constexpr const char* kCenters = "centers.csv";
inline constexpr const char* kRetrieval = "retrieval.csv";
inline constexpr const char* kCheckpoint = "checkpoint.bin";
inline constexpr const char* kLoss = "loss.csv";
inline constexpr const char* kMetrics = "metrics.csv";
inline constexpr const char* kScores = "scores.csv";
inline constexpr const char* kRequests = "requests.csv";
inline constexpr const char* kTrace = "trace.csv";
inline constexpr const char* kLatency = "latency.csv";
}  // namespace artifact

struct PipelineConfig {
  std::filesystem::path workdir = "glsm-work";
  std::uint64_t seed = 7;

  GeneratorConfig generator;
  std::optional<std::filesystem::path> input_log;  // ingest source; default corpus.log

  GraphSageConfig sage{16, 5, 3, 10, 5, 256, 0.01};
  std::size_t k_min = 2;
  std::size_t k_max = 8;
  std::size_t cluster_sample_users = 40;

  std::size_t centers = 20;
  std::uint32_t max_hops = kDefaultMaxHops;

  FeatureConfig features;
  ModelDims dims;
  TrainConfig train{0.05, 8, 32, 11, 0.9};
  Horizon horizon = Horizon::kLongShort;
  Fusion fusion = Fusion::kGate;
  InitScheme init = InitScheme::kGlorot;
  std::uint64_t model_seed = 1;
  double test_fraction = 0.3;

  std::optional<UserId> query_user;  // retrieve: single query
  std::optional<ItemId> query_item;

  std::string experiment;  // eval: run a named matrix instead
  ServeConfig serve;
  std::optional<std::filesystem::path> requests;
  std::size_t max_requests = 200;
};

struct StageResult {
  std::vector<std::filesystem::path> artifacts;
  std::string summary;  // human-readable, for standard output
};

/// Runs one stage. Progress goes to `log`; outputs are written atomically.
StageResult run_stage(Stage stage, const PipelineConfig& cfg, std::ostream& log);

/// Reads the work directory's cluster-count choice written by `embed`.
std::size_t read_cluster_choice(const std::filesystem::path& clusters_csv);

}  // namespace glsm
