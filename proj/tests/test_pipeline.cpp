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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "glsm/pipeline.hpp"

using namespace glsm;
namespace fs = std::filesystem;

namespace {

const Stage kChain[] = {Stage::kSynth, Stage::kIngest,   Stage::kBuildGraph,
                        Stage::kEmbed, Stage::kCenters,  Stage::kRetrieve,
                        Stage::kTrain, Stage::kEval,     Stage::kServeSim};

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("glsm_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

PipelineConfig small_config(const fs::path& dir) {
  PipelineConfig c;
  c.workdir = dir;
  c.generator.users = 40;
  c.generator.items = 150;
  c.sage.dim = 8;
  c.sage.epochs = 1;
  c.k_max = 4;
  c.cluster_sample_users = 10;
  c.centers = 8;
  c.dims.dim = 8;
  c.dims.profile_dim = 4;
  c.dims.attention_hidden = 8;
  c.dims.gate_hidden = 8;
  c.dims.hidden = {16, 8};
  c.train.epochs = 2;
  c.serve.material_delay_ms = 0.1;
  c.serve.store_delay_ms = 0.05;
  c.max_requests = 20;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void run_chain(const PipelineConfig& cfg) {
  std::ostringstream log;
  for (auto s : kChain) run_stage(s, cfg, log);
}

}  // namespace

TEST(Stage, NamesRoundTrip) {
  for (auto s : kChain) EXPECT_EQ(parse_stage(to_string(s)), s);
  EXPECT_THROW(parse_stage("bogus"), InvalidArgument);
}

TEST(Stage, MissingArtifactNamesProducer) {
  const auto dir = fresh_dir("missing");
  auto cfg = small_config(dir);
  std::ostringstream log;
  run_stage(Stage::kSynth, cfg, log);
  run_stage(Stage::kIngest, cfg, log);
  run_stage(Stage::kBuildGraph, cfg, log);
  try {
    run_stage(Stage::kCenters, cfg, log);
    FAIL() << "expected MissingArtifact";
  } catch (const MissingArtifact& e) {
    EXPECT_EQ(e.producer(), Stage::kEmbed);
    EXPECT_NE(std::string(e.what()).find("embed"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(Pipeline, FullChainIsReproducible) {
  const auto a = fresh_dir("a"), b = fresh_dir("b");
  run_chain(small_config(a));
  run_chain(small_config(b));
  for (const char* name : {artifact::kCorpus, artifact::kHistories, artifact::kImpressions,
                           artifact::kGraph, artifact::kEmbeddings, artifact::kClusters,
                           artifact::kStore, artifact::kCenters, artifact::kRetrieval,
                           artifact::kCheckpoint, artifact::kLoss, artifact::kMetrics,
                           artifact::kScores}) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_FALSE(slurp(a / name).empty()) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  EXPECT_TRUE(fs::exists(a / artifact::kLatency));
  EXPECT_TRUE(fs::exists(a / artifact::kTrace));
  const auto k = read_cluster_choice(a / artifact::kClusters);
  EXPECT_GE(k, 2u);
  EXPECT_LE(k, 4u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, RunsStagesAndReportsMissingInputs) {
  const char* cli = std::getenv("GLSM_CLI");
  if (cli == nullptr) GTEST_SKIP() << "GLSM_CLI not set";
  const auto dir = fresh_dir("cli");
  const std::string base = std::string(cli) + " -w " + dir.string() +
                           " --users 30 --dim 8 --embed-epochs 1 --k-max 3 ";
  EXPECT_EQ(std::system((base + "synth > /dev/null 2>&1").c_str()), 0);
  EXPECT_EQ(std::system((base + "ingest > /dev/null 2>&1").c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / artifact::kHistories));
  EXPECT_NE(std::system((base + "centers > /dev/null 2>&1").c_str()), 0);
  EXPECT_NE(std::system((std::string(cli) + " --no-such-flag > /dev/null 2>&1").c_str()), 0);
  fs::remove_all(dir);
}
