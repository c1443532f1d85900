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

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glsm/features.hpp"

namespace glsm {

struct ServeRequest {
  UserId user = 0;
  ItemId item = 0;
  std::uint32_t scene = 0;
  Timestamp timestamp = 0;
  friend bool operator==(const ServeRequest&, const ServeRequest&) = default;
};

/// One request per line: user,item,scene,timestamp. '#' lines are comments.
std::vector<ServeRequest> parse_requests(std::string_view text);
std::string format_requests(std::span<const ServeRequest> requests);

struct ServeConfig {
  double material_delay_ms = 5.0;  // mock material service
  double store_delay_ms = 2.0;     // subgraph store fetch inside retrieval
};

struct ServeTrace {
  UserId user = 0;
  ItemId item = 0;
  bool parallel = false;
  double retrieval_ms = 0.0;
  double material_ms = 0.0;
  double assembly_ms = 0.0;
  double forward_ms = 0.0;
  double total_ms = 0.0;
  double score = 0.0;
  bool fallback = false;  // user not in the store; short-term only
};

struct LatencySummary {
  std::size_t count = 0;
  double p50 = 0.0, p95 = 0.0, p99 = 0.0, mean = 0.0;
};

/// Nearest-rank percentiles; all zero for an empty input.
LatencySummary summarize(std::vector<double> values);

std::string format_traces(std::span<const ServeTrace> traces);

// In-process model of the serving path: graph retrieval (store fetch plus
// subgraph walk) runs either concurrently with the material service or
// before it, then features are assembled and the model scores the request.
class ServingSimulator {
 public:
  ServingSimulator(const SubgraphStore& store, const Checkpoint& checkpoint,
                   const EmbeddingTable& graph_embeddings,
                   std::span<const BehaviorSequence> histories, ServeConfig cfg);

  ServeTrace serve(const ServeRequest& req, bool parallel) const;
  std::vector<ServeTrace> run(std::span<const ServeRequest> requests, bool parallel) const;

 private:
  const SubgraphStore* store_;
  const Checkpoint* checkpoint_;
  FeatureAssembler assembler_;
  std::map<UserId, BehaviorSequence> histories_;
  std::map<ItemId, CategoryId> item_category_;
  ServeConfig cfg_;
};

}  // namespace glsm
