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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "glsm/cluster.hpp"
#include "glsm/corpus.hpp"
#include "glsm/embed.hpp"
#include "glsm/graph.hpp"

namespace glsm {

inline constexpr double kImportanceEpsilon = 1e-8;
inline constexpr int kDefaultMaxHops = 2;
inline constexpr std::size_t kDefaultResultCap = 200;

struct CenterEntry {
  ItemId node = 0;
  double l_im = 0.0;      // degree centrality
  double g_im = 0.0;      // reciprocal distance to the nearest cluster center
  double l_norm = 0.0;    // min-max normalized over the user's nodes
  double g_norm = 0.0;
  double union_im = 0.0;  // l_norm + g_norm

  friend bool operator==(const CenterEntry&, const CenterEntry&) = default;
};

/// Sorted by union_im descending, ties by ascending node id.
struct CenterNodeSet {
  std::vector<CenterEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  friend bool operator==(const CenterNodeSet&, const CenterNodeSet&) = default;
};

/// max over centers of 1 / max(||node - center||, epsilon).
double global_importance(std::span<const double> node_vec, const ClusterModel& clusters,
                         double epsilon = kImportanceEpsilon);

/// Scores every node of `local` and keeps the top `n`. Throws NotFound when
/// a node has no embedding.
CenterNodeSet select_center_nodes(const ItemGraph& local, const EmbeddingTable& table,
                                  const ClusterModel& clusters, std::size_t n,
                                  double epsilon = kImportanceEpsilon);

/// Clusters the embeddings of the local graph's nodes, k clamped to the
/// number of distinct vectors.
ClusterModel cluster_user_nodes(const ItemGraph& local, const EmbeddingTable& table,
                                std::size_t k, std::uint64_t seed);

struct NodeSideInfo {
  CategoryId category = 0;
  BehaviorType behavior = BehaviorType::kClick;
  Timestamp last_timestamp = 0;

  friend bool operator==(const NodeSideInfo&, const NodeSideInfo&) = default;
};

/// Precompiled per-user retrieval structure.
struct UserSubgraph {
  UserId user = 0;
  std::uint32_t max_hops = kDefaultMaxHops;
  CenterNodeSet centers;
  std::vector<Vec> center_vectors;       // aligned with centers.entries
  ItemGraph graph;                       // nodes within max_hops of a center
  std::vector<NodeSideInfo> sideinfo;    // aligned with graph.nodes()

  const NodeSideInfo& info(ItemId item) const;
  friend bool operator==(const UserSubgraph&, const UserSubgraph&) = default;
};

struct SubgraphConfig {
  std::size_t centers = 20;
  std::uint32_t max_hops = kDefaultMaxHops;
  std::size_t clusters = 3;
  std::uint64_t seed = 1;
  double epsilon = kImportanceEpsilon;
};

/// Builds the local graph of `long_term`, clusters, selects centers and
/// keeps the max_hops neighborhood. Returns nullopt for an empty sequence.
std::optional<UserSubgraph> build_user_subgraph(const BehaviorSequence& long_term,
                                                const EmbeddingTable& table,
                                                const SubgraphConfig& cfg);

struct RetrievedNode {
  ItemId node = 0;
  int hop = 0;                  // 1..hops
  ItemId source_center = 0;     // center that reached it at minimal hop
  double center_distance = 0.0; // distance of that center to the target

  friend bool operator==(const RetrievedNode&, const RetrievedNode&) = default;
};

struct SelectedCenter {
  ItemId node = 0;
  double distance = 0.0;
};

struct RetrievalResult {
  std::vector<SelectedCenter> centers;  // selection order
  std::vector<RetrievedNode> nodes;     // by (hop, center distance, node id)
};

struct RetrievalOptions {
  // The published listing sorts centers by descending distance; nearest
  // first is the default here.
  bool farthest_first = false;
  std::size_t result_cap = kDefaultResultCap;
};

RetrievalResult retrieve(const UserSubgraph& sub, std::span<const double> target_vec,
                         std::size_t k, int hops, const RetrievalOptions& opts = {});

/// Category-match baseline: the `k` most recent long-term events with the
/// target's category, newest first.
std::vector<BehaviorEvent> hard_category_retrieve(const BehaviorSequence& long_term,
                                                  CategoryId target_category, std::size_t k);

// Subgraph record: frame() with magic "GLSU" around
//   u64 user, u32 max_hops, u32 dim, u32 center_count,
//   center_count x {u64 node, f64 l_im, f64 g_im, f64 l_norm, f64 g_norm,
//                   f64 union_im, dim x f64 center vector},
//   graph body (see graph.hpp),
//   node_count x {u64 category, u8 behavior, i64 last_timestamp}.
std::vector<std::uint8_t> encode_subgraph(const UserSubgraph& sub);
UserSubgraph decode_subgraph(std::span<const std::uint8_t> bytes);

void store_subgraph(const UserSubgraph& sub, std::ostream& sink);
UserSubgraph load_subgraph(std::istream& source);

// Store file: u32 magic "GLSS", u32 version, u64 record count, then records.
class SubgraphStore {
 public:
  void add(UserSubgraph sub);
  const UserSubgraph* find(UserId user) const;
  std::size_t size() const { return subgraphs_.size(); }
  const std::map<UserId, UserSubgraph>& subgraphs() const { return subgraphs_; }

  std::vector<std::uint8_t> encode() const;
  static SubgraphStore decode(std::span<const std::uint8_t> bytes);
  void save(const std::filesystem::path& path) const;
  static SubgraphStore load(const std::filesystem::path& path);

 private:
  std::map<UserId, UserSubgraph> subgraphs_;
};

}  // namespace glsm
