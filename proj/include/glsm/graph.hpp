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
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "glsm/binary_io.hpp"
#include "glsm/corpus.hpp"

namespace glsm {

struct Neighbor {
  std::uint32_t index = 0;   // position in ItemGraph::nodes()
  std::uint32_t weight = 0;  // co-transition count, >= 1

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct WeightedEdge {
  ItemId a = 0;  // a < b
  ItemId b = 0;
  std::uint32_t weight = 0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

// Undirected, weighted item co-transition graph. Nodes are kept sorted by
// item id; adjacency is CSR with each row sorted by neighbor index. The
// graph is immutable once built.
class ItemGraph {
 public:
  ItemGraph() : offsets_{0} {}

  /// Builds from a node list and undirected edges. Edge endpoints are added
  /// as nodes if missing; self-loops are rejected.
  static ItemGraph from_edges(std::vector<ItemId> nodes, std::span<const WeightedEdge> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return adjacency_.size() / 2; }
  bool empty() const { return nodes_.empty(); }

  const std::vector<ItemId>& nodes() const { return nodes_; }
  ItemId node(std::uint32_t index) const { return nodes_[index]; }
  std::optional<std::uint32_t> index_of(ItemId item) const;
  bool contains(ItemId item) const { return index_of(item).has_value(); }

  std::span<const Neighbor> neighbors(std::uint32_t index) const {
    return {adjacency_.data() + offsets_[index], adjacency_.data() + offsets_[index + 1]};
  }
  std::size_t degree(std::uint32_t index) const { return offsets_[index + 1] - offsets_[index]; }

  /// 0 when the edge is absent.
  std::uint32_t weight(ItemId a, ItemId b) const;

  /// Each undirected edge once, with a < b, sorted by (a, b).
  std::vector<WeightedEdge> edge_list() const;

  /// Subgraph induced on `keep` (ids not in the graph are ignored).
  ItemGraph induced(std::span<const ItemId> keep) const;

  friend bool operator==(const ItemGraph&, const ItemGraph&) = default;

 private:
  std::vector<ItemId> nodes_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
};

/// Accumulates transitions; consecutive duplicates are not edges.
class GraphBuilder {
 public:
  void add_node(ItemId item) { nodes_.push_back(item); }
  void add_transition(ItemId a, ItemId b, std::uint32_t weight = 1);
  void add_sequence(const BehaviorSequence& seq);
  ItemGraph build() const;

 private:
  std::vector<ItemId> nodes_;
  std::map<std::pair<ItemId, ItemId>, std::uint32_t> edges_;
};

ItemGraph build_global_graph(std::span<const BehaviorSequence> sequences);
ItemGraph build_local_graph(const BehaviorSequence& seq);

/// Union of nodes, edge weights added.
ItemGraph merge_graphs(const ItemGraph& a, const ItemGraph& b);

/// Distinct-neighbor degree over (|V| - 1); 0 for a single-node graph.
double degree_centrality(const ItemGraph& g, ItemId v);

/// Hop distance from `start` to every node, capped at `max_hops`
/// (nodes farther away, or unreachable, get -1). Indexed like nodes().
std::vector<int> hop_distances(const ItemGraph& g, std::uint32_t start, int max_hops);

/// Nodes reachable within 1..hops edges, excluding `start`, ascending ids.
std::vector<ItemId> neighbors_within(const ItemGraph& g, ItemId start, int hops);

// Binary graph encoding (little-endian):
//   u64 node_count, node_count x u64 item id (ascending)
//   u64 edge_count, edge_count x {u32 a_index, u32 b_index, u32 weight}
//   with a_index < b_index, sorted by (a_index, b_index).
void write_graph_body(ByteWriter& out, const ItemGraph& g);
ItemGraph read_graph_body(ByteReader& in);

// Graph file: the body above inside a frame() with magic "GLSG".
std::vector<std::uint8_t> encode_graph(const ItemGraph& g);
ItemGraph decode_graph(std::span<const std::uint8_t> bytes);
void save_graph(const std::filesystem::path& path, const ItemGraph& g);
ItemGraph load_graph(const std::filesystem::path& path);

}  // namespace glsm
