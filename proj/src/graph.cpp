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

#include "glsm/graph.hpp"

#include <algorithm>
#include <deque>

namespace glsm {

namespace {

constexpr std::uint32_t kGraphMagic = 0x47534C47;  // "GLSG"
constexpr std::uint32_t kGraphVersion = 1;

}  // namespace

ItemGraph ItemGraph::from_edges(std::vector<ItemId> nodes, std::span<const WeightedEdge> edges) {
  for (const auto& e : edges) {
    if (e.a == e.b) throw InvalidArgument("self-loop on item " + std::to_string(e.a));
    if (e.weight == 0) throw InvalidArgument("edge weight must be positive");
    nodes.push_back(e.a);
    nodes.push_back(e.b);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  ItemGraph g;
  g.nodes_ = std::move(nodes);
  const auto n = g.nodes_.size();
  std::vector<std::vector<Neighbor>> rows(n);
  for (const auto& e : edges) {
    const auto ia = *g.index_of(e.a);
    const auto ib = *g.index_of(e.b);
    rows[ia].push_back({ib, e.weight});
    rows[ib].push_back({ia, e.weight});
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = rows[i];
    std::sort(row.begin(), row.end(),
              [](const Neighbor& x, const Neighbor& y) { return x.index < y.index; });
    // Merge duplicate edges by summing weights.
    std::vector<Neighbor> merged;
    for (const auto& nb : row) {
      if (!merged.empty() && merged.back().index == nb.index) {
        merged.back().weight += nb.weight;
      } else {
        merged.push_back(nb);
      }
    }
    g.adjacency_.insert(g.adjacency_.end(), merged.begin(), merged.end());
    g.offsets_[i + 1] = g.adjacency_.size();
  }
  return g;
}

std::optional<std::uint32_t> ItemGraph::index_of(ItemId item) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), item);
  if (it == nodes_.end() || *it != item) return std::nullopt;
  return static_cast<std::uint32_t>(it - nodes_.begin());
}

std::uint32_t ItemGraph::weight(ItemId a, ItemId b) const {
  const auto ia = index_of(a);
  const auto ib = index_of(b);
  if (!ia || !ib) return 0;
  const auto row = neighbors(*ia);
  const auto it = std::lower_bound(row.begin(), row.end(), *ib,
                                   [](const Neighbor& nb, std::uint32_t v) { return nb.index < v; });
  return it != row.end() && it->index == *ib ? it->weight : 0;
}

std::vector<WeightedEdge> ItemGraph::edge_list() const {
  std::vector<WeightedEdge> out;
  out.reserve(edge_count());
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    for (const auto& nb : neighbors(i)) {
      if (nb.index > i) out.push_back({nodes_[i], nodes_[nb.index], nb.weight});
    }
  }
  return out;
}

ItemGraph ItemGraph::induced(std::span<const ItemId> keep) const {
  std::vector<char> mask(nodes_.size(), 0);
  std::vector<ItemId> kept;
  for (auto item : keep) {
    if (auto idx = index_of(item)) {
      if (!mask[*idx]) kept.push_back(item);
      mask[*idx] = 1;
    }
  }
  std::vector<WeightedEdge> edges;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    if (!mask[i]) continue;
    for (const auto& nb : neighbors(i)) {
      if (nb.index > i && mask[nb.index]) edges.push_back({nodes_[i], nodes_[nb.index], nb.weight});
    }
  }
  return from_edges(std::move(kept), edges);
}

void GraphBuilder::add_transition(ItemId a, ItemId b, std::uint32_t weight) {
  nodes_.push_back(a);
  nodes_.push_back(b);
  if (a == b) return;
  if (a > b) std::swap(a, b);
  edges_[{a, b}] += weight;
}

void GraphBuilder::add_sequence(const BehaviorSequence& seq) {
  const auto& ev = seq.events;
  if (ev.empty()) return;
  add_node(ev.front().item);
  for (std::size_t i = 1; i < ev.size(); ++i) add_transition(ev[i - 1].item, ev[i].item);
}

ItemGraph GraphBuilder::build() const {
  std::vector<WeightedEdge> edges;
  edges.reserve(edges_.size());
  for (const auto& [key, w] : edges_) edges.push_back({key.first, key.second, w});
  return ItemGraph::from_edges(nodes_, edges);
}

ItemGraph build_global_graph(std::span<const BehaviorSequence> sequences) {
  GraphBuilder builder;
  for (const auto& seq : sequences) builder.add_sequence(seq);
  return builder.build();
}

ItemGraph build_local_graph(const BehaviorSequence& seq) {
  GraphBuilder builder;
  builder.add_sequence(seq);
  return builder.build();
}

ItemGraph merge_graphs(const ItemGraph& a, const ItemGraph& b) {
  std::vector<ItemId> nodes = a.nodes();
  nodes.insert(nodes.end(), b.nodes().begin(), b.nodes().end());
  auto edges = a.edge_list();
  const auto eb = b.edge_list();
  edges.insert(edges.end(), eb.begin(), eb.end());
  return ItemGraph::from_edges(std::move(nodes), edges);
}

double degree_centrality(const ItemGraph& g, ItemId v) {
  const auto idx = g.index_of(v);
  if (!idx) throw NotFound("item " + std::to_string(v) + " not in graph");
  if (g.node_count() == 1) return 0.0;
  return static_cast<double>(g.degree(*idx)) / static_cast<double>(g.node_count() - 1);
}

std::vector<int> hop_distances(const ItemGraph& g, std::uint32_t start, int max_hops) {
  std::vector<int> dist(g.node_count(), -1);
  dist[start] = 0;
  std::deque<std::uint32_t> frontier{start};
  while (!frontier.empty()) {
    const auto cur = frontier.front();
    frontier.pop_front();
    if (dist[cur] >= max_hops) continue;
    for (const auto& nb : g.neighbors(cur)) {
      if (dist[nb.index] < 0) {
        dist[nb.index] = dist[cur] + 1;
        frontier.push_back(nb.index);
      }
    }
  }
  return dist;
}

std::vector<ItemId> neighbors_within(const ItemGraph& g, ItemId start, int hops) {
  const auto idx = g.index_of(start);
  if (!idx) throw NotFound("item " + std::to_string(start) + " not in graph");
  if (hops < 1) throw InvalidArgument("hops must be >= 1");
  const auto dist = hop_distances(g, *idx, hops);
  std::vector<ItemId> out;
  for (std::uint32_t i = 0; i < dist.size(); ++i) {
    if (dist[i] >= 1) out.push_back(g.node(i));
  }
  return out;
}

void write_graph_body(ByteWriter& out, const ItemGraph& g) {
  out.u64(g.node_count());
  for (auto id : g.nodes()) out.u64(id);
  out.u64(g.edge_count());
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    for (const auto& nb : g.neighbors(i)) {
      if (nb.index <= i) continue;
      out.u32(i);
      out.u32(nb.index);
      out.u32(nb.weight);
    }
  }
}

ItemGraph read_graph_body(ByteReader& in) {
  const auto n = in.u64();
  if (n > in.remaining() / 8) {
    throw FormatError(FormatErrorKind::kTruncated, "graph node table");
  }
  std::vector<ItemId> nodes(n);
  for (auto& id : nodes) id = in.u64();
  if (!std::is_sorted(nodes.begin(), nodes.end()) ||
      std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
    throw InvalidArgument("graph node table not strictly ascending");
  }
  const auto m = in.u64();
  if (m > in.remaining() / 12) {
    throw FormatError(FormatErrorKind::kTruncated, "graph edge list");
  }
  std::vector<WeightedEdge> edges(m);
  for (auto& e : edges) {
    const auto a = in.u32();
    const auto b = in.u32();
    e.weight = in.u32();
    if (a >= b || b >= n) throw InvalidArgument("graph edge index out of range");
    e.a = nodes[a];
    e.b = nodes[b];
  }
  return ItemGraph::from_edges(std::move(nodes), edges);
}

std::vector<std::uint8_t> encode_graph(const ItemGraph& g) {
  ByteWriter body;
  write_graph_body(body, g);
  return frame(kGraphMagic, kGraphVersion, body.data());
}

ItemGraph decode_graph(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  ByteReader body(unframe(in, kGraphMagic, kGraphVersion, "graph"));
  return read_graph_body(body);
}

void save_graph(const std::filesystem::path& path, const ItemGraph& g) {
  write_file_atomic(path, encode_graph(g));
}

ItemGraph load_graph(const std::filesystem::path& path) { return decode_graph(read_file_bytes(path)); }

}  // namespace glsm
