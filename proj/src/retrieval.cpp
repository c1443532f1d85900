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

#include "glsm/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

namespace glsm {

namespace {

constexpr std::uint32_t kSubgraphMagic = 0x55534C47;  // "GLSU"
constexpr std::uint32_t kSubgraphVersion = 1;
constexpr std::uint32_t kStoreMagic = 0x53534C47;     // "GLSS"
constexpr std::uint32_t kStoreVersion = 1;

void min_max_normalize(std::vector<double>& xs) {
  if (xs.empty()) return;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double min = *lo, max = *hi;
  for (auto& x : xs) x = max > min ? (x - min) / (max - min) : 0.0;
}

}  // namespace

double global_importance(std::span<const double> node_vec, const ClusterModel& clusters,
                         double epsilon) {
  if (clusters.centers.empty()) throw InvalidArgument("cluster model has no centers");
  double best = 0.0;
  for (const auto& c : clusters.centers) {
    if (c.size() != node_vec.size()) throw InvalidArgument("dimension mismatch with cluster center");
    const double g = 1.0 / std::max(euclidean_distance(node_vec, c), epsilon);
    best = std::max(best, g);
  }
  return best;
}

CenterNodeSet select_center_nodes(const ItemGraph& local, const EmbeddingTable& table,
                                  const ClusterModel& clusters, std::size_t n, double epsilon) {
  if (local.empty()) throw InvalidArgument("local graph is empty");
  if (n < 1) throw InvalidArgument("center count must be >= 1");
  const auto count = local.node_count();
  std::vector<double> l(count), g(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const ItemId node = local.node(i);
    l[i] = degree_centrality(local, node);
    g[i] = global_importance(table.at(node), clusters, epsilon);
  }
  auto ln = l;
  auto gn = g;
  min_max_normalize(ln);
  min_max_normalize(gn);

  CenterNodeSet out;
  out.entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    out.entries.push_back({local.node(i), l[i], g[i], ln[i], gn[i], ln[i] + gn[i]});
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const CenterEntry& a, const CenterEntry& b) {
    if (a.union_im != b.union_im) return a.union_im > b.union_im;
    return a.node < b.node;
  });
  if (out.entries.size() > n) out.entries.resize(n);
  return out;
}

ClusterModel cluster_user_nodes(const ItemGraph& local, const EmbeddingTable& table,
                                std::size_t k, std::uint64_t seed) {
  std::vector<LabeledPoint> points;
  points.reserve(local.node_count());
  for (auto node : local.nodes()) {
    const auto v = table.at(node);
    points.push_back({node, Vec(v.begin(), v.end())});
  }
  const auto kk = std::max<std::size_t>(1, std::min(k, count_distinct(points)));
  return kmeans(points, kk, seed);
}

const NodeSideInfo& UserSubgraph::info(ItemId item) const {
  const auto idx = graph.index_of(item);
  if (!idx) throw NotFound("item " + std::to_string(item) + " not in subgraph");
  return sideinfo[*idx];
}

std::optional<UserSubgraph> build_user_subgraph(const BehaviorSequence& long_term,
                                                const EmbeddingTable& table,
                                                const SubgraphConfig& cfg) {
  if (long_term.empty()) return std::nullopt;
  const auto local = build_local_graph(long_term);
  const auto clusters = cluster_user_nodes(local, table, cfg.clusters, cfg.seed);

  UserSubgraph sub;
  sub.user = long_term.user;
  sub.max_hops = cfg.max_hops;
  sub.centers = select_center_nodes(local, table, clusters, cfg.centers, cfg.epsilon);
  for (const auto& c : sub.centers.entries) {
    const auto v = table.at(c.node);
    sub.center_vectors.emplace_back(v.begin(), v.end());
  }

  std::vector<char> keep(local.node_count(), 0);
  for (const auto& c : sub.centers.entries) {
    const auto dist = hop_distances(local, *local.index_of(c.node), static_cast<int>(cfg.max_hops));
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] >= 0) keep[i] = 1;
    }
  }
  std::vector<ItemId> kept;
  for (std::uint32_t i = 0; i < local.node_count(); ++i) {
    if (keep[i]) kept.push_back(local.node(i));
  }
  sub.graph = local.induced(kept);

  sub.sideinfo.resize(sub.graph.node_count());
  for (const auto& e : long_term.events) {
    if (const auto idx = sub.graph.index_of(e.item)) {
      auto& info = sub.sideinfo[*idx];
      // Events are time-ordered, so the last write is the most recent one.
      info.category = e.category;
      info.behavior = e.behavior;
      info.last_timestamp = e.timestamp;
    }
  }
  return sub;
}

RetrievalResult retrieve(const UserSubgraph& sub, std::span<const double> target_vec,
                         std::size_t k, int hops, const RetrievalOptions& opts) {
  if (sub.centers.empty()) throw InvalidArgument("subgraph has no center nodes");
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (hops < 1 || hops > static_cast<int>(sub.max_hops)) {
    throw InvalidArgument("hops must lie in [1, " + std::to_string(sub.max_hops) + "]");
  }

  const auto n = sub.centers.size();
  std::vector<SelectedCenter> ranked(n);
  for (std::size_t i = 0; i < n; ++i) {
    ranked[i] = {sub.centers.entries[i].node, euclidean_distance(sub.center_vectors[i], target_vec)};
  }
  std::sort(ranked.begin(), ranked.end(), [&](const SelectedCenter& a, const SelectedCenter& b) {
    if (a.distance != b.distance) {
      return opts.farthest_first ? a.distance > b.distance : a.distance < b.distance;
    }
    return a.node < b.node;
  });
  ranked.resize(std::min(k, n));

  RetrievalResult result;
  result.centers = ranked;
  const auto count = sub.graph.node_count();
  std::vector<int> best_hop(count, std::numeric_limits<int>::max());
  std::vector<std::size_t> source(count, 0);
  for (std::size_t c = 0; c < ranked.size(); ++c) {
    const auto start = sub.graph.index_of(ranked[c].node);
    if (!start) continue;
    const auto dist = hop_distances(sub.graph, *start, hops);
    for (std::size_t i = 0; i < count; ++i) {
      if (dist[i] >= 1 && dist[i] < best_hop[i]) {
        best_hop[i] = dist[i];
        source[i] = c;
      }
    }
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    if (best_hop[i] == std::numeric_limits<int>::max()) continue;
    const auto& src = ranked[source[i]];
    result.nodes.push_back({sub.graph.node(i), best_hop[i], src.node, src.distance});
  }
  std::sort(result.nodes.begin(), result.nodes.end(),
            [](const RetrievedNode& a, const RetrievedNode& b) {
              if (a.hop != b.hop) return a.hop < b.hop;
              if (a.center_distance != b.center_distance) {
                return a.center_distance < b.center_distance;
              }
              return a.node < b.node;
            });
  if (result.nodes.size() > opts.result_cap) result.nodes.resize(opts.result_cap);
  return result;
}

std::vector<BehaviorEvent> hard_category_retrieve(const BehaviorSequence& long_term,
                                                  CategoryId target_category, std::size_t k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  std::vector<BehaviorEvent> out;
  for (auto it = long_term.events.rbegin(); it != long_term.events.rend() && out.size() < k; ++it) {
    if (it->category == target_category) out.push_back(*it);
  }
  return out;
}

std::vector<std::uint8_t> encode_subgraph(const UserSubgraph& sub) {
  const std::size_t dim = sub.center_vectors.empty() ? 0 : sub.center_vectors.front().size();
  if (sub.center_vectors.size() != sub.centers.size()) {
    throw InvalidArgument("center vectors do not match center entries");
  }
  if (sub.sideinfo.size() != sub.graph.node_count()) {
    throw InvalidArgument("sideinfo does not match subgraph nodes");
  }
  ByteWriter w;
  w.u64(sub.user);
  w.u32(sub.max_hops);
  w.u32(static_cast<std::uint32_t>(dim));
  w.u32(static_cast<std::uint32_t>(sub.centers.size()));
  for (std::size_t i = 0; i < sub.centers.size(); ++i) {
    const auto& c = sub.centers.entries[i];
    w.u64(c.node);
    w.f64(c.l_im);
    w.f64(c.g_im);
    w.f64(c.l_norm);
    w.f64(c.g_norm);
    w.f64(c.union_im);
    if (sub.center_vectors[i].size() != dim) throw InvalidArgument("ragged center vectors");
    for (double x : sub.center_vectors[i]) w.f64(x);
  }
  write_graph_body(w, sub.graph);
  for (const auto& info : sub.sideinfo) {
    w.u64(info.category);
    w.u8(static_cast<std::uint8_t>(info.behavior));
    w.i64(info.last_timestamp);
  }
  return frame(kSubgraphMagic, kSubgraphVersion, w.data());
}

UserSubgraph decode_subgraph(std::span<const std::uint8_t> bytes) {
  ByteReader outer(bytes);
  ByteReader in(unframe(outer, kSubgraphMagic, kSubgraphVersion, "subgraph"));
  UserSubgraph sub;
  sub.user = in.u64();
  sub.max_hops = in.u32();
  const auto dim = in.u32();
  const auto n = in.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    CenterEntry c;
    c.node = in.u64();
    c.l_im = in.f64();
    c.g_im = in.f64();
    c.l_norm = in.f64();
    c.g_norm = in.f64();
    c.union_im = in.f64();
    sub.centers.entries.push_back(c);
    Vec v(dim);
    for (auto& x : v) x = in.f64();
    sub.center_vectors.push_back(std::move(v));
  }
  sub.graph = read_graph_body(in);
  sub.sideinfo.resize(sub.graph.node_count());
  for (auto& info : sub.sideinfo) {
    info.category = in.u64();
    const auto b = in.u8();
    if (b >= kBehaviorTypeCount) throw InvalidArgument("subgraph: bad behavior type");
    info.behavior = static_cast<BehaviorType>(b);
    info.last_timestamp = in.i64();
  }
  if (!in.done()) throw InvalidArgument("subgraph: trailing bytes in record");
  return sub;
}

void store_subgraph(const UserSubgraph& sub, std::ostream& sink) {
  const auto bytes = encode_subgraph(sub);
  sink.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw Error("failed to write subgraph record");
}

UserSubgraph load_subgraph(std::istream& source) {
  // Frame header: magic, version, u64 length.
  std::vector<std::uint8_t> buf(16);
  source.read(reinterpret_cast<char*>(buf.data()), 16);
  if (source.gcount() != 16) {
    throw FormatError(FormatErrorKind::kTruncated, "subgraph record header");
  }
  ByteReader header(buf);
  header.u32();
  header.u32();
  const auto len = header.u64();
  constexpr std::uint64_t kMaxRecord = 1ull << 32;
  if (len > kMaxRecord) throw FormatError(FormatErrorKind::kTruncated, "implausible record length");
  buf.resize(16 + len + 4);
  source.read(reinterpret_cast<char*>(buf.data() + 16), static_cast<std::streamsize>(len + 4));
  if (static_cast<std::uint64_t>(source.gcount()) != len + 4) {
    throw FormatError(FormatErrorKind::kTruncated, "subgraph record body");
  }
  return decode_subgraph(buf);
}

void SubgraphStore::add(UserSubgraph sub) {
  const auto user = sub.user;
  subgraphs_.insert_or_assign(user, std::move(sub));
}

const UserSubgraph* SubgraphStore::find(UserId user) const {
  const auto it = subgraphs_.find(user);
  return it == subgraphs_.end() ? nullptr : &it->second;
}

std::vector<std::uint8_t> SubgraphStore::encode() const {
  ByteWriter w;
  w.u32(kStoreMagic);
  w.u32(kStoreVersion);
  w.u64(subgraphs_.size());
  for (const auto& [user, sub] : subgraphs_) w.bytes(encode_subgraph(sub));
  return w.take();
}

SubgraphStore SubgraphStore::decode(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (in.u32() != kStoreMagic) throw FormatError(FormatErrorKind::kBadMagic, "subgraph store");
  const auto version = in.u32();
  if (version != kStoreVersion) {
    throw FormatError(FormatErrorKind::kVersionMismatch,
                      "subgraph store version " + std::to_string(version));
  }
  const auto count = in.u64();
  SubgraphStore store;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto start = in.position();
    // Peek the frame length to slice out one record.
    ByteReader peek(bytes.subspan(start));
    peek.u32();
    peek.u32();
    const auto len = peek.u64();
    if (len > peek.remaining()) {
      throw FormatError(FormatErrorKind::kTruncated, "subgraph store record " + std::to_string(i));
    }
    const auto record = in.bytes(static_cast<std::size_t>(16 + len + 4));
    store.add(decode_subgraph(record));
  }
  if (!in.done()) throw InvalidArgument("subgraph store: trailing bytes");
  return store;
}

void SubgraphStore::save(const std::filesystem::path& path) const {
  write_file_atomic(path, encode());
}

SubgraphStore SubgraphStore::load(const std::filesystem::path& path) {
  return decode(read_file_bytes(path));
}

}  // namespace glsm
