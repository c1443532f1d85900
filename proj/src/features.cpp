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

#include "glsm/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "glsm/cluster.hpp"

namespace glsm {

namespace {

constexpr std::uint32_t kCheckpointMagic = 0x43534C47;  // "GLSC"
constexpr std::uint32_t kCheckpointVersion = 1;

void write_map(ByteWriter& out, const std::map<std::uint64_t, std::uint32_t>& m) {
  out.u64(m.size());
  for (const auto& [id, row] : m) {
    out.u64(id);
    out.u32(row);
  }
}

std::map<std::uint64_t, std::uint32_t> read_map(ByteReader& in) {
  const auto n = in.u64();
  if (n > in.remaining() / 12) throw FormatError(FormatErrorKind::kTruncated, "vocabulary");
  std::map<std::uint64_t, std::uint32_t> m;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto id = in.u64();
    m[id] = in.u32();
  }
  return m;
}

void assign_rows(std::map<std::uint64_t, std::uint32_t>& m) {
  std::uint32_t next = 1;
  for (auto& [id, row] : m) row = next++;
}

}  // namespace

Vocabulary Vocabulary::build(std::span<const BehaviorSequence> histories,
                             std::span<const BehaviorEvent> impressions) {
  Vocabulary v;
  auto add = [&](const BehaviorEvent& e) {
    v.items_.emplace(e.item, 0);
    v.categories_.emplace(e.category, 0);
    v.users_.emplace(e.user, 0);
  };
  for (const auto& seq : histories) {
    v.users_.emplace(seq.user, 0);
    for (const auto& e : seq.events) add(e);
  }
  for (const auto& e : impressions) add(e);
  assign_rows(v.items_);
  assign_rows(v.categories_);
  assign_rows(v.users_);
  return v;
}

void Vocabulary::write(ByteWriter& out) const {
  write_map(out, items_);
  write_map(out, categories_);
  write_map(out, users_);
}

Vocabulary Vocabulary::read(ByteReader& in) {
  Vocabulary v;
  v.items_ = read_map(in);
  v.categories_ = read_map(in);
  v.users_ = read_map(in);
  return v;
}

FeatureAssembler::FeatureAssembler(const Vocabulary& vocab, const SubgraphStore* store,
                                   const EmbeddingTable* graph_embeddings, FeatureConfig cfg)
    : vocab_(&vocab), store_(store), graph_embeddings_(graph_embeddings), cfg_(cfg) {
  if (cfg_.long_source == LongSource::kGraph && (!store_ || !graph_embeddings_)) {
    throw InvalidArgument("graph retrieval needs a subgraph store and graph embeddings");
  }
  if (cfg_.top_k == 0 || cfg_.category_k == 0) throw InvalidArgument("k must be >= 1");
}

EventFeature FeatureAssembler::feature(ItemId item, CategoryId category, BehaviorType behavior,
                                       Timestamp when, Timestamp now) const {
  EventFeature f;
  f.item = vocab_->item(item);
  f.category = vocab_->category(category);
  f.behavior = static_cast<std::uint32_t>(behavior) + 1;
  f.time_bucket = time_bucket(now, when);
  return f;
}

std::optional<RetrievalResult> FeatureAssembler::retrieve_long(UserId user, ItemId target) const {
  if (!store_ || !graph_embeddings_) return std::nullopt;
  const auto* sub = store_->find(user);
  const auto* vec = graph_embeddings_->find(target);
  if (!sub || !vec || sub->centers.empty()) return std::nullopt;
  RetrievalOptions opts;
  opts.farthest_first = cfg_.farthest_first;
  opts.result_cap = cfg_.result_cap;
  const int hops = std::min<int>(cfg_.hops, static_cast<int>(sub->max_hops));
  return retrieve(*sub, *vec, cfg_.top_k, hops, opts);
}

Sample FeatureAssembler::build(const BehaviorSequence& history, const BehaviorEvent& impression,
                               const std::optional<RetrievalResult>& retrieved) const {
  Sample s;
  s.user_id = impression.user;
  s.item_id = impression.item;
  s.user = vocab_->user(impression.user);
  s.target_item = vocab_->item(impression.item);
  s.target_category = vocab_->category(impression.category);
  s.label = impression.label.value_or(0);
  const Timestamp now = impression.timestamp;

  BehaviorSequence past;
  past.user = history.user;
  for (const auto& e : history.events) {
    if (e.timestamp <= now) past.events.push_back(e);
  }
  const auto split = split_long_short(past, cfg_.boundary_count);

  if (cfg_.long_source == LongSource::kGraph) {
    if (retrieved) {
      const auto* sub = store_->find(impression.user);
      for (const auto& c : retrieved->centers) {
        const auto& info = sub->info(c.node);
        auto& group = s.center_groups.emplace_back();
        group.push_back(feature(c.node, info.category, info.behavior, info.last_timestamp, now));
      }
      std::map<ItemId, std::size_t> slot;
      for (std::size_t i = 0; i < retrieved->centers.size(); ++i) {
        slot[retrieved->centers[i].node] = i;
      }
      for (const auto& n : retrieved->nodes) {
        const auto& info = sub->info(n.node);
        s.center_groups[slot.at(n.source_center)].push_back(
            feature(n.node, info.category, info.behavior, info.last_timestamp, now));
      }
    } else {
      s.long_fallback = store_->find(impression.user) == nullptr;
    }
  } else {
    const auto hits = split.long_term.empty()
                          ? std::vector<BehaviorEvent>{}
                          : hard_category_retrieve(split.long_term, impression.category,
                                                   cfg_.category_k);
    if (!hits.empty()) {
      auto& group = s.center_groups.emplace_back();
      for (const auto& e : hits) group.push_back(feature(e.item, e.category, e.behavior, e.timestamp, now));
    }
  }

  const auto scenes = segment_scenes(split.short_term, SceneConfig{cfg_.scene_count});
  for (const auto& sc : scenes) {
    auto& out = s.scenes.emplace_back();
    for (const auto& e : sc.events) out.push_back(feature(e.item, e.category, e.behavior, e.timestamp, now));
  }
  return s;
}

Sample FeatureAssembler::assemble(const BehaviorSequence& history,
                                  const BehaviorEvent& impression) const {
  std::optional<RetrievalResult> retrieved;
  if (cfg_.long_source == LongSource::kGraph) {
    retrieved = retrieve_long(impression.user, impression.item);
  }
  return build(history, impression, retrieved);
}

ImpressionSplit split_impressions(std::span<const BehaviorEvent> impressions,
                                  double test_fraction) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw InvalidArgument("test fraction must lie in [0,1]");
  }
  std::map<UserId, std::vector<BehaviorEvent>> by_user;
  for (const auto& e : impressions) by_user[e.user].push_back(e);
  ImpressionSplit out;
  for (auto& [user, rows] : by_user) {
    std::stable_sort(rows.begin(), rows.end(), [](const BehaviorEvent& a, const BehaviorEvent& b) {
      return a.timestamp < b.timestamp;
    });
    const auto n_test =
        static_cast<std::size_t>(std::llround(static_cast<double>(rows.size()) * test_fraction));
    const auto cut = rows.size() - std::min(n_test, rows.size());
    out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(cut));
    out.test.insert(out.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(cut), rows.end());
  }
  return out;
}

LogContents split_log(std::vector<BehaviorEvent> events) {
  LogContents out;
  std::vector<BehaviorEvent> history;
  for (auto& e : events) {
    if (e.label) {
      out.impressions.push_back(std::move(e));
    } else {
      history.push_back(std::move(e));
    }
  }
  out.histories = group_by_user(std::move(history));
  return out;
}

std::vector<Sample> build_samples(const FeatureAssembler& assembler,
                                  std::span<const BehaviorSequence> histories,
                                  std::span<const BehaviorEvent> impressions) {
  std::map<UserId, const BehaviorSequence*> by_user;
  for (const auto& h : histories) by_user[h.user] = &h;
  const BehaviorSequence empty;
  std::vector<Sample> out;
  out.reserve(impressions.size());
  for (const auto& imp : impressions) {
    const auto it = by_user.find(imp.user);
    out.push_back(assembler.assemble(it == by_user.end() ? empty : *it->second, imp));
  }
  return out;
}

ClusterCountSelection choose_cluster_count(std::span<const BehaviorSequence> histories,
                                           const EmbeddingTable& table, std::size_t boundary_count,
                                           std::size_t k_min, std::size_t k_max,
                                           std::size_t sample_users, std::uint64_t seed) {
  if (k_min < 2 || k_max < k_min) throw InvalidArgument("cluster count range is empty");
  std::vector<std::size_t> users(histories.size());
  for (std::size_t i = 0; i < users.size(); ++i) users[i] = i;
  Rng rng(seed);
  rng.shuffle(users);
  if (users.size() > sample_users) users.resize(sample_users);
  std::sort(users.begin(), users.end());

  // Pool the sampled users' long-term item vectors; each item once.
  std::set<ItemId> seen;
  std::vector<LabeledPoint> points;
  for (auto u : users) {
    const auto split = split_long_short(histories[u], boundary_count);
    for (const auto& e : split.long_term.events) {
      const auto* v = table.find(e.item);
      if (v && seen.insert(e.item).second) points.push_back({e.item, *v});
    }
  }
  const auto distinct = count_distinct(points);
  if (distinct < 2) throw InvalidArgument("too few distinct points to choose a cluster count");
  const auto hi = std::min(k_max, distinct);
  const auto lo = std::min(k_min, hi);
  return select_cluster_count(points, lo, hi, seed);
}

SubgraphStore build_subgraph_store(std::span<const BehaviorSequence> histories,
                                   const EmbeddingTable& table, const SubgraphConfig& cfg,
                                   std::size_t boundary_count) {
  SubgraphStore store;
  for (const auto& h : histories) {
    const auto split = split_long_short(h, boundary_count);
    auto sub = build_user_subgraph(split.long_term, table, cfg);
    if (sub) store.add(std::move(*sub));
  }
  return store;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  ByteWriter w;
  c.vocab.write(w);
  const auto& f = c.features;
  w.u64(f.boundary_count);
  w.u32(f.scene_count);
  w.u64(f.top_k);
  w.u32(static_cast<std::uint32_t>(f.hops));
  w.u64(f.result_cap);
  w.u8(f.farthest_first ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(f.long_source));
  w.u64(f.category_k);
  write_parameters(w, c.params);
  return frame(kCheckpointMagic, kCheckpointVersion, w.data());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader outer(bytes);
  ByteReader in(unframe(outer, kCheckpointMagic, kCheckpointVersion, "checkpoint"));
  Checkpoint c;
  c.vocab = Vocabulary::read(in);
  auto& f = c.features;
  f.boundary_count = static_cast<std::size_t>(in.u64());
  f.scene_count = in.u32();
  f.top_k = static_cast<std::size_t>(in.u64());
  f.hops = static_cast<int>(in.u32());
  f.result_cap = static_cast<std::size_t>(in.u64());
  f.farthest_first = in.u8() != 0;
  const auto src = in.u8();
  if (src > 1) throw InvalidArgument("checkpoint: bad long-term source");
  f.long_source = static_cast<LongSource>(src);
  f.category_k = static_cast<std::size_t>(in.u64());
  c.params = read_parameters(in);
  if (!in.done()) throw InvalidArgument("checkpoint: trailing bytes");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  write_file_atomic(path, encode_checkpoint(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace glsm
