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
#include <vector>

#include "glsm/binary_io.hpp"
#include "glsm/corpus.hpp"
#include "glsm/embed.hpp"
#include "glsm/model.hpp"
#include "glsm/retrieval.hpp"

namespace glsm {

/// Dense row indices for ids. Row 0 is reserved for unknown ids.
class Vocabulary {
 public:
  static Vocabulary build(std::span<const BehaviorSequence> histories,
                          std::span<const BehaviorEvent> impressions);

  std::uint32_t item(ItemId id) const { return lookup(items_, id); }
  std::uint32_t category(CategoryId id) const { return lookup(categories_, id); }
  std::uint32_t user(UserId id) const { return lookup(users_, id); }
  std::size_t item_rows() const { return items_.size() + 1; }
  std::size_t category_rows() const { return categories_.size() + 1; }
  std::size_t user_rows() const { return users_.size() + 1; }

  void write(ByteWriter& out) const;
  static Vocabulary read(ByteReader& in);
  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  static std::uint32_t lookup(const std::map<std::uint64_t, std::uint32_t>& m, std::uint64_t id) {
    const auto it = m.find(id);
    return it == m.end() ? 0 : it->second;
  }
  std::map<std::uint64_t, std::uint32_t> items_;
  std::map<std::uint64_t, std::uint32_t> categories_;
  std::map<std::uint64_t, std::uint32_t> users_;
};

enum class LongSource : std::uint8_t { kGraph = 0, kCategory };

struct FeatureConfig {
  std::size_t boundary_count = kDefaultBoundaryCount;
  std::uint32_t scene_count = 3;
  std::size_t top_k = 15;
  int hops = kDefaultMaxHops;
  std::size_t result_cap = kDefaultResultCap;
  bool farthest_first = false;
  LongSource long_source = LongSource::kGraph;
  std::size_t category_k = 50;  // events kept by the category baseline

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Turns a user's history and one impression into a model Sample.
class FeatureAssembler {
 public:
  FeatureAssembler(const Vocabulary& vocab, const SubgraphStore* store,
                   const EmbeddingTable* graph_embeddings, FeatureConfig cfg);

  /// Graph retrieval for (user, target). nullopt when the user has no
  /// stored subgraph or the target has no graph embedding.
  std::optional<RetrievalResult> retrieve_long(UserId user, ItemId target) const;

  /// `history` may extend past the impression; only events at or before
  /// its timestamp are used. `retrieved` is the output of retrieve_long.
  Sample build(const BehaviorSequence& history, const BehaviorEvent& impression,
               const std::optional<RetrievalResult>& retrieved) const;

  Sample assemble(const BehaviorSequence& history, const BehaviorEvent& impression) const;

  const FeatureConfig& config() const { return cfg_; }

 private:
  EventFeature feature(ItemId item, CategoryId category, BehaviorType behavior, Timestamp when,
                       Timestamp now) const;

  const Vocabulary* vocab_;
  const SubgraphStore* store_;
  const EmbeddingTable* graph_embeddings_;
  FeatureConfig cfg_;
};

struct ImpressionSplit {
  std::vector<BehaviorEvent> train;
  std::vector<BehaviorEvent> test;
};

/// Per user, the latest round(n * test_fraction) impressions go to test.
ImpressionSplit split_impressions(std::span<const BehaviorEvent> impressions,
                                  double test_fraction);

/// Separates labeled rows (impressions) from behavior history.
struct LogContents {
  std::vector<BehaviorSequence> histories;
  std::vector<BehaviorEvent> impressions;
};
LogContents split_log(std::vector<BehaviorEvent> events);

std::vector<Sample> build_samples(const FeatureAssembler& assembler,
                                  std::span<const BehaviorSequence> histories,
                                  std::span<const BehaviorEvent> impressions);

/// Samples every user's long-term items and picks the cluster count with
/// the best silhouette, in [k_min, k_max] clamped to what the points allow.
ClusterCountSelection choose_cluster_count(std::span<const BehaviorSequence> histories,
                                           const EmbeddingTable& table, std::size_t boundary_count,
                                           std::size_t k_min, std::size_t k_max,
                                           std::size_t sample_users, std::uint64_t seed);

/// One subgraph per user with a nonempty long-term history.
SubgraphStore build_subgraph_store(std::span<const BehaviorSequence> histories,
                                   const EmbeddingTable& table, const SubgraphConfig& cfg,
                                   std::size_t boundary_count);

// Checkpoint file: frame() with magic "GLSC" around the vocabulary, the
// feature configuration and the parameters (see write_parameters).
struct Checkpoint {
  ParameterSet params;
  Vocabulary vocab;
  FeatureConfig features;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace glsm
