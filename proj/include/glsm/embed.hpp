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
#include <span>
#include <vector>

#include "glsm/common.hpp"
#include "glsm/graph.hpp"

namespace glsm {

/// Item id -> fixed-length vector.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(ItemId id) const { return vectors_.count(id) != 0; }

  /// Rejects wrong length and non-finite entries.
  void set(ItemId id, Vec v);
  /// Throws NotFound for unknown ids.
  std::span<const double> at(ItemId id) const;
  const Vec* find(ItemId id) const;

  const std::map<ItemId, Vec>& vectors() const { return vectors_; }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t dim_;
  std::map<ItemId, Vec> vectors_;
};

// Embedding file: frame() with magic "GLSE" around
//   u32 dim, u64 count, count x {u64 id, dim x f64}.
std::vector<std::uint8_t> encode_embeddings(const EmbeddingTable& t);
EmbeddingTable decode_embeddings(std::span<const std::uint8_t> bytes);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& t);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

// Unsupervised GraphSage: learned input features, two mean-aggregator
// layers (ReLU after the first), L2-normalized output. Positive pairs are
// graph edges; negatives are drawn with probability proportional to
// degree^0.75. Optimized with Adam.
struct GraphSageConfig {
  std::size_t dim = 16;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  std::size_t neighbor_samples = 10;
  std::size_t negatives = 5;
  std::size_t batch_size = 256;
  double learning_rate = 0.01;
};

struct GraphSageResult {
  EmbeddingTable table;
  std::vector<double> epoch_loss;  // mean pair loss per epoch
};

GraphSageResult train_graphsage(const ItemGraph& g, const GraphSageConfig& cfg);

EmbeddingTable train_graph_embeddings(const ItemGraph& g, std::size_t dim, std::size_t epochs,
                                      std::uint64_t seed);

double cosine_similarity(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

}  // namespace glsm
