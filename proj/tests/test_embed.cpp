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

#include <cmath>

#include "glsm/embed.hpp"
#include "oracles.hpp"

using namespace glsm;

namespace {

ItemGraph two_cliques(std::size_t size) {
  std::vector<WeightedEdge> edges;
  for (ItemId base : {ItemId{1}, ItemId{101}}) {
    for (ItemId a = base; a < base + size; ++a) {
      for (ItemId b = a + 1; b < base + size; ++b) edges.push_back({a, b, 1});
    }
  }
  return ItemGraph::from_edges({}, edges);
}

}  // namespace

TEST(Embed, CliquesSeparate) {
  const auto g = two_cliques(8);
  const auto t = train_graph_embeddings(g, 16, 30, 1);
  double intra = 0.0, inter = 0.0;
  int n_intra = 0, n_inter = 0;
  for (const auto& [a, va] : t.vectors()) {
    for (const auto& [b, vb] : t.vectors()) {
      if (a >= b) continue;
      const double c = cosine_similarity(va, vb);
      if ((a < 100) == (b < 100)) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  }
  EXPECT_GT(intra / n_intra, inter / n_inter);
}

TEST(Embed, SameSeedSameTable) {
  const auto g = two_cliques(5);
  EXPECT_EQ(train_graph_embeddings(g, 8, 5, 4), train_graph_embeddings(g, 8, 5, 4));
}

TEST(Embed, UnitNorm) {
  const auto g = ItemGraph::from_edges({}, std::vector<WeightedEdge>{{1, 2, 1}, {2, 3, 1}});
  const auto t = train_graph_embeddings(g, 8, 5, 1);
  ASSERT_EQ(t.size(), 3u);
  for (const auto& [id, v] : t.vectors()) {
    double s = 0.0;
    for (double x : v) s += x * x;
    EXPECT_NEAR(std::sqrt(s), 1.0, 1e-6) << id;
  }
}

TEST(Embed, LossDecreasesOnConnectedGraph) {
  Rng rng(3);
  std::vector<WeightedEdge> edges;
  for (ItemId i = 1; i < 60; ++i) edges.push_back({i, i + 1, 1});
  for (int i = 0; i < 80; ++i) {
    ItemId a = 1 + rng.below(60), b = 1 + rng.below(60);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (b == a + 1) continue;
    edges.push_back({a, b, 1});
  }
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const WeightedEdge& x, const WeightedEdge& y) {
                            return x.a == y.a && x.b == y.b;
                          }),
              edges.end());
  const auto g = ItemGraph::from_edges({}, edges);
  GraphSageConfig cfg;
  cfg.epochs = 15;
  const auto r = train_graphsage(g, cfg);
  ASSERT_EQ(r.epoch_loss.size(), 15u);
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Embed, TableValidation) {
  EmbeddingTable t(3);
  EXPECT_THROW(t.set(1, {1.0, 2.0}), InvalidArgument);
  EXPECT_THROW(t.set(1, {1.0, NAN, 0.0}), InvalidArgument);
  t.set(1, {1.0, 0.0, 0.0});
  EXPECT_THROW(t.at(2), NotFound);
  EXPECT_EQ(t.find(2), nullptr);
}

TEST(Embed, EncodingRoundTrip) {
  const auto t = train_graph_embeddings(two_cliques(4), 4, 2, 2);
  auto bytes = encode_embeddings(t);
  EXPECT_EQ(decode_embeddings(bytes), t);
  bytes[0] ^= 0xff;
  try {
    decode_embeddings(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatErrorKind::kBadMagic);
  }
}

TEST(Embed, SimilarityHelpers) {
  const Vec a = {1.0, 0.0}, b = {0.0, 2.0};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(euclidean_distance(a, b), std::sqrt(5.0));
}
