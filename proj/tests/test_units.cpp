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

#include "glsm/units.hpp"
#include "gradcheck.hpp"

using namespace glsm;

namespace {

AttentionWeights zero_w1_attention(Rng& rng, std::size_t d, std::size_t h) {
  auto w = oracle::random_attention(rng, d, h);
  w.w1.zero();
  return w;
}

}  // namespace

TEST(Attention, ZeroOuterWeightGivesHalf) {
  Rng rng(1);
  const auto w = zero_w1_attention(rng, 3, 4);
  EXPECT_EQ(attention_forward(w, oracle::random_vec(rng, 3), oracle::random_vec(rng, 3)), 0.5);
}

TEST(Attention, OutputInOpenUnitInterval) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto w = oracle::random_attention(rng, 4, 4);
    const double a = attention_forward(w, oracle::random_vec(rng, 4, 3.0), oracle::random_vec(rng, 4, 3.0));
    EXPECT_GT(a, 0.0);
    EXPECT_LT(a, 1.0);
  }
}

TEST(Attention, RejectsWrongShapes) {
  Rng rng(3);
  const auto w = oracle::random_attention(rng, 3, 2);
  EXPECT_THROW(attention_forward(w, Vec(2), Vec(3)), InvalidArgument);
}

TEST(Pool, SingleItemScaledByAttention) {
  Rng rng(4);
  const auto w = oracle::random_attention(rng, 3, 3);
  const auto x = oracle::random_vec(rng, 3), t = oracle::random_vec(rng, 3);
  const double a = attention_forward(w, x, t);
  const auto out = attention_pool_forward(w, {x}, t);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(out[j], a * x[j]);
}

TEST(Pool, ZeroOuterWeightHalvesSum) {
  Rng rng(5);
  const auto w = zero_w1_attention(rng, 3, 3);
  const auto items = oracle::random_vecs(rng, 4, 3);
  const auto out = attention_pool_forward(w, items, oracle::random_vec(rng, 3));
  for (int j = 0; j < 3; ++j) {
    double s = 0.0;
    for (const auto& x : items) s += x[j];
    EXPECT_NEAR(out[j], 0.5 * s, 1e-15);
  }
}

TEST(Pool, PermutationInvariant) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = oracle::random_attention(rng, 4, 3);
    auto items = oracle::random_vecs(rng, 5, 4);
    const auto t = oracle::random_vec(rng, 4);
    const auto a = attention_pool_forward(w, items, t);
    rng.shuffle(items);
    const auto b = attention_pool_forward(w, items, t);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(a[j], b[j], 1e-12);
  }
}

TEST(Pool, DuplicateDoublesContribution) {
  Rng rng(7);
  const auto w = oracle::random_attention(rng, 3, 3);
  const auto c = oracle::random_vec(rng, 3), t = oracle::random_vec(rng, 3);
  const auto once = attention_pool_forward(w, {c}, t);
  const auto twice = attention_pool_forward(w, {c, c}, t);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(twice[j], 2.0 * once[j]);
}

TEST(Pool, EmptySetRejected) {
  Rng rng(8);
  const auto w = oracle::random_attention(rng, 2, 2);
  EXPECT_THROW(attention_pool_forward(w, {}, Vec(2)), InvalidArgument);
}

TEST(Gru, ZeroWeightsKeepZeroState) {
  const GruWeights w{Matrix(3, 5), Matrix(3, 5), Matrix(3, 5)};
  Rng rng(9);
  GruCache cache;
  const auto states = gru_forward(w, oracle::random_vecs(rng, 4, 2), &cache);
  ASSERT_EQ(states.size(), 4u);
  for (const auto& s : states) EXPECT_EQ(s, Vec(3, 0.0));
  for (const auto& step : cache.steps) {
    for (double z : step.z) EXPECT_EQ(z, 0.5);
    for (double c : step.c) EXPECT_EQ(c, 0.0);
  }
}

TEST(Gru, SingleStepOneState) {
  Rng rng(10);
  const auto w = oracle::random_gru(rng, 3, 2);
  EXPECT_EQ(gru_forward(w, {oracle::random_vec(rng, 2)}).size(), 1u);
  EXPECT_THROW(gru_forward(w, {}), InvalidArgument);
}

TEST(SceneSum, Examples) {
  const Vec s = {1.0, -2.0};
  EXPECT_EQ(scene_representation({s}), s);
  EXPECT_EQ(scene_representation({s, s}), (Vec{2.0, -4.0}));
  const Vec a = {0.1, 0.2}, b = {0.3, 0.4}, c = {0.5, 0.6};
  const auto x = scene_representation({a, b, c}), y = scene_representation({c, a, b});
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(x[j], y[j], 1e-15);
}

TEST(Softmax, Examples) {
  const auto g = softmax(Vec{0.0, std::log(3.0)});
  EXPECT_NEAR(g[0], 0.25, 1e-15);
  EXPECT_NEAR(g[1], 0.75, 1e-15);
  const auto u = softmax(Vec(5, 2.5));
  for (double v : u) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(Softmax, SumsToOneInOpenInterval) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = softmax(oracle::random_vec(rng, 1 + rng.below(10), 5.0));
    double s = 0.0;
    for (double v : g) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0 + 1e-15);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Gate, ConstantGateSplitsEvenly) {
  const std::size_t d = 4;
  GateWeights w{Matrix(d, 3), Matrix(3, 2)};
  const Vec el = {1.0, 2.0, 3.0, 4.0}, es = {-1.0, 0.5, 2.0, 8.0};
  const auto out = gate_forward(w, Vec{0.3, -0.7}, el, es);
  for (std::size_t j = 0; j < d; ++j) {
    EXPECT_DOUBLE_EQ(out.e_u[j], el[j] / d);
    EXPECT_DOUBLE_EQ(out.e_u[d + j], (1.0 - 1.0 / d) * es[j]);
  }
}

TEST(Gate, ProfileGradientIsStoppedByDefault) {
  Rng rng(12);
  GateWeights w{oracle::random_matrix(rng, 3, 3), oracle::random_matrix(rng, 3, 2)};
  const auto profile = oracle::random_vec(rng, 2);
  GateCache cache;
  gate_forward(w, profile, oracle::random_vec(rng, 3), oracle::random_vec(rng, 3), &cache);
  GateWeights g{Matrix(3, 3), Matrix(3, 2)};
  Vec dl(3, 0.0), ds(3, 0.0), dp(2, 0.0);
  gate_backward(w, cache, oracle::random_vec(rng, 6), g, dl, ds);
  gate_backward(w, cache, oracle::random_vec(rng, 6), g, dl, ds, dp);
  EXPECT_NE(dp, Vec(2, 0.0));
}

TEST(Dnn, ZeroWeightsGiveHalf) {
  std::vector<DenseLayer> layers = {{Matrix(4, 6), Matrix(4, 1)}, {Matrix(1, 4), Matrix(1, 1)}};
  Rng rng(13);
  EXPECT_EQ(sigmoid(mlp_forward(layers, oracle::random_vec(rng, 6))), 0.5);
}

TEST(Dnn, ProbabilityInOpenInterval) {
  Rng rng(14);
  for (int i = 0; i < 100; ++i) {
    std::vector<DenseLayer> layers = {
        {oracle::random_matrix(rng, 5, 3), oracle::random_matrix(rng, 5, 1)},
        {oracle::random_matrix(rng, 1, 5), oracle::random_matrix(rng, 1, 1)}};
    const double p = sigmoid(mlp_forward(layers, oracle::random_vec(rng, 3)));
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(Dnn, RequiresSingleOutput) {
  std::vector<DenseLayer> layers = {{Matrix(2, 3), Matrix(2, 1)}};
  EXPECT_THROW(mlp_forward(layers, Vec(3)), InvalidArgument);
}

class UnitGradient : public ::testing::TestWithParam<oracle::UnitCheck> {};

TEST_P(UnitGradient, MatchesFiniteDifferences) {
  const auto check = GetParam();
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    EXPECT_LT(check.error(seed), 1e-4) << check.name << " seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Units, UnitGradient, ::testing::ValuesIn(oracle::unit_checks()),
                         [](const auto& info) {
                           std::string n = info.param.name;
                           for (auto& ch : n) {
                             if (ch == '-') ch = '_';
                           }
                           return n;
                         });
