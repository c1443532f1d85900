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

#include "glsm/metrics.hpp"
#include "glsm/synth.hpp"

using namespace glsm;

TEST(Synth, SameSeedSameCorpus) {
  GeneratorConfig cfg;
  const auto a = generate_synthetic_corpus(cfg, 7);
  const auto b = generate_synthetic_corpus(cfg, 7);
  EXPECT_EQ(a.to_log(), b.to_log());
  EXPECT_EQ(format_ground_truth(a.truth), format_ground_truth(b.truth));
  EXPECT_NE(a.to_log(), generate_synthetic_corpus(cfg, 8).to_log());
}

TEST(Synth, ShapeMatchesConfig) {
  GeneratorConfig cfg;
  cfg.users = 50;
  const auto c = generate_synthetic_corpus(cfg, 1);
  ASSERT_EQ(c.histories.size(), 50u);
  for (const auto& h : c.histories) EXPECT_EQ(h.size(), cfg.events_per_user);
  EXPECT_EQ(c.impressions.size(), 50u * cfg.impressions_per_user);
  for (const auto& e : c.impressions) {
    ASSERT_TRUE(e.label.has_value());
    EXPECT_EQ(e.behavior, BehaviorType::kLoad);
    EXPECT_LT(e.scene, cfg.scene_count);
  }
}

TEST(Synth, SingleInterestUsersStayOnInterest) {
  GeneratorConfig cfg;
  cfg.users = 400;
  const auto c = generate_synthetic_corpus(cfg, 7);
  auto interest_of = [&](ItemId item) { return c.truth.item_interest[GroundTruth::item_index(item)]; };
  std::size_t on = 0, total = 0;
  for (const auto& h : c.histories) {
    const auto& ints = c.truth.user_interests[GroundTruth::user_index(h.user)];
    if (ints.size() != 1) continue;
    for (const auto& e : h.events) {
      on += interest_of(e.item) == ints[0];
      ++total;
    }
  }
  ASSERT_GT(total, 0u);
  EXPECT_GE(static_cast<double>(on) / static_cast<double>(total), 0.8);

  for (const auto& e : c.impressions) {
    const auto& ints = c.truth.user_interests[GroundTruth::user_index(e.user)];
    if (ints.size() == 1 && *e.label == 1) {
      EXPECT_EQ(interest_of(e.item), ints[0]);
    }
  }
}

TEST(Synth, BayesScorerIsPerfectWithoutNoise) {
  GeneratorConfig cfg;
  cfg.users = 300;
  const auto c = generate_synthetic_corpus(cfg, 7);
  std::vector<ScoredRow> rows;
  for (const auto& e : c.impressions) {
    rows.push_back({e.user, bayes_optimal_score(c.truth, cfg, e), *e.label});
  }
  EXPECT_EQ(auc(rows), 1.0);
}

TEST(Synth, ConfigTextRoundTrip) {
  GeneratorConfig cfg;
  cfg.users = 123;
  cfg.label_noise = 0.25;
  const auto back = parse_generator_config(format_generator_config(cfg));
  EXPECT_EQ(back.users, 123u);
  EXPECT_EQ(back.label_noise, 0.25);
  EXPECT_THROW(parse_generator_config("bogus = 1\n"), InvalidArgument);
}

TEST(Synth, RejectsInvalidConfig) {
  GeneratorConfig cfg;
  cfg.interests = 0;
  EXPECT_THROW(generate_synthetic_corpus(cfg, 1), InvalidArgument);
}
