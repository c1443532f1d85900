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

#include "glsm/metrics.hpp"
#include "oracles.hpp"

using namespace glsm;

namespace {

std::vector<ScoredRow> rows_of(const std::vector<double>& scores, const std::vector<int>& labels,
                               UserId user = 1) {
  std::vector<ScoredRow> out;
  for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({user, scores[i], labels[i]});
  return out;
}

}  // namespace

TEST(Auc, Examples) {
  EXPECT_EQ(auc(rows_of({0.9, 0.5, 0.3}, {1, 1, 0})), 1.0);
  EXPECT_EQ(auc(rows_of({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0})), 0.5);
  EXPECT_EQ(auc(rows_of({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0})), 0.0);
  EXPECT_EQ(auc(rows_of({0.4, 0.4, 0.2}, {1, 0, 0})), 0.75);
}

TEST(Auc, SingleClassRejected) {
  EXPECT_THROW(auc(rows_of({0.1, 0.2}, {1, 1})), InvalidArgument);
  EXPECT_THROW(auc({}), InvalidArgument);
}

TEST(Auc, MatchesPairwiseCount) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto rows = oracle::random_rows(rng, 2 + rng.below(500), 1, 2 + rng.below(15));
    EXPECT_NEAR(auc(rows), oracle::pairwise_auc(rows), 1e-12);
  }
}

TEST(Auc, InvariantUnderIncreasingAffineMap) {
  Rng rng(2);
  auto rows = oracle::random_rows(rng, 300);
  const double before = auc(rows);
  for (auto& r : rows) r.score = 3.0 * r.score + 7.0;
  EXPECT_NEAR(auc(rows), before, 1e-12);
}

TEST(Gauc, Example) {
  // User 1: AUC 0.5 over 3 rows. User 2: AUC 1 over 3 rows.
  auto rows = rows_of({0.9, 0.8, 0.3}, {1, 0, 1}, 1);
  const auto more = rows_of({0.6, 0.4, 0.2}, {1, 0, 0}, 2);
  rows.insert(rows.end(), more.begin(), more.end());
  EXPECT_DOUBLE_EQ(gauc(rows), 0.75);
}

TEST(Gauc, WeightedByImpressions) {
  auto rows = rows_of({0.9, 0.8, 0.3, 0.2}, {1, 1, 0, 0}, 1);
  const auto tied = rows_of({0.5, 0.5}, {1, 0}, 2);
  rows.insert(rows.end(), tied.begin(), tied.end());
  EXPECT_NEAR(gauc(rows), 5.0 / 6.0, 1e-15);
}

TEST(Gauc, SingleUserEqualsAuc) {
  Rng rng(3);
  const auto rows = oracle::random_rows(rng, 200);
  EXPECT_DOUBLE_EQ(gauc(rows), auc(rows));
}

TEST(Gauc, SingleClassUsersExcluded) {
  auto rows = rows_of({0.9, 0.1}, {1, 0}, 1);
  const auto pos_only = rows_of({0.01, 0.02, 0.03}, {1, 1, 1}, 2);
  rows.insert(rows.end(), pos_only.begin(), pos_only.end());
  EXPECT_EQ(gauc(rows), 1.0);
  EXPECT_THROW(gauc(pos_only), InvalidArgument);
}

TEST(Logloss, Examples) {
  EXPECT_NEAR(logloss(rows_of({0.5, 0.5}, {1, 0})), std::log(2.0), 1e-15);
  EXPECT_LE(logloss(rows_of({1.0, 0.0}, {1, 0})), 1e-6);
  EXPECT_NEAR(logloss(rows_of({0.0}, {1})), -std::log(kLoglossClip), 1e-9);
  EXPECT_NEAR(logloss(rows_of({0.0}, {1})), 16.118, 1e-3);
  EXPECT_THROW(logloss({}), InvalidArgument);
}

TEST(Logloss, RowOrderInvariant) {
  Rng rng(4);
  auto rows = oracle::random_rows(rng, 500, 3);
  const double before = logloss(rows);
  rng.shuffle(rows);
  EXPECT_EQ(logloss(rows), before);
}

TEST(Metrics, MatchDirectDefinitions) {
  for (std::uint64_t t = 0; t < 50; ++t) EXPECT_LE(oracle::metric_trial(t), 1e-12) << "trial " << t;
}
