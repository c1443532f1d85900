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

#include "glsm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace glsm {

double auc(std::span<const ScoredRow> rows) {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rows[a].score < rows[b].score; });
  double positives = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && rows[order[j]].score == rows[order[i]].score) ++j;
    // Ranks i+1 .. j share their mean.
    const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (rows[order[k]].label == 1) {
        positives += 1.0;
        rank_sum += mean_rank;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(rows.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw InvalidArgument("AUC needs at least one positive and one negative row");
  }
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double gauc(std::span<const ScoredRow> rows) {
  std::map<UserId, std::vector<ScoredRow>> by_user;
  for (const auto& r : rows) by_user[r.user].push_back(r);
  double weighted = 0.0;
  double weight = 0.0;
  for (const auto& [user, group] : by_user) {
    const auto pos = std::count_if(group.begin(), group.end(),
                                   [](const ScoredRow& r) { return r.label == 1; });
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(group.size())) continue;
    const double w = static_cast<double>(group.size());
    weighted += w * auc(group);
    weight += w;
  }
  if (weight == 0.0) throw InvalidArgument("GAUC needs a user with both classes");
  return weighted / weight;
}

double logloss(std::span<const ScoredRow> rows) {
  if (rows.empty()) throw InvalidArgument("logloss of no rows");
  std::vector<double> losses;
  losses.reserve(rows.size());
  for (const auto& r : rows) {
    const double p = std::clamp(r.score, kLoglossClip, 1.0 - kLoglossClip);
    losses.push_back(r.label == 1 ? -std::log(p) : -std::log(1.0 - p));
  }
  // Summed in sorted order so the result does not depend on row order.
  std::sort(losses.begin(), losses.end());
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(rows.size());
}

}  // namespace glsm
