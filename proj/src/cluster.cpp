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

#include "glsm/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace glsm {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_points(std::span<const LabeledPoint> points) {
  if (points.empty()) throw InvalidArgument("no points to cluster");
  const auto dim = points.front().v.size();
  for (const auto& p : points) {
    if (p.v.size() != dim) throw InvalidArgument("points have mixed dimensions");
  }
}

}  // namespace

std::uint32_t ClusterModel::assignment_of(ItemId id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return assignments[i];
  }
  throw NotFound("item " + std::to_string(id) + " was not clustered");
}

std::size_t count_distinct(std::span<const LabeledPoint> points) {
  std::vector<const Vec*> ptrs;
  ptrs.reserve(points.size());
  for (const auto& p : points) ptrs.push_back(&p.v);
  std::sort(ptrs.begin(), ptrs.end(), [](const Vec* a, const Vec* b) { return *a < *b; });
  const auto last = std::unique(ptrs.begin(), ptrs.end(),
                                [](const Vec* a, const Vec* b) { return *a == *b; });
  return static_cast<std::size_t>(last - ptrs.begin());
}

ClusterModel kmeans(std::span<const LabeledPoint> points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iterations) {
  check_points(points);
  const auto distinct = count_distinct(points);
  if (k < 1 || k > distinct) {
    throw InvalidArgument("k = " + std::to_string(k) + " outside [1, " + std::to_string(distinct) +
                          "]");
  }
  const std::size_t n = points.size();
  const std::size_t dim = points.front().v.size();
  Rng rng(seed);

  ClusterModel model;
  model.k = k;
  model.ids.reserve(n);
  for (const auto& p : points) model.ids.push_back(p.id);

  // k-means++ seeding.
  model.centers.push_back(points[rng.below(n)].v);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i].v, model.centers[0]);
  while (model.centers.size() < k) {
    double total = 0.0;
    for (double x : d2) total += x;
    const double target = rng.uniform() * total;
    double run = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      run += d2[i];
      pick = i;
      if (run > target) break;
    }
    model.centers.push_back(points[pick].v);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i].v, model.centers.back()));
    }
  }

  model.assignments.assign(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> dist(n);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::uint32_t c = 0; c < k; ++c) {
        const double d = squared_distance(points[i].v, model.centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (model.assignments[i] != best) changed = true;
      model.assignments[i] = best;
      dist[i] = best_d;
      inertia += best_d;
    }
    model.inertia = inertia;
    model.inertia_history.push_back(inertia);
    model.iterations = iter + 1;
    if (!changed) {
      model.converged = true;
      break;
    }

    std::vector<Vec> sums(k, Vec(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[model.assignments[i]];
      for (std::size_t j = 0; j < dim; ++j) s[j] += points[i].v[j];
      ++counts[model.assignments[i]];
    }
    std::vector<char> taken(n, 0);
    for (std::uint32_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < dim; ++j) {
          model.centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }
        continue;
      }
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && (far == n || dist[i] > dist[far])) far = i;
      }
      taken[far] = 1;
      model.centers[c] = points[far].v;
    }
  }
  return model;
}

std::vector<double> silhouette_samples(std::span<const LabeledPoint> points,
                                       const ClusterModel& model) {
  check_points(points);
  if (model.k < 2) throw InvalidArgument("silhouette needs k >= 2");
  if (model.assignments.size() != points.size()) {
    throw InvalidArgument("cluster model does not match the point set");
  }
  const std::size_t n = points.size();
  std::vector<std::size_t> sizes(model.k, 0);
  for (auto a : model.assignments) ++sizes[a];
  for (std::size_t c = 0; c < model.k; ++c) {
    if (sizes[c] == 0) throw InvalidArgument("silhouette undefined with an empty cluster");
  }

  std::vector<double> out(n, 0.0);
  std::vector<double> sum_to(model.k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum_to.begin(), sum_to.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sum_to[model.assignments[j]] += std::sqrt(squared_distance(points[i].v, points[j].v));
    }
    const auto own = model.assignments[i];
    if (sizes[own] == 1) continue;
    const double a = sum_to[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.k; ++c) {
      if (c == own) continue;
      b = std::min(b, sum_to[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    out[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return out;
}

double silhouette(std::span<const LabeledPoint> points, const ClusterModel& model) {
  const auto s = silhouette_samples(points, model);
  double total = 0.0;
  for (double x : s) total += x;
  return total / static_cast<double>(s.size());
}

ClusterCountSelection select_cluster_count(std::span<const LabeledPoint> points,
                                           std::size_t k_min, std::size_t k_max,
                                           std::uint64_t seed) {
  if (k_min > k_max) throw InvalidArgument("empty cluster-count range");
  if (k_min < 2) throw InvalidArgument("cluster-count range must start at 2 or more");
  const auto distinct = count_distinct(points);
  if (k_max > distinct) {
    throw InvalidArgument("k_max = " + std::to_string(k_max) + " exceeds " +
                          std::to_string(distinct) + " distinct points");
  }
  ClusterCountSelection sel;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const auto model = kmeans(points, k, seed);
    const double s = silhouette(points, model);
    sel.scores.emplace_back(k, s);
    if (s > best) {
      best = s;
      sel.best_k = k;
    }
  }
  return sel;
}

}  // namespace glsm
