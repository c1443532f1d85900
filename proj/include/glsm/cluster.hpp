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
#include <span>
#include <vector>

#include "glsm/common.hpp"

namespace glsm {

struct LabeledPoint {
  ItemId id = 0;
  Vec v;
};

struct ClusterModel {
  std::size_t k = 0;
  std::vector<Vec> centers;
  std::vector<ItemId> ids;                  // point ids, input order
  std::vector<std::uint32_t> assignments;   // center index per point
  double inertia = 0.0;                     // sum of squared distances
  std::vector<double> inertia_history;      // after every assignment step
  std::size_t iterations = 0;
  bool converged = false;

  /// Center index of a clustered point; throws NotFound.
  std::uint32_t assignment_of(ItemId id) const;
};

inline constexpr std::size_t kDefaultLloydIterations = 100;

std::size_t count_distinct(std::span<const LabeledPoint> points);

/// Lloyd's algorithm with k-means++ seeding. Stops when assignments stop
/// changing or after `max_iterations`. An empty cluster is re-seeded from the
/// point farthest from its current center.
ClusterModel kmeans(std::span<const LabeledPoint> points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iterations = kDefaultLloydIterations);

/// Per-sample (b - a) / max(a, b). Samples in singleton clusters, and samples
/// with max(a, b) == 0, score 0.
std::vector<double> silhouette_samples(std::span<const LabeledPoint> points,
                                       const ClusterModel& model);

/// Mean silhouette; requires k >= 2 and no empty cluster.
double silhouette(std::span<const LabeledPoint> points, const ClusterModel& model);

struct ClusterCountSelection {
  std::size_t best_k = 0;
  std::vector<std::pair<std::size_t, double>> scores;  // (k, silhouette)
};

/// argmax_k silhouette(kmeans(points, k, seed)) over [k_min, k_max]; ties go
/// to the smaller k.
ClusterCountSelection select_cluster_count(std::span<const LabeledPoint> points,
                                           std::size_t k_min, std::size_t k_max,
                                           std::uint64_t seed);

}  // namespace glsm
