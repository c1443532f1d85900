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

#include <span>
#include <vector>

#include "glsm/common.hpp"

namespace glsm {

struct ScoredRow {
  UserId user = 0;
  double score = 0.0;
  int label = 0;
};

/// Rank-sum AUC with tied scores sharing their average rank. Throws when
/// only one class is present.
double auc(std::span<const ScoredRow> rows);

/// Impression-weighted mean of per-user AUC over users that have both
/// classes. Throws when no user qualifies.
double gauc(std::span<const ScoredRow> rows);

inline constexpr double kLoglossClip = 1e-7;

/// Mean binary cross-entropy with p clipped to [1e-7, 1 - 1e-7].
double logloss(std::span<const ScoredRow> rows);

}  // namespace glsm
