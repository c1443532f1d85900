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
#include <string>
#include <string_view>
#include <vector>

#include "glsm/corpus.hpp"

namespace glsm {

/// Planted-interest corpus generator settings.
struct GeneratorConfig {
  std::size_t users = 2000;
  std::size_t items = 500;
  std::size_t interests = 10;
  std::size_t events_per_user = 100;
  std::uint32_t scene_count = 3;
  std::size_t impressions_per_user = 10;
  std::size_t max_interests_per_user = 3;
  std::size_t categories_per_interest = 3;
  // Most recent `recent_window` history events concentrate on one of the
  // user's interests (the current focus).
  std::size_t recent_window = 30;
  // Probability that a history event is drawn from the user's interests
  // rather than from a uniformly random interest.
  double interest_bias = 0.9;
  // Probability that consecutive long-term events stay on the same interest.
  double session_stickiness = 0.7;
  // Fraction of impressions whose target comes from the user's interests.
  double positive_rate = 0.5;
  double label_noise = 0.0;

  void validate() const;
};

/// Generator internals, kept for diagnostics and oracle scorers.
struct GroundTruth {
  std::vector<std::uint32_t> item_interest;  // by item index
  std::vector<std::uint32_t> item_scene;
  std::vector<CategoryId> item_category;
  std::vector<std::vector<std::uint32_t>> user_interests;  // by user index
  std::vector<std::uint32_t> user_focus;

  static std::size_t item_index(ItemId item) { return static_cast<std::size_t>(item - 1); }
  static std::size_t user_index(UserId user) { return static_cast<std::size_t>(user - 1); }
  bool user_likes(UserId user, ItemId item) const;
};

struct SyntheticCorpus {
  std::vector<BehaviorSequence> histories;
  std::vector<BehaviorEvent> impressions;  // labeled, behavior type `load`
  GroundTruth truth;

  /// Histories followed by impressions, in the delimited log format.
  std::string to_log() const;
};

SyntheticCorpus generate_synthetic_corpus(const GeneratorConfig& cfg, std::uint64_t seed);

/// P(click) under the generator, computed from its internals.
double bayes_optimal_score(const GroundTruth& truth, const GeneratorConfig& cfg,
                           const BehaviorEvent& impression);

/// Parses `key = value` lines; unknown keys are rejected.
GeneratorConfig parse_generator_config(std::string_view text);
std::string format_generator_config(const GeneratorConfig& cfg);

std::string format_ground_truth(const GroundTruth& truth);

}  // namespace glsm
