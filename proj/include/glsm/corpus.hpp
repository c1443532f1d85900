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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glsm/common.hpp"

namespace glsm {

enum class BehaviorType : std::uint8_t { kClick = 0, kCart, kFavorite, kOrder, kLoad, kSearch };

inline constexpr std::size_t kBehaviorTypeCount = 6;

std::string_view to_string(BehaviorType t);
std::optional<BehaviorType> parse_behavior_type(std::string_view token);

/// One logged user action. Rows carrying a label are CTR impressions.
struct BehaviorEvent {
  UserId user = 0;
  ItemId item = 0;
  Timestamp timestamp = 0;
  CategoryId category = 0;
  BehaviorType behavior = BehaviorType::kClick;
  std::uint32_t scene = 0;
  std::optional<int> label;

  friend bool operator==(const BehaviorEvent&, const BehaviorEvent&) = default;
};

/// Time-ordered history of one user.
struct BehaviorSequence {
  UserId user = 0;
  std::vector<BehaviorEvent> events;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
  friend bool operator==(const BehaviorSequence&, const BehaviorSequence&) = default;
};

struct HorizonSplit {
  BehaviorSequence long_term;
  BehaviorSequence short_term;
  std::size_t boundary_count = 0;
};

/// Scenes come from the explicit scene column; `scene_count` fixes the arity.
struct SceneConfig {
  std::uint32_t scene_count = 3;
};

inline constexpr std::size_t kDefaultBoundaryCount = 30;

/// Thrown for malformed log rows; carries the 1-based line and column.
class ParseError : public InvalidArgument {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : InvalidArgument("line " + std::to_string(line) + ", column " + std::to_string(column) +
                        ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Log format: one event per line, comma separated, fixed columns
//   user,item,timestamp,category,behavior_type,scene,label
// `label` may be empty. Blank lines and lines starting with '#' are skipped.
BehaviorEvent parse_event_row(std::string_view row, std::size_t line_no,
                              std::optional<std::uint32_t> scene_count = std::nullopt);
std::string format_event_row(const BehaviorEvent& e);

/// All rows of a log in file order.
std::vector<BehaviorEvent> parse_events(std::string_view text,
                                        std::optional<std::uint32_t> scene_count = std::nullopt);

/// Groups events into per-user sequences (ascending user id), stably
/// sorted by timestamp so equal timestamps keep file order.
std::vector<BehaviorSequence> group_by_user(std::vector<BehaviorEvent> events);

std::vector<BehaviorSequence> parse_behavior_log(
    const std::filesystem::path& path, std::optional<std::uint32_t> scene_count = std::nullopt);

std::string serialize_sequences(const std::vector<BehaviorSequence>& sequences);

HorizonSplit split_long_short(const BehaviorSequence& seq,
                              std::size_t boundary_count = kDefaultBoundaryCount);

/// One sequence per scene (always `cfg.scene_count` of them, possibly empty).
std::vector<BehaviorSequence> segment_scenes(const BehaviorSequence& short_term,
                                             const SceneConfig& cfg);

}  // namespace glsm
