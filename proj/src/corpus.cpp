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

#include "glsm/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <sstream>

#include "glsm/binary_io.hpp"

namespace glsm {

namespace {

constexpr std::array<std::string_view, kBehaviorTypeCount> kBehaviorNames = {
    "click", "cart", "favorite", "order", "load", "search"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view field, std::size_t line, std::size_t column, const char* name) {
  field = trim(field);
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(line, column,
                     std::string("cannot parse ") + name + " from '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string_view to_string(BehaviorType t) { return kBehaviorNames[static_cast<std::size_t>(t)]; }

std::optional<BehaviorType> parse_behavior_type(std::string_view token) {
  for (std::size_t i = 0; i < kBehaviorNames.size(); ++i) {
    if (kBehaviorNames[i] == token) return static_cast<BehaviorType>(i);
  }
  return std::nullopt;
}

BehaviorEvent parse_event_row(std::string_view row, std::size_t line_no,
                              std::optional<std::uint32_t> scene_count) {
  std::array<std::string_view, 7> fields;
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = row.find(',', start);
    const auto piece = row.substr(start, comma == std::string_view::npos ? row.npos : comma - start);
    if (n == fields.size()) {
      throw ParseError(line_no, n + 1, "expected 7 fields, found more");
    }
    fields[n++] = piece;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (n != fields.size()) {
    throw ParseError(line_no, n, "expected 7 fields, found " + std::to_string(n));
  }

  BehaviorEvent e;
  e.user = parse_number<UserId>(fields[0], line_no, 1, "user");
  e.item = parse_number<ItemId>(fields[1], line_no, 2, "item");
  e.timestamp = parse_number<Timestamp>(fields[2], line_no, 3, "timestamp");
  if (e.timestamp < 0) throw ParseError(line_no, 3, "negative timestamp");
  e.category = parse_number<CategoryId>(fields[3], line_no, 4, "category");
  const auto behavior = parse_behavior_type(trim(fields[4]));
  if (!behavior) {
    throw ParseError(line_no, 5, "unknown behavior type '" + std::string(trim(fields[4])) + "'");
  }
  e.behavior = *behavior;
  e.scene = parse_number<std::uint32_t>(fields[5], line_no, 6, "scene");
  if (scene_count && e.scene >= *scene_count) {
    throw ParseError(line_no, 6,
                     "scene " + std::to_string(e.scene) + " outside configured count " +
                         std::to_string(*scene_count));
  }
  const auto label = trim(fields[6]);
  if (!label.empty()) {
    const int v = parse_number<int>(label, line_no, 7, "label");
    if (v != 0 && v != 1) throw ParseError(line_no, 7, "label must be 0 or 1");
    e.label = v;
  }
  return e;
}

std::string format_event_row(const BehaviorEvent& e) {
  std::string out;
  out.reserve(64);
  out += std::to_string(e.user);
  out += ',';
  out += std::to_string(e.item);
  out += ',';
  out += std::to_string(e.timestamp);
  out += ',';
  out += std::to_string(e.category);
  out += ',';
  out += to_string(e.behavior);
  out += ',';
  out += std::to_string(e.scene);
  out += ',';
  if (e.label) out += std::to_string(*e.label);
  return out;
}

std::vector<BehaviorEvent> parse_events(std::string_view text,
                                        std::optional<std::uint32_t> scene_count) {
  std::vector<BehaviorEvent> events;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    events.push_back(parse_event_row(line, line_no, scene_count));
  }
  return events;
}

std::vector<BehaviorSequence> group_by_user(std::vector<BehaviorEvent> events) {
  std::map<UserId, BehaviorSequence> by_user;
  for (auto& e : events) {
    auto& seq = by_user[e.user];
    seq.user = e.user;
    seq.events.push_back(std::move(e));
  }
  std::vector<BehaviorSequence> out;
  out.reserve(by_user.size());
  for (auto& [user, seq] : by_user) {
    std::stable_sort(seq.events.begin(), seq.events.end(),
                     [](const BehaviorEvent& a, const BehaviorEvent& b) {
                       return a.timestamp < b.timestamp;
                     });
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<BehaviorSequence> parse_behavior_log(const std::filesystem::path& path,
                                                 std::optional<std::uint32_t> scene_count) {
  const auto bytes = read_file_bytes(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  return group_by_user(parse_events(text, scene_count));
}

std::string serialize_sequences(const std::vector<BehaviorSequence>& sequences) {
  std::string out;
  for (const auto& seq : sequences) {
    for (const auto& e : seq.events) {
      out += format_event_row(e);
      out += '\n';
    }
  }
  return out;
}

HorizonSplit split_long_short(const BehaviorSequence& seq, std::size_t boundary_count) {
  HorizonSplit split;
  split.boundary_count = boundary_count;
  split.long_term.user = seq.user;
  split.short_term.user = seq.user;
  const std::size_t n_short = std::min(boundary_count, seq.events.size());
  const auto cut = seq.events.end() - static_cast<std::ptrdiff_t>(n_short);
  split.long_term.events.assign(seq.events.begin(), cut);
  split.short_term.events.assign(cut, seq.events.end());
  return split;
}

std::vector<BehaviorSequence> segment_scenes(const BehaviorSequence& short_term,
                                             const SceneConfig& cfg) {
  if (cfg.scene_count == 0) throw InvalidArgument("scene_count must be positive");
  std::vector<BehaviorSequence> scenes(cfg.scene_count);
  for (auto& s : scenes) s.user = short_term.user;
  for (const auto& e : short_term.events) {
    if (e.scene >= cfg.scene_count) {
      throw InvalidArgument("event scene " + std::to_string(e.scene) + " outside scene count " +
                            std::to_string(cfg.scene_count));
    }
    scenes[e.scene].events.push_back(e);
  }
  return scenes;
}

}  // namespace glsm
