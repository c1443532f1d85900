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

#include <algorithm>

#include "glsm/corpus.hpp"

using namespace glsm;

namespace {

BehaviorEvent ev(UserId u, ItemId i, Timestamp t, std::uint32_t scene = 0) {
  BehaviorEvent e;
  e.user = u;
  e.item = i;
  e.timestamp = t;
  e.category = i % 7;
  e.scene = scene;
  return e;
}

BehaviorSequence seq_of(std::size_t n) {
  BehaviorSequence s;
  s.user = 1;
  for (std::size_t i = 0; i < n; ++i) {
    s.events.push_back(ev(1, 100 + i, static_cast<Timestamp>(i), static_cast<std::uint32_t>(i % 3)));
  }
  return s;
}

}  // namespace

TEST(Corpus, SortsOneUserByTime) {
  const auto seqs = group_by_user(parse_events("1,10,30,1,click,0,\n1,11,10,1,cart,1,\n1,12,20,2,order,2,\n"));
  ASSERT_EQ(seqs.size(), 1u);
  ASSERT_EQ(seqs[0].size(), 3u);
  EXPECT_EQ(seqs[0].events[0].item, 11u);
  EXPECT_EQ(seqs[0].events[1].item, 12u);
  EXPECT_EQ(seqs[0].events[2].item, 10u);
}

TEST(Corpus, InterleavedUsers) {
  const auto seqs =
      group_by_user(parse_events("2,1,5,1,click,0,\n1,2,4,1,click,0,\n2,3,1,1,click,0,\n1,4,9,1,click,0,\n"));
  ASSERT_EQ(seqs.size(), 2u);
  EXPECT_EQ(seqs[0].user, 1u);
  EXPECT_EQ(seqs[1].user, 2u);
  EXPECT_EQ(seqs[1].events[0].item, 3u);
  EXPECT_EQ(seqs[1].events[1].item, 1u);
}

TEST(Corpus, EqualTimestampsKeepFileOrder) {
  const auto seqs = group_by_user(parse_events("1,5,7,1,click,0,\n1,3,7,1,click,0,\n1,9,7,1,click,0,\n"));
  EXPECT_EQ(seqs[0].events[0].item, 5u);
  EXPECT_EQ(seqs[0].events[1].item, 3u);
  EXPECT_EQ(seqs[0].events[2].item, 9u);
}

TEST(Corpus, UnknownBehaviorNamesRow) {
  try {
    parse_events("1,10,30,1,click,0,\n\n1,11,10,1,teleport,1,\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 5u);
    EXPECT_NE(std::string(e.what()).find("teleport"), std::string::npos);
  }
}

TEST(Corpus, RejectsMalformedRows) {
  EXPECT_THROW(parse_events("1,10,30,1,click\n"), ParseError);
  EXPECT_THROW(parse_events("1,10,30,1,click,0,,extra\n"), ParseError);
  EXPECT_THROW(parse_events("x,10,30,1,click,0,\n"), ParseError);
  EXPECT_THROW(parse_events("1,10,-4,1,click,0,\n"), ParseError);
  EXPECT_THROW(parse_events("1,10,30,1,click,0,2\n"), ParseError);
  EXPECT_THROW(parse_events("1,10,30,1,click,5,\n", 3u), ParseError);
}

TEST(Corpus, SkipsCommentsAndParsesLabels) {
  const auto events = parse_events("# header\n\n1,10,30,4,load,2,1\n");
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].behavior, BehaviorType::kLoad);
  EXPECT_EQ(events[0].scene, 2u);
  ASSERT_TRUE(events[0].label.has_value());
  EXPECT_EQ(*events[0].label, 1);
}

TEST(Corpus, SerializeRoundTrip) {
  Rng rng(4);
  std::vector<BehaviorEvent> events;
  for (int i = 0; i < 300; ++i) {
    auto e = ev(1 + rng.below(9), 1 + rng.below(50), static_cast<Timestamp>(rng.below(1000)),
                static_cast<std::uint32_t>(rng.below(3)));
    e.behavior = static_cast<BehaviorType>(rng.below(kBehaviorTypeCount));
    if (rng.bernoulli(0.2)) e.label = static_cast<int>(rng.below(2));
    events.push_back(e);
  }
  const auto seqs = group_by_user(events);
  EXPECT_EQ(group_by_user(parse_events(serialize_sequences(seqs))), seqs);
}

TEST(Corpus, SplitExamples) {
  auto s = split_long_short(seq_of(100), 30);
  EXPECT_EQ(s.short_term.size(), 30u);
  EXPECT_EQ(s.long_term.size(), 70u);

  s = split_long_short(seq_of(10), 30);
  EXPECT_EQ(s.short_term.size(), 10u);
  EXPECT_EQ(s.long_term.size(), 0u);

  s = split_long_short(seq_of(10), 0);
  EXPECT_EQ(s.short_term.size(), 0u);
  EXPECT_EQ(s.long_term.size(), 10u);
}

TEST(Corpus, SplitConcatenationReproducesInput) {
  for (std::size_t n : {0u, 1u, 29u, 30u, 31u, 77u}) {
    for (std::size_t b : {0u, 1u, 30u, 100u}) {
      const auto seq = seq_of(n);
      const auto s = split_long_short(seq, b);
      auto joined = s.long_term.events;
      joined.insert(joined.end(), s.short_term.events.begin(), s.short_term.events.end());
      EXPECT_EQ(joined, seq.events);
    }
  }
}

TEST(Corpus, ScenesFollowTags) {
  BehaviorSequence s;
  s.events = {ev(1, 1, 1, 0), ev(1, 2, 2, 1), ev(1, 3, 3, 2), ev(1, 4, 4, 0)};
  const auto scenes = segment_scenes(s, {3});
  ASSERT_EQ(scenes.size(), 3u);
  EXPECT_EQ(scenes[0].size(), 2u);
  EXPECT_EQ(scenes[0].events[1].item, 4u);
  EXPECT_EQ(scenes[1].events[0].item, 2u);
  EXPECT_EQ(scenes[2].events[0].item, 3u);
}

TEST(Corpus, ScenesDegenerateCases) {
  BehaviorSequence one;
  one.events = {ev(1, 1, 1, 1), ev(1, 2, 2, 1)};
  auto scenes = segment_scenes(one, {3});
  EXPECT_TRUE(scenes[0].empty());
  EXPECT_EQ(scenes[1].size(), 2u);
  EXPECT_TRUE(scenes[2].empty());

  scenes = segment_scenes(BehaviorSequence{}, {3});
  ASSERT_EQ(scenes.size(), 3u);
  for (const auto& s : scenes) EXPECT_TRUE(s.empty());

  EXPECT_THROW(segment_scenes(one, {1}), InvalidArgument);
}

TEST(Corpus, ScenesPartitionEvents) {
  const auto seq = seq_of(50);
  const auto scenes = segment_scenes(seq, {3});
  std::vector<ItemId> merged;
  for (const auto& s : scenes) {
    for (const auto& e : s.events) merged.push_back(e.item);
  }
  std::vector<ItemId> original;
  for (const auto& e : seq.events) original.push_back(e.item);
  std::sort(merged.begin(), merged.end());
  std::sort(original.begin(), original.end());
  EXPECT_EQ(merged, original);
}
