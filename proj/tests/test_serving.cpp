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

#include "glsm/serving.hpp"
#include "oracles.hpp"

using namespace glsm;

namespace {

ServeConfig fast() {
  ServeConfig c;
  c.material_delay_ms = 0.2;
  c.store_delay_ms = 0.1;
  return c;
}

const oracle::MiniWorld& world() {
  static const auto w = oracle::make_mini_world();
  return w;
}

}  // namespace

TEST(Requests, ParseFormatRoundTrip) {
  const std::vector<ServeRequest> reqs = {{1, 2, 0, 100}, {7, 9, 2, 12345}};
  EXPECT_EQ(parse_requests(format_requests(reqs)), reqs);
  EXPECT_EQ(parse_requests("# header\n\n3,4,1,5\r\n"), (std::vector<ServeRequest>{{3, 4, 1, 5}}));
  EXPECT_THROW(parse_requests("1,2,3\n"), ParseError);
  EXPECT_THROW(parse_requests("1,x,0,5\n"), ParseError);
}

TEST(Latency, SummaryOrderingAndRanks) {
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  const auto s = summarize(v);
  EXPECT_EQ(s.count, 100u);
  EXPECT_EQ(s.p50, 50.0);
  EXPECT_EQ(s.p95, 95.0);
  EXPECT_EQ(s.p99, 99.0);
  EXPECT_DOUBLE_EQ(s.mean, 50.5);
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto r = summarize(oracle::random_vec(rng, 1 + rng.below(300)));
    EXPECT_LE(r.p50, r.p95);
    EXPECT_LE(r.p95, r.p99);
  }
  EXPECT_EQ(summarize({}).count, 0u);
}

TEST(Serving, ModesGiveIdenticalScores) {
  const auto& w = world();
  const ServingSimulator sim(w.store, w.checkpoint, w.table, w.corpus.histories, fast());
  const auto reqs = oracle::impression_requests(w.corpus, 60);
  const auto par = sim.run(reqs, true);
  const auto seq = sim.run(reqs, false);
  ASSERT_EQ(par.size(), reqs.size());
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    EXPECT_EQ(par[i].score, seq[i].score);
    EXPECT_TRUE(par[i].parallel);
    EXPECT_FALSE(seq[i].parallel);
    EXPECT_GT(par[i].score, 0.0);
    EXPECT_LT(par[i].score, 1.0);
    EXPECT_GE(par[i].total_ms, par[i].material_ms);
    EXPECT_GE(seq[i].total_ms, seq[i].material_ms + seq[i].retrieval_ms);
  }
}

TEST(Serving, EmptyStream) {
  const auto& w = world();
  const ServingSimulator sim(w.store, w.checkpoint, w.table, w.corpus.histories, fast());
  EXPECT_TRUE(sim.run({}, true).empty());
  EXPECT_EQ(format_traces({}).find('\n'), format_traces({}).size() - 1);
}

TEST(Serving, UnknownUserFallsBack) {
  const auto& w = world();
  const ServingSimulator sim(w.store, w.checkpoint, w.table, w.corpus.histories, fast());
  const auto t = sim.serve({999999, w.corpus.impressions[0].item, 0, 10}, true);
  EXPECT_TRUE(t.fallback);
  EXPECT_GT(t.score, 0.0);
  EXPECT_LT(t.score, 1.0);
  const auto known = sim.serve(oracle::impression_requests(w.corpus, 1)[0], true);
  EXPECT_FALSE(known.fallback);
}

TEST(Serving, TraceTableHasOneLinePerRequest) {
  const auto& w = world();
  const ServingSimulator sim(w.store, w.checkpoint, w.table, w.corpus.histories, fast());
  const auto traces = sim.run(oracle::impression_requests(w.corpus, 5), false);
  const auto text = format_traces(traces);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
  EXPECT_NE(text.find(",sequential,"), std::string::npos);
}
