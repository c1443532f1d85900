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

#include "glsm/serving.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>
#include <thread>

namespace glsm {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void sleep_ms(double ms) {
  if (ms > 0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
}

template <class T>
T field(std::string_view s, std::size_t line, std::size_t col) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw ParseError(line, col, "bad request field '" + std::string(s) + "'");
  }
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::vector<ServeRequest> parse_requests(std::string_view text) {
  std::vector<ServeRequest> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      parts.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (parts.size() != 4) {
      throw ParseError(line_no, 1, "expected 4 fields (user,item,scene,timestamp), got " +
                                       std::to_string(parts.size()));
    }
    ServeRequest r;
    r.user = field<UserId>(parts[0], line_no, 1);
    r.item = field<ItemId>(parts[1], line_no, 2);
    r.scene = field<std::uint32_t>(parts[2], line_no, 3);
    r.timestamp = field<Timestamp>(parts[3], line_no, 4);
    out.push_back(r);
  }
  return out;
}

std::string format_requests(std::span<const ServeRequest> requests) {
  std::string out;
  for (const auto& r : requests) {
    out += std::to_string(r.user) + "," + std::to_string(r.item) + "," + std::to_string(r.scene) +
           "," + std::to_string(r.timestamp) + "\n";
  }
  return out;
}

LatencySummary summarize(std::vector<double> values) {
  LatencySummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto rank = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(idx, 1, values.size()) - 1];
  };
  s.p50 = rank(0.50);
  s.p95 = rank(0.95);
  s.p99 = rank(0.99);
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  return s;
}

std::string format_traces(std::span<const ServeTrace> traces) {
  std::string out =
      "user,item,mode,retrieval_ms,material_ms,assembly_ms,forward_ms,total_ms,score,fallback\n";
  for (const auto& t : traces) {
    char score[32];
    std::snprintf(score, sizeof score, "%.10f", t.score);
    out += std::to_string(t.user) + "," + std::to_string(t.item) + "," +
           (t.parallel ? "parallel" : "sequential") + "," + fmt(t.retrieval_ms) + "," +
           fmt(t.material_ms) + "," + fmt(t.assembly_ms) + "," + fmt(t.forward_ms) + "," +
           fmt(t.total_ms) + "," + score + "," + (t.fallback ? "1" : "0") + "\n";
  }
  return out;
}

ServingSimulator::ServingSimulator(const SubgraphStore& store, const Checkpoint& checkpoint,
                                   const EmbeddingTable& graph_embeddings,
                                   std::span<const BehaviorSequence> histories, ServeConfig cfg)
    : store_(&store),
      checkpoint_(&checkpoint),
      assembler_(checkpoint.vocab, &store, &graph_embeddings, checkpoint.features),
      cfg_(cfg) {
  for (const auto& h : histories) {
    histories_[h.user] = h;
    for (const auto& e : h.events) item_category_[e.item] = e.category;
  }
}

ServeTrace ServingSimulator::serve(const ServeRequest& req, bool parallel) const {
  ServeTrace t;
  t.user = req.user;
  t.item = req.item;
  t.parallel = parallel;
  const auto start = Clock::now();

  std::optional<RetrievalResult> retrieved;
  auto retrieval = [&] {
    const auto t0 = Clock::now();
    sleep_ms(cfg_.store_delay_ms);
    if (checkpoint_->features.long_source == LongSource::kGraph) {
      retrieved = assembler_.retrieve_long(req.user, req.item);
    }
    t.retrieval_ms = ms_since(t0);
  };
  auto material = [&] {
    const auto t0 = Clock::now();
    sleep_ms(cfg_.material_delay_ms);
    t.material_ms = ms_since(t0);
  };
  if (parallel) {
    auto pending = std::async(std::launch::async, retrieval);
    material();
    pending.get();
  } else {
    retrieval();
    material();
  }

  auto t0 = Clock::now();
  BehaviorEvent impression;
  impression.user = req.user;
  impression.item = req.item;
  impression.timestamp = req.timestamp;
  impression.scene = req.scene;
  impression.behavior = BehaviorType::kLoad;
  const auto cat = item_category_.find(req.item);
  impression.category = cat == item_category_.end() ? 0 : cat->second;
  static const BehaviorSequence kEmpty;
  const auto hist = histories_.find(req.user);
  const auto sample = assembler_.build(hist == histories_.end() ? kEmpty : hist->second,
                                       impression, retrieved);
  t.fallback = store_->find(req.user) == nullptr;
  t.assembly_ms = ms_since(t0);

  t0 = Clock::now();
  t.score = forward(checkpoint_->params, sample);
  t.forward_ms = ms_since(t0);
  t.total_ms = ms_since(start);
  return t;
}

std::vector<ServeTrace> ServingSimulator::run(std::span<const ServeRequest> requests,
                                              bool parallel) const {
  std::vector<ServeTrace> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back(serve(r, parallel));
  return out;
}

}  // namespace glsm
