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

#include "glsm/synth.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace glsm {

namespace {

constexpr Timestamp kEpochBase = 1'600'000'000;

BehaviorType draw_history_behavior(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.70) return BehaviorType::kClick;
  if (u < 0.80) return BehaviorType::kCart;
  if (u < 0.88) return BehaviorType::kFavorite;
  if (u < 0.95) return BehaviorType::kOrder;
  return BehaviorType::kSearch;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (users == 0) throw InvalidArgument("generator: users must be positive");
  if (items == 0) throw InvalidArgument("generator: items must be positive");
  if (interests == 0) throw InvalidArgument("generator: interests must be positive");
  if (items < interests) throw InvalidArgument("generator: need at least one item per interest");
  if (scene_count == 0) throw InvalidArgument("generator: scene_count must be positive");
  if (max_interests_per_user == 0) {
    throw InvalidArgument("generator: max_interests_per_user must be positive");
  }
  if (categories_per_interest == 0) {
    throw InvalidArgument("generator: categories_per_interest must be positive");
  }
  auto unit = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidArgument(std::string("generator: ") + name + " must lie in [0,1]");
    }
  };
  unit(interest_bias, "interest_bias");
  unit(session_stickiness, "session_stickiness");
  unit(positive_rate, "positive_rate");
  unit(label_noise, "label_noise");
}

bool GroundTruth::user_likes(UserId user, ItemId item) const {
  const auto& ints = user_interests.at(user_index(user));
  const auto it = item_interest.at(item_index(item));
  return std::find(ints.begin(), ints.end(), it) != ints.end();
}

SyntheticCorpus generate_synthetic_corpus(const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  SyntheticCorpus corpus;
  auto& truth = corpus.truth;

  // Items: balanced interest assignment over a shuffled order.
  std::vector<std::size_t> order(cfg.items);
  for (std::size_t i = 0; i < cfg.items; ++i) order[i] = i;
  rng.shuffle(order);
  truth.item_interest.resize(cfg.items);
  truth.item_scene.resize(cfg.items);
  truth.item_category.resize(cfg.items);
  for (std::size_t rank = 0; rank < cfg.items; ++rank) {
    const auto item = order[rank];
    const auto interest = static_cast<std::uint32_t>(rank % cfg.interests);
    truth.item_interest[item] = interest;
    truth.item_scene[item] = static_cast<std::uint32_t>(rng.below(cfg.scene_count));
    truth.item_category[item] =
        1 + interest * cfg.categories_per_interest + rng.below(cfg.categories_per_interest);
  }
  // pool[interest][scene] -> item indices; pool_any[interest] -> all items.
  std::vector<std::vector<std::vector<std::size_t>>> pool(
      cfg.interests, std::vector<std::vector<std::size_t>>(cfg.scene_count));
  std::vector<std::vector<std::size_t>> pool_any(cfg.interests);
  for (std::size_t item = 0; item < cfg.items; ++item) {
    pool[truth.item_interest[item]][truth.item_scene[item]].push_back(item);
    pool_any[truth.item_interest[item]].push_back(item);
  }

  auto make_event = [&](UserId user, std::size_t item, Timestamp ts, std::uint32_t scene,
                        BehaviorType behavior) {
    BehaviorEvent e;
    e.user = user;
    e.item = item + 1;
    e.timestamp = ts;
    e.category = truth.item_category[item];
    e.behavior = behavior;
    e.scene = scene;
    return e;
  };

  const std::size_t max_k = std::min(cfg.max_interests_per_user, cfg.interests);
  truth.user_interests.resize(cfg.users);
  truth.user_focus.resize(cfg.users);
  corpus.histories.resize(cfg.users);

  for (std::size_t u = 0; u < cfg.users; ++u) {
    const UserId user = u + 1;
    // 1..max_k distinct interests.
    const std::size_t k = 1 + rng.below(max_k);
    std::vector<std::uint32_t> all(cfg.interests);
    for (std::size_t i = 0; i < cfg.interests; ++i) all[i] = static_cast<std::uint32_t>(i);
    rng.shuffle(all);
    auto& mine = truth.user_interests[u];
    mine.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(mine.begin(), mine.end());
    const std::uint32_t focus = mine[rng.below(mine.size())];
    truth.user_focus[u] = focus;

    auto& seq = corpus.histories[u];
    seq.user = user;
    seq.events.reserve(cfg.events_per_user);
    Timestamp ts = kEpochBase + static_cast<Timestamp>(rng.below(86400 * 30));
    const std::size_t recent_start =
        cfg.events_per_user > cfg.recent_window ? cfg.events_per_user - cfg.recent_window : 0;
    std::uint32_t current = mine[rng.below(mine.size())];
    for (std::size_t i = 0; i < cfg.events_per_user; ++i) {
      std::uint32_t interest;
      if (i >= recent_start) {
        interest = rng.bernoulli(cfg.interest_bias)
                       ? focus
                       : static_cast<std::uint32_t>(rng.below(cfg.interests));
      } else {
        if (i > 0 && rng.bernoulli(cfg.session_stickiness)) {
          interest = current;
        } else if (rng.bernoulli(cfg.interest_bias)) {
          interest = mine[rng.below(mine.size())];
        } else {
          interest = static_cast<std::uint32_t>(rng.below(cfg.interests));
        }
        current = interest;
      }
      const auto scene = static_cast<std::uint32_t>(rng.below(cfg.scene_count));
      const auto& candidates =
          pool[interest][scene].empty() ? pool_any[interest] : pool[interest][scene];
      const auto item = candidates[rng.below(candidates.size())];
      ts += 60 + static_cast<Timestamp>(rng.below(3600 * 6));
      seq.events.push_back(make_event(user, item, ts, scene, draw_history_behavior(rng)));
    }

    for (std::size_t j = 0; j < cfg.impressions_per_user; ++j) {
      std::uint32_t interest;
      const bool from_user = rng.bernoulli(cfg.positive_rate) || mine.size() == cfg.interests;
      if (from_user) {
        interest = mine[rng.below(mine.size())];
      } else {
        do {
          interest = static_cast<std::uint32_t>(rng.below(cfg.interests));
        } while (std::find(mine.begin(), mine.end(), interest) != mine.end());
      }
      const auto& candidates = pool_any[interest];
      const auto item = candidates[rng.below(candidates.size())];
      ts += 60 + static_cast<Timestamp>(rng.below(3600));
      auto e = make_event(user, item, ts, truth.item_scene[item], BehaviorType::kLoad);
      int label = from_user ? 1 : 0;
      if (rng.bernoulli(cfg.label_noise)) label = 1 - label;
      e.label = label;
      corpus.impressions.push_back(e);
    }
  }
  return corpus;
}

double bayes_optimal_score(const GroundTruth& truth, const GeneratorConfig& cfg,
                           const BehaviorEvent& impression) {
  const bool likes = truth.user_likes(impression.user, impression.item);
  return likes ? 1.0 - cfg.label_noise : cfg.label_noise;
}

std::string SyntheticCorpus::to_log() const {
  std::string out = "# user,item,timestamp,category,behavior_type,scene,label\n";
  out += serialize_sequences(histories);
  for (const auto& e : impressions) {
    out += format_event_row(e);
    out += '\n';
  }
  return out;
}

namespace {

struct Field {
  const char* key;
  std::function<void(GeneratorConfig&, const std::string&)> set;
  std::function<std::string(const GeneratorConfig&)> get;
};

template <class T>
T parse_value(const std::string& key, const std::string& value) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw InvalidArgument("generator config: bad value '" + value + "' for key '" + key + "'");
  }
  return v;
}

template <class T>
std::string show(T v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

#define GLSM_FIELD(name)                                                                   \
  Field {                                                                                  \
    #name,                                                                                 \
        [](GeneratorConfig& c, const std::string& v) {                                     \
          c.name = parse_value<decltype(GeneratorConfig::name)>(#name, v);                 \
        },                                                                                 \
        [](const GeneratorConfig& c) { return show(c.name); }                              \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      GLSM_FIELD(users),          GLSM_FIELD(items),
      GLSM_FIELD(interests),      GLSM_FIELD(events_per_user),
      GLSM_FIELD(scene_count),    GLSM_FIELD(impressions_per_user),
      GLSM_FIELD(max_interests_per_user), GLSM_FIELD(categories_per_interest),
      GLSM_FIELD(recent_window),  GLSM_FIELD(interest_bias),
      GLSM_FIELD(session_stickiness), GLSM_FIELD(positive_rate),
      GLSM_FIELD(label_noise),
  };
  return f;
}

#undef GLSM_FIELD

std::string strip(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

GeneratorConfig parse_generator_config(std::string_view text) {
  GeneratorConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("generator config line " + std::to_string(line_no) +
                            ": expected key = value");
    }
    const auto key = strip(line.substr(0, eq));
    const auto value = strip(line.substr(eq + 1));
    const auto& fs = fields();
    const auto it =
        std::find_if(fs.begin(), fs.end(), [&](const Field& f) { return key == f.key; });
    if (it == fs.end()) {
      throw InvalidArgument("generator config line " + std::to_string(line_no) +
                            ": unknown key '" + key + "'");
    }
    it->set(cfg, value);
  }
  cfg.validate();
  return cfg;
}

std::string format_generator_config(const GeneratorConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += '\n';
  }
  return out;
}

std::string format_ground_truth(const GroundTruth& truth) {
  std::ostringstream os;
  os << "# item,id,interest,scene,category | user,id,focus,,interests\n";
  for (std::size_t i = 0; i < truth.item_interest.size(); ++i) {
    os << "item," << i + 1 << ',' << truth.item_interest[i] << ',' << truth.item_scene[i] << ','
       << truth.item_category[i] << '\n';
  }
  for (std::size_t u = 0; u < truth.user_interests.size(); ++u) {
    os << "user," << u + 1 << ',' << truth.user_focus[u] << ",,";
    for (std::size_t j = 0; j < truth.user_interests[u].size(); ++j) {
      if (j) os << ' ';
      os << truth.user_interests[u][j];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace glsm
