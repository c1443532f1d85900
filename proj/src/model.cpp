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

#include "glsm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glsm/corpus.hpp"

namespace glsm {

namespace {

constexpr double kInitRange = 0.05;

void check_dims(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(std::string("dimension mismatch: ") + what);
}

std::uint32_t row_or_oov(std::uint32_t row, const Matrix& table) {
  return row < table.rows ? row : 0;
}

void add_row(const Matrix& table, std::uint32_t row, std::span<double> out) {
  axpy(1.0, table.row(row_or_oov(row, table)), out);
}

void add_row_grad(Matrix& grad, std::uint32_t row, std::span<const double> d) {
  axpy(1.0, d, grad.row(row_or_oov(row, grad)));
}

void scatter_event(ParameterSet& g, const EventFeature& f, std::span<const double> d) {
  add_row_grad(g.item_emb, f.item, d);
  add_row_grad(g.category_emb, f.category, d);
  add_row_grad(g.behavior_emb, f.behavior, d);
  add_row_grad(g.time_emb, f.time_bucket, d);
}

}  // namespace

std::string_view to_string(Horizon h) {
  switch (h) {
    case Horizon::kShortOnly: return "short";
    case Horizon::kLongOnly: return "long";
    case Horizon::kLongShort: return "long+short";
  }
  return "?";
}

std::string_view to_string(Fusion f) {
  switch (f) {
    case Fusion::kAdd: return "add";
    case Fusion::kWeight: return "weight";
    case Fusion::kMultiply: return "multiply";
    case Fusion::kConcat: return "concat";
    case Fusion::kGate: return "gate";
  }
  return "?";
}

Horizon parse_horizon(std::string_view s) {
  for (auto h : {Horizon::kShortOnly, Horizon::kLongOnly, Horizon::kLongShort}) {
    if (to_string(h) == s) return h;
  }
  throw InvalidArgument("unknown horizon '" + std::string(s) + "' (short, long, long+short)");
}

Fusion parse_fusion(std::string_view s) {
  for (auto f : {Fusion::kAdd, Fusion::kWeight, Fusion::kMultiply, Fusion::kConcat,
                 Fusion::kGate}) {
    if (to_string(f) == s) return f;
  }
  throw InvalidArgument("unknown fusion '" + std::string(s) +
                        "' (add, weight, multiply, concat, gate)");
}

std::size_t ModelConfig::interest_dim() const {
  if (horizon != Horizon::kLongShort) return dims.dim;
  return (fusion == Fusion::kConcat || fusion == Fusion::kGate) ? 2 * dims.dim : dims.dim;
}

std::size_t ModelConfig::dnn_input_dim() const {
  return interest_dim() + dims.profile_dim + dims.dim;
}

ParameterSet ParameterSet::create(const ModelConfig& cfg) {
  const auto& d = cfg.dims;
  if (d.dim == 0 || d.profile_dim == 0 || d.attention_hidden == 0 || d.gate_hidden == 0 ||
      d.scene_count == 0 || d.items == 0 || d.categories == 0 || d.users == 0) {
    throw InvalidArgument("model dimensions must be positive");
  }
  ParameterSet p;
  p.config = cfg;
  p.item_emb = Matrix(d.items, d.dim);
  p.category_emb = Matrix(d.categories, d.dim);
  p.behavior_emb = Matrix(kBehaviorTypeCount + 1, d.dim);
  p.time_emb = Matrix(kTimeBuckets, d.dim);
  p.profile_emb = Matrix(d.users, d.profile_dim);
  for (auto* att : {&p.neighbor_att, &p.center_att, &p.scene_att}) {
    att->w1 = Matrix(1, d.attention_hidden);
    att->w2 = Matrix(d.attention_hidden, 2 * d.dim);
  }
  p.gru.resize(d.scene_count);
  for (auto& g : p.gru) {
    g.wz = Matrix(d.dim, 2 * d.dim);
    g.wr = Matrix(d.dim, 2 * d.dim);
    g.wh = Matrix(d.dim, 2 * d.dim);
  }
  p.gate.w1 = Matrix(d.dim, d.gate_hidden);
  p.gate.w2 = Matrix(d.gate_hidden, d.profile_dim);
  p.fusion_weight = Matrix(1, 1);
  std::size_t in = cfg.dnn_input_dim();
  for (std::size_t h : d.hidden) {
    if (h == 0) throw InvalidArgument("model dimensions must be positive");
    p.dnn.push_back({Matrix(h, in), Matrix(h, 1)});
    in = h;
  }
  p.dnn.push_back({Matrix(1, in), Matrix(1, 1)});
  return p;
}

void ParameterSet::visit(const std::function<void(const std::string&, Matrix&)>& f) {
  f("item_emb", item_emb);
  f("category_emb", category_emb);
  f("behavior_emb", behavior_emb);
  f("time_emb", time_emb);
  f("profile_emb", profile_emb);
  const std::pair<const char*, AttentionWeights*> atts[] = {
      {"neighbor_att", &neighbor_att}, {"center_att", &center_att}, {"scene_att", &scene_att}};
  for (auto& [name, att] : atts) {
    f(std::string(name) + ".w1", att->w1);
    f(std::string(name) + ".w2", att->w2);
  }
  for (std::size_t s = 0; s < gru.size(); ++s) {
    const auto base = "gru" + std::to_string(s);
    f(base + ".wz", gru[s].wz);
    f(base + ".wr", gru[s].wr);
    f(base + ".wh", gru[s].wh);
  }
  f("gate.w1", gate.w1);
  f("gate.w2", gate.w2);
  f("fusion_weight", fusion_weight);
  for (std::size_t l = 0; l < dnn.size(); ++l) {
    const auto base = "dnn" + std::to_string(l);
    f(base + ".w", dnn[l].w);
    f(base + ".b", dnn[l].b);
  }
}

void ParameterSet::visit(const std::function<void(const std::string&, const Matrix&)>& f) const {
  const_cast<ParameterSet*>(this)->visit(
      [&](const std::string& name, Matrix& m) { f(name, static_cast<const Matrix&>(m)); });
}

std::vector<Matrix*> ParameterSet::tensors() {
  std::vector<Matrix*> out;
  visit([&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  visit([&](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

void ParameterSet::init(std::uint64_t seed, InitScheme scheme) {
  Rng rng(seed);
  visit([&](const std::string& name, Matrix& m) {
    if (name.size() > 2 && name.compare(name.size() - 2, 2, ".b") == 0) {
      m.zero();
      return;
    }
    if (name == "fusion_weight") {
      m.data[0] = 0.5;
      return;
    }
    const bool table = name.size() > 4 && name.compare(name.size() - 4, 4, "_emb") == 0;
    double range = kInitRange;
    if (scheme == InitScheme::kGlorot && !table) {
      range = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
    }
    for (auto& v : m.data) v = rng.uniform(-range, range);
  });
}

std::uint32_t time_bucket(Timestamp now, Timestamp t) {
  const double dt = std::max<double>(static_cast<double>(now - t), 1.0);
  const double b = std::floor(std::log(dt));
  return static_cast<std::uint32_t>(std::clamp(b, 0.0, static_cast<double>(kTimeBuckets - 1)));
}

Vec sideinfo_embed(const ParameterSet& p, const EventFeature& f) {
  Vec out(p.config.dims.dim, 0.0);
  add_row(p.item_emb, f.item, out);
  add_row(p.category_emb, f.category, out);
  add_row(p.behavior_emb, f.behavior, out);
  add_row(p.time_emb, f.time_bucket, out);
  return out;
}

Vec target_embed(const ParameterSet& p, std::uint32_t item, std::uint32_t category) {
  Vec out(p.config.dims.dim, 0.0);
  add_row(p.item_emb, item, out);
  add_row(p.category_emb, category, out);
  return out;
}

Vec aggregate_center(const ParameterSet& p, const std::vector<Vec>& neighbors,
                     std::span<const double> target) {
  return attention_pool_forward(p.neighbor_att, neighbors, target);
}

Vec long_term_interest(const ParameterSet& p, const std::vector<Vec>& centers,
                       std::span<const double> target) {
  return attention_pool_forward(p.center_att, centers, target);
}

std::vector<Vec> gru_sequence(const ParameterSet& p, std::uint32_t scene,
                              const std::vector<Vec>& events) {
  if (scene >= p.gru.size()) throw InvalidArgument("scene index out of range");
  return gru_forward(p.gru[scene], events);
}

ShortTermInterest short_term_interest(const ParameterSet& p, const std::vector<Vec>& scenes,
                                      std::span<const double> target) {
  std::vector<Vec> nonempty;
  for (const auto& s : scenes) {
    if (!s.empty()) nonempty.push_back(s);
  }
  if (nonempty.empty()) return {Vec(p.config.dims.dim, 0.0), true};
  return {attention_pool_forward(p.scene_att, nonempty, target), false};
}

InterestVectors gate_fusion(const ParameterSet& p, std::span<const double> profile,
                            std::span<const double> e_long, std::span<const double> e_short) {
  return gate_forward(p.gate, profile, e_long, e_short);
}

double ctr_forward(const ParameterSet& p, std::span<const double> e_u,
                   std::span<const double> profile, std::span<const double> target) {
  Vec x = concat(e_u, profile);
  x.insert(x.end(), target.begin(), target.end());
  check_dims(x.size() == p.config.dnn_input_dim(), "DNN input");
  return sigmoid(mlp_forward(p.dnn, x));
}

double forward(const ParameterSet& p, const Sample& s, ForwardTrace* trace) {
  ForwardTrace local;
  auto& t = trace ? *trace : local;
  const auto& cfg = p.config;
  const std::size_t d = cfg.dims.dim;
  t = ForwardTrace{};
  t.target = target_embed(p, s.target_item, s.target_category);

  const bool use_long = cfg.horizon != Horizon::kShortOnly;
  const bool use_short = cfg.horizon != Horizon::kLongOnly;

  t.e_long.assign(d, 0.0);
  if (use_long) {
    for (const auto& group : s.center_groups) {
      if (group.empty()) continue;
      auto& inputs = t.group_inputs.emplace_back();
      for (const auto& f : group) inputs.push_back(sideinfo_embed(p, f));
      auto& pool = t.group_pools.emplace_back();
      t.group_vecs.push_back(attention_pool_forward(p.neighbor_att, inputs, t.target, &pool));
    }
    if (!t.group_vecs.empty()) {
      t.has_long = true;
      t.e_long = attention_pool_forward(p.center_att, t.group_vecs, t.target, &t.center_pool);
    }
  }

  t.e_short.assign(d, 0.0);
  if (use_short) {
    check_dims(s.scenes.size() <= p.gru.size(), "scene count");
    for (std::uint32_t sc = 0; sc < s.scenes.size(); ++sc) {
      if (s.scenes[sc].empty()) continue;
      t.scene_ids.push_back(sc);
      auto& inputs = t.scene_inputs.emplace_back();
      for (const auto& f : s.scenes[sc]) inputs.push_back(sideinfo_embed(p, f));
      auto& cache = t.gru_caches.emplace_back();
      t.scene_vecs.push_back(scene_representation(gru_forward(p.gru[sc], inputs, &cache)));
    }
    if (!t.scene_vecs.empty()) {
      t.has_short = true;
      t.e_short = attention_pool_forward(p.scene_att, t.scene_vecs, t.target, &t.scene_pool);
    }
  }

  const auto prow = p.profile_emb.row(row_or_oov(s.user, p.profile_emb));
  t.profile.assign(prow.begin(), prow.end());

  switch (cfg.horizon) {
    case Horizon::kShortOnly: t.e_u = t.e_short; break;
    case Horizon::kLongOnly: t.e_u = t.e_long; break;
    case Horizon::kLongShort:
      switch (cfg.fusion) {
        case Fusion::kAdd:
          t.e_u = t.e_long;
          axpy(1.0, t.e_short, t.e_u);
          break;
        case Fusion::kWeight: {
          const double w = p.fusion_weight.data[0];
          t.e_u.resize(d);
          for (std::size_t j = 0; j < d; ++j) t.e_u[j] = w * t.e_long[j] + (1.0 - w) * t.e_short[j];
          break;
        }
        case Fusion::kMultiply:
          t.e_u.resize(d);
          for (std::size_t j = 0; j < d; ++j) t.e_u[j] = t.e_long[j] * t.e_short[j];
          break;
        case Fusion::kConcat: t.e_u = concat(t.e_long, t.e_short); break;
        case Fusion::kGate:
          t.e_u = gate_forward(p.gate, t.profile, t.e_long, t.e_short, &t.gate).e_u;
          break;
      }
      break;
  }

  t.dnn_input = concat(t.e_u, t.profile);
  t.dnn_input.insert(t.dnn_input.end(), t.target.begin(), t.target.end());
  check_dims(t.dnn_input.size() == cfg.dnn_input_dim(), "DNN input");
  t.logit = mlp_forward(p.dnn, t.dnn_input, &t.mlp);
  t.prob = sigmoid(t.logit);
  return t.prob;
}

double replay_logit(const ParameterSet& p, const ForwardTrace& trace) {
  return mlp_forward(p.dnn, trace.dnn_input);
}

void backward(const ParameterSet& p, const Sample& s, const ForwardTrace& t, double d_logit,
              ParameterSet& g) {
  const auto& cfg = p.config;
  const std::size_t d = cfg.dims.dim;
  const std::size_t ni = cfg.interest_dim();
  const std::size_t np = cfg.dims.profile_dim;

  Vec dx(t.dnn_input.size(), 0.0);
  mlp_backward(p.dnn, t.mlp, d_logit, g.dnn, dx);
  const std::span<const double> d_eu(dx.data(), ni);
  const std::span<const double> d_profile(dx.data() + ni, np);
  Vec d_target(dx.begin() + static_cast<std::ptrdiff_t>(ni + np), dx.end());

  // Profile features reach the DNN directly; the gate path is stopped.
  add_row_grad(g.profile_emb, s.user, d_profile);

  Vec d_long(d, 0.0), d_short(d, 0.0);
  switch (cfg.horizon) {
    case Horizon::kShortOnly: axpy(1.0, d_eu, d_short); break;
    case Horizon::kLongOnly: axpy(1.0, d_eu, d_long); break;
    case Horizon::kLongShort:
      switch (cfg.fusion) {
        case Fusion::kAdd:
          axpy(1.0, d_eu, d_long);
          axpy(1.0, d_eu, d_short);
          break;
        case Fusion::kWeight: {
          const double w = p.fusion_weight.data[0];
          double dw = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            d_long[j] += w * d_eu[j];
            d_short[j] += (1.0 - w) * d_eu[j];
            dw += d_eu[j] * (t.e_long[j] - t.e_short[j]);
          }
          g.fusion_weight.data[0] += dw;
          break;
        }
        case Fusion::kMultiply:
          for (std::size_t j = 0; j < d; ++j) {
            d_long[j] += d_eu[j] * t.e_short[j];
            d_short[j] += d_eu[j] * t.e_long[j];
          }
          break;
        case Fusion::kConcat:
          for (std::size_t j = 0; j < d; ++j) {
            d_long[j] += d_eu[j];
            d_short[j] += d_eu[d + j];
          }
          break;
        case Fusion::kGate: gate_backward(p.gate, t.gate, d_eu, g.gate, d_long, d_short); break;
      }
      break;
  }

  if (t.has_long) {
    std::vector<Vec> d_groups(t.group_vecs.size(), Vec(d, 0.0));
    attention_pool_backward(p.center_att, t.center_pool, d_long, g.center_att, d_groups, d_target);
    std::size_t gi = 0;
    for (const auto& group : s.center_groups) {
      if (group.empty()) continue;
      std::vector<Vec> d_inputs(group.size(), Vec(d, 0.0));
      attention_pool_backward(p.neighbor_att, t.group_pools[gi], d_groups[gi], g.neighbor_att,
                              d_inputs, d_target);
      for (std::size_t i = 0; i < group.size(); ++i) scatter_event(g, group[i], d_inputs[i]);
      ++gi;
    }
  }

  if (t.has_short) {
    std::vector<Vec> d_scenes(t.scene_vecs.size(), Vec(d, 0.0));
    attention_pool_backward(p.scene_att, t.scene_pool, d_short, g.scene_att, d_scenes, d_target);
    for (std::size_t k = 0; k < t.scene_ids.size(); ++k) {
      const auto sc = t.scene_ids[k];
      const auto& events = s.scenes[sc];
      std::vector<Vec> d_states(events.size(), d_scenes[k]);
      std::vector<Vec> d_xs(events.size(), Vec(d, 0.0));
      gru_backward(p.gru[sc], t.gru_caches[k], d_states, g.gru[sc], d_xs);
      for (std::size_t i = 0; i < events.size(); ++i) scatter_event(g, events[i], d_xs[i]);
    }
  }

  add_row_grad(g.item_emb, s.target_item, d_target);
  add_row_grad(g.category_emb, s.target_category, d_target);
}

double bce_from_logit(double logit, double label) {
  // log(1 + e^z) - y z, stable for large |z|.
  const double softplus = logit > 0 ? logit + std::log1p(std::exp(-logit))
                                    : std::log1p(std::exp(logit));
  return softplus - label * logit;
}

namespace {

std::string first_non_finite(ParameterSet& params, ParameterSet& grad) {
  std::string found;
  auto scan = [&](const char* prefix) {
    return [&found, prefix](const std::string& name, Matrix& m) {
      if (!found.empty()) return;
      for (double v : m.data) {
        if (!std::isfinite(v)) {
          found = std::string(prefix) + name;
          return;
        }
      }
    };
  };
  params.visit(scan(""));
  if (found.empty()) grad.visit(scan("gradient of "));
  return found.empty() ? "none (loss overflow)" : found;
}

}  // namespace

TrainResult train(ParameterSet& params, std::span<const Sample> data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  if (data.empty()) throw InvalidArgument("train: empty dataset");
  if (cfg.batch_size == 0) throw InvalidArgument("train: batch_size must be positive");
  if (!(cfg.learning_rate >= 0.0)) throw InvalidArgument("train: learning rate must be >= 0");
  for (const auto& s : data) {
    if (s.label != 0.0 && s.label != 1.0) throw InvalidArgument("train: labels must be 0 or 1");
  }

  Rng rng(cfg.seed);
  ParameterSet grad = params.zeros_like();
  ParameterSet velocity = params.zeros_like();
  // A NaN weight feeding a ReLU can leave the loss finite, so check up front.
  if (const auto bad = first_non_finite(params, grad); bad.rfind("none", 0) != 0) {
    throw NumericError("non-finite initial parameters; first non-finite tensor: " + bad);
  }
  auto ptensors = params.tensors();
  auto gtensors = grad.tensors();
  auto vtensors = velocity.tensors();

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainResult result;
  ForwardTrace trace;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (auto* m : gtensors) m->zero();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& s = data[order[i]];
        forward(params, s, &trace);
        batch_loss += bce_from_logit(trace.logit, s.label);
        backward(params, s, trace, trace.prob - s.label, grad);
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite training loss in epoch " + std::to_string(epoch) +
                           "; first non-finite tensor: " + first_non_finite(params, grad));
      }
      total += batch_loss;
      const double scale = cfg.learning_rate / static_cast<double>(end - start);
      for (std::size_t k = 0; k < ptensors.size(); ++k) {
        auto& pd = ptensors[k]->data;
        const auto& gd = gtensors[k]->data;
        if (cfg.momentum > 0.0) {
          auto& vd = vtensors[k]->data;
          for (std::size_t j = 0; j < pd.size(); ++j) {
            vd[j] = cfg.momentum * vd[j] + gd[j];
            pd[j] -= scale * vd[j];
          }
        } else {
          for (std::size_t j = 0; j < pd.size(); ++j) pd[j] -= scale * gd[j];
        }
      }
    }
    const double mean = total / static_cast<double>(data.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

std::vector<double> predict(const ParameterSet& p, std::span<const Sample> data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(forward(p, s));
  return out;
}

void write_parameters(ByteWriter& out, const ParameterSet& p) {
  const auto& c = p.config;
  out.u8(static_cast<std::uint8_t>(c.horizon));
  out.u8(static_cast<std::uint8_t>(c.fusion));
  const auto& d = c.dims;
  for (std::size_t v : {d.items, d.categories, d.users, d.dim, d.profile_dim,
                        d.attention_hidden, d.gate_hidden}) {
    out.u64(v);
  }
  out.u32(d.scene_count);
  out.u32(static_cast<std::uint32_t>(d.hidden.size()));
  for (std::size_t h : d.hidden) out.u64(h);
  std::uint32_t count = 0;
  p.visit([&](const std::string&, const Matrix&) { ++count; });
  out.u32(count);
  p.visit([&](const std::string& name, const Matrix& m) {
    out.str(name);
    out.u32(static_cast<std::uint32_t>(m.rows));
    out.u32(static_cast<std::uint32_t>(m.cols));
    for (double v : m.data) out.f64(v);
  });
}

ParameterSet read_parameters(ByteReader& in) {
  ModelConfig c;
  const auto horizon = in.u8();
  const auto fusion = in.u8();
  if (horizon > 2 || fusion > 4) throw InvalidArgument("checkpoint: bad model kind");
  c.horizon = static_cast<Horizon>(horizon);
  c.fusion = static_cast<Fusion>(fusion);
  auto& d = c.dims;
  for (std::size_t* v : {&d.items, &d.categories, &d.users, &d.dim, &d.profile_dim,
                         &d.attention_hidden, &d.gate_hidden}) {
    *v = static_cast<std::size_t>(in.u64());
  }
  d.scene_count = in.u32();
  const auto layers = in.u32();
  if (layers > in.remaining() / 8) {
    throw FormatError(FormatErrorKind::kTruncated, "checkpoint layer table");
  }
  d.hidden.resize(layers);
  for (auto& h : d.hidden) h = static_cast<std::size_t>(in.u64());
  ParameterSet p = ParameterSet::create(c);
  const auto count = in.u32();
  std::vector<std::pair<std::string, Matrix*>> expected;
  p.visit([&](const std::string& name, Matrix& m) { expected.emplace_back(name, &m); });
  if (count != expected.size()) throw InvalidArgument("checkpoint: tensor count mismatch");
  for (auto& [name, m] : expected) {
    const auto got = in.str();
    const auto rows = in.u32();
    const auto cols = in.u32();
    if (got != name || rows != m->rows || cols != m->cols) {
      throw InvalidArgument("checkpoint: unexpected tensor '" + got + "' (wanted '" + name +
                            "')");
    }
    for (auto& v : m->data) v = in.f64();
  }
  return p;
}

}  // namespace glsm
