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

#include "glsm/units.hpp"

#include <algorithm>
#include <cmath>

namespace glsm {

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(std::string("dimension mismatch: ") + what);
}

}  // namespace

void matvec(const Matrix& w, std::span<const double> x, std::span<double> out) {
  check(x.size() == w.cols && out.size() == w.rows, "matvec");
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* wr = w.data.data() + r * w.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}

void matvec_backward(const Matrix& w, std::span<const double> x, std::span<const double> dout,
                     Matrix& dw, std::span<double> dx) {
  const bool want_dx = !dx.empty();
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double d = dout[r];
    if (d == 0.0) continue;
    double* gr = dw.data.data() + r * w.cols;
    const double* wr = w.data.data() + r * w.cols;
    for (std::size_t c = 0; c < w.cols; ++c) gr[c] += d * x[c];
    if (want_dx) {
      for (std::size_t c = 0; c < w.cols; ++c) dx[c] += d * wr[c];
    }
  }
}

Vec concat(std::span<const double> a, std::span<const double> b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double attention_forward(const AttentionWeights& w, std::span<const double> e_i,
                         std::span<const double> e_t, AttentionCache* cache) {
  check(e_i.size() + e_t.size() == w.w2.cols, "attention input");
  check(w.w1.rows == 1 && w.w1.cols == w.w2.rows, "attention weights");
  AttentionCache local;
  auto& c = cache ? *cache : local;
  c.input = concat(e_i, e_t);
  c.hidden.assign(w.w2.rows, 0.0);
  matvec(w.w2, c.input, c.hidden);
  c.out = sigmoid(dot(w.w1.row(0), c.hidden));
  return c.out;
}

void attention_backward(const AttentionWeights& w, const AttentionCache& cache, double d_out,
                        AttentionWeights& grad, std::span<double> d_ei, std::span<double> d_et) {
  const double d_pre = d_out * cache.out * (1.0 - cache.out);
  Vec d_hidden(w.w2.rows, 0.0);
  Vec one{d_pre};
  matvec_backward(w.w1, cache.hidden, one, grad.w1, d_hidden);
  Vec d_input(w.w2.cols, 0.0);
  matvec_backward(w.w2, cache.input, d_hidden, grad.w2, d_input);
  for (std::size_t i = 0; i < d_ei.size(); ++i) d_ei[i] += d_input[i];
  const std::size_t offset = d_input.size() - d_et.size();
  for (std::size_t i = 0; i < d_et.size(); ++i) d_et[i] += d_input[offset + i];
}

Vec attention_pool_forward(const AttentionWeights& w, const std::vector<Vec>& items,
                           std::span<const double> e_t, PoolCache* cache) {
  if (items.empty()) throw InvalidArgument("attention pooling over an empty set");
  const std::size_t d = items.front().size();
  Vec out(d, 0.0);
  if (cache) {
    cache->items = items;
    cache->attention.assign(items.size(), {});
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    check(items[i].size() == d, "pooled items");
    AttentionCache local;
    const double a = attention_forward(w, items[i], e_t, cache ? &cache->attention[i] : &local);
    axpy(a, items[i], out);
  }
  return out;
}

void attention_pool_backward(const AttentionWeights& w, const PoolCache& cache,
                             std::span<const double> d_out, AttentionWeights& grad,
                             std::vector<Vec>& d_items, std::span<double> d_et) {
  for (std::size_t i = 0; i < cache.items.size(); ++i) {
    const auto& att = cache.attention[i];
    axpy(att.out, d_out, d_items[i]);
    const double d_alpha = dot(d_out, cache.items[i]);
    attention_backward(w, att, d_alpha, grad, d_items[i], d_et);
  }
}

std::vector<Vec> gru_forward(const GruWeights& w, const std::vector<Vec>& xs, GruCache* cache) {
  if (xs.empty()) throw InvalidArgument("GRU over an empty sequence");
  const std::size_t d = w.wz.rows;
  check(w.wz.cols == d + xs.front().size(), "GRU input");
  std::vector<Vec> states;
  states.reserve(xs.size());
  if (cache) cache->steps.assign(xs.size(), {});
  Vec h(d, 0.0);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    check(xs[t].size() + d == w.wz.cols, "GRU input");
    GruStep local;
    auto& s = cache ? cache->steps[t] : local;
    s.h_prev = h;
    s.hx = concat(h, xs[t]);
    s.z.assign(d, 0.0);
    s.r.assign(d, 0.0);
    matvec(w.wz, s.hx, s.z);
    matvec(w.wr, s.hx, s.r);
    for (std::size_t j = 0; j < d; ++j) {
      s.z[j] = sigmoid(s.z[j]);
      s.r[j] = sigmoid(s.r[j]);
    }
    s.rhx = s.hx;
    for (std::size_t j = 0; j < d; ++j) s.rhx[j] = s.r[j] * h[j];
    s.c.assign(d, 0.0);
    matvec(w.wh, s.rhx, s.c);
    for (auto& v : s.c) v = std::tanh(v);
    s.h.resize(d);
    for (std::size_t j = 0; j < d; ++j) s.h[j] = (1.0 - s.z[j]) * h[j] + s.z[j] * s.c[j];
    h = s.h;
    states.push_back(h);
  }
  return states;
}

void gru_backward(const GruWeights& w, const GruCache& cache, const std::vector<Vec>& d_states,
                  GruWeights& grad, std::vector<Vec>& d_xs) {
  const std::size_t d = w.wz.rows;
  Vec carry(d, 0.0);
  for (std::size_t t = cache.steps.size(); t-- > 0;) {
    const auto& s = cache.steps[t];
    Vec dh(d);
    for (std::size_t j = 0; j < d; ++j) dh[j] = d_states[t][j] + carry[j];

    Vec d_hprev(d, 0.0);
    Vec dz_pre(d), dc_pre(d);
    for (std::size_t j = 0; j < d; ++j) {
      d_hprev[j] = dh[j] * (1.0 - s.z[j]);
      const double dz = dh[j] * (s.c[j] - s.h_prev[j]);
      dz_pre[j] = dz * s.z[j] * (1.0 - s.z[j]);
      const double dc = dh[j] * s.z[j];
      dc_pre[j] = dc * (1.0 - s.c[j] * s.c[j]);
    }
    Vec d_rhx(w.wh.cols, 0.0);
    matvec_backward(w.wh, s.rhx, dc_pre, grad.wh, d_rhx);
    Vec dr_pre(d);
    for (std::size_t j = 0; j < d; ++j) {
      d_hprev[j] += d_rhx[j] * s.r[j];
      const double dr = d_rhx[j] * s.h_prev[j];
      dr_pre[j] = dr * s.r[j] * (1.0 - s.r[j]);
    }
    Vec d_hx(w.wz.cols, 0.0);
    matvec_backward(w.wz, s.hx, dz_pre, grad.wz, d_hx);
    matvec_backward(w.wr, s.hx, dr_pre, grad.wr, d_hx);
    for (std::size_t j = 0; j < d; ++j) d_hprev[j] += d_hx[j];
    auto& dx = d_xs[t];
    for (std::size_t j = d; j < d_hx.size(); ++j) dx[j - d] += d_hx[j] + d_rhx[j];
    carry = std::move(d_hprev);
  }
}

Vec scene_representation(const std::vector<Vec>& states) {
  if (states.empty()) throw InvalidArgument("scene representation of no states");
  Vec out(states.front().size(), 0.0);
  for (const auto& s : states) axpy(1.0, s, out);
  return out;
}

Vec softmax(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  Vec out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - m);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

InterestVectors gate_forward(const GateWeights& w, std::span<const double> profile,
                             std::span<const double> e_long, std::span<const double> e_short,
                             GateCache* cache) {
  const std::size_t d = w.w1.rows;
  check(e_long.size() == d && e_short.size() == d, "gate interest vectors");
  check(profile.size() == w.w2.cols && w.w1.cols == w.w2.rows, "gate weights");
  GateCache local;
  auto& c = cache ? *cache : local;
  c.profile.assign(profile.begin(), profile.end());
  c.e_long.assign(e_long.begin(), e_long.end());
  c.e_short.assign(e_short.begin(), e_short.end());
  c.pre.assign(w.w2.rows, 0.0);
  matvec(w.w2, profile, c.pre);
  c.hidden.resize(c.pre.size());
  for (std::size_t j = 0; j < c.pre.size(); ++j) c.hidden[j] = sigmoid(c.pre[j]);
  c.raw.assign(d, 0.0);
  matvec(w.w1, c.hidden, c.raw);
  c.gate = softmax(c.raw);

  InterestVectors out;
  out.e_long = c.e_long;
  out.e_short = c.e_short;
  out.e_u.resize(2 * d);
  for (std::size_t j = 0; j < d; ++j) {
    out.e_u[j] = c.gate[j] * e_long[j];
    out.e_u[d + j] = (1.0 - c.gate[j]) * e_short[j];
  }
  return out;
}

void gate_backward(const GateWeights& w, const GateCache& cache, std::span<const double> d_eu,
                   GateWeights& grad, std::span<double> d_long, std::span<double> d_short,
                   std::span<double> d_profile_unstopped) {
  const std::size_t d = cache.gate.size();
  Vec dg(d);
  for (std::size_t j = 0; j < d; ++j) {
    d_long[j] += d_eu[j] * cache.gate[j];
    d_short[j] += d_eu[d + j] * (1.0 - cache.gate[j]);
    dg[j] = d_eu[j] * cache.e_long[j] - d_eu[d + j] * cache.e_short[j];
  }
  const double weighted = dot(dg, cache.gate);
  Vec d_raw(d);
  for (std::size_t j = 0; j < d; ++j) d_raw[j] = cache.gate[j] * (dg[j] - weighted);
  Vec d_hidden(w.w1.cols, 0.0);
  matvec_backward(w.w1, cache.hidden, d_raw, grad.w1, d_hidden);
  Vec d_pre(d_hidden.size());
  for (std::size_t j = 0; j < d_pre.size(); ++j) {
    d_pre[j] = d_hidden[j] * cache.hidden[j] * (1.0 - cache.hidden[j]);
  }
  matvec_backward(w.w2, cache.profile, d_pre, grad.w2, d_profile_unstopped);
}

double mlp_forward(const std::vector<DenseLayer>& layers, std::span<const double> x,
                   MlpCache* cache) {
  if (layers.empty() || layers.back().w.rows != 1) {
    throw InvalidArgument("MLP must end in a single output");
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Vec cur(x.begin(), x.end());
  double logit = 0.0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    check(cur.size() == layer.w.cols, "MLP layer input");
    Vec pre(layer.w.rows, 0.0);
    matvec(layer.w, cur, pre);
    for (std::size_t j = 0; j < pre.size(); ++j) pre[j] += layer.b.data[j];
    if (cache) {
      cache->inputs.push_back(cur);
      cache->pre.push_back(pre);
    }
    if (l + 1 == layers.size()) {
      logit = pre[0];
    } else {
      for (auto& v : pre) v = std::max(0.0, v);
      cur = std::move(pre);
    }
  }
  return logit;
}

void mlp_backward(const std::vector<DenseLayer>& layers, const MlpCache& cache, double d_logit,
                  std::vector<DenseLayer>& grad, std::span<double> dx) {
  Vec d_pre{d_logit};
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    for (std::size_t j = 0; j < d_pre.size(); ++j) grad[l].b.data[j] += d_pre[j];
    Vec d_in(layer.w.cols, 0.0);
    matvec_backward(layer.w, cache.inputs[l], d_pre, grad[l].w, d_in);
    if (l == 0) {
      for (std::size_t j = 0; j < dx.size(); ++j) dx[j] += d_in[j];
      break;
    }
    // Through the previous layer's ReLU.
    const auto& prev_pre = cache.pre[l - 1];
    for (std::size_t j = 0; j < d_in.size(); ++j) {
      if (prev_pre[j] <= 0.0) d_in[j] = 0.0;
    }
    d_pre = std::move(d_in);
  }
}

}  // namespace glsm
