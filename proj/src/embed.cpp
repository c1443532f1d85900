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

#include "glsm/embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace glsm {

namespace {

constexpr std::uint32_t kEmbeddingMagic = 0x45534C47;  // "GLSE"
constexpr std::uint32_t kEmbeddingVersion = 1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Dense row-major matrix with Adam moments.
struct AdamTensor {
  std::size_t rows = 0, cols = 0;
  std::vector<double> w, g, m, v;

  AdamTensor(std::size_t r, std::size_t c) : rows(r), cols(c), w(r * c), g(r * c), m(r * c), v(r * c) {}
  double* row(std::size_t i) { return w.data() + i * cols; }
  const double* row(std::size_t i) const { return w.data() + i * cols; }
  double* grow(std::size_t i) { return g.data() + i * cols; }

  void step(double lr, std::size_t t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1 - b1) * g[i];
      v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
      g[i] = 0.0;
    }
  }
};

// out = W * in, W is rows x cols.
void matvec(const AdamTensor& W, const double* in, double* out) {
  for (std::size_t r = 0; r < W.rows; ++r) {
    const double* wr = W.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < W.cols; ++c) acc += wr[c] * in[c];
    out[r] = acc;
  }
}

// dW += dout * in^T; din += W^T dout.
void matvec_backward(AdamTensor& W, const double* in, const double* dout, double* din) {
  for (std::size_t r = 0; r < W.rows; ++r) {
    const double d = dout[r];
    if (d == 0.0) continue;
    double* gr = W.grow(r);
    const double* wr = W.row(r);
    for (std::size_t c = 0; c < W.cols; ++c) {
      gr[c] += d * in[c];
      din[c] += d * wr[c];
    }
  }
}

class SageModel {
 public:
  SageModel(const ItemGraph& g, const GraphSageConfig& cfg, Rng& rng)
      : g_(g), d_(cfg.dim), x_(g.node_count(), cfg.dim), w1_(cfg.dim, 2 * cfg.dim),
        w2_(cfg.dim, 2 * cfg.dim) {
    for (auto& v : x_.w) v = rng.uniform(-0.5, 0.5);
    const double a = std::sqrt(6.0 / (3.0 * static_cast<double>(cfg.dim)));
    for (auto& v : w1_.w) v = rng.uniform(-a, a);
    for (auto& v : w2_.w) v = rng.uniform(-a, a);
  }

  // Samples up to `cap` neighbors without replacement; all of them when the
  // degree is small enough or cap == 0.
  std::vector<std::uint32_t> sample(std::uint32_t node, std::size_t cap, Rng* rng) const {
    std::vector<std::uint32_t> out;
    for (const auto& nb : g_.neighbors(node)) out.push_back(nb.index);
    if (rng != nullptr && cap != 0 && out.size() > cap) {
      for (std::size_t i = 0; i < cap; ++i) {
        std::swap(out[i], out[i + rng->below(out.size() - i)]);
      }
      out.resize(cap);
    }
    return out;
  }

  struct Layer1 {
    std::vector<std::uint32_t> nbrs;
    Vec input;  // [x_u ; mean x_w], 2d
    Vec pre;    // d
    Vec h;      // d
  };
  struct Layer2 {
    std::vector<std::uint32_t> nbrs;
    Vec input;  // [h1_t ; mean h1_u], 2d
    Vec h2;     // d
    Vec z;      // d
    double norm = 0.0;
  };

  // Computes layer-2 outputs for `targets`. With rng == nullptr all
  // neighbors are used.
  void forward(const std::vector<std::uint32_t>& targets, std::size_t cap, Rng* rng) {
    l1_.clear();
    l2_.clear();
    for (auto t : targets) {
      if (l2_.count(t)) continue;
      Layer2 rec;
      rec.nbrs = sample(t, cap, rng);
      l2_.emplace(t, std::move(rec));
    }
    // Layer 1 over targets and their sampled neighbors, in deterministic order.
    std::vector<std::uint32_t> need;
    for (auto t : targets) {
      need.push_back(t);
      for (auto u : l2_.at(t).nbrs) need.push_back(u);
    }
    for (auto u : need) {
      if (l1_.count(u)) continue;
      Layer1 rec;
      rec.nbrs = sample(u, cap, rng);
      rec.input.assign(2 * d_, 0.0);
      std::copy_n(x_.row(u), d_, rec.input.begin());
      if (!rec.nbrs.empty()) {
        const double inv = 1.0 / static_cast<double>(rec.nbrs.size());
        for (auto w : rec.nbrs) {
          const double* xw = x_.row(w);
          for (std::size_t j = 0; j < d_; ++j) rec.input[d_ + j] += xw[j] * inv;
        }
      }
      rec.pre.assign(d_, 0.0);
      matvec(w1_, rec.input.data(), rec.pre.data());
      rec.h.resize(d_);
      for (std::size_t j = 0; j < d_; ++j) rec.h[j] = std::max(0.0, rec.pre[j]);
      l1_.emplace(u, std::move(rec));
    }
    for (auto t : targets) {
      auto& rec = l2_.at(t);
      if (!rec.z.empty()) continue;
      rec.input.assign(2 * d_, 0.0);
      const auto& self = l1_.at(t).h;
      std::copy(self.begin(), self.end(), rec.input.begin());
      if (!rec.nbrs.empty()) {
        const double inv = 1.0 / static_cast<double>(rec.nbrs.size());
        for (auto u : rec.nbrs) {
          const auto& hu = l1_.at(u).h;
          for (std::size_t j = 0; j < d_; ++j) rec.input[d_ + j] += hu[j] * inv;
        }
      }
      rec.h2.assign(d_, 0.0);
      matvec(w2_, rec.input.data(), rec.h2.data());
      double sq = 0.0;
      for (double v : rec.h2) sq += v * v;
      rec.norm = std::max(std::sqrt(sq), 1e-12);
      rec.z.resize(d_);
      for (std::size_t j = 0; j < d_; ++j) rec.z[j] = rec.h2[j] / rec.norm;
    }
  }

  const Vec& z(std::uint32_t t) const { return l2_.at(t).z; }

  // dz: gradient on each target's normalized output. Accumulates into the
  // parameter gradients.
  void backward(const std::unordered_map<std::uint32_t, Vec>& dz,
                const std::vector<std::uint32_t>& order) {
    std::unordered_map<std::uint32_t, Vec> dh1;
    std::vector<char> seen(g_.node_count(), 0);
    for (auto t : order) {
      const auto it = dz.find(t);
      if (it == dz.end() || seen[t]) continue;
      seen[t] = 1;
      const auto& rec = l2_.at(t);
      // Through the normalization: dh2 = (dz - z (z . dz)) / |h2|.
      double dot = 0.0;
      for (std::size_t j = 0; j < d_; ++j) dot += rec.z[j] * it->second[j];
      Vec dh2(d_);
      for (std::size_t j = 0; j < d_; ++j) dh2[j] = (it->second[j] - rec.z[j] * dot) / rec.norm;
      Vec din(2 * d_, 0.0);
      matvec_backward(w2_, rec.input.data(), dh2.data(), din.data());
      auto& self = dh1[t];
      self.resize(d_, 0.0);
      for (std::size_t j = 0; j < d_; ++j) self[j] += din[j];
      if (!rec.nbrs.empty()) {
        const double inv = 1.0 / static_cast<double>(rec.nbrs.size());
        for (auto u : rec.nbrs) {
          auto& du = dh1[u];
          du.resize(d_, 0.0);
          for (std::size_t j = 0; j < d_; ++j) du[j] += din[d_ + j] * inv;
        }
      }
    }
    // Deterministic traversal of layer-1 gradients.
    std::vector<std::uint32_t> keys;
    keys.reserve(dh1.size());
    for (const auto& [k, _] : dh1) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (auto u : keys) {
      const auto& grad = dh1.at(u);
      const auto& rec = l1_.at(u);
      Vec dpre(d_);
      for (std::size_t j = 0; j < d_; ++j) dpre[j] = rec.pre[j] > 0.0 ? grad[j] : 0.0;
      Vec din(2 * d_, 0.0);
      matvec_backward(w1_, rec.input.data(), dpre.data(), din.data());
      double* gx = x_.grow(u);
      for (std::size_t j = 0; j < d_; ++j) gx[j] += din[j];
      if (!rec.nbrs.empty()) {
        const double inv = 1.0 / static_cast<double>(rec.nbrs.size());
        for (auto w : rec.nbrs) {
          double* gw = x_.grow(w);
          for (std::size_t j = 0; j < d_; ++j) gw[j] += din[d_ + j] * inv;
        }
      }
    }
  }

  void step(double lr) {
    ++t_;
    x_.step(lr, t_);
    w1_.step(lr, t_);
    w2_.step(lr, t_);
  }

 private:
  const ItemGraph& g_;
  std::size_t d_;
  AdamTensor x_, w1_, w2_;
  std::size_t t_ = 0;
  std::unordered_map<std::uint32_t, Layer1> l1_;
  std::unordered_map<std::uint32_t, Layer2> l2_;
};

}  // namespace

void EmbeddingTable::set(ItemId id, Vec v) {
  if (v.size() != dim_) {
    throw InvalidArgument("embedding for item " + std::to_string(id) + " has length " +
                          std::to_string(v.size()) + ", table dim " + std::to_string(dim_));
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw InvalidArgument("non-finite embedding entry for item " + std::to_string(id));
    }
  }
  vectors_[id] = std::move(v);
}

std::span<const double> EmbeddingTable::at(ItemId id) const {
  const auto it = vectors_.find(id);
  if (it == vectors_.end()) throw NotFound("no embedding for item " + std::to_string(id));
  return it->second;
}

const Vec* EmbeddingTable::find(ItemId id) const {
  const auto it = vectors_.find(id);
  return it == vectors_.end() ? nullptr : &it->second;
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingTable& t) {
  ByteWriter body;
  body.u32(static_cast<std::uint32_t>(t.dim()));
  body.u64(t.size());
  for (const auto& [id, v] : t.vectors()) {
    body.u64(id);
    for (double x : v) body.f64(x);
  }
  return frame(kEmbeddingMagic, kEmbeddingVersion, body.data());
}

EmbeddingTable decode_embeddings(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  ByteReader body(unframe(in, kEmbeddingMagic, kEmbeddingVersion, "embeddings"));
  EmbeddingTable t(body.u32());
  const auto n = body.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto id = body.u64();
    Vec v(t.dim());
    for (auto& x : v) x = body.f64();
    t.set(id, std::move(v));
  }
  return t;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& t) {
  write_file_atomic(path, encode_embeddings(t));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_file_bytes(path));
}

GraphSageResult train_graphsage(const ItemGraph& g, const GraphSageConfig& cfg) {
  if (g.empty()) throw InvalidArgument("cannot embed an empty graph");
  if (cfg.dim < 2) throw InvalidArgument("embedding dim must be >= 2");
  if (cfg.batch_size == 0) throw InvalidArgument("batch_size must be positive");

  Rng rng(cfg.seed);
  SageModel model(g, cfg, rng);
  const auto n = static_cast<std::uint32_t>(g.node_count());

  // Negative-sampling distribution ~ degree^0.75 (isolated nodes get weight
  // of degree 1 so they still receive gradient).
  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::uint32_t i = 0; i < n; ++i) {
    acc += std::pow(static_cast<double>(std::max<std::size_t>(g.degree(i), 1)), 0.75);
    cdf[i] = acc;
  }
  auto draw_negative = [&]() {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), n - 1));
  };

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (const auto& nb : g.neighbors(i)) {
      if (nb.index > i) pairs.emplace_back(i, nb.index);
    }
  }

  GraphSageResult result;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !pairs.empty(); ++epoch) {
    rng.shuffle(pairs);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < pairs.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(pairs.size(), start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      struct Sample {
        std::uint32_t u, v;
        std::vector<std::uint32_t> negs;
      };
      std::vector<Sample> batch;
      std::vector<std::uint32_t> targets;
      for (std::size_t p = start; p < end; ++p) {
        auto [u, v] = pairs[p];
        if (rng.bernoulli(0.5)) std::swap(u, v);
        Sample s{u, v, {}};
        for (std::size_t q = 0; q < cfg.negatives; ++q) s.negs.push_back(draw_negative());
        targets.push_back(u);
        targets.push_back(v);
        targets.insert(targets.end(), s.negs.begin(), s.negs.end());
        batch.push_back(std::move(s));
      }
      model.forward(targets, cfg.neighbor_samples, &rng);

      std::unordered_map<std::uint32_t, Vec> dz;
      auto add = [&](std::uint32_t node, const Vec& other, double coef) {
        auto& d = dz[node];
        d.resize(cfg.dim, 0.0);
        for (std::size_t j = 0; j < cfg.dim; ++j) d[j] += coef * other[j];
      };
      for (const auto& s : batch) {
        const auto& zu = model.z(s.u);
        const auto& zv = model.z(s.v);
        double pos = 0.0;
        for (std::size_t j = 0; j < cfg.dim; ++j) pos += zu[j] * zv[j];
        epoch_loss += softplus(-pos) * inv_batch;
        const double gpos = -sigmoid(-pos) * inv_batch;
        add(s.u, zv, gpos);
        add(s.v, zu, gpos);
        for (auto neg : s.negs) {
          const auto& zn = model.z(neg);
          double sc = 0.0;
          for (std::size_t j = 0; j < cfg.dim; ++j) sc += zu[j] * zn[j];
          epoch_loss += softplus(sc) * inv_batch;
          const double gneg = sigmoid(sc) * inv_batch;
          add(s.u, zn, gneg);
          add(neg, zu, gneg);
        }
      }
      model.backward(dz, targets);
      model.step(cfg.learning_rate);
    }
    const double batches =
        std::ceil(static_cast<double>(pairs.size()) / static_cast<double>(cfg.batch_size));
    result.epoch_loss.push_back(epoch_loss / batches);
  }

  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  model.forward(all, 0, nullptr);
  result.table = EmbeddingTable(cfg.dim);
  for (std::uint32_t i = 0; i < n; ++i) result.table.set(g.node(i), model.z(i));
  return result;
}

EmbeddingTable train_graph_embeddings(const ItemGraph& g, std::size_t dim, std::size_t epochs,
                                      std::uint64_t seed) {
  GraphSageConfig cfg;
  cfg.dim = dim;
  cfg.epochs = epochs;
  cfg.seed = seed;
  return train_graphsage(g, cfg).table;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("dimension mismatch in distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace glsm
