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

#include <span>
#include <vector>

#include "glsm/tensor.hpp"

// Trainable building blocks. Each unit has a forward pass that optionally
// fills a cache, and a backward pass that consumes the cache, accumulates
// parameter gradients into a same-shaped weight struct and adds input
// gradients into caller-provided buffers.

namespace glsm {

/// sigma(w1 . (w2 . [e_i ; e_t])); w2 is hidden x 2d, w1 is 1 x hidden.
struct AttentionWeights {
  Matrix w1;
  Matrix w2;
  friend bool operator==(const AttentionWeights&, const AttentionWeights&) = default;
};

struct AttentionCache {
  Vec input;
  Vec hidden;
  double out = 0.0;
};

double attention_forward(const AttentionWeights& w, std::span<const double> e_i,
                         std::span<const double> e_t, AttentionCache* cache = nullptr);
void attention_backward(const AttentionWeights& w, const AttentionCache& cache, double d_out,
                        AttentionWeights& grad, std::span<double> d_ei, std::span<double> d_et);

// sum_i attention(x_i, e_t) * x_i. Weights are not normalized across items.
struct PoolCache {
  std::vector<Vec> items;
  std::vector<AttentionCache> attention;
};

Vec attention_pool_forward(const AttentionWeights& w, const std::vector<Vec>& items,
                           std::span<const double> e_t, PoolCache* cache = nullptr);
/// d_items must hold one zero-initialized (or accumulating) vector per item.
void attention_pool_backward(const AttentionWeights& w, const PoolCache& cache,
                             std::span<const double> d_out, AttentionWeights& grad,
                             std::vector<Vec>& d_items, std::span<double> d_et);

/// z = sigma(wz [h ; x]), r = sigma(wr [h ; x]), c = tanh(wh [r*h ; x]),
/// h' = (1 - z) * h + z * c. Each matrix is d x (d + input_dim), no biases.
struct GruWeights {
  Matrix wz;
  Matrix wr;
  Matrix wh;
  friend bool operator==(const GruWeights&, const GruWeights&) = default;
};

struct GruStep {
  Vec h_prev;
  Vec hx;   // [h_prev ; x]
  Vec rhx;  // [r * h_prev ; x]
  Vec z, r, c, h;
};

struct GruCache {
  std::vector<GruStep> steps;
};

/// All hidden states, starting from a zero state.
std::vector<Vec> gru_forward(const GruWeights& w, const std::vector<Vec>& xs,
                             GruCache* cache = nullptr);
/// d_states: gradient on every returned state. d_xs sized like xs.
void gru_backward(const GruWeights& w, const GruCache& cache, const std::vector<Vec>& d_states,
                  GruWeights& grad, std::vector<Vec>& d_xs);

/// Elementwise sum of the states.
Vec scene_representation(const std::vector<Vec>& states);

/// E_gate = w1 . sigma(w2 . profile), softmax over its d entries, then
/// E_u = [g * e_long ; (1 - g) * e_short].
struct GateWeights {
  Matrix w1;  // d x hidden
  Matrix w2;  // hidden x profile_dim
  friend bool operator==(const GateWeights&, const GateWeights&) = default;
};

struct GateCache {
  Vec profile, pre, hidden, raw, gate, e_long, e_short;
};

struct InterestVectors {
  Vec e_long;
  Vec e_short;
  Vec e_u;  // 2d
};

Vec softmax(std::span<const double> x);

InterestVectors gate_forward(const GateWeights& w, std::span<const double> profile,
                             std::span<const double> e_long, std::span<const double> e_short,
                             GateCache* cache = nullptr);
/// The profile input is treated as a constant: no gradient flows back into
/// it unless `d_profile_unstopped` is given, which exists only so the unit
/// can be checked in isolation.
void gate_backward(const GateWeights& w, const GateCache& cache, std::span<const double> d_eu,
                   GateWeights& grad, std::span<double> d_long, std::span<double> d_short,
                   std::span<double> d_profile_unstopped = {});

struct DenseLayer {
  Matrix w;
  Matrix b;  // rows x 1
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct MlpCache {
  std::vector<Vec> inputs;  // per layer
  std::vector<Vec> pre;     // per layer
};

/// ReLU hidden layers; the last layer is a single linear output (a logit).
double mlp_forward(const std::vector<DenseLayer>& layers, std::span<const double> x,
                   MlpCache* cache = nullptr);
void mlp_backward(const std::vector<DenseLayer>& layers, const MlpCache& cache, double d_logit,
                  std::vector<DenseLayer>& grad, std::span<double> dx);  // dx may be empty

}  // namespace glsm
