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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glsm/binary_io.hpp"
#include "glsm/common.hpp"
#include "glsm/tensor.hpp"
#include "glsm/units.hpp"

namespace glsm {

enum class Horizon : std::uint8_t { kShortOnly = 0, kLongOnly, kLongShort };
enum class Fusion : std::uint8_t { kAdd = 0, kWeight, kMultiply, kConcat, kGate };

std::string_view to_string(Horizon h);
std::string_view to_string(Fusion f);
Horizon parse_horizon(std::string_view s);
Fusion parse_fusion(std::string_view s);

inline constexpr std::size_t kTimeBuckets = 25;

// Dimension table. Item, category, behavior and time embeddings are summed,
// so they share `dim`, which is also the interest dimension d.
//
//   item_emb       items x d          category_emb  categories x d
//   behavior_emb   7 x d              time_emb      25 x d
//   profile_emb    users x p
//   *_att.w2       attention_hidden x 2d,   *_att.w1  1 x attention_hidden
//   gruS.{wz,wr,wh}  d x 2d  (one GRU per scene S)
//   gate.w2        gate_hidden x p,   gate.w1  d x gate_hidden
//   fusion_weight  1 x 1
//   dnnL.w, dnnL.b  hidden sizes ..., final layer 1 output
//
// Row 0 of every id-indexed table is the out-of-vocabulary row.
struct ModelDims {
  std::size_t items = 1;
  std::size_t categories = 1;
  std::size_t users = 1;
  std::size_t dim = 16;
  std::size_t profile_dim = 8;
  std::size_t attention_hidden = 16;
  std::size_t gate_hidden = 16;
  std::vector<std::size_t> hidden{64, 32};
  std::uint32_t scene_count = 3;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct ModelConfig {
  ModelDims dims;
  Horizon horizon = Horizon::kLongShort;
  Fusion fusion = Fusion::kGate;

  /// Length of the interest vector E_u fed to the DNN.
  std::size_t interest_dim() const;
  std::size_t dnn_input_dim() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class InitScheme : std::uint8_t { kUniform = 0, kGlorot };

struct ParameterSet {
  ModelConfig config;
  Matrix item_emb, category_emb, behavior_emb, time_emb, profile_emb;
  AttentionWeights neighbor_att, center_att, scene_att;
  std::vector<GruWeights> gru;
  GateWeights gate;
  Matrix fusion_weight;
  std::vector<DenseLayer> dnn;

  /// All tensors zero.
  static ParameterSet create(const ModelConfig& cfg);
  /// Zero biases, fusion weight 0.5, embedding tables uniform(-0.05, 0.05).
  /// Weight matrices are uniform(-0.05, 0.05) under kUniform and
  /// uniform(+-sqrt(6 / (rows + cols))) under kGlorot.
  void init(std::uint64_t seed, InitScheme scheme = InitScheme::kUniform);
  ParameterSet zeros_like() const { return create(config); }

  /// Every tensor with a stable dotted name, in a fixed order.
  void visit(const std::function<void(const std::string&, Matrix&)>& f);
  void visit(const std::function<void(const std::string&, const Matrix&)>& f) const;
  std::vector<Matrix*> tensors();
  std::size_t parameter_count() const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

/// floor(ln(max(now - t, 1))) clamped to [0, 24].
std::uint32_t time_bucket(Timestamp now, Timestamp t);

/// Table rows of one behavior node.
struct EventFeature {
  std::uint32_t item = 0;
  std::uint32_t category = 0;
  std::uint32_t behavior = 0;  // BehaviorType + 1; 0 is out of vocabulary
  std::uint32_t time_bucket = 0;
  friend bool operator==(const EventFeature&, const EventFeature&) = default;
};

/// One CTR row with all retrieval already applied.
struct Sample {
  UserId user_id = 0;
  ItemId item_id = 0;
  std::uint32_t user = 0;  // profile row
  std::uint32_t target_item = 0;
  std::uint32_t target_category = 0;
  // Long-term groups: element 0 is the center node, the rest are the nodes
  // retrieved through it.
  std::vector<std::vector<EventFeature>> center_groups;
  std::vector<std::vector<EventFeature>> scenes;  // scene_count entries
  double label = 0.0;
  bool long_fallback = false;  // user had no stored subgraph
  friend bool operator==(const Sample&, const Sample&) = default;
};

/// E_item + E_category + E_behavior + E_time.
Vec sideinfo_embed(const ParameterSet& p, const EventFeature& f);
/// E_item + E_category of the target.
Vec target_embed(const ParameterSet& p, std::uint32_t item, std::uint32_t category);

// Per-equation entry points; the full model composes the same units.
Vec aggregate_center(const ParameterSet& p, const std::vector<Vec>& neighbors,
                     std::span<const double> target);
Vec long_term_interest(const ParameterSet& p, const std::vector<Vec>& centers,
                       std::span<const double> target);
std::vector<Vec> gru_sequence(const ParameterSet& p, std::uint32_t scene,
                              const std::vector<Vec>& events);

struct ShortTermInterest {
  Vec e_short;
  bool all_scenes_empty = false;
};
/// Empty scene vectors are skipped; all empty gives a zero vector and a flag.
ShortTermInterest short_term_interest(const ParameterSet& p, const std::vector<Vec>& scenes,
                                      std::span<const double> target);
InterestVectors gate_fusion(const ParameterSet& p, std::span<const double> profile,
                            std::span<const double> e_long, std::span<const double> e_short);
/// sigmoid(DNN(concat(e_u, profile, target))).
double ctr_forward(const ParameterSet& p, std::span<const double> e_u,
                   std::span<const double> profile, std::span<const double> target);

struct ForwardTrace {
  Vec target;
  std::vector<std::vector<Vec>> group_inputs;
  std::vector<PoolCache> group_pools;
  std::vector<Vec> group_vecs;
  PoolCache center_pool;
  bool has_long = false;
  Vec e_long;

  std::vector<std::uint32_t> scene_ids;  // nonempty scenes, ascending
  std::vector<std::vector<Vec>> scene_inputs;
  std::vector<GruCache> gru_caches;
  std::vector<Vec> scene_vecs;
  PoolCache scene_pool;
  bool has_short = false;
  Vec e_short;

  Vec profile;
  GateCache gate;
  Vec e_u;
  Vec dnn_input;
  MlpCache mlp;
  double logit = 0.0;
  double prob = 0.0;
};

/// Click probability; fills `trace` when given.
double forward(const ParameterSet& p, const Sample& s, ForwardTrace* trace = nullptr);
/// Recomputes the logit from the cached DNN input.
double replay_logit(const ParameterSet& p, const ForwardTrace& trace);
/// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(logit).
void backward(const ParameterSet& p, const Sample& s, const ForwardTrace& trace, double d_logit,
              ParameterSet& grad);

/// Binary cross-entropy of one row computed from the logit.
double bce_from_logit(double logit, double label);

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
  double momentum = 0.0;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean training BCE per epoch
};

/// Thrown when training produces a non-finite loss; names the first
/// non-finite tensor.
class NumericError : public Error {
 public:
  using Error::Error;
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Mini-batch SGD on mean BCE. Deterministic under `cfg.seed`.
TrainResult train(ParameterSet& params, std::span<const Sample> data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

std::vector<double> predict(const ParameterSet& p, std::span<const Sample> data);

// Parameter encoding: u8 horizon, u8 fusion, dims, u32 tensor count, then
// tensor_count x {str name, u32 rows, u32 cols, rows*cols x f64}.
void write_parameters(ByteWriter& out, const ParameterSet& p);
ParameterSet read_parameters(ByteReader& in);

}  // namespace glsm
