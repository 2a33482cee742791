// Copyright 2026 The dmpbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dmp/matrix.hpp"

namespace dmp {

// ---------------------------------------------------------------------------
// Model description
// ---------------------------------------------------------------------------

enum class Activation { kRelu, kIdentity };

struct LayerSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Activation activation = Activation::kIdentity;
};

/// Specs for a fully connected classifier: ReLU hidden layers followed by an
/// identity output layer (logits; softmax is applied by losses/prediction).
std::vector<LayerSpec> fully_connected(std::size_t input_dim,
                                       const std::vector<std::size_t>& hidden,
                                       std::size_t n_classes);

/// Fully connected network with explicit dense weights. Weight matrix of
/// layer l is output_dim x input_dim; bias has length output_dim.
struct Mlp {
  std::vector<LayerSpec> layers;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  /// Seeded init, uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  static Mlp random(const std::vector<LayerSpec>& arch, std::uint64_t seed);

  std::size_t input_dim() const { return layers.front().input_dim; }
  std::size_t output_dim() const { return layers.back().output_dim; }
  std::size_t parameter_count() const;

  /// Checks layer compatibility, final identity activation and finiteness.
  void validate() const;

  bool operator==(const Mlp& other) const;
};

// ---------------------------------------------------------------------------
// Training configuration
// ---------------------------------------------------------------------------

enum class Optimizer { kSgd, kAdam };
enum class LossKind { kCrossEntropy, kKlDivergence };

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::kAdam;
  AdamParams adam;
  double weight_decay = 0.0;
  double dropout_rate = 0.0;        // hidden activations only, inverted scaling
  double label_smoothing = 0.0;     // in [0,1)
  double confidence_penalty = 0.0;  // >= 0
  std::uint64_t seed = 0;
  LossKind loss = LossKind::kCrossEntropy;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Forward pass, losses
// ---------------------------------------------------------------------------

/// Per-hidden-layer 0/1 keep mask for a single input.
using DropoutMask = std::vector<std::vector<double>>;

/// Logits for one input. When a mask is given it must match the hidden layer
/// widths; kept units are scaled by 1/(1-dropout_rate).
std::vector<double> forward(const Mlp& model, std::span<const double> x,
                            const DropoutMask* mask = nullptr,
                            double dropout_rate = 0.0);

struct Prediction {
  std::vector<double> probs;
  std::vector<double> logits;
  double temperature = 1.0;
};

Prediction predict(const Mlp& model, std::span<const double> x,
                   double temperature = 1.0);

/// Temperature softmax with max-subtraction. Output sums to 1 within 1e-9 and
/// preserves the argmax of the logits for every temperature > 0.
std::vector<double> softmax_t(std::span<const double> logits, double temperature);

/// Shannon entropy (natural log) with the 0*log(0)=0 convention.
double entropy(std::span<const double> probs);

/// Probability floor applied inside every log. Keeps confident teachers from
/// producing -inf losses.
inline constexpr double kProbFloor = 1e-12;

/// -sum_i q_i log(p_i) - confidence_penalty * H(p), where q is the one-hot
/// label mixed with uniform mass label_smoothing.
double cross_entropy(std::span<const double> probs, std::size_t label,
                     double label_smoothing = 0.0,
                     double confidence_penalty = 0.0);

/// sum_i target_i * log(target_i / student_i), 0*log(0/.)=0, floored logs.
double kl_loss(std::span<const double> target,
               std::span<const double> student_probs);

// ---------------------------------------------------------------------------
// Gradients and training
// ---------------------------------------------------------------------------

/// A batch carries exactly one target kind: class labels (cross-entropy) or
/// probability rows (KL divergence). `temperature` applies to the model's own
/// logits on the KL path.
struct Batch {
  Matrix inputs;
  std::vector<std::size_t> labels;
  Matrix soft_targets;
  double temperature = 1.0;
};

/// Per-hidden-layer keep masks for a whole batch (rows = samples).
using BatchMasks = std::vector<Matrix>;

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  double mean_loss = 0.0;  // data loss only, before the weight-decay term
};

/// Exact analytic gradients of the mean batch loss, including the
/// weight-decay term (decay * w added to weight gradients) and with dropout
/// masks fixed for the call. KL gradients flow through softmax_t at
/// batch.temperature.
Gradients backward(const Mlp& model, const Batch& batch,
                   const TrainConfig& config,
                   const BatchMasks* masks = nullptr);

/// The scalar objective backward() differentiates: mean data loss plus
/// (weight_decay/2) * sum w^2, with the given masks held fixed. Exists so
/// finite-difference checks can probe exactly the same function.
double batch_objective(const Mlp& model, const Batch& batch,
                       const TrainConfig& config,
                       const BatchMasks* masks = nullptr);

struct TrainResult {
  Mlp model;
  std::vector<double> epoch_losses;  // mean data loss per epoch
};

/// Cross-entropy training on hard labels. Deterministic given config.seed
/// (shuffling and dropout streams are derived from it).
TrainResult train(const Mlp& model, const Matrix& inputs,
                  const std::vector<std::size_t>& labels,
                  const TrainConfig& config);

/// KL-divergence training on probability targets; the model's logits pass
/// through softmax_t at `temperature`.
TrainResult train_soft(const Mlp& model, const Matrix& inputs,
                       const Matrix& soft_targets, double temperature,
                       const TrainConfig& config);

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

/// Accuracy (argmax, first index wins ties) and mean cross-entropy at the
/// given temperature. Temperature changes the loss, never the accuracy.
EvalResult evaluate(const Mlp& model, const Matrix& inputs,
                    const std::vector<std::size_t>& labels,
                    double temperature = 1.0);

struct GradNorms {
  std::vector<double> per_layer;  // sqrt(|dW_l|^2 + |db_l|^2)
  double total = 0.0;
};

/// L2 norms of the plain cross-entropy gradient (T=1, no regularizers) for a
/// single sample.
GradNorms grad_norms(const Mlp& model, std::span<const double> x,
                     std::size_t label);

// ---------------------------------------------------------------------------
// Model file I/O ("dmp-model v1", text, 17 significant digits)
// ---------------------------------------------------------------------------

void save_model(const Mlp& model, std::ostream& out);
void save_model(const Mlp& model, const std::string& path);
Mlp load_model(std::istream& in);
Mlp load_model(const std::string& path);

}  // namespace dmp
