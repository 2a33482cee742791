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

#include "dmp/nncore.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "dmp/errors.hpp"
#include "dmp/rng.hpp"
#include "textio.hpp"

namespace dmp {

namespace {

// Stream tags for deriving independent RNG streams from a training seed.
constexpr std::uint64_t kShuffleStream = 0xA1;
constexpr std::uint64_t kDropoutStream = 0xA2;

double floored_log(double p) { return std::log(std::max(p, kProbFloor)); }

bool is_finite(double v) { return std::isfinite(v); }

void check_model_input(const Mlp& model, std::span<const double> x) {
  if (model.layers.empty()) throw InvalidInput("model has no layers");
  if (x.size() != model.input_dim()) {
    throw InvalidInput("input length " + std::to_string(x.size()) +
                       " does not match model input dim " +
                       std::to_string(model.input_dim()));
  }
}

void check_mask(const Mlp& model, const DropoutMask& mask) {
  const std::size_t n_hidden = model.layers.size() - 1;
  if (mask.size() != n_hidden) {
    throw InvalidInput("dropout mask has " + std::to_string(mask.size()) +
                       " layers, model has " + std::to_string(n_hidden) +
                       " hidden layers");
  }
  for (std::size_t l = 0; l < n_hidden; ++l) {
    if (mask[l].size() != model.layers[l].output_dim) {
      throw InvalidInput("dropout mask width mismatch at layer " +
                         std::to_string(l));
    }
  }
}

// Activations of every layer for a whole batch. activations[0] is the input;
// activations[l+1] is the (masked) output of layer l.
struct ForwardCache {
  std::vector<Matrix> activations;
};

ForwardCache batch_forward(const Mlp& model, const Matrix& inputs,
                           const BatchMasks* masks, double dropout_rate) {
  const std::size_t b = inputs.rows();
  ForwardCache cache;
  cache.activations.reserve(model.layers.size() + 1);
  cache.activations.push_back(inputs);
  const double keep_scale =
      dropout_rate > 0.0 ? 1.0 / (1.0 - dropout_rate) : 1.0;

  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerSpec& spec = model.layers[l];
    const Matrix& prev = cache.activations.back();
    const Matrix& w = model.weights[l];
    const std::vector<double>& bias = model.biases[l];
    Matrix out(b, spec.output_dim);
    for (std::size_t i = 0; i < b; ++i) {
      const double* in_row = prev.row(i);
      double* out_row = out.row(i);
      for (std::size_t o = 0; o < spec.output_dim; ++o) {
        out_row[o] = bias[o] + dot(in_row, w.row(o), spec.input_dim);
      }
      if (spec.activation == Activation::kRelu) {
        for (std::size_t o = 0; o < spec.output_dim; ++o) {
          if (out_row[o] < 0.0) out_row[o] = 0.0;
        }
      }
      const bool hidden = l + 1 < model.layers.size();
      if (hidden && masks != nullptr) {
        const Matrix& m = (*masks)[l];
        for (std::size_t o = 0; o < spec.output_dim; ++o) {
          out_row[o] *= m(i, o) * keep_scale;
        }
      }
    }
    cache.activations.push_back(std::move(out));
  }
  return cache;
}

// dLoss/dlogits for one row, not yet divided by the batch size.
void loss_delta_row(std::span<const double> logits, const Batch& batch,
                    const TrainConfig& config, std::size_t row, double* delta,
                    double* loss_out) {
  const std::size_t c = logits.size();
  if (config.loss == LossKind::kCrossEntropy) {
    std::vector<double> p = softmax_t(logits, 1.0);
    const std::size_t label = batch.labels[row];
    *loss_out = cross_entropy(p, label, config.label_smoothing,
                              config.confidence_penalty);
    const double s = config.label_smoothing;
    const double beta = config.confidence_penalty;
    double h = beta > 0.0 ? entropy(p) : 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double q = (j == label ? 1.0 - s : 0.0) + s / static_cast<double>(c);
      delta[j] = p[j] - q;
      if (beta > 0.0) delta[j] += beta * p[j] * (floored_log(p[j]) + h);
    }
  } else {
    std::vector<double> p = softmax_t(logits, batch.temperature);
    std::span<const double> target = batch.soft_targets.row_span(row);
    *loss_out = kl_loss(target, p);
    const double inv_t = 1.0 / batch.temperature;
    for (std::size_t j = 0; j < c; ++j) {
      delta[j] = (p[j] - target[j]) * inv_t;
    }
  }
}

void check_batch(const Mlp& model, const Batch& batch,
                 const TrainConfig& config) {
  if (batch.inputs.rows() == 0) throw InvalidInput("empty batch");
  if (batch.inputs.cols() != model.input_dim()) {
    throw InvalidInput("batch input dim mismatch");
  }
  const bool has_labels = !batch.labels.empty();
  const bool has_soft = !batch.soft_targets.empty();
  if (config.loss == LossKind::kCrossEntropy) {
    if (!has_labels || has_soft) {
      throw InvalidInput("cross-entropy training requires class-index targets");
    }
    if (batch.labels.size() != batch.inputs.rows()) {
      throw InvalidInput("label count does not match batch size");
    }
    for (std::size_t y : batch.labels) {
      if (y >= model.output_dim()) throw InvalidInput("label out of range");
    }
  } else {
    if (!has_soft || has_labels) {
      throw InvalidInput("kl-divergence training requires soft-label targets");
    }
    if (batch.soft_targets.rows() != batch.inputs.rows() ||
        batch.soft_targets.cols() != model.output_dim()) {
      throw InvalidInput("soft target shape mismatch");
    }
    if (batch.temperature <= 0.0) throw InvalidInput("temperature must be > 0");
  }
}

struct AdamState {
  std::vector<Matrix> mw, vw;
  std::vector<std::vector<double>> mb, vb;
  std::size_t t = 0;

  explicit AdamState(const Mlp& model) {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      mw.emplace_back(model.weights[l].rows(), model.weights[l].cols());
      vw.emplace_back(model.weights[l].rows(), model.weights[l].cols());
      mb.emplace_back(model.biases[l].size(), 0.0);
      vb.emplace_back(model.biases[l].size(), 0.0);
    }
  }
};

void adam_update(std::vector<double>& w, const std::vector<double>& g,
                 std::vector<double>& m, std::vector<double>& v,
                 const TrainConfig& cfg, double bc1, double bc2) {
  const double b1 = cfg.adam.beta1, b2 = cfg.adam.beta2;
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    w[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam.eps);
  }
}

void sgd_update(std::vector<double>& w, const std::vector<double>& g,
                double lr) {
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
}

void apply_step(Mlp& model, const Gradients& grads, const TrainConfig& cfg,
                AdamState& adam) {
  if (cfg.optimizer == Optimizer::kAdam) {
    ++adam.t;
    const double bc1 = 1.0 - std::pow(cfg.adam.beta1, static_cast<double>(adam.t));
    const double bc2 = 1.0 - std::pow(cfg.adam.beta2, static_cast<double>(adam.t));
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      adam_update(model.weights[l].data(), grads.weights[l].data(),
                  adam.mw[l].data(), adam.vw[l].data(), cfg, bc1, bc2);
      adam_update(model.biases[l], grads.biases[l], adam.mb[l], adam.vb[l],
                  cfg, bc1, bc2);
    }
  } else {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      sgd_update(model.weights[l].data(), grads.weights[l].data(),
                 cfg.learning_rate);
      sgd_update(model.biases[l], grads.biases[l], cfg.learning_rate);
    }
  }
}

BatchMasks sample_masks(const Mlp& model, std::size_t batch_size,
                        double dropout_rate, Rng& rng) {
  BatchMasks masks;
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
    Matrix m(batch_size, model.layers[l].output_dim);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t o = 0; o < m.cols(); ++o) {
        m(i, o) = rng.bernoulli(dropout_rate) ? 0.0 : 1.0;
      }
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

TrainResult train_impl(const Mlp& start, const Matrix& inputs,
                       const std::vector<std::size_t>* labels,
                       const Matrix* soft_targets, double temperature,
                       const TrainConfig& config) {
  config.validate();
  start.validate();
  const std::size_t n = inputs.rows();
  if (n == 0) throw InvalidInput("training data is empty");
  if (inputs.cols() != start.input_dim()) {
    throw InvalidInput("training data dim does not match model input dim");
  }
  if (config.loss == LossKind::kKlDivergence) {
    // Soft targets must be per-row distributions.
    for (std::size_t i = 0; i < soft_targets->rows(); ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < soft_targets->cols(); ++j) {
        sum += (*soft_targets)(i, j);
      }
      if (std::abs(sum - 1.0) > 1e-6) {
        throw InvalidInput("soft target row " + std::to_string(i) +
                           " does not sum to 1");
      }
    }
  }

  TrainResult result;
  result.model = start;
  AdamState adam(result.model);
  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));
  Rng dropout_rng(derive_seed(config.seed, kDropoutStream));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t c = start.output_dim();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t bsize = std::min(config.batch_size, n - begin);
      Batch batch;
      batch.inputs = Matrix(bsize, inputs.cols());
      batch.temperature = temperature;
      if (labels != nullptr) batch.labels.resize(bsize);
      if (soft_targets != nullptr) batch.soft_targets = Matrix(bsize, c);
      for (std::size_t i = 0; i < bsize; ++i) {
        const std::size_t src = order[begin + i];
        std::memcpy(batch.inputs.row(i), inputs.row(src),
                    inputs.cols() * sizeof(double));
        if (labels != nullptr) batch.labels[i] = (*labels)[src];
        if (soft_targets != nullptr) {
          std::memcpy(batch.soft_targets.row(i), soft_targets->row(src),
                      c * sizeof(double));
        }
      }
      BatchMasks masks;
      const bool use_dropout = config.dropout_rate > 0.0;
      if (use_dropout) {
        masks = sample_masks(result.model, bsize, config.dropout_rate,
                             dropout_rng);
      }
      Gradients grads = backward(result.model, batch, config,
                                 use_dropout ? &masks : nullptr);
      if (!is_finite(grads.mean_loss)) {
        throw TrainingDiverged("non-finite training loss", epoch + 1);
      }
      loss_sum += grads.mean_loss * static_cast<double>(bsize);
      apply_step(result.model, grads, config, adam);
    }
    result.epoch_losses.push_back(loss_sum / static_cast<double>(n));
  }
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------
// Model description
// ---------------------------------------------------------------------------

std::vector<LayerSpec> fully_connected(std::size_t input_dim,
                                       const std::vector<std::size_t>& hidden,
                                       std::size_t n_classes) {
  std::vector<LayerSpec> arch;
  std::size_t in = input_dim;
  for (std::size_t width : hidden) {
    arch.push_back({in, width, Activation::kRelu});
    in = width;
  }
  arch.push_back({in, n_classes, Activation::kIdentity});
  return arch;
}

Mlp Mlp::random(const std::vector<LayerSpec>& arch, std::uint64_t seed) {
  Mlp model;
  model.layers = arch;
  Rng rng(seed);
  for (const LayerSpec& spec : arch) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.input_dim));
    Matrix w(spec.output_dim, spec.input_dim);
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    std::vector<double> b(spec.output_dim);
    for (double& v : b) v = rng.uniform(-bound, bound);
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  model.validate();
  return model;
}

std::size_t Mlp::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    count += weights[l].rows() * weights[l].cols() + biases[l].size();
  }
  return count;
}

void Mlp::validate() const {
  if (layers.empty()) throw InvalidInput("model has no layers");
  if (layers.size() != weights.size() || layers.size() != biases.size()) {
    throw InvalidInput("layer spec and parameter counts disagree");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSpec& spec = layers[l];
    if (spec.input_dim == 0 || spec.output_dim == 0) {
      throw InvalidInput("layer " + std::to_string(l) + " has zero dimension");
    }
    if (l + 1 < layers.size() &&
        spec.output_dim != layers[l + 1].input_dim) {
      throw InvalidInput("layers " + std::to_string(l) + " and " +
                         std::to_string(l + 1) + " are incompatible");
    }
    if (weights[l].rows() != spec.output_dim ||
        weights[l].cols() != spec.input_dim ||
        biases[l].size() != spec.output_dim) {
      throw InvalidInput("parameter shape mismatch at layer " +
                         std::to_string(l));
    }
    for (double v : weights[l].data()) {
      if (!is_finite(v)) throw InvalidInput("non-finite weight");
    }
    for (double v : biases[l]) {
      if (!is_finite(v)) throw InvalidInput("non-finite bias");
    }
  }
  if (layers.back().activation != Activation::kIdentity) {
    throw InvalidInput("final layer must have identity activation");
  }
}

bool Mlp::operator==(const Mlp& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].input_dim != other.layers[l].input_dim ||
        layers[l].output_dim != other.layers[l].output_dim ||
        layers[l].activation != other.layers[l].activation) {
      return false;
    }
  }
  return weights == other.weights && biases == other.biases;
}

void TrainConfig::validate() const {
  if (epochs > 0 && batch_size == 0) throw InvalidInput("batch_size must be >= 1");
  if (learning_rate <= 0.0) throw InvalidInput("learning_rate must be > 0");
  if (weight_decay < 0.0) throw InvalidInput("weight_decay must be >= 0");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw InvalidInput("dropout_rate must be in [0,1)");
  }
  if (label_smoothing < 0.0 || label_smoothing >= 1.0) {
    throw InvalidInput("label_smoothing must be in [0,1)");
  }
  if (confidence_penalty < 0.0) {
    throw InvalidInput("confidence_penalty must be >= 0");
  }
}

// ---------------------------------------------------------------------------
// Forward pass, losses
// ---------------------------------------------------------------------------

std::vector<double> forward(const Mlp& model, std::span<const double> x,
                            const DropoutMask* mask, double dropout_rate) {
  check_model_input(model, x);
  if (mask != nullptr) check_mask(model, *mask);
  const double keep_scale =
      dropout_rate > 0.0 ? 1.0 / (1.0 - dropout_rate) : 1.0;

  std::vector<double> a(x.begin(), x.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerSpec& spec = model.layers[l];
    const Matrix& w = model.weights[l];
    next.assign(spec.output_dim, 0.0);
    for (std::size_t o = 0; o < spec.output_dim; ++o) {
      next[o] = model.biases[l][o] + dot(a.data(), w.row(o), spec.input_dim);
      if (spec.activation == Activation::kRelu && next[o] < 0.0) next[o] = 0.0;
    }
    if (l + 1 < model.layers.size() && mask != nullptr) {
      for (std::size_t o = 0; o < spec.output_dim; ++o) {
        next[o] *= (*mask)[l][o] * keep_scale;
      }
    }
    a.swap(next);
  }
  return a;
}

Prediction predict(const Mlp& model, std::span<const double> x,
                   double temperature) {
  Prediction pred;
  pred.logits = forward(model, x);
  pred.probs = softmax_t(pred.logits, temperature);
  pred.temperature = temperature;
  return pred;
}

std::vector<double> softmax_t(std::span<const double> logits,
                              double temperature) {
  if (temperature <= 0.0) throw InvalidInput("temperature must be > 0");
  if (logits.empty()) throw InvalidInput("empty logits");
  std::vector<double> out(logits.size());
  double max_z = -std::numeric_limits<double>::infinity();
  for (double z : logits) max_z = std::max(max_z, z / temperature);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] / temperature - max_z);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * floored_log(p);
  }
  return h;
}

double cross_entropy(std::span<const double> probs, std::size_t label,
                     double label_smoothing, double confidence_penalty) {
  if (label >= probs.size()) throw InvalidInput("label out of range");
  const double s = label_smoothing;
  const std::size_t c = probs.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    const double q = (i == label ? 1.0 - s : 0.0) + s / static_cast<double>(c);
    if (q > 0.0) loss -= q * floored_log(probs[i]);
  }
  if (confidence_penalty > 0.0) loss -= confidence_penalty * entropy(probs);
  return loss;
}

double kl_loss(std::span<const double> target,
               std::span<const double> student_probs) {
  if (target.size() != student_probs.size()) {
    throw InvalidInput("kl_loss length mismatch");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] > 0.0) {
      loss += target[i] * (floored_log(target[i]) - floored_log(student_probs[i]));
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Gradients and training
// ---------------------------------------------------------------------------

Gradients backward(const Mlp& model, const Batch& batch,
                   const TrainConfig& config, const BatchMasks* masks) {
  check_batch(model, batch, config);
  const std::size_t b = batch.inputs.rows();
  const std::size_t n_layers = model.layers.size();
  ForwardCache cache =
      batch_forward(model, batch.inputs, masks, config.dropout_rate);

  Gradients grads;
  grads.weights.reserve(n_layers);
  grads.biases.reserve(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    grads.weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
    grads.biases.emplace_back(model.biases[l].size(), 0.0);
  }

  // delta = dLoss/dlogits, scaled by 1/b so gradients are of the mean loss.
  const Matrix& logits = cache.activations.back();
  Matrix delta(b, model.output_dim());
  double loss_sum = 0.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    double row_loss = 0.0;
    loss_delta_row(logits.row_span(i), batch, config, i, delta.row(i),
                   &row_loss);
    loss_sum += row_loss;
    for (std::size_t j = 0; j < delta.cols(); ++j) delta(i, j) *= inv_b;
  }
  grads.mean_loss = loss_sum * inv_b;

  const double keep_scale =
      config.dropout_rate > 0.0 ? 1.0 / (1.0 - config.dropout_rate) : 1.0;

  for (std::size_t l = n_layers; l-- > 0;) {
    const Matrix& a_prev = cache.activations[l];
    Matrix& dw = grads.weights[l];
    std::vector<double>& db = grads.biases[l];
    const std::size_t out_dim = model.layers[l].output_dim;
    const std::size_t in_dim = model.layers[l].input_dim;
    for (std::size_t i = 0; i < b; ++i) {
      const double* d_row = delta.row(i);
      const double* a_row = a_prev.row(i);
      for (std::size_t o = 0; o < out_dim; ++o) {
        axpy(d_row[o], a_row, dw.row(o), in_dim);
        db[o] += d_row[o];
      }
    }
    if (l > 0) {
      // Propagate to the previous layer's activations, then through its
      // activation function and dropout mask.
      Matrix prev_delta(b, in_dim);
      const Matrix& w = model.weights[l];
      for (std::size_t i = 0; i < b; ++i) {
        const double* d_row = delta.row(i);
        double* pd_row = prev_delta.row(i);
        for (std::size_t o = 0; o < out_dim; ++o) {
          axpy(d_row[o], w.row(o), pd_row, in_dim);
        }
        const double* a_row = a_prev.row(i);
        const bool relu = model.layers[l - 1].activation == Activation::kRelu;
        for (std::size_t k = 0; k < in_dim; ++k) {
          double factor = relu ? (a_row[k] > 0.0 ? 1.0 : 0.0) : 1.0;
          if (masks != nullptr) factor *= (*masks)[l - 1](i, k) * keep_scale;
          pd_row[k] *= factor;
        }
      }
      delta = std::move(prev_delta);
    }
  }

  if (config.weight_decay > 0.0) {
    for (std::size_t l = 0; l < n_layers; ++l) {
      const std::vector<double>& w = model.weights[l].data();
      std::vector<double>& g = grads.weights[l].data();
      for (std::size_t i = 0; i < w.size(); ++i) {
        g[i] += config.weight_decay * w[i];
      }
    }
  }
  return grads;
}

double batch_objective(const Mlp& model, const Batch& batch,
                       const TrainConfig& config, const BatchMasks* masks) {
  check_batch(model, batch, config);
  const std::size_t b = batch.inputs.rows();
  ForwardCache cache =
      batch_forward(model, batch.inputs, masks, config.dropout_rate);
  const Matrix& logits = cache.activations.back();
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    if (config.loss == LossKind::kCrossEntropy) {
      std::vector<double> p = softmax_t(logits.row_span(i), 1.0);
      loss_sum += cross_entropy(p, batch.labels[i], config.label_smoothing,
                                config.confidence_penalty);
    } else {
      std::vector<double> p = softmax_t(logits.row_span(i), batch.temperature);
      loss_sum += kl_loss(batch.soft_targets.row_span(i), p);
    }
  }
  double objective = loss_sum / static_cast<double>(b);
  if (config.weight_decay > 0.0) {
    double sq = 0.0;
    for (const Matrix& w : model.weights) {
      for (double v : w.data()) sq += v * v;
    }
    objective += 0.5 * config.weight_decay * sq;
  }
  return objective;
}

TrainResult train(const Mlp& model, const Matrix& inputs,
                  const std::vector<std::size_t>& labels,
                  const TrainConfig& config) {
  if (config.loss != LossKind::kCrossEntropy) {
    throw InvalidInput("class-index targets require cross_entropy loss");
  }
  if (labels.size() != inputs.rows()) {
    throw InvalidInput("label count does not match input rows");
  }
  for (std::size_t y : labels) {
    if (y >= model.output_dim()) throw InvalidInput("label out of range");
  }
  return train_impl(model, inputs, &labels, nullptr, 1.0, config);
}

TrainResult train_soft(const Mlp& model, const Matrix& inputs,
                       const Matrix& soft_targets, double temperature,
                       const TrainConfig& config) {
  if (config.loss != LossKind::kKlDivergence) {
    throw InvalidInput("soft-label targets require kl_divergence loss");
  }
  if (soft_targets.rows() != inputs.rows()) {
    throw InvalidInput("soft target count does not match input rows");
  }
  if (soft_targets.cols() != model.output_dim()) {
    throw InvalidInput("soft target width does not match model output dim");
  }
  if (temperature <= 0.0) throw InvalidInput("temperature must be > 0");
  return train_impl(model, inputs, nullptr, &soft_targets, temperature, config);
}

EvalResult evaluate(const Mlp& model, const Matrix& inputs,
                    const std::vector<std::size_t>& labels,
                    double temperature) {
  if (inputs.rows() == 0) throw InvalidInput("evaluation data is empty");
  if (labels.size() != inputs.rows()) {
    throw InvalidInput("label count does not match input rows");
  }
  EvalResult result;
  std::size_t correct = 0;
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    std::vector<double> logits = forward(model, inputs.row_span(i));
    std::size_t argmax = 0;
    for (std::size_t j = 1; j < logits.size(); ++j) {
      if (logits[j] > logits[argmax]) argmax = j;
    }
    if (argmax == labels[i]) ++correct;
    std::vector<double> p = softmax_t(logits, temperature);
    loss_sum += cross_entropy(p, labels[i]);
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(inputs.rows());
  result.mean_loss = loss_sum / static_cast<double>(inputs.rows());
  return result;
}

GradNorms grad_norms(const Mlp& model, std::span<const double> x,
                     std::size_t label) {
  Batch batch;
  batch.inputs = Matrix(1, x.size());
  std::memcpy(batch.inputs.row(0), x.data(), x.size() * sizeof(double));
  batch.labels = {label};
  TrainConfig plain;
  plain.loss = LossKind::kCrossEntropy;
  Gradients grads = backward(model, batch, plain);
  GradNorms norms;
  double total_sq = 0.0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    double sq = 0.0;
    for (double v : grads.weights[l].data()) sq += v * v;
    for (double v : grads.biases[l]) sq += v * v;
    norms.per_layer.push_back(std::sqrt(sq));
    total_sq += sq;
  }
  norms.total = std::sqrt(total_sq);
  return norms;
}

// ---------------------------------------------------------------------------
// Model file I/O
// ---------------------------------------------------------------------------

namespace {

const char* activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation activation_from(const std::string& name, std::size_t line) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw ParseError("unknown activation '" + name + "'", line);
}

}  // namespace

void save_model(const Mlp& model, std::ostream& out) {
  model.validate();
  std::string buf;
  buf.reserve(1 << 16);
  buf += "dmp-model v1\n";
  buf += "layers=" + std::to_string(model.layers.size()) + "\n";
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerSpec& spec = model.layers[l];
    buf += "layer " + std::to_string(l) + " " + std::to_string(spec.input_dim) +
           " " + std::to_string(spec.output_dim) + " " +
           activation_name(spec.activation) + "\n";
    for (std::size_t o = 0; o < spec.output_dim; ++o) {
      const double* row = model.weights[l].row(o);
      for (std::size_t i = 0; i < spec.input_dim; ++i) {
        textio::append_double(buf, row[i]);
        buf.push_back(' ');
      }
      textio::append_double(buf, model.biases[l][o]);
      buf.push_back('\n');
    }
    out << buf;
    buf.clear();
  }
}

void save_model(const Mlp& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  save_model(model, out);
}

Mlp load_model(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line)) {
      throw ParseError("unexpected end of model file", line_no);
    }
    ++line_no;
  };

  next_line();
  if (line != "dmp-model v1") throw ParseError("bad model header", line_no);
  next_line();
  if (line.rfind("layers=", 0) != 0) throw ParseError("missing layers= line", line_no);
  const std::size_t n_layers = std::strtoull(line.c_str() + 7, nullptr, 10);
  if (n_layers == 0) throw ParseError("model must have at least one layer", line_no);

  Mlp model;
  for (std::size_t l = 0; l < n_layers; ++l) {
    next_line();
    char act_buf[32] = {0};
    std::size_t idx = 0, in_dim = 0, out_dim = 0;
    if (std::sscanf(line.c_str(), "layer %zu %zu %zu %31s", &idx, &in_dim,
                    &out_dim, act_buf) != 4 ||
        idx != l || in_dim == 0 || out_dim == 0) {
      throw ParseError("bad layer line", line_no);
    }
    LayerSpec spec{in_dim, out_dim, activation_from(act_buf, line_no)};
    Matrix w(out_dim, in_dim);
    std::vector<double> bias(out_dim);
    for (std::size_t o = 0; o < out_dim; ++o) {
      next_line();
      const char* p = line.c_str();
      for (std::size_t i = 0; i < in_dim; ++i) {
        if (!textio::parse_double(&p, &w(o, i))) {
          throw ParseError("weight row too short", line_no);
        }
      }
      if (!textio::parse_double(&p, &bias[o])) {
        throw ParseError("weight row missing bias", line_no);
      }
    }
    model.layers.push_back(spec);
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(bias));
  }
  model.validate();
  return model;
}

Mlp load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  return load_model(in);
}

}  // namespace dmp
