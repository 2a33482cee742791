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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "dmp/errors.hpp"
#include "dmp/nncore.hpp"
#include "dmp/rng.hpp"
#include "test_util.hpp"

using namespace dmp;
using dmp::testing::fd_gradient;
using dmp::testing::flatten_gradients;
using dmp::testing::rel_err;

namespace {

Mlp single_layer(std::size_t in, std::size_t out) {
  Mlp m;
  m.layers = {{in, out, Activation::kIdentity}};
  m.weights = {Matrix(out, in)};
  m.biases = {std::vector<double>(out, 0.0)};
  return m;
}

}  // namespace

TEST_CASE("forward: identity network maps input to itself") {
  Mlp m = single_layer(2, 2);
  m.weights[0](0, 0) = 1.0;
  m.weights[0](1, 1) = 1.0;
  const std::vector<double> x = {1.0, 2.0};
  const std::vector<double> logits = forward(m, x);
  CHECK(logits[0] == 1.0);
  CHECK(logits[1] == 2.0);
}

TEST_CASE("forward: zero weights return the bias") {
  Mlp m = single_layer(3, 2);
  m.biases[0] = {3.0, -1.0};
  const std::vector<double> x = {0.5, -2.0, 7.0};
  const std::vector<double> logits = forward(m, x);
  CHECK(logits[0] == 3.0);
  CHECK(logits[1] == -1.0);
}

TEST_CASE("forward: matches an independent straight-line reimplementation") {
  Rng rng(42);
  const Mlp m = Mlp::random(fully_connected(5, {7}, 3), 42);
  // Copy parameters into the oracle's own nested representation.
  std::vector<std::vector<std::vector<double>>> weights;
  std::vector<std::vector<double>> biases;
  std::vector<bool> relu;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    std::vector<std::vector<double>> layer;
    for (std::size_t o = 0; o < m.layers[l].output_dim; ++o) {
      layer.emplace_back(m.weights[l].row(o),
                         m.weights[l].row(o) + m.layers[l].input_dim);
    }
    weights.push_back(layer);
    biases.push_back(m.biases[l]);
    relu.push_back(m.layers[l].activation == Activation::kRelu);
  }
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(5);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    const std::vector<double> got = forward(m, x);
    const std::vector<double> want =
        dmp::testing::straight_line_forward(weights, biases, relu, x);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(rel_err(got[i], want[i]) < 1e-12);
    }
  }
}

TEST_CASE("forward: dimension mismatch is invalid input") {
  const Mlp m = Mlp::random(fully_connected(4, {}, 2), 1);
  const std::vector<double> x = {1.0, 2.0};
  CHECK_THROWS_AS((void)forward(m, x), InvalidInput);
}

TEST_CASE("softmax_t: symmetry, high-T limit, scalar identity") {
  const std::vector<double> zeros = {0.0, 0.0, 0.0};
  for (double p : softmax_t(zeros, 1.0)) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));

  const std::vector<double> wide = {10.0, 0.0};
  for (double p : softmax_t(wide, 1e6)) CHECK(std::abs(p - 0.5) < 1e-5);

  const std::vector<double> two = {2.0, 0.0};
  const std::vector<double> one = {1.0, 0.0};
  const std::vector<double> a = softmax_t(two, 2.0);
  const std::vector<double> b = softmax_t(one, 1.0);
  const double e = std::exp(1.0);
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-15));
  CHECK(a[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-14));
}

TEST_CASE("softmax_t: sums to one and preserves the argmax for any T") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(12);
    std::vector<double> z(n);
    for (double& v : z) v = rng.uniform(-30.0, 30.0);
    const double t = std::exp(rng.uniform(-3.0, 5.0));
    const std::vector<double> p = softmax_t(z, t);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    std::size_t argmax_z = 0, argmax_p = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (z[i] > z[argmax_z]) argmax_z = i;
      if (p[i] > p[argmax_p]) argmax_p = i;
    }
    CHECK(argmax_z == argmax_p);
  }
}

TEST_CASE("softmax_t: non-positive temperature is invalid") {
  const std::vector<double> z = {1.0, 2.0};
  CHECK_THROWS_AS((void)softmax_t(z, 0.0), InvalidInput);
  CHECK_THROWS_AS((void)softmax_t(z, -1.0), InvalidInput);
}

TEST_CASE("cross_entropy: one-hot, uniform, smoothed oracle") {
  const std::vector<double> onehot = {1.0, 0.0, 0.0};
  CHECK(cross_entropy(onehot, 0) <= 1e-11);

  const std::vector<double> uniform(5, 0.2);
  CHECK(cross_entropy(uniform, 3) == doctest::Approx(std::log(5.0)).epsilon(1e-12));

  // Brute-force formula oracle for smoothing.
  const std::vector<double> half = {0.5, 0.5};
  const double s = 0.2;
  const double q0 = (1.0 - s) + s / 2.0, q1 = s / 2.0;
  const double want = -(q0 * std::log(0.5) + q1 * std::log(0.5));
  CHECK(cross_entropy(half, 0, s) == doctest::Approx(want).epsilon(1e-14));

  CHECK_THROWS_AS((void)cross_entropy(half, 2), InvalidInput);
}

TEST_CASE("cross_entropy: confidence penalty subtracts the entropy") {
  const std::vector<double> p = {0.7, 0.2, 0.1};
  const double base = cross_entropy(p, 0);
  const double with_penalty = cross_entropy(p, 0, 0.0, 0.5);
  CHECK(with_penalty == doctest::Approx(base - 0.5 * entropy(p)).epsilon(1e-14));
}

TEST_CASE("kl_loss: identity, closed form, summation oracle") {
  const std::vector<double> p = {0.3, 0.5, 0.2};
  CHECK(kl_loss(p, p) <= 1e-11);
  CHECK(kl_loss(p, p) >= -1e-9);

  const std::vector<double> hard = {1.0, 0.0};
  const std::vector<double> half = {0.5, 0.5};
  CHECK(kl_loss(hard, half) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  Rng rng(11);
  std::vector<double> t(100), q(100);
  double ts = 0.0, qs = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    t[i] = rng.uniform(1e-6, 1.0);
    q[i] = rng.uniform(1e-6, 1.0);
    ts += t[i];
    qs += q[i];
  }
  for (std::size_t i = 0; i < 100; ++i) {
    t[i] /= ts;
    q[i] /= qs;
  }
  // Independent summation oracle.
  double want = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    if (t[i] > 0.0) want += t[i] * std::log(t[i] / std::max(q[i], 1e-12));
  }
  CHECK(std::abs(kl_loss(t, q) - want) < 1e-12);
  CHECK(kl_loss(t, q) >= -1e-9);

  const std::vector<double> shorter = {1.0};
  CHECK_THROWS_AS((void)kl_loss(hard, shorter), InvalidInput);
}

TEST_CASE("backward: zero-weight single layer matches finite differences") {
  Mlp m = single_layer(3, 4);
  Batch batch;
  batch.inputs = Matrix(1, 3);
  batch.inputs(0, 0) = 0.4;
  batch.inputs(0, 1) = -1.2;
  batch.inputs(0, 2) = 2.0;
  batch.labels = {2};
  TrainConfig cfg;
  const Gradients grads = backward(m, batch, cfg);
  const std::vector<double> analytic = flatten_gradients(grads);
  const std::vector<double> fd =
      fd_gradient(m, [&] { return batch_objective(m, batch, cfg); });
  REQUIRE(analytic.size() == fd.size());
  for (std::size_t i = 0; i < fd.size(); ++i) {
    CHECK(rel_err(analytic[i], fd[i]) < 1e-6);
  }
}

TEST_CASE("backward: weight decay isolates when the data gradient is zero") {
  // A KL target equal to the model's own prediction zeroes the data term.
  Mlp m = Mlp::random(fully_connected(3, {}, 2), 5);
  Batch batch;
  batch.inputs = Matrix(1, 3);
  batch.inputs(0, 0) = 1.0;
  batch.inputs(0, 1) = -0.5;
  batch.inputs(0, 2) = 0.25;
  batch.temperature = 1.0;
  const Prediction pred = predict(m, batch.inputs.row_span(0), 1.0);
  batch.soft_targets = Matrix(1, 2);
  batch.soft_targets(0, 0) = pred.probs[0];
  batch.soft_targets(0, 1) = pred.probs[1];
  TrainConfig cfg;
  cfg.loss = LossKind::kKlDivergence;
  cfg.weight_decay = 0.1;
  const Gradients grads = backward(m, batch, cfg);
  for (std::size_t o = 0; o < 2; ++o) {
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(grads.weights[0](o, i) ==
            doctest::Approx(0.1 * m.weights[0](o, i)).epsilon(1e-12));
    }
    CHECK(std::abs(grads.biases[0][o]) < 1e-15);
  }
}

TEST_CASE("backward: an all-ones dropout mask is a no-op") {
  const Mlp m = Mlp::random(fully_connected(4, {6}, 3), 9);
  Batch batch;
  batch.inputs = Matrix(2, 4);
  Rng rng(3);
  for (double& v : batch.inputs.data()) v = rng.uniform(-1.0, 1.0);
  batch.labels = {0, 2};
  TrainConfig plain;
  const Gradients no_mask = backward(m, batch, plain);
  BatchMasks ones = {Matrix(2, 6, 1.0)};
  const Gradients with_mask = backward(m, batch, plain, &ones);
  const std::vector<double> a = flatten_gradients(no_mask);
  const std::vector<double> b = flatten_gradients(with_mask);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("backward: target kind must match the configured loss") {
  const Mlp m = Mlp::random(fully_connected(2, {}, 2), 1);
  Batch batch;
  batch.inputs = Matrix(1, 2, 0.5);
  batch.labels = {0};
  TrainConfig cfg;
  cfg.loss = LossKind::kKlDivergence;
  CHECK_THROWS_AS((void)backward(m, batch, cfg), InvalidInput);
}

TEST_CASE("gradient check: 100 random configurations at rel error < 1e-4") {
  Rng rng(2024);
  for (int check = 0; check < 100; ++check) {
    const std::size_t in = 2 + rng.below(6);
    const std::size_t out = 2 + rng.below(5);
    Mlp m = dmp::testing::random_small_mlp(rng, in, out);

    const std::size_t b = 1 + rng.below(3);
    Batch batch;
    batch.inputs = Matrix(b, in);
    for (double& v : batch.inputs.data()) v = rng.uniform(-1.5, 1.5);

    TrainConfig cfg;
    const bool use_kl = rng.bernoulli(0.4);
    if (use_kl) {
      cfg.loss = LossKind::kKlDivergence;
      batch.temperature = 0.5 + rng.uniform01() * 4.0;
      batch.soft_targets = Matrix(b, out);
      for (std::size_t i = 0; i < b; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < out; ++j) {
          batch.soft_targets(i, j) = 0.05 + rng.uniform01();
          sum += batch.soft_targets(i, j);
        }
        for (std::size_t j = 0; j < out; ++j) batch.soft_targets(i, j) /= sum;
      }
    } else {
      batch.labels.resize(b);
      for (std::size_t i = 0; i < b; ++i) batch.labels[i] = rng.below(out);
      if (rng.bernoulli(0.3)) cfg.label_smoothing = 0.1 + rng.uniform01() * 0.3;
      if (rng.bernoulli(0.3)) cfg.confidence_penalty = rng.uniform01();
    }
    if (rng.bernoulli(0.4)) cfg.weight_decay = rng.uniform01() * 0.2;

    BatchMasks masks;
    const BatchMasks* mask_ptr = nullptr;
    if (m.layers.size() > 1 && rng.bernoulli(0.3)) {
      cfg.dropout_rate = 0.25;
      for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
        Matrix mask(b, m.layers[l].output_dim);
        for (double& v : mask.data()) v = rng.bernoulli(0.25) ? 0.0 : 1.0;
        masks.push_back(std::move(mask));
      }
      mask_ptr = &masks;
    }

    const Gradients grads = backward(m, batch, cfg, mask_ptr);
    const std::vector<double> analytic = flatten_gradients(grads);
    const std::vector<double> fd = fd_gradient(
        m, [&] { return batch_objective(m, batch, cfg, mask_ptr); });
    REQUIRE(analytic.size() == fd.size());
    for (std::size_t i = 0; i < fd.size(); ++i) {
      CHECK(rel_err(analytic[i], fd[i]) < 1e-4);
    }
  }
}

TEST_CASE("train: a linearly separable toy set reaches training accuracy 1") {
  // Two well-separated clusters in 2 features.
  Matrix x(20, 2);
  std::vector<std::size_t> y(20);
  Rng rng(13);
  for (std::size_t i = 0; i < 20; ++i) {
    const bool pos = i % 2 == 0;
    x(i, 0) = (pos ? 2.0 : -2.0) + rng.uniform(-0.5, 0.5);
    x(i, 1) = (pos ? -1.5 : 1.5) + rng.uniform(-0.5, 0.5);
    y[i] = pos ? 1 : 0;
  }
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 4;
  cfg.seed = 99;
  const Mlp init = Mlp::random(fully_connected(2, {8}, 2), 99);
  const TrainResult result = train(init, x, y, cfg);
  CHECK(evaluate(result.model, x, y).accuracy == 1.0);
  CHECK(result.epoch_losses.back() <= result.epoch_losses.front());
}

TEST_CASE("train: zero epochs returns the input model unchanged") {
  const Mlp init = Mlp::random(fully_connected(3, {4}, 2), 21);
  Matrix x(2, 3, 0.5);
  std::vector<std::size_t> y = {0, 1};
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult result = train(init, x, y, cfg);
  CHECK(result.model == init);
}

TEST_CASE("train: identical seeds give bitwise-identical weight files") {
  Matrix x(40, 6);
  std::vector<std::size_t> y(40);
  Rng rng(5);
  for (double& v : x.data()) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
  for (std::size_t i = 0; i < 40; ++i) y[i] = i % 4;
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 1234;
  cfg.dropout_rate = 0.2;
  const Mlp init = Mlp::random(fully_connected(6, {8}, 4), 777);
  const TrainResult a = train(init, x, y, cfg);
  const TrainResult b = train(init, x, y, cfg);
  std::ostringstream file_a, file_b;
  save_model(a.model, file_a);
  save_model(b.model, file_b);
  CHECK(file_a.str() == file_b.str());
  CHECK(a.model == b.model);
}

TEST_CASE("train: exploding learning rate raises TrainingDiverged") {
  Matrix x(16, 4);
  std::vector<std::size_t> y(16);
  Rng rng(8);
  for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < 16; ++i) y[i] = i % 3;
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1e18;
  cfg.optimizer = Optimizer::kSgd;
  cfg.seed = 3;
  const Mlp init = Mlp::random(fully_connected(4, {8}, 3), 3);
  CHECK_THROWS_AS((void)train(init, x, y, cfg), TrainingDiverged);
  try {
    (void)train(init, x, y, cfg);
  } catch (const TrainingDiverged& e) {
    CHECK(e.epoch() >= 1);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("evaluate: constant predictions and temperature invariance") {
  Mlp m = single_layer(2, 2);
  m.biases[0] = {5.0, 0.0};  // always predicts class 0
  Matrix x(10, 2, 0.0);
  std::vector<std::size_t> all_zero(10, 0);
  CHECK(evaluate(m, x, all_zero).accuracy == 1.0);

  std::vector<std::size_t> balanced(10);
  for (std::size_t i = 0; i < 10; ++i) balanced[i] = i % 2;
  CHECK(evaluate(m, x, balanced).accuracy == 0.5);

  const Mlp trained = Mlp::random(fully_connected(2, {5}, 3), 6);
  Matrix xr(30, 2);
  std::vector<std::size_t> yr(30);
  Rng rng(10);
  for (double& v : xr.data()) v = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < 30; ++i) yr[i] = i % 3;
  CHECK(evaluate(trained, xr, yr, 1.0).accuracy ==
        evaluate(trained, xr, yr, 10.0).accuracy);
}

TEST_CASE("grad_norms: confident correct prediction has vanishing norm") {
  Mlp m = single_layer(2, 2);
  m.biases[0] = {40.0, 0.0};  // prob of class 0 ~ 1 - 4e-18
  const std::vector<double> x = {0.0, 0.0};
  const GradNorms norms = grad_norms(m, x, 0);
  CHECK(norms.total <= 1e-6);
  for (double n : norms.per_layer) CHECK(n >= 0.0);
}

TEST_CASE("grad_norms: matches finite differences and is per-sample") {
  Rng rng(31);
  Mlp m = Mlp::random(fully_connected(4, {5}, 3), 31);
  std::vector<double> x(4);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  const std::size_t label = 1;

  const GradNorms norms = grad_norms(m, x, label);
  Batch batch;
  batch.inputs = Matrix(1, 4);
  for (std::size_t i = 0; i < 4; ++i) batch.inputs(0, i) = x[i];
  batch.labels = {label};
  TrainConfig plain;
  const std::vector<double> fd =
      fd_gradient(m, [&] { return batch_objective(m, batch, plain); });
  double fd_total = 0.0;
  for (double g : fd) fd_total += g * g;
  fd_total = std::sqrt(fd_total);
  CHECK(rel_err(norms.total, fd_total) < 1e-4);

  // Duplicating the sample in a batch leaves the mean gradient unchanged.
  Batch doubled;
  doubled.inputs = Matrix(2, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    doubled.inputs(0, i) = x[i];
    doubled.inputs(1, i) = x[i];
  }
  doubled.labels = {label, label};
  const Gradients g2 = backward(m, doubled, plain);
  double doubled_total = 0.0;
  for (double g : flatten_gradients(g2)) doubled_total += g * g;
  CHECK(rel_err(norms.total, std::sqrt(doubled_total)) < 1e-12);
}

TEST_CASE("model io: save/load round trip is bitwise exact") {
  const Mlp m = Mlp::random(fully_connected(5, {7, 3}, 4), 2718);
  std::ostringstream out;
  save_model(m, out);
  std::istringstream in(out.str());
  const Mlp loaded = load_model(in);
  CHECK(loaded == m);

  std::ostringstream out2;
  save_model(loaded, out2);
  CHECK(out.str() == out2.str());
}

TEST_CASE("model io: truncated file names the failing line") {
  const Mlp m = Mlp::random(fully_connected(3, {4}, 2), 55);
  std::ostringstream out;
  save_model(m, out);
  std::string text = out.str();
  text.resize(text.size() / 2);
  // Cut at a line boundary so the error is about truncation, not a bad row.
  text.resize(text.rfind('\n') + 1);
  std::istringstream in(text);
  CHECK_THROWS_AS((void)load_model(in), ParseError);
  try {
    std::istringstream again(text);
    (void)load_model(again);
  } catch (const ParseError& e) {
    CHECK(e.line() > 0);
  }
}

TEST_CASE("mlp: invariant violations are rejected") {
  Mlp bad = Mlp::random(fully_connected(3, {4}, 2), 1);
  bad.weights[0](0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(bad.validate(), InvalidInput);

  Mlp mismatched = Mlp::random(fully_connected(3, {4}, 2), 1);
  mismatched.layers[0].output_dim = 5;
  CHECK_THROWS_AS(mismatched.validate(), InvalidInput);
}
