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

#include "dmp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "dmp/errors.hpp"

namespace dmp {

NeighborPair retrain_oracle(const Dataset& d_tr,
                            std::optional<std::size_t> removed_index,
                            const std::vector<LayerSpec>& arch,
                            const TrainConfig& recipe) {
  if (d_tr.size() < 2) throw InvalidInput("d_tr must have at least 2 samples");
  if (removed_index && *removed_index >= d_tr.size()) {
    throw InvalidInput("removed_index out of range");
  }

  NeighborPair pair;
  pair.d_tr = d_tr;
  pair.removed_index = removed_index;

  const Mlp init = Mlp::random(arch, recipe.seed);
  pair.theta_up = train(init, d_tr.features, d_tr.labels, recipe).model;

  if (!removed_index) {
    pair.theta_up_minus = pair.theta_up;
    return pair;
  }
  std::vector<std::size_t> keep;
  keep.reserve(d_tr.size() - 1);
  for (std::size_t i = 0; i < d_tr.size(); ++i) {
    if (i != *removed_index) keep.push_back(i);
  }
  const Dataset reduced = d_tr.subset(keep);
  pair.theta_up_minus =
      train(init, reduced.features, reduced.labels, recipe).model;
  return pair;
}

RatioBound ratio_bound(const NeighborPair& pair, const Mlp& theta_p,
                       const Dataset& x_ref, double temperature) {
  if (temperature <= 0.0) throw InvalidInput("temperature must be > 0");
  if (x_ref.size() == 0) throw InvalidInput("x_ref is empty");

  RatioBound result;
  double abs_sum = 0.0;
  double signed_sum = 0.0;
  for (std::size_t i = 0; i < x_ref.size(); ++i) {
    const std::span<const double> x = x_ref.features.row_span(i);
    const std::vector<double> t = predict(pair.theta_up, x, 1.0).probs;
    const std::vector<double> t_minus = predict(pair.theta_up_minus, x, 1.0).probs;
    const std::vector<double> s = predict(theta_p, x, 1.0).probs;

    const double summand = kl_loss(t, s) - kl_loss(t_minus, s);
    abs_sum += std::abs(summand);
    signed_sum += summand;

    const double ce = cross_entropy(t, x_ref.labels[i]);
    const double ce_minus = cross_entropy(t_minus, x_ref.labels[i]);

    result.trace.delta_kl.push_back(std::abs(summand));
    result.trace.delta_ce.push_back(std::abs(ce - ce_minus));
    result.trace.entropy.push_back(entropy(t));
  }
  result.bound = abs_sum / temperature;
  result.signed_sum = -signed_sum / temperature;
  return result;
}

// ---------------------------------------------------------------------------
// Influence approximation
// ---------------------------------------------------------------------------

namespace {

std::vector<double> flatten(const Mlp& model) {
  std::vector<double> flat;
  flat.reserve(model.parameter_count());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const std::vector<double>& w = model.weights[l].data();
    flat.insert(flat.end(), w.begin(), w.end());
    flat.insert(flat.end(), model.biases[l].begin(), model.biases[l].end());
  }
  return flat;
}

void unflatten(std::span<const double> flat, Mlp& model) {
  std::size_t pos = 0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    std::vector<double>& w = model.weights[l].data();
    std::copy(flat.begin() + pos, flat.begin() + pos + w.size(), w.begin());
    pos += w.size();
    std::vector<double>& b = model.biases[l];
    std::copy(flat.begin() + pos, flat.begin() + pos + b.size(), b.begin());
    pos += b.size();
  }
}

std::vector<double> flatten_grads(const Gradients& grads) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    const std::vector<double>& w = grads.weights[l].data();
    flat.insert(flat.end(), w.begin(), w.end());
    flat.insert(flat.end(), grads.biases[l].begin(), grads.biases[l].end());
  }
  return flat;
}

// Mean plain cross-entropy gradient over the dataset, flattened.
std::vector<double> mean_gradient(const Mlp& model, const Dataset& data) {
  Batch batch;
  batch.inputs = data.features;
  batch.labels = data.labels;
  TrainConfig plain;
  return flatten_grads(backward(model, batch, plain));
}

std::vector<double> sample_gradient(const Mlp& model,
                                    std::span<const double> x, std::size_t y) {
  Batch batch;
  batch.inputs = Matrix(1, x.size());
  std::memcpy(batch.inputs.row(0), x.data(), x.size() * sizeof(double));
  batch.labels = {y};
  TrainConfig plain;
  return flatten_grads(backward(model, batch, plain));
}

// In-place lower Cholesky; returns the index of the failing pivot, or npos.
std::size_t cholesky(Matrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j) - dot(a.row(i), a.row(j), j);
      if (i == j) {
        if (s <= 0.0) return i;
        a(i, i) = std::sqrt(s);
      } else {
        a(i, j) = s / a(j, j);
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = 0.0;
  }
  return static_cast<std::size_t>(-1);
}

std::vector<double> cholesky_solve(const Matrix& l, std::span<const double> b) {
  const std::size_t n = l.rows();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = (b[i] - dot(l.row(i), y.data(), i)) / l(i, i);
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
  return x;
}

}  // namespace

InfluenceSolver::InfluenceSolver(const Mlp& theta, const Dataset& d_tr,
                                 double damping)
    : theta_(theta) {
  if (damping <= 0.0) throw InvalidInput("damping must be > 0");
  const std::size_t p = theta.parameter_count();
  if (p > kMaxParameters) {
    throw InvalidInput(
        "model has " + std::to_string(p) + " parameters; the explicit-Hessian "
        "influence path supports at most " + std::to_string(kMaxParameters) +
        " -- shrink the model");
  }
  if (d_tr.size() == 0) throw InvalidInput("d_tr is empty");

  // Hessian columns by central differences of the analytic mean gradient.
  const double step = 1e-4;
  std::vector<double> params = flatten(theta_);
  Mlp probe = theta_;
  Matrix h(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    const double saved = params[j];
    params[j] = saved + step;
    unflatten(params, probe);
    const std::vector<double> g_plus = mean_gradient(probe, d_tr);
    params[j] = saved - step;
    unflatten(params, probe);
    const std::vector<double> g_minus = mean_gradient(probe, d_tr);
    params[j] = saved;
    for (std::size_t i = 0; i < p; ++i) {
      h(i, j) = (g_plus[i] - g_minus[i]) / (2.0 * step);
    }
  }
  unflatten(params, probe);

  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      max_asymmetry_ = std::max(max_asymmetry_, std::abs(h(i, j) - h(j, i)));
      const double sym = 0.5 * (h(i, j) + h(j, i));
      h(i, j) = sym;
      h(j, i) = sym;
    }
    h(i, i) += damping;
  }

  const std::size_t bad = cholesky(h);
  if (bad != static_cast<std::size_t>(-1)) {
    // Gershgorin lower bound as the reported minimum-eigenvalue estimate.
    double min_est = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      double off = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        if (j != i) off += std::abs(h(i, j));
      }
      min_est = std::min(min_est, h(i, i) - off);
    }
    throw NumericalError(
        "Hessian not positive definite after damping (failed at pivot " +
        std::to_string(bad) + ", min eigenvalue estimate " +
        std::to_string(min_est) + ")");
  }
  chol_ = std::move(h);
}

double InfluenceSolver::influence(std::span<const double> x_removed,
                                  std::size_t y_removed,
                                  std::span<const double> x_probe,
                                  std::size_t y_probe) const {
  const std::vector<double> g_removed =
      sample_gradient(theta_, x_removed, y_removed);
  const std::vector<double> g_probe = sample_gradient(theta_, x_probe, y_probe);
  const std::vector<double> u = cholesky_solve(chol_, g_removed);
  return std::abs(dot(g_probe.data(), u.data(), u.size()));
}

double influence_approx(const Mlp& theta_up, const Dataset& d_tr,
                        std::span<const double> x_removed, std::size_t y_removed,
                        std::span<const double> x_probe, std::size_t y_probe,
                        double damping) {
  InfluenceSolver solver(theta_up, d_tr, damping);
  return solver.influence(x_removed, y_removed, x_probe, y_probe);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

CorrelationReport correlation_report(const RatioTrace& trace) {
  if (trace.delta_kl.size() < 3) {
    throw InvalidInput("trace must have at least 3 rows");
  }
  if (trace.delta_kl.size() != trace.delta_ce.size() ||
      trace.delta_kl.size() != trace.entropy.size()) {
    throw InvalidInput("trace columns have different lengths");
  }
  CorrelationReport report;
  report.pearson_dkl_dce = pearson(trace.delta_kl, trace.delta_ce);
  report.spearman_entropy_dkl = spearman(trace.entropy, trace.delta_kl);
  return report;
}

DistributionReport distribution_report(const Mlp& model, const Dataset& members,
                                       const Dataset& nonmembers) {
  if (members.size() == 0 || nonmembers.size() == 0) {
    throw InvalidInput("distribution_report needs nonempty sets");
  }

  auto collect = [&](const Dataset& data, std::vector<double>& norms,
                     std::vector<double>& losses) {
    norms.resize(data.size());
    losses.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      norms[i] = grad_norms(model, data.features.row_span(i), data.labels[i]).total;
      const Prediction pred = predict(model, data.features.row_span(i), 1.0);
      losses[i] = cross_entropy(pred.probs, data.labels[i]);
    }
  };
  std::vector<double> m_norms, m_losses, n_norms, n_losses;
  collect(members, m_norms, m_losses);
  collect(nonmembers, n_norms, n_losses);

  DistributionReport report;
  report.grad_norm_hist = make_histogram(m_norms, n_norms);
  report.loss_hist = make_histogram(m_losses, n_losses);
  report.member_median_norm = median(m_norms);
  report.nonmember_median_norm = median(n_norms);

  const EvalResult m_eval = evaluate(model, members.features, members.labels);
  const EvalResult n_eval = evaluate(model, nonmembers.features, nonmembers.labels);
  report.global_egen = m_eval.accuracy - n_eval.accuracy;

  const std::size_t n_classes = members.n_classes;
  const std::vector<bool> m_correct = [&] {
    std::vector<bool> v(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      const std::vector<double> logits =
          forward(model, members.features.row_span(i));
      std::size_t argmax = 0;
      for (std::size_t j = 1; j < logits.size(); ++j) {
        if (logits[j] > logits[argmax]) argmax = j;
      }
      v[i] = argmax == members.labels[i];
    }
    return v;
  }();
  const std::vector<bool> n_correct = [&] {
    std::vector<bool> v(nonmembers.size());
    for (std::size_t i = 0; i < nonmembers.size(); ++i) {
      const std::vector<double> logits =
          forward(model, nonmembers.features.row_span(i));
      std::size_t argmax = 0;
      for (std::size_t j = 1; j < logits.size(); ++j) {
        if (logits[j] > logits[argmax]) argmax = j;
      }
      v[i] = argmax == nonmembers.labels[i];
    }
    return v;
  }();

  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t m_count = 0, m_hit = 0, n_count = 0, n_hit = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (members.labels[i] == c) {
        ++m_count;
        m_hit += m_correct[i] ? 1 : 0;
      }
    }
    for (std::size_t i = 0; i < nonmembers.size(); ++i) {
      if (nonmembers.labels[i] == c) {
        ++n_count;
        n_hit += n_correct[i] ? 1 : 0;
      }
    }
    if (m_count == 0 || n_count == 0) continue;
    const double gap = static_cast<double>(m_hit) / static_cast<double>(m_count) -
                       static_cast<double>(n_hit) / static_cast<double>(n_count);
    report.per_class_egen.push_back(gap);
  }
  return report;
}

}  // namespace dmp
