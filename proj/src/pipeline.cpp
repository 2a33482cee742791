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

#include "dmp/pipeline.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <string>

#include "dmp/errors.hpp"

namespace dmp {

void DmpConfig::validate() const {
  if (teacher_temperature <= 0.0 || student_temperature <= 0.0) {
    throw InvalidInput("temperatures must be > 0");
  }
  if (student_train.loss != LossKind::kKlDivergence) {
    throw InvalidInput("student training must use kl_divergence loss");
  }
  if (selection.mode == RefSelection::kEntropyBucket) {
    if (selection.n_buckets == 0) throw InvalidInput("n_buckets must be >= 1");
    if (selection.bucket_index >= selection.n_buckets) {
      throw InvalidInput("bucket index " +
                         std::to_string(selection.bucket_index) +
                         " out of range for " +
                         std::to_string(selection.n_buckets) + " buckets");
    }
  } else if (selection.mode == RefSelection::kLowestEntropy) {
    if (ref_size == 0) throw InvalidInput("ref_size must be >= 1");
  }
  teacher_train.validate();
  student_train.validate();
}

Mlp train_unprotected(const Dataset& d_tr, const std::vector<LayerSpec>& arch,
                      const TrainConfig& cfg) {
  if (d_tr.size() == 0) throw InvalidInput("d_tr is empty");
  if (cfg.loss != LossKind::kCrossEntropy) {
    throw InvalidInput("pre-distillation training uses cross_entropy loss");
  }
  Mlp init = Mlp::random(arch, cfg.seed);
  return train(init, d_tr.features, d_tr.labels, cfg).model;
}

double prediction_entropy(const Mlp& model, std::span<const double> x,
                          double temperature) {
  if (temperature <= 0.0) throw InvalidInput("temperature must be > 0");
  const std::vector<double> logits = forward(model, x);
  return entropy(softmax_t(logits, temperature));
}

ReferenceSelection select_reference(const Matrix& pool, const Mlp& teacher,
                                    const DmpConfig& cfg) {
  if (pool.rows() == 0) throw InvalidInput("reference pool is empty");
  if (cfg.selection.mode == RefSelection::kLowestEntropy &&
      cfg.ref_size > pool.rows()) {
    throw InvalidInput("ref_size exceeds pool size");
  }
  if (cfg.selection.mode == RefSelection::kEntropyBucket &&
      cfg.selection.bucket_index >= cfg.selection.n_buckets) {
    throw InvalidInput("bucket index out of range");
  }

  ReferenceSelection result;
  result.pool_entropies.resize(pool.rows());
  for (std::size_t i = 0; i < pool.rows(); ++i) {
    result.pool_entropies[i] =
        prediction_entropy(teacher, pool.row_span(i), cfg.teacher_temperature);
  }

  if (cfg.selection.mode == RefSelection::kAll) {
    result.selected_indices.resize(pool.rows());
    std::iota(result.selected_indices.begin(), result.selected_indices.end(), 0);
  } else {
    // Ascending entropy; equal entropies keep ascending pool order so the
    // argmin is single-valued and runs reproduce.
    std::vector<std::size_t> order(pool.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return result.pool_entropies[a] < result.pool_entropies[b];
                     });
    if (cfg.selection.mode == RefSelection::kLowestEntropy) {
      result.selected_indices.assign(order.begin(),
                                     order.begin() + cfg.ref_size);
    } else {
      const std::size_t k = cfg.selection.n_buckets;
      const std::size_t b = cfg.selection.bucket_index;
      const std::size_t begin = pool.rows() * b / k;
      const std::size_t end = pool.rows() * (b + 1) / k;
      result.selected_indices.assign(order.begin() + begin, order.begin() + end);
    }
  }

  result.selected = Matrix(result.selected_indices.size(), pool.cols());
  for (std::size_t i = 0; i < result.selected_indices.size(); ++i) {
    std::memcpy(result.selected.row(i), pool.row(result.selected_indices[i]),
                pool.cols() * sizeof(double));
  }
  return result;
}

SoftLabelSet make_soft_labels(const Mlp& teacher, const Matrix& x_ref,
                              double temperature) {
  if (temperature <= 0.0) throw InvalidInput("temperature must be > 0");
  SoftLabelSet set;
  set.teacher_temperature = temperature;
  set.inputs = x_ref;
  set.soft_labels = Matrix(x_ref.rows(), teacher.output_dim());
  for (std::size_t i = 0; i < x_ref.rows(); ++i) {
    const std::vector<double> probs =
        softmax_t(forward(teacher, x_ref.row_span(i)), temperature);
    std::memcpy(set.soft_labels.row(i), probs.data(),
                probs.size() * sizeof(double));
  }
  return set;
}

Mlp distill(const std::vector<LayerSpec>& student_arch,
            const SoftLabelSet& softlabels, const DmpConfig& cfg) {
  if (student_arch.empty()) throw InvalidInput("student architecture is empty");
  if (softlabels.size() == 0) throw InvalidInput("soft-label set is empty");
  if (student_arch.back().output_dim != softlabels.soft_labels.cols()) {
    throw InvalidInput("student output dim does not match soft-label width");
  }
  if (student_arch.front().input_dim != softlabels.inputs.cols()) {
    throw InvalidInput("student input dim does not match reference features");
  }
  if (cfg.student_train.loss != LossKind::kKlDivergence) {
    throw InvalidInput("student training must use kl_divergence loss");
  }
  Mlp init = Mlp::random(student_arch, cfg.student_train.seed);
  return train_soft(init, softlabels.inputs, softlabels.soft_labels,
                    cfg.student_temperature, cfg.student_train)
      .model;
}

namespace {

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string(stage) + ": " + e.what());
  } catch (const TrainingDiverged& e) {
    throw TrainingDiverged(std::string(stage) + ": " + e.what(), e.epoch());
  }
}

}  // namespace

PipelineResult run_pipeline(const Dataset& d_tr, const Matrix& pool,
                            const Dataset& d_test,
                            const std::vector<LayerSpec>& teacher_arch,
                            const std::vector<LayerSpec>& student_arch,
                            const DmpConfig& cfg) {
  cfg.validate();
  if (pool.cols() != d_tr.n_features()) {
    throw InvalidInput("pool feature width does not match d_tr");
  }

  PipelineResult result;
  result.theta_up = run_stage("pre-distillation", [&] {
    return train_unprotected(d_tr, teacher_arch, cfg.teacher_train);
  });

  ReferenceSelection selection = run_stage("reference-selection", [&] {
    return select_reference(pool, result.theta_up, cfg);
  });
  result.ref_indices = std::move(selection.selected_indices);
  result.pool_entropies = std::move(selection.pool_entropies);

  result.soft_labels = run_stage("soft-labels", [&] {
    return make_soft_labels(result.theta_up, selection.selected,
                            cfg.teacher_temperature);
  });

  result.theta_p = run_stage("post-distillation", [&] {
    return distill(student_arch, result.soft_labels, cfg);
  });

  const EvalResult up_train = evaluate(result.theta_up, d_tr.features, d_tr.labels);
  const EvalResult up_test = evaluate(result.theta_up, d_test.features, d_test.labels);
  const EvalResult p_train = evaluate(result.theta_p, d_tr.features, d_tr.labels);
  const EvalResult p_test = evaluate(result.theta_p, d_test.features, d_test.labels);
  result.report.add("no_defense", "a_train", up_train.accuracy);
  result.report.add("no_defense", "a_test", up_test.accuracy);
  result.report.add("no_defense", "e_gen", up_train.accuracy - up_test.accuracy);
  result.report.add("dmp", "a_train", p_train.accuracy);
  result.report.add("dmp", "a_test", p_test.accuracy);
  result.report.add("dmp", "e_gen", p_train.accuracy - p_test.accuracy);

  double mean_entropy = 0.0;
  for (std::size_t idx : result.ref_indices) {
    mean_entropy += result.pool_entropies[idx];
  }
  if (!result.ref_indices.empty()) {
    mean_entropy /= static_cast<double>(result.ref_indices.size());
  }
  result.report.add("dmp", "mean_ref_entropy", mean_entropy);
  return result;
}

}  // namespace dmp
