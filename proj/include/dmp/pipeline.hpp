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

#include <span>
#include <vector>

#include "dmp/data.hpp"
#include "dmp/nncore.hpp"
#include "dmp/report.hpp"

namespace dmp {

// Three-phase defense: train a teacher on the private data, pick reference
// inputs the teacher is confident about, and train the released model only on
// the teacher's soft labels over those inputs. The released model never sees
// the private data; its only coupling is through predictions on non-members.

enum class RefSelection { kLowestEntropy, kEntropyBucket, kAll };

struct SelectionSpec {
  RefSelection mode = RefSelection::kLowestEntropy;
  std::size_t bucket_index = 0;  // entropy-bucket mode only
  std::size_t n_buckets = 1;
};

struct DmpConfig {
  double teacher_temperature = 1.0;
  double student_temperature = 1.0;
  std::size_t ref_size = 0;
  SelectionSpec selection;
  TrainConfig teacher_train;
  TrainConfig student_train;  // loss must be kKlDivergence

  void validate() const;
};

/// Pre-distillation phase: plain cross-entropy training on the private data.
Mlp train_unprotected(const Dataset& d_tr, const std::vector<LayerSpec>& arch,
                      const TrainConfig& cfg);

/// Shannon entropy of the model's temperature-scaled prediction on x.
double prediction_entropy(const Mlp& model, std::span<const double> x,
                          double temperature);

struct ReferenceSelection {
  Matrix selected;
  std::vector<std::size_t> selected_indices;  // into the pool
  std::vector<double> pool_entropies;         // one per pool row
};

/// Picks reference rows by teacher prediction entropy at teacher_temperature.
/// lowest_entropy returns the ref_size lowest-entropy rows (ties broken by
/// ascending pool index); entropy_bucket sorts ascending and returns the
/// bucket_index-th of n_buckets contiguous slices; all returns the pool as-is.
ReferenceSelection select_reference(const Matrix& pool, const Mlp& teacher,
                                    const DmpConfig& cfg);

SoftLabelSet make_soft_labels(const Mlp& teacher, const Matrix& x_ref,
                              double temperature);

/// Post-distillation phase: trains a fresh student on soft labels alone. The
/// private data cannot flow in here; there is no parameter for it.
Mlp distill(const std::vector<LayerSpec>& student_arch,
            const SoftLabelSet& softlabels, const DmpConfig& cfg);

struct PipelineResult {
  Mlp theta_up;
  Mlp theta_p;
  SoftLabelSet soft_labels;
  std::vector<std::size_t> ref_indices;
  std::vector<double> pool_entropies;
  ExperimentReport report;  // a_train/a_test/e_gen for both models
};

PipelineResult run_pipeline(const Dataset& d_tr, const Matrix& pool,
                            const Dataset& d_test,
                            const std::vector<LayerSpec>& teacher_arch,
                            const std::vector<LayerSpec>& student_arch,
                            const DmpConfig& cfg);

}  // namespace dmp
