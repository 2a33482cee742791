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

#include <optional>
#include <span>
#include <vector>

#include "dmp/data.hpp"
#include "dmp/nncore.hpp"
#include "dmp/stats.hpp"

namespace dmp {

// Numerical validation of the defense's theory: how much one training sample
// can shift the released model's training signal, measured exactly by
// retraining and approximately by an influence function.

/// Two models trained with identical seed and recipe on training sets that
/// differ in exactly one sample.
struct NeighborPair {
  Dataset d_tr;
  std::optional<std::size_t> removed_index;
  Mlp theta_up;        // trained on d_tr
  Mlp theta_up_minus;  // trained on d_tr minus the removed sample
};

/// Trains both halves of a NeighborPair. With removed_index empty nothing is
/// removed and the two models come out bitwise identical.
NeighborPair retrain_oracle(const Dataset& d_tr,
                            std::optional<std::size_t> removed_index,
                            const std::vector<LayerSpec>& arch,
                            const TrainConfig& recipe);

/// Per-reference-sample differences between the two neighboring teachers.
struct RatioTrace {
  std::vector<double> delta_kl;   // |KL(t||s) - KL(t'||s)|
  std::vector<double> delta_ce;   // |CE(up) - CE(up')| using validation labels
  std::vector<double> entropy;    // H(theta_up(x))
  std::vector<double> approx_influence;  // filled by InfluenceSolver users
};

struct RatioBound {
  RatioTrace trace;
  double bound = 0.0;       // (1/T) * sum |summand|  -- the triangle bound
  double signed_sum = 0.0;  // -(1/T) * sum of signed summands
};

/// Posterior-ratio bound over a labeled reference set. The KL summands
/// compare the two teachers' soft labels against theta_p's prediction;
/// `temperature` enters only as the 1/T prefactor, so halving/doubling it
/// scales both sums exactly.
RatioBound ratio_bound(const NeighborPair& pair, const Mlp& theta_p,
                       const Dataset& x_ref, double temperature);

/// Assembles the damped mean training-loss Hessian once (finite differences
/// of analytic gradients, step 1e-4) and answers gradient-Hessian-gradient
/// influence queries. Requires parameter count <= 5000.
class InfluenceSolver {
 public:
  InfluenceSolver(const Mlp& theta, const Dataset& d_tr, double damping);

  /// |grad L(probe) . (H + damping I)^{-1} . grad L(removed)|
  double influence(std::span<const double> x_removed, std::size_t y_removed,
                   std::span<const double> x_probe, std::size_t y_probe) const;

  double max_asymmetry() const { return max_asymmetry_; }

  static constexpr std::size_t kMaxParameters = 5000;

 private:
  Mlp theta_;
  Matrix chol_;  // lower-triangular Cholesky factor of H + damping I
  double max_asymmetry_ = 0.0;
};

/// One-shot convenience wrapper around InfluenceSolver.
double influence_approx(const Mlp& theta_up, const Dataset& d_tr,
                        std::span<const double> x_removed, std::size_t y_removed,
                        std::span<const double> x_probe, std::size_t y_probe,
                        double damping);

struct CorrelationReport {
  double pearson_dkl_dce = 0.0;
  double spearman_entropy_dkl = 0.0;
};

/// Pearson(delta_kl, delta_ce) and Spearman(entropy, delta_kl). Throws
/// NumericalError on zero-variance columns, InvalidInput below 3 rows.
CorrelationReport correlation_report(const RatioTrace& trace);

struct DistributionReport {
  Histogram grad_norm_hist;
  Histogram loss_hist;
  std::vector<double> per_class_egen;
  double global_egen = 0.0;
  double member_median_norm = 0.0;
  double nonmember_median_norm = 0.0;
};

/// Member/non-member gradient-norm and loss histograms plus the per-class
/// generalization-error profile.
DistributionReport distribution_report(const Mlp& model, const Dataset& members,
                                       const Dataset& nonmembers);

}  // namespace dmp
