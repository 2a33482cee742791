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
#include <string>
#include <vector>

#include "dmp/matrix.hpp"

namespace dmp {

enum class FeatureKind { kBinary, kContinuous };

/// Labeled feature matrix; the unit every split and attack operates on.
struct Dataset {
  Matrix features;                  // n_samples x n_features
  std::vector<std::size_t> labels;  // each < n_classes
  std::size_t n_classes = 0;
  FeatureKind feature_kind = FeatureKind::kBinary;

  std::size_t size() const { return features.rows(); }
  std::size_t n_features() const { return features.cols(); }
  void validate() const;
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

struct SplitSizes {
  std::size_t d_tr = 0;
  std::size_t x_ref_pool = 0;
  std::size_t d_test = 0;
  std::size_t shadow = 0;
  std::size_t attack_members_known = 0;     // drawn from d_tr, at most half
  std::size_t attack_nonmembers_known = 0;  // fresh rows
};

struct SplitPlan {
  std::uint64_t seed = 0;
  SplitSizes sizes;
};

/// Disjoint parts produced by a seeded shuffle. The attacker's known member
/// set is the first half of d_tr (already shuffled); the remaining members
/// form the held-out member evaluation set. d_test doubles as the held-out
/// non-member evaluation set.
struct SplitParts {
  Dataset d_tr, x_ref_pool, d_test, shadow;
  Dataset members_known, members_eval;
  Dataset nonmembers_known;

  const Dataset& nonmembers_eval() const { return d_test; }
};

/// Synthetic Purchase-style task: one random binary centroid per class,
/// round-robin class assignment, per-bit flip noise. Labels are balanced
/// within one sample.
Dataset synth_purchase(std::size_t n_samples, std::size_t n_features,
                       std::size_t n_classes, double cluster_noise,
                       std::uint64_t seed);

SplitParts split(const Dataset& data, const SplitPlan& plan);

/// Unlabeled reference rows synthesized by resampling d_tr with replacement
/// and flipping each bit independently. Stand-in for generative reference
/// data; flip_probability must be in (0, 0.5).
Matrix perturb_synth_ref(const Dataset& d_tr, double flip_probability,
                         std::size_t n_out, std::uint64_t seed);

/// Reference inputs paired with temperature-scaled teacher predictions.
struct SoftLabelSet {
  Matrix inputs;       // n x d
  Matrix soft_labels;  // n x c, rows sum to 1
  double teacher_temperature = 1.0;

  std::size_t size() const { return inputs.rows(); }
  void validate() const;
};

// File formats:
//   dmp-dataset v1 n=<n> d=<d> c=<c> kind=<binary|continuous>
//   label,f1,...,fd
// and
//   dmp-softlabels v1 n=<n> d=<d> c=<c> T=<temp>
//   f1,...,fd|p1,...,pc
void save_dataset(const Dataset& data, std::ostream& out);
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(std::istream& in);
Dataset load_dataset(const std::string& path);

void save_soft_labels(const SoftLabelSet& set, std::ostream& out);
void save_soft_labels(const SoftLabelSet& set, const std::string& path);
SoftLabelSet load_soft_labels(std::istream& in);
SoftLabelSet load_soft_labels(const std::string& path);

}  // namespace dmp
