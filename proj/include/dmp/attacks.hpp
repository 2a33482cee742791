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

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmp/data.hpp"
#include "dmp/nncore.hpp"

namespace dmp {

// Membership inference suite. Every attack reports balanced held-out
// accuracy: a constant classifier scores exactly 0.5.

struct AttackInstance {
  std::vector<double> features;
  bool is_member = false;
};

/// Instances plus the feature layout they were built with.
struct AttackSet {
  std::string kind;  // "bl_loss", "nn_probs", "nsh_blackbox", "nsh_whitebox", ...
  std::size_t dim = 0;
  std::vector<AttackInstance> instances;

  void validate() const;
};

/// Binary membership classifier: a threshold rule on a scalar feature
/// (member iff feature < threshold) or a small MLP over the feature vector.
struct AttackModel {
  enum class Kind { kThreshold, kMlp };
  Kind kind = Kind::kThreshold;
  double threshold = 0.0;
  Mlp net;  // 2-class; output index 1 is "member"
  std::string feature_kind;

  /// Membership probability in [0,1] (hard 0/1 for threshold rules).
  double predict_membership(std::span<const double> features) const;
};

struct AttackReport {
  double accuracy = 0.5;
  double gain = 0.0;  // empirical log-likelihood gain, always <= 0
  std::optional<double> threshold_used;
  std::optional<double> accuracy_zero_one;  // 0-1-loss rule variant (BL only)
  std::size_t n_members = 0;
  std::size_t n_nonmembers = 0;
};

/// Empirical gain: mean log h(F) over members plus mean log(1-h(F)) over
/// non-members, with h clamped to [1e-12, 1-1e-12].
double attack_gain(const AttackModel& h,
                   const std::vector<AttackInstance>& members,
                   const std::vector<AttackInstance>& nonmembers);

/// Bounded-loss attack: threshold on the target's per-sample cross-entropy.
/// Tunes on the first halves of the given sets (midpoints of sorted tune
/// losses plus the 0-1-loss rule), reports accuracy on the second halves.
AttackReport bl_attack(const Mlp& target, const Dataset& members,
                       const Dataset& nonmembers);

/// Architecture and training recipe used for shadow and attack models.
struct ShadowRecipe {
  std::vector<LayerSpec> arch;
  TrainConfig train;
};

struct AttackTrainSpec {
  std::size_t hidden = 64;
  TrainConfig train;
};

/// NN-attack feature vector: the model's prediction probabilities sorted
/// descending, which makes the layout invariant to class relabeling.
std::vector<double> sorted_prediction_features(const Mlp& model,
                                               std::span<const double> x);

/// Shadow-model attack: trains a shadow on half of shadow_data with the
/// target's recipe, labels its sorted prediction vectors by shadow
/// membership, fits a binary MLP on them and evaluates against the target.
AttackReport nn_attack(const Mlp& target, const Dataset& shadow_data,
                       const ShadowRecipe& recipe,
                       const Dataset& eval_members,
                       const Dataset& eval_nonmembers,
                       const AttackTrainSpec& attack_spec);

enum class NshMode { kBlackbox, kWhitebox };

/// Blackbox layout: sorted prediction vector (descending), cross-entropy
/// loss, argmax-correctness bit. Whitebox appends per-layer gradient norms
/// and the total norm.
std::vector<double> nsh_features(const Mlp& target, std::span<const double> x,
                                 std::size_t label, NshMode mode);

AttackSet build_nsh_set(const Mlp& target, const Dataset& members,
                        const Dataset& nonmembers, NshMode mode);

/// Learned attack on concatenated features; the adversary knows half of the
/// members plus as many non-members. Known and eval sets must be disjoint.
AttackReport nsh_attack(const Mlp& target, const Dataset& known_members,
                        const Dataset& known_nonmembers,
                        const Dataset& eval_members,
                        const Dataset& eval_nonmembers, NshMode mode,
                        const AttackTrainSpec& attack_spec);

struct RefMiaReport {
  AttackReport bl;
  AttackReport nsh_blackbox;
  AttackReport nsh_whitebox;
};

/// Membership risk to the reference data itself: attacks theta_p treating
/// X_ref (with its validation-only labels) as the member set.
RefMiaReport ref_data_mia(const Mlp& theta_p, const Dataset& x_ref_labeled,
                          const Dataset& nonmember_holdout,
                          const AttackTrainSpec& attack_spec);

struct AdaptiveTraceRow {
  double min_distance = 0.0;        // Hamming distance to nearest ref row
  double nearest_ref_entropy = 0.0; // theta_p entropy on that ref row
  double target_entropy = 0.0;      // theta_p entropy on the target sample
  bool is_member = false;
};

struct AdaptiveResult {
  AttackReport report;
  std::vector<AdaptiveTraceRow> trace;
};

/// Distance-based adaptive attack: scores each target sample by Hamming
/// distance to its nearest reference row, threshold tuned like bl_attack.
/// Requires binary features.
AdaptiveResult adaptive_distance_attack(const Mlp& theta_p, const Matrix& x_ref,
                                        const Dataset& eval_members,
                                        const Dataset& eval_nonmembers);

// Serialization: "dmp-attackset v1 kind=<k> dim=<d>" + is_member,f1,...,fd
void save_attack_set(const AttackSet& set, std::ostream& out);
void save_attack_set(const AttackSet& set, const std::string& path);
AttackSet load_attack_set(std::istream& in);
AttackSet load_attack_set(const std::string& path);

}  // namespace dmp
