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

#include "dmp/attacks.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "dmp/errors.hpp"
#include "textio.hpp"

namespace dmp {

void AttackSet::validate() const {
  for (const AttackInstance& inst : instances) {
    if (inst.features.size() != dim) {
      throw InvalidInput("attack instance dim mismatch in set '" + kind + "'");
    }
  }
}

double AttackModel::predict_membership(std::span<const double> features) const {
  if (kind == Kind::kThreshold) {
    if (features.size() != 1) {
      throw InvalidInput("threshold attacks apply to scalar features only");
    }
    return features[0] < threshold ? 1.0 : 0.0;
  }
  const std::vector<double> probs = predict(net, features, 1.0).probs;
  return probs[1];
}

double attack_gain(const AttackModel& h,
                   const std::vector<AttackInstance>& members,
                   const std::vector<AttackInstance>& nonmembers) {
  if (members.empty() || nonmembers.empty()) {
    throw InvalidInput("attack_gain needs nonempty member and non-member sets");
  }
  const double lo = 1e-12, hi = 1.0 - 1e-12;
  double gain = 0.0;
  for (const AttackInstance& inst : members) {
    const double p = std::clamp(h.predict_membership(inst.features), lo, hi);
    gain += std::log(p) / static_cast<double>(members.size());
  }
  for (const AttackInstance& inst : nonmembers) {
    const double p = std::clamp(h.predict_membership(inst.features), lo, hi);
    gain += std::log(1.0 - p) / static_cast<double>(nonmembers.size());
  }
  return gain;
}

namespace {

// -- threshold tuning --------------------------------------------------------

double accuracy_below(std::span<const double> member_scores,
                      std::span<const double> nonmember_scores,
                      double threshold) {
  std::size_t correct = 0;
  for (double s : member_scores) correct += s < threshold ? 1 : 0;
  for (double s : nonmember_scores) correct += s >= threshold ? 1 : 0;
  return static_cast<double>(correct) /
         static_cast<double>(member_scores.size() + nonmember_scores.size());
}

struct ThresholdFit {
  double threshold = 0.0;
  double tune_accuracy = 0.0;
};

// Sweeps "member iff score < t" over the midpoints of consecutive distinct
// pooled tune scores. Ties go to the lower threshold.
ThresholdFit tune_threshold_below(std::span<const double> member_scores,
                                  std::span<const double> nonmember_scores) {
  std::vector<double> pooled;
  pooled.reserve(member_scores.size() + nonmember_scores.size());
  pooled.insert(pooled.end(), member_scores.begin(), member_scores.end());
  pooled.insert(pooled.end(), nonmember_scores.begin(), nonmember_scores.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  std::vector<double> m_sorted(member_scores.begin(), member_scores.end());
  std::vector<double> n_sorted(nonmember_scores.begin(), nonmember_scores.end());
  std::sort(m_sorted.begin(), m_sorted.end());
  std::sort(n_sorted.begin(), n_sorted.end());
  const double total =
      static_cast<double>(m_sorted.size() + n_sorted.size());

  ThresholdFit best;
  best.threshold = pooled.empty() ? 0.0 : pooled.front();
  best.tune_accuracy = accuracy_below(member_scores, nonmember_scores,
                                      best.threshold);
  for (std::size_t i = 0; i + 1 < pooled.size(); ++i) {
    const double t = 0.5 * (pooled[i] + pooled[i + 1]);
    const auto below_m = static_cast<double>(
        std::lower_bound(m_sorted.begin(), m_sorted.end(), t) - m_sorted.begin());
    const auto below_n = static_cast<double>(
        std::lower_bound(n_sorted.begin(), n_sorted.end(), t) - n_sorted.begin());
    const double acc =
        (below_m + (static_cast<double>(n_sorted.size()) - below_n)) / total;
    if (acc > best.tune_accuracy) {
      best.tune_accuracy = acc;
      best.threshold = t;
    }
  }
  return best;
}

// -- shared helpers ----------------------------------------------------------

std::vector<double> per_sample_losses(const Mlp& target, const Dataset& data) {
  std::vector<double> losses(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Prediction pred = predict(target, data.features.row_span(i), 1.0);
    losses[i] = cross_entropy(pred.probs, data.labels[i]);
  }
  return losses;
}

std::vector<bool> per_sample_correct(const Mlp& target, const Dataset& data) {
  std::vector<bool> correct(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> logits = forward(target, data.features.row_span(i));
    std::size_t argmax = 0;
    for (std::size_t j = 1; j < logits.size(); ++j) {
      if (logits[j] > logits[argmax]) argmax = j;
    }
    correct[i] = argmax == data.labels[i];
  }
  return correct;
}

std::vector<AttackInstance> scalar_instances(std::span<const double> scores,
                                             bool is_member) {
  std::vector<AttackInstance> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = {{scores[i]}, is_member};
  }
  return out;
}

Dataset first_half(const Dataset& d) {
  std::vector<std::size_t> idx(d.size() / 2);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return d.subset(idx);
}

Dataset second_half(const Dataset& d) {
  std::vector<std::size_t> idx(d.size() - d.size() / 2);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = d.size() / 2 + i;
  return d.subset(idx);
}

Dataset first_rows(const Dataset& d, std::size_t k) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  return d.subset(idx);
}

std::uint64_t row_hash(const Dataset& d, std::size_t i) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a over label + feature bits
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(d.labels[i]));
  const double* row = d.features.row(i);
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    std::uint64_t bits;
    std::memcpy(&bits, &row[j], sizeof bits);
    mix(bits);
  }
  return h;
}

void check_disjoint(const Dataset& known, const Dataset& eval,
                    const char* what) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(known.size());
  for (std::size_t i = 0; i < known.size(); ++i) seen.insert(row_hash(known, i));
  for (std::size_t i = 0; i < eval.size(); ++i) {
    if (seen.contains(row_hash(eval, i))) {
      throw InvalidInput(std::string("attack-train and eval sets overlap (") +
                         what + ")");
    }
  }
}

// Trains the binary membership MLP on labeled attack instances.
AttackModel fit_attack_mlp(const AttackSet& set,
                           const AttackTrainSpec& attack_spec) {
  set.validate();
  Matrix inputs(set.instances.size(), set.dim);
  std::vector<std::size_t> labels(set.instances.size());
  for (std::size_t i = 0; i < set.instances.size(); ++i) {
    std::memcpy(inputs.row(i), set.instances[i].features.data(),
                set.dim * sizeof(double));
    labels[i] = set.instances[i].is_member ? 1 : 0;
  }
  const std::vector<LayerSpec> arch =
      fully_connected(set.dim, {attack_spec.hidden}, 2);
  Mlp init = Mlp::random(arch, attack_spec.train.seed);
  AttackModel model;
  model.kind = AttackModel::Kind::kMlp;
  model.net = train(init, inputs, labels, attack_spec.train).model;
  model.feature_kind = set.kind;
  return model;
}

AttackReport evaluate_learned(const AttackModel& model,
                              const std::vector<AttackInstance>& members,
                              const std::vector<AttackInstance>& nonmembers) {
  const std::size_t k = std::min(members.size(), nonmembers.size());
  if (k == 0) throw InvalidInput("empty attack evaluation set");
  std::vector<AttackInstance> m(members.begin(), members.begin() + k);
  std::vector<AttackInstance> n(nonmembers.begin(), nonmembers.begin() + k);
  std::size_t correct = 0;
  for (const AttackInstance& inst : m) {
    correct += model.predict_membership(inst.features) >= 0.5 ? 1 : 0;
  }
  for (const AttackInstance& inst : n) {
    correct += model.predict_membership(inst.features) < 0.5 ? 1 : 0;
  }
  AttackReport report;
  report.accuracy = static_cast<double>(correct) / static_cast<double>(2 * k);
  report.gain = attack_gain(model, m, n);
  report.n_members = k;
  report.n_nonmembers = k;
  return report;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bounded-loss attack
// ---------------------------------------------------------------------------

AttackReport bl_attack(const Mlp& target, const Dataset& members,
                       const Dataset& nonmembers) {
  if (members.size() < 4 || nonmembers.size() < 4) {
    throw InvalidInput("bl_attack needs at least 4 samples per side");
  }
  const std::vector<double> m_loss = per_sample_losses(target, members);
  const std::vector<double> n_loss = per_sample_losses(target, nonmembers);
  const std::vector<bool> m_correct = per_sample_correct(target, members);
  const std::vector<bool> n_correct = per_sample_correct(target, nonmembers);

  const std::size_t m_half = members.size() / 2;
  const std::size_t n_half = nonmembers.size() / 2;
  const std::span<const double> m_tune(m_loss.data(), m_half);
  const std::span<const double> n_tune(n_loss.data(), n_half);

  const ThresholdFit fit = tune_threshold_below(m_tune, n_tune);

  // 0-1-loss rule: member iff the target classifies the sample correctly.
  std::size_t tune_correct = 0;
  for (std::size_t i = 0; i < m_half; ++i) tune_correct += m_correct[i] ? 1 : 0;
  for (std::size_t i = 0; i < n_half; ++i) tune_correct += n_correct[i] ? 0 : 1;
  const double zero_one_tune_acc =
      static_cast<double>(tune_correct) / static_cast<double>(m_half + n_half);

  // Balanced held-out halves.
  const std::size_t k =
      std::min(members.size() - m_half, nonmembers.size() - n_half);
  const std::span<const double> m_eval(m_loss.data() + m_half, k);
  const std::span<const double> n_eval(n_loss.data() + n_half, k);

  std::size_t zo_eval_correct = 0;
  for (std::size_t i = 0; i < k; ++i) {
    zo_eval_correct += m_correct[m_half + i] ? 1 : 0;
    zo_eval_correct += n_correct[n_half + i] ? 0 : 1;
  }
  const double zero_one_eval_acc =
      static_cast<double>(zo_eval_correct) / static_cast<double>(2 * k);

  AttackReport report;
  report.n_members = k;
  report.n_nonmembers = k;
  report.accuracy_zero_one = zero_one_eval_acc;

  AttackModel h;
  h.kind = AttackModel::Kind::kThreshold;
  if (zero_one_tune_acc > fit.tune_accuracy) {
    // Encode the 0-1 rule as a threshold on the incorrectness bit.
    h.threshold = 0.5;
    h.feature_kind = "bl_zero_one";
    std::vector<double> m_bits(k), n_bits(k);
    for (std::size_t i = 0; i < k; ++i) {
      m_bits[i] = m_correct[m_half + i] ? 0.0 : 1.0;
      n_bits[i] = n_correct[n_half + i] ? 0.0 : 1.0;
    }
    report.accuracy = zero_one_eval_acc;
    report.gain = attack_gain(h, scalar_instances(m_bits, true),
                              scalar_instances(n_bits, false));
  } else {
    h.threshold = fit.threshold;
    h.feature_kind = "bl_loss";
    report.threshold_used = fit.threshold;
    report.accuracy = accuracy_below(m_eval, n_eval, fit.threshold);
    report.gain = attack_gain(
        h, scalar_instances(m_eval, true), scalar_instances(n_eval, false));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Shadow-model attack
// ---------------------------------------------------------------------------

std::vector<double> sorted_prediction_features(const Mlp& model,
                                               std::span<const double> x) {
  std::vector<double> probs = predict(model, x, 1.0).probs;
  std::sort(probs.begin(), probs.end(), std::greater<double>());
  return probs;
}

AttackReport nn_attack(const Mlp& target, const Dataset& shadow_data,
                       const ShadowRecipe& recipe,
                       const Dataset& eval_members,
                       const Dataset& eval_nonmembers,
                       const AttackTrainSpec& attack_spec) {
  if (shadow_data.size() < 2 * recipe.train.batch_size) {
    throw InvalidInput("shadow data smaller than two batches");
  }
  const Dataset shadow_in = first_half(shadow_data);
  const Dataset shadow_out = second_half(shadow_data);

  Mlp shadow_init = Mlp::random(recipe.arch, recipe.train.seed);
  const Mlp shadow = train(shadow_init, shadow_in.features, shadow_in.labels,
                           recipe.train)
                         .model;

  AttackSet train_set;
  train_set.kind = "nn_probs";
  train_set.dim = shadow.output_dim();
  const std::size_t per_side = std::min(shadow_in.size(), shadow_out.size());
  for (std::size_t i = 0; i < per_side; ++i) {
    train_set.instances.push_back(
        {sorted_prediction_features(shadow, shadow_in.features.row_span(i)), true});
    train_set.instances.push_back(
        {sorted_prediction_features(shadow, shadow_out.features.row_span(i)), false});
  }
  const AttackModel model = fit_attack_mlp(train_set, attack_spec);

  std::vector<AttackInstance> m_eval, n_eval;
  for (std::size_t i = 0; i < eval_members.size(); ++i) {
    m_eval.push_back(
        {sorted_prediction_features(target, eval_members.features.row_span(i)), true});
  }
  for (std::size_t i = 0; i < eval_nonmembers.size(); ++i) {
    n_eval.push_back(
        {sorted_prediction_features(target, eval_nonmembers.features.row_span(i)), false});
  }
  return evaluate_learned(model, m_eval, n_eval);
}

// ---------------------------------------------------------------------------
// NSH attacks
// ---------------------------------------------------------------------------

std::vector<double> nsh_features(const Mlp& target, std::span<const double> x,
                                 std::size_t label, NshMode mode) {
  const Prediction pred = predict(target, x, 1.0);
  std::vector<double> features = pred.probs;
  std::sort(features.begin(), features.end(), std::greater<double>());
  features.push_back(cross_entropy(pred.probs, label));
  std::size_t argmax = 0;
  for (std::size_t j = 1; j < pred.logits.size(); ++j) {
    if (pred.logits[j] > pred.logits[argmax]) argmax = j;
  }
  features.push_back(argmax == label ? 1.0 : 0.0);
  if (mode == NshMode::kWhitebox) {
    const GradNorms norms = grad_norms(target, x, label);
    features.insert(features.end(), norms.per_layer.begin(),
                    norms.per_layer.end());
    features.push_back(norms.total);
  }
  return features;
}

AttackSet build_nsh_set(const Mlp& target, const Dataset& members,
                        const Dataset& nonmembers, NshMode mode) {
  AttackSet set;
  set.kind = mode == NshMode::kWhitebox ? "nsh_whitebox" : "nsh_blackbox";
  set.dim = target.output_dim() + 2 +
            (mode == NshMode::kWhitebox ? target.layers.size() + 1 : 0);
  for (std::size_t i = 0; i < members.size(); ++i) {
    set.instances.push_back(
        {nsh_features(target, members.features.row_span(i), members.labels[i],
                      mode),
         true});
  }
  for (std::size_t i = 0; i < nonmembers.size(); ++i) {
    set.instances.push_back(
        {nsh_features(target, nonmembers.features.row_span(i),
                      nonmembers.labels[i], mode),
         false});
  }
  set.validate();
  return set;
}

AttackReport nsh_attack(const Mlp& target, const Dataset& known_members,
                        const Dataset& known_nonmembers,
                        const Dataset& eval_members,
                        const Dataset& eval_nonmembers, NshMode mode,
                        const AttackTrainSpec& attack_spec) {
  if (known_members.size() == 0 || known_nonmembers.size() == 0 ||
      eval_members.size() == 0 || eval_nonmembers.size() == 0) {
    throw InvalidInput("nsh_attack needs nonempty known and eval sets");
  }
  check_disjoint(known_members, eval_members, "members");
  check_disjoint(known_nonmembers, eval_nonmembers, "non-members");
  check_disjoint(known_members, eval_nonmembers, "members vs eval non-members");
  check_disjoint(known_nonmembers, eval_members, "non-members vs eval members");

  const AttackSet train_set =
      build_nsh_set(target, known_members, known_nonmembers, mode);
  const AttackModel model = fit_attack_mlp(train_set, attack_spec);

  const AttackSet eval_set =
      build_nsh_set(target, eval_members, eval_nonmembers, mode);
  std::vector<AttackInstance> m_eval, n_eval;
  for (const AttackInstance& inst : eval_set.instances) {
    (inst.is_member ? m_eval : n_eval).push_back(inst);
  }
  return evaluate_learned(model, m_eval, n_eval);
}

// ---------------------------------------------------------------------------
// Reference-data MIA
// ---------------------------------------------------------------------------

RefMiaReport ref_data_mia(const Mlp& theta_p, const Dataset& x_ref_labeled,
                          const Dataset& nonmember_holdout,
                          const AttackTrainSpec& attack_spec) {
  if (nonmember_holdout.size() == 0) {
    throw InvalidInput("non-member holdout is empty");
  }
  if (x_ref_labeled.size() == 0) throw InvalidInput("x_ref is empty");

  RefMiaReport report;
  report.bl = bl_attack(theta_p, x_ref_labeled, nonmember_holdout);

  // Balance the learned attacks' training sides so the fitted membership
  // prior stays at one half.
  const std::size_t per_side =
      std::min(x_ref_labeled.size(), nonmember_holdout.size());
  const Dataset members = first_rows(x_ref_labeled, per_side);
  const Dataset nonmembers = first_rows(nonmember_holdout, per_side);
  const Dataset known_m = first_half(members);
  const Dataset eval_m = second_half(members);
  const Dataset known_n = first_half(nonmembers);
  const Dataset eval_n = second_half(nonmembers);
  report.nsh_blackbox = nsh_attack(theta_p, known_m, known_n, eval_m, eval_n,
                                   NshMode::kBlackbox, attack_spec);
  report.nsh_whitebox = nsh_attack(theta_p, known_m, known_n, eval_m, eval_n,
                                   NshMode::kWhitebox, attack_spec);
  return report;
}

// ---------------------------------------------------------------------------
// Adaptive distance attack
// ---------------------------------------------------------------------------

namespace {

// Bit-packs binary rows for popcount-based Hamming distances.
struct PackedRows {
  std::size_t n_rows = 0;
  std::size_t words_per_row = 0;
  std::vector<std::uint64_t> words;

  const std::uint64_t* row(std::size_t i) const {
    return words.data() + i * words_per_row;
  }
};

PackedRows pack_binary(const Matrix& m) {
  PackedRows packed;
  packed.n_rows = m.rows();
  packed.words_per_row = (m.cols() + 63) / 64;
  packed.words.assign(packed.n_rows * packed.words_per_row, 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row(i);
    std::uint64_t* out = packed.words.data() + i * packed.words_per_row;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (row[j] == 1.0) {
        out[j / 64] |= 1ull << (j % 64);
      } else if (row[j] != 0.0) {
        throw InvalidInput("adaptive distance attack requires binary features");
      }
    }
  }
  return packed;
}

std::size_t hamming(const std::uint64_t* a, const std::uint64_t* b,
                    std::size_t words) {
  std::size_t d = 0;
  for (std::size_t w = 0; w < words; ++w) d += std::popcount(a[w] ^ b[w]);
  return d;
}

}  // namespace

AdaptiveResult adaptive_distance_attack(const Mlp& theta_p, const Matrix& x_ref,
                                        const Dataset& eval_members,
                                        const Dataset& eval_nonmembers) {
  if (x_ref.rows() == 0) throw InvalidInput("x_ref is empty");
  if (eval_members.size() < 4 || eval_nonmembers.size() < 4) {
    throw InvalidInput("adaptive attack needs at least 4 samples per side");
  }
  const PackedRows ref = pack_binary(x_ref);

  // theta_p entropies of the reference rows, computed once.
  std::vector<double> ref_entropy(x_ref.rows());
  for (std::size_t i = 0; i < x_ref.rows(); ++i) {
    ref_entropy[i] = entropy(predict(theta_p, x_ref.row_span(i), 1.0).probs);
  }

  AdaptiveResult result;
  auto score_set = [&](const Dataset& data, bool is_member,
                       std::vector<double>& out_scores) {
    const PackedRows packed = pack_binary(data.features);
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::size_t best = SIZE_MAX, best_idx = 0;
      const std::uint64_t* row = packed.row(i);
      for (std::size_t r = 0; r < ref.n_rows; ++r) {
        const std::size_t d = hamming(row, ref.row(r), ref.words_per_row);
        if (d < best) {
          best = d;
          best_idx = r;
        }
      }
      out_scores.push_back(static_cast<double>(best));
      AdaptiveTraceRow trace_row;
      trace_row.min_distance = static_cast<double>(best);
      trace_row.nearest_ref_entropy = ref_entropy[best_idx];
      trace_row.target_entropy =
          entropy(predict(theta_p, data.features.row_span(i), 1.0).probs);
      trace_row.is_member = is_member;
      result.trace.push_back(trace_row);
    }
  };

  std::vector<double> m_scores, n_scores;
  score_set(eval_members, true, m_scores);
  score_set(eval_nonmembers, false, n_scores);

  const std::size_t m_half = m_scores.size() / 2;
  const std::size_t n_half = n_scores.size() / 2;
  const ThresholdFit fit =
      tune_threshold_below({m_scores.data(), m_half}, {n_scores.data(), n_half});

  const std::size_t k =
      std::min(m_scores.size() - m_half, n_scores.size() - n_half);
  const std::span<const double> m_eval(m_scores.data() + m_half, k);
  const std::span<const double> n_eval(n_scores.data() + n_half, k);

  AttackModel h;
  h.kind = AttackModel::Kind::kThreshold;
  h.threshold = fit.threshold;
  h.feature_kind = "adaptive_distance";

  result.report.accuracy = accuracy_below(m_eval, n_eval, fit.threshold);
  result.report.gain = attack_gain(h, scalar_instances(m_eval, true),
                                   scalar_instances(n_eval, false));
  result.report.threshold_used = fit.threshold;
  result.report.n_members = k;
  result.report.n_nonmembers = k;
  return result;
}

// ---------------------------------------------------------------------------
// Attack set I/O
// ---------------------------------------------------------------------------

void save_attack_set(const AttackSet& set, std::ostream& out) {
  set.validate();
  std::string buf = "dmp-attackset v1 kind=" + set.kind +
                    " dim=" + std::to_string(set.dim) + "\n";
  for (const AttackInstance& inst : set.instances) {
    buf += inst.is_member ? "1" : "0";
    for (double v : inst.features) {
      buf.push_back(',');
      textio::append_double(buf, v);
    }
    buf.push_back('\n');
    if (buf.size() > (1 << 20)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
}

void save_attack_set(const AttackSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  save_attack_set(set, out);
}

AttackSet load_attack_set(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty attack set", line_no);
  ++line_no;
  if (line.rfind("dmp-attackset v1 kind=", 0) != 0) {
    throw ParseError("bad attack-set header", line_no);
  }
  const std::size_t dim_pos = line.find(" dim=");
  if (dim_pos == std::string::npos) throw ParseError("missing dim", line_no);
  AttackSet set;
  set.kind = line.substr(22, dim_pos - 22);
  set.dim = std::strtoull(line.c_str() + dim_pos + 5, nullptr, 10);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    AttackInstance inst;
    const char* p = line.c_str();
    if (*p != '0' && *p != '1') throw ParseError("bad is_member flag", line_no);
    inst.is_member = *p == '1';
    ++p;
    inst.features.resize(set.dim);
    for (std::size_t j = 0; j < set.dim; ++j) {
      if (*p != ',') throw ParseError("expected ','", line_no);
      ++p;
      if (!textio::parse_double(&p, &inst.features[j])) {
        throw ParseError("feature row too short", line_no);
      }
    }
    if (*p != '\0') throw ParseError("trailing characters", line_no);
    set.instances.push_back(std::move(inst));
  }
  return set;
}

AttackSet load_attack_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  return load_attack_set(in);
}

}  // namespace dmp
