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

// Batch experiment driver. Every subcommand reads a key=value config, writes
// only declared files under the output directory, and derives all randomness
// from the global seed. Exit codes: 0 success, 1 validation error, 2
// numerical/training error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dmp/analysis.hpp"
#include "dmp/attacks.hpp"
#include "dmp/config.hpp"
#include "dmp/data.hpp"
#include "dmp/errors.hpp"
#include "dmp/pipeline.hpp"
#include "dmp/report.hpp"
#include "dmp/rng.hpp"

namespace fs = std::filesystem;
using namespace dmp;

namespace {

// Artifact names under the output directory.
constexpr const char* kDatasetFile = "dataset.csv";
constexpr const char* kDTrFile = "d_tr.csv";
constexpr const char* kPoolFile = "x_ref_pool.csv";
constexpr const char* kDTestFile = "d_test.csv";
constexpr const char* kShadowFile = "shadow.csv";
constexpr const char* kMembersKnownFile = "members_known.csv";
constexpr const char* kMembersEvalFile = "members_eval.csv";
constexpr const char* kNonmembersKnownFile = "nonmembers_known.csv";
constexpr const char* kTeacherModel = "theta_up.model";
constexpr const char* kStudentModel = "theta_p.model";
constexpr const char* kSoftLabelsFile = "softlabels.csv";
constexpr const char* kXRefSelectedFile = "x_ref_selected.csv";
constexpr const char* kEntropyTraceFile = "entropy_trace.csv";

std::string path_in(const RunConfig& cfg, const char* name) {
  return (fs::path(cfg.out_dir()) / name).string();
}

void ensure_out_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  out << text;
}

std::string format_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Dataset require_dataset(const RunConfig& cfg, const char* name) {
  const std::string path = path_in(cfg, name);
  if (!fs::exists(path)) {
    throw InvalidInput("missing artifact " + path +
                       " (run the producing subcommand first)");
  }
  return load_dataset(path);
}

Mlp require_model(const RunConfig& cfg, const char* name) {
  const std::string path = path_in(cfg, name);
  if (!fs::exists(path)) {
    throw InvalidInput("missing model " + path +
                       " (run the producing subcommand first)");
  }
  return load_model(path);
}

AttackTrainSpec attack_spec(const RunConfig& cfg) {
  AttackTrainSpec spec;
  spec.hidden = cfg.attack_hidden();
  spec.train = cfg.attack_train();
  return spec;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void cmd_synth_data(const RunConfig& cfg) {
  const Dataset data =
      synth_purchase(cfg.n_samples(), cfg.n_features(), cfg.n_classes(),
                     cfg.cluster_noise(), derive_seed(cfg.seed(), kSeedData));
  ensure_out_dir(cfg);
  save_dataset(data, path_in(cfg, kDatasetFile));
  std::cout << "wrote " << path_in(cfg, kDatasetFile) << " (" << data.size()
            << " samples)\n";
}

void cmd_split(const RunConfig& cfg) {
  const Dataset data = require_dataset(cfg, kDatasetFile);
  const SplitParts parts = split(data, cfg.split_plan());
  save_dataset(parts.d_tr, path_in(cfg, kDTrFile));
  save_dataset(parts.x_ref_pool, path_in(cfg, kPoolFile));
  save_dataset(parts.d_test, path_in(cfg, kDTestFile));
  save_dataset(parts.shadow, path_in(cfg, kShadowFile));
  save_dataset(parts.members_known, path_in(cfg, kMembersKnownFile));
  save_dataset(parts.members_eval, path_in(cfg, kMembersEvalFile));
  save_dataset(parts.nonmembers_known, path_in(cfg, kNonmembersKnownFile));
  std::cout << "wrote split parts under " << cfg.out_dir() << "\n";
}

void cmd_train(const RunConfig& cfg) {
  const Dataset d_tr = require_dataset(cfg, kDTrFile);
  const Dataset d_test = require_dataset(cfg, kDTestFile);
  const std::vector<LayerSpec> arch = fully_connected(
      d_tr.n_features(), cfg.teacher_hidden(), d_tr.n_classes);
  const Mlp theta_up = train_unprotected(d_tr, arch, cfg.teacher_train());
  save_model(theta_up, path_in(cfg, kTeacherModel));

  const EvalResult tr = evaluate(theta_up, d_tr.features, d_tr.labels);
  const EvalResult te = evaluate(theta_up, d_test.features, d_test.labels);
  ExperimentReport report;
  report.add("no_defense", "a_train", tr.accuracy);
  report.add("no_defense", "a_test", te.accuracy);
  report.add("no_defense", "e_gen", tr.accuracy - te.accuracy);
  report.write_csv(path_in(cfg, "train_metrics.csv"));
  std::cout << "theta_up: a_train=" << tr.accuracy << " a_test=" << te.accuracy
            << " e_gen=" << tr.accuracy - te.accuracy << "\n";
}

void cmd_distill(const RunConfig& cfg) {
  const Mlp theta_up = require_model(cfg, kTeacherModel);
  const Dataset d_tr = require_dataset(cfg, kDTrFile);
  const Dataset d_test = require_dataset(cfg, kDTestFile);
  const DmpConfig dmp_cfg = cfg.dmp_config();

  Matrix pool;
  Dataset pool_labeled;
  bool have_labels = false;
  if (cfg.ref_source() == "pool") {
    pool_labeled = require_dataset(cfg, kPoolFile);
    pool = pool_labeled.features;
    have_labels = true;
  } else {
    pool = perturb_synth_ref(d_tr, cfg.perturb_flip(), cfg.ref_size(),
                             derive_seed(cfg.seed(), kSeedPerturb));
  }

  const ReferenceSelection selection =
      select_reference(pool, theta_up, dmp_cfg);
  const SoftLabelSet softlabels = make_soft_labels(
      theta_up, selection.selected, dmp_cfg.teacher_temperature);
  const std::vector<LayerSpec> student_arch = fully_connected(
      d_tr.n_features(), cfg.student_hidden(), d_tr.n_classes);
  const Mlp theta_p = distill(student_arch, softlabels, dmp_cfg);

  save_model(theta_p, path_in(cfg, kStudentModel));
  save_soft_labels(softlabels, path_in(cfg, kSoftLabelsFile));
  if (have_labels) {
    save_dataset(pool_labeled.subset(selection.selected_indices),
                 path_in(cfg, kXRefSelectedFile));
  }

  std::string trace = "pool_index,entropy,selected\n";
  std::vector<bool> chosen(pool.rows(), false);
  for (std::size_t idx : selection.selected_indices) chosen[idx] = true;
  for (std::size_t i = 0; i < pool.rows(); ++i) {
    trace += std::to_string(i) + "," + format_num(selection.pool_entropies[i]) +
             "," + (chosen[i] ? "1" : "0") + "\n";
  }
  write_text(path_in(cfg, kEntropyTraceFile), trace);

  const EvalResult tr = evaluate(theta_p, d_tr.features, d_tr.labels);
  const EvalResult te = evaluate(theta_p, d_test.features, d_test.labels);
  double mean_entropy = 0.0;
  for (std::size_t idx : selection.selected_indices) {
    mean_entropy += selection.pool_entropies[idx];
  }
  mean_entropy /= static_cast<double>(selection.selected_indices.size());
  ExperimentReport report;
  report.add("dmp", "a_train", tr.accuracy);
  report.add("dmp", "a_test", te.accuracy);
  report.add("dmp", "e_gen", tr.accuracy - te.accuracy);
  report.add("dmp", "mean_ref_entropy", mean_entropy);
  report.write_csv(path_in(cfg, "distill_metrics.csv"));
  std::cout << "theta_p: a_train=" << tr.accuracy << " a_test=" << te.accuracy
            << " e_gen=" << tr.accuracy - te.accuracy << "\n";
}

void run_attacks_for(const RunConfig& cfg, const std::string& experiment_id,
                     const Mlp& target, const SplitParts& parts,
                     ExperimentReport& report) {
  const AttackReport bl =
      bl_attack(target, parts.members_eval, parts.nonmembers_eval());
  report.add(experiment_id, "a_bl", bl.accuracy);
  report.add(experiment_id, "a_bl_01", *bl.accuracy_zero_one);

  ShadowRecipe recipe;
  recipe.arch = fully_connected(parts.d_tr.n_features(), cfg.teacher_hidden(),
                                parts.d_tr.n_classes);
  recipe.train = cfg.teacher_train();
  recipe.train.seed = derive_seed(cfg.seed(), kSeedShadow);
  const AttackReport nn =
      nn_attack(target, parts.shadow, recipe, parts.members_eval,
                parts.nonmembers_eval(), attack_spec(cfg));
  report.add(experiment_id, "a_nn", nn.accuracy);

  const AttackReport bb = nsh_attack(
      target, parts.members_known, parts.nonmembers_known, parts.members_eval,
      parts.nonmembers_eval(), NshMode::kBlackbox, attack_spec(cfg));
  report.add(experiment_id, "a_bb", bb.accuracy);
  const AttackReport wb = nsh_attack(
      target, parts.members_known, parts.nonmembers_known, parts.members_eval,
      parts.nonmembers_eval(), NshMode::kWhitebox, attack_spec(cfg));
  report.add(experiment_id, "a_wb", wb.accuracy);

  const DistributionReport dist =
      distribution_report(target, parts.members_eval, parts.nonmembers_eval());
  std::ostringstream grad_csv, loss_csv, egen_csv;
  dist.grad_norm_hist.write_csv(grad_csv);
  dist.loss_hist.write_csv(loss_csv);
  egen_csv << "class,e_gen\n";
  for (std::size_t c = 0; c < dist.per_class_egen.size(); ++c) {
    egen_csv << c << "," << format_num(dist.per_class_egen[c]) << "\n";
  }
  write_text(path_in(cfg, ("hist_gradnorm_" + experiment_id + ".csv").c_str()),
             grad_csv.str());
  write_text(path_in(cfg, ("hist_loss_" + experiment_id + ".csv").c_str()),
             loss_csv.str());
  write_text(path_in(cfg, ("egen_per_class_" + experiment_id + ".csv").c_str()),
             egen_csv.str());

  std::cout << experiment_id << ": a_bl=" << bl.accuracy
            << " a_nn=" << nn.accuracy << " a_bb=" << bb.accuracy
            << " a_wb=" << wb.accuracy << "\n";
}

SplitParts load_parts(const RunConfig& cfg) {
  SplitParts parts;
  parts.d_tr = require_dataset(cfg, kDTrFile);
  parts.x_ref_pool = require_dataset(cfg, kPoolFile);
  parts.d_test = require_dataset(cfg, kDTestFile);
  parts.shadow = require_dataset(cfg, kShadowFile);
  parts.members_known = require_dataset(cfg, kMembersKnownFile);
  parts.members_eval = require_dataset(cfg, kMembersEvalFile);
  parts.nonmembers_known = require_dataset(cfg, kNonmembersKnownFile);
  return parts;
}

void cmd_attack(const RunConfig& cfg) {
  const SplitParts parts = load_parts(cfg);
  ExperimentReport report;
  const Mlp theta_up = require_model(cfg, kTeacherModel);
  run_attacks_for(cfg, "no_defense", theta_up, parts, report);
  if (fs::exists(path_in(cfg, kStudentModel))) {
    const Mlp theta_p = load_model(path_in(cfg, kStudentModel));
    run_attacks_for(cfg, "dmp", theta_p, parts, report);
  }
  report.write_csv(path_in(cfg, "attack_metrics.csv"));
}

void cmd_ref_risk(const RunConfig& cfg) {
  const Mlp theta_p = require_model(cfg, kStudentModel);
  const Mlp theta_up = require_model(cfg, kTeacherModel);
  const Dataset x_ref = require_dataset(cfg, kXRefSelectedFile);
  const Dataset d_test = require_dataset(cfg, kDTestFile);

  // X_ref was selected for low teacher entropy, so its rows are intrinsically
  // easy. Contrasting them with random test rows would let the attack fire
  // on easiness alone; the non-member set is entropy-matched instead (the
  // same selection rule applied to held-out data).
  std::vector<double> entropies(d_test.size());
  for (std::size_t i = 0; i < d_test.size(); ++i) {
    entropies[i] = prediction_entropy(theta_up, d_test.features.row_span(i),
                                      cfg.teacher_temperature());
  }
  std::vector<std::size_t> order(d_test.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return entropies[a] < entropies[b];
  });
  order.resize(std::max<std::size_t>(
      1, d_test.size() * cfg.ref_size() / cfg.split_plan().sizes.x_ref_pool));
  const Dataset matched = d_test.subset(order);

  const RefMiaReport risk =
      ref_data_mia(theta_p, x_ref, matched, attack_spec(cfg));
  const AttackReport raw_bl = bl_attack(theta_p, x_ref, d_test);

  ExperimentReport report;
  report.add("dmp", "a_ref_bl", risk.bl.accuracy);
  report.add("dmp", "a_ref_bb", risk.nsh_blackbox.accuracy);
  report.add("dmp", "a_ref_wb", risk.nsh_whitebox.accuracy);
  report.add("dmp", "a_ref_bl_raw", raw_bl.accuracy);
  const EvalResult ref_acc = evaluate(theta_p, x_ref.features, x_ref.labels);
  report.add("dmp", "a_ref", ref_acc.accuracy);
  report.add("dmp", "a_ref_holdout", evaluate(theta_p, matched.features,
                                              matched.labels)
                                          .accuracy);
  report.write_csv(path_in(cfg, "ref_risk_metrics.csv"));
  std::cout << "ref risk (entropy-matched holdout): bl=" << risk.bl.accuracy
            << " bb=" << risk.nsh_blackbox.accuracy
            << " wb=" << risk.nsh_whitebox.accuracy
            << " | raw-holdout bl=" << raw_bl.accuracy << "\n";
}

void cmd_adaptive(const RunConfig& cfg) {
  const Mlp theta_p = require_model(cfg, kStudentModel);
  const SoftLabelSet softlabels =
      load_soft_labels(path_in(cfg, kSoftLabelsFile));
  const Dataset members = require_dataset(cfg, kMembersEvalFile);
  const Dataset nonmembers = require_dataset(cfg, kDTestFile);
  const AdaptiveResult result = adaptive_distance_attack(
      theta_p, softlabels.inputs, members, nonmembers);

  std::string trace = "min_distance,nearest_ref_entropy,target_entropy,is_member\n";
  for (const AdaptiveTraceRow& row : result.trace) {
    trace += format_num(row.min_distance) + "," +
             format_num(row.nearest_ref_entropy) + "," +
             format_num(row.target_entropy) + "," +
             (row.is_member ? "1" : "0") + "\n";
  }
  write_text(path_in(cfg, "adaptive_trace.csv"), trace);

  ExperimentReport report;
  report.add("dmp", "a_adaptive", result.report.accuracy);
  report.write_csv(path_in(cfg, "adaptive_metrics.csv"));
  std::cout << "adaptive distance attack: accuracy=" << result.report.accuracy
            << "\n";
}

void cmd_entropy_sweep(const RunConfig& cfg) {
  const Mlp theta_up = require_model(cfg, kTeacherModel);
  const SplitParts parts = load_parts(cfg);
  const std::size_t n_buckets = cfg.entropy_buckets();
  const std::vector<LayerSpec> student_arch = fully_connected(
      parts.d_tr.n_features(), cfg.student_hidden(), parts.d_tr.n_classes);

  std::string csv = "bucket,mean_entropy,a_test,a_bl\n";
  for (std::size_t b = 0; b < n_buckets; ++b) {
    DmpConfig dmp_cfg = cfg.dmp_config();
    dmp_cfg.selection.mode = RefSelection::kEntropyBucket;
    dmp_cfg.selection.bucket_index = b;
    dmp_cfg.selection.n_buckets = n_buckets;
    dmp_cfg.student_train.seed =
        derive_seed(derive_seed(cfg.seed(), kSeedSweep), b);
    const ReferenceSelection sel =
        select_reference(parts.x_ref_pool.features, theta_up, dmp_cfg);
    const SoftLabelSet soft = make_soft_labels(theta_up, sel.selected,
                                               dmp_cfg.teacher_temperature);
    const Mlp student = distill(student_arch, soft, dmp_cfg);
    double mean_entropy = 0.0;
    for (std::size_t idx : sel.selected_indices) {
      mean_entropy += sel.pool_entropies[idx];
    }
    mean_entropy /= static_cast<double>(sel.selected_indices.size());
    const double a_test =
        evaluate(student, parts.d_test.features, parts.d_test.labels).accuracy;
    const AttackReport bl =
        bl_attack(student, parts.members_eval, parts.nonmembers_eval());
    csv += std::to_string(b) + "," + format_num(mean_entropy) + "," +
           format_num(a_test) + "," + format_num(bl.accuracy) + "\n";
    std::cout << "bucket " << b << ": mean_entropy=" << mean_entropy
              << " a_test=" << a_test << " a_bl=" << bl.accuracy << "\n";
  }
  write_text(path_in(cfg, "entropy_sweep.csv"), csv);
}

void cmd_temp_sweep(const RunConfig& cfg) {
  const Mlp theta_up = require_model(cfg, kTeacherModel);
  const SplitParts parts = load_parts(cfg);
  const std::vector<LayerSpec> student_arch = fully_connected(
      parts.d_tr.n_features(), cfg.student_hidden(), parts.d_tr.n_classes);

  // X_ref is fixed once at the base configuration; only the transfer
  // temperature varies.
  const DmpConfig base_cfg = cfg.dmp_config();
  const ReferenceSelection sel =
      select_reference(parts.x_ref_pool.features, theta_up, base_cfg);

  std::string csv = "temperature,e_gen,a_test,a_wb\n";
  std::size_t step = 0;
  for (double t : cfg.temp_sweep()) {
    DmpConfig dmp_cfg = base_cfg;
    dmp_cfg.teacher_temperature = t;
    dmp_cfg.student_temperature = t;
    dmp_cfg.student_train.seed =
        derive_seed(derive_seed(cfg.seed(), kSeedSweep), 100 + step);
    const SoftLabelSet soft = make_soft_labels(theta_up, sel.selected, t);
    const Mlp student = distill(student_arch, soft, dmp_cfg);
    const double a_train =
        evaluate(student, parts.d_tr.features, parts.d_tr.labels).accuracy;
    const double a_test =
        evaluate(student, parts.d_test.features, parts.d_test.labels).accuracy;
    const AttackReport wb = nsh_attack(
        student, parts.members_known, parts.nonmembers_known,
        parts.members_eval, parts.nonmembers_eval(), NshMode::kWhitebox,
        attack_spec(cfg));
    csv += format_num(t) + "," + format_num(a_train - a_test) + "," +
           format_num(a_test) + "," + format_num(wb.accuracy) + "\n";
    std::cout << "T=" << t << ": e_gen=" << a_train - a_test
              << " a_test=" << a_test << " a_wb=" << wb.accuracy << "\n";
    ++step;
  }
  write_text(path_in(cfg, "temp_sweep.csv"), csv);
}

void cmd_refsize_sweep(const RunConfig& cfg) {
  const Mlp theta_up = require_model(cfg, kTeacherModel);
  const SplitParts parts = load_parts(cfg);
  const std::vector<LayerSpec> student_arch = fully_connected(
      parts.d_tr.n_features(), cfg.student_hidden(), parts.d_tr.n_classes);

  std::string csv = "ref_size,e_gen,a_test,a_bl\n";
  std::size_t step = 0;
  for (std::size_t size : cfg.refsize_sweep()) {
    DmpConfig dmp_cfg = cfg.dmp_config();
    dmp_cfg.selection.mode = RefSelection::kLowestEntropy;
    dmp_cfg.ref_size = size;
    dmp_cfg.student_train.seed =
        derive_seed(derive_seed(cfg.seed(), kSeedSweep), 200 + step);
    const ReferenceSelection sel =
        select_reference(parts.x_ref_pool.features, theta_up, dmp_cfg);
    const SoftLabelSet soft = make_soft_labels(theta_up, sel.selected,
                                               dmp_cfg.teacher_temperature);
    const Mlp student = distill(student_arch, soft, dmp_cfg);
    const double a_train =
        evaluate(student, parts.d_tr.features, parts.d_tr.labels).accuracy;
    const double a_test =
        evaluate(student, parts.d_test.features, parts.d_test.labels).accuracy;
    const AttackReport bl =
        bl_attack(student, parts.members_eval, parts.nonmembers_eval());
    csv += std::to_string(size) + "," + format_num(a_train - a_test) + "," +
           format_num(a_test) + "," + format_num(bl.accuracy) + "\n";
    std::cout << "ref_size " << size << ": a_test=" << a_test
              << " a_bl=" << bl.accuracy << "\n";
    ++step;
  }
  write_text(path_in(cfg, "refsize_sweep.csv"), csv);
}

void cmd_influence_check(const RunConfig& cfg) {
  const std::size_t n_train = cfg.influence_train();
  const std::size_t n_probes = cfg.influence_probes();
  const std::size_t n_refs = 200;  // labeled refs for the ratio-bound trace
  const Dataset task = synth_purchase(
      n_train + n_probes + n_refs, cfg.influence_features(),
      cfg.influence_classes(), cfg.influence_noise(),
      derive_seed(cfg.seed(), kSeedInfluence));
  std::vector<std::size_t> train_idx(n_train), probe_idx(n_probes),
      ref_idx(n_refs);
  for (std::size_t i = 0; i < n_train; ++i) train_idx[i] = i;
  for (std::size_t i = 0; i < n_probes; ++i) probe_idx[i] = n_train + i;
  for (std::size_t i = 0; i < n_refs; ++i) ref_idx[i] = n_train + n_probes + i;
  const Dataset d_tr = task.subset(train_idx);
  const Dataset probes = task.subset(probe_idx);
  const Dataset x_ref = task.subset(ref_idx);

  const std::vector<LayerSpec> arch = fully_connected(
      cfg.influence_features(), cfg.influence_hidden(), cfg.influence_classes());
  const TrainConfig recipe = cfg.influence_recipe();
  NeighborPair warm = retrain_oracle(d_tr, std::nullopt, arch, recipe);

  // Remove the training sample the model finds hardest; it carries the
  // clearest influence signal.
  std::size_t removed = 0;
  double max_norm = -1.0;
  for (std::size_t i = 0; i < d_tr.size(); ++i) {
    const double norm =
        grad_norms(warm.theta_up, d_tr.features.row_span(i), d_tr.labels[i])
            .total;
    if (norm > max_norm) {
      max_norm = norm;
      removed = i;
    }
  }
  const NeighborPair pair = retrain_oracle(d_tr, removed, arch, recipe);

  InfluenceSolver solver(pair.theta_up, d_tr, cfg.influence_damping());
  std::string csv = "probe,delta_ce_oracle,influence_approx\n";
  std::vector<double> oracle_vals, approx_vals;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Prediction with = predict(pair.theta_up, probes.features.row_span(i), 1.0);
    const Prediction without =
        predict(pair.theta_up_minus, probes.features.row_span(i), 1.0);
    const double ce_with = cross_entropy(with.probs, probes.labels[i]);
    const double ce_without = cross_entropy(without.probs, probes.labels[i]);
    const double oracle = std::abs(ce_without - ce_with);
    const double approx = solver.influence(
        d_tr.features.row_span(removed), d_tr.labels[removed],
        probes.features.row_span(i), probes.labels[i]);
    oracle_vals.push_back(oracle);
    approx_vals.push_back(approx);
    csv += std::to_string(i) + "," + format_num(oracle) + "," +
           format_num(approx) + "\n";
  }
  ensure_out_dir(cfg);
  write_text(path_in(cfg, "influence_check.csv"), csv);

  const double corr = pearson(approx_vals, oracle_vals);
  ExperimentReport report;
  report.add("influence", "pearson_influence_dce", corr);
  report.add("influence", "hessian_max_asymmetry", solver.max_asymmetry());

  // Posterior-ratio bound over the labeled reference rows, against a student
  // distilled on the same small task.
  DmpConfig dmp_cfg;
  dmp_cfg.ref_size = n_refs;
  dmp_cfg.teacher_train = recipe;
  dmp_cfg.student_train = recipe;
  dmp_cfg.student_train.loss = LossKind::kKlDivergence;
  dmp_cfg.student_train.seed = derive_seed(cfg.seed(), kSeedStudent);
  const SoftLabelSet soft = make_soft_labels(pair.theta_up, x_ref.features, 1.0);
  const Mlp theta_p = distill(arch, soft, dmp_cfg);
  const RatioBound rb = ratio_bound(pair, theta_p, x_ref, 1.0);
  report.add("influence", "bound_eq9", rb.bound);
  report.add("influence", "abs_signed_eq8", std::abs(rb.signed_sum));
  try {
    const CorrelationReport trace_corr = correlation_report(rb.trace);
    report.add("influence", "pearson_dkl_dce", trace_corr.pearson_dkl_dce);
    report.add("influence", "spearman_h_dkl", trace_corr.spearman_entropy_dkl);
  } catch (const NumericalError&) {
    // zero-variance trace on a degenerate task: skip the correlation rows
  }

  report.write_csv(path_in(cfg, "influence_metrics.csv"));
  std::cout << "influence check: pearson=" << corr
            << " (removed index " << removed << ")\n";
}

void cmd_report(const RunConfig& cfg) {
  ExperimentReport combined;
  for (const char* name :
       {"train_metrics.csv", "distill_metrics.csv", "attack_metrics.csv",
        "ref_risk_metrics.csv", "adaptive_metrics.csv",
        "influence_metrics.csv"}) {
    const std::string path = path_in(cfg, name);
    if (fs::exists(path)) combined.merge(ExperimentReport::read_csv(path));
  }
  if (combined.rows().empty()) {
    throw InvalidInput("no metric files found under " + cfg.out_dir());
  }
  combined.write_csv(path_in(cfg, "report.csv"));

  // Table-3-style defense comparison on stdout.
  const std::vector<std::string> columns = {"e_gen", "a_test", "a_wb",
                                            "a_bb",  "a_bl",   "a_nn"};
  std::printf("%-12s", "experiment");
  for (const std::string& c : columns) std::printf(" %8s", c.c_str());
  std::printf("\n");
  for (const std::string id : {"no_defense", "dmp"}) {
    bool any = false;
    for (const std::string& c : columns) {
      if (combined.find(id, c)) any = true;
    }
    if (!any) continue;
    std::printf("%-12s", id.c_str());
    for (const std::string& c : columns) {
      const auto v = combined.find(id, c);
      if (v) {
        std::printf(" %8.3f", *v);
      } else {
        std::printf(" %8s", "-");
      }
    }
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dmpbench: distillation-for-membership-privacy workbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool have_seed_override = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file");
    sub->add_option("--out", out_override, "output directory override");
    sub->add_option("--seed", seed_override, "global seed override")
        ->each([&](const std::string&) { have_seed_override = true; });
  };

  struct Entry {
    const char* name;
    const char* help;
    void (*fn)(const RunConfig&);
  };
  const std::vector<Entry> entries = {
      {"synth-data", "generate the synthetic classification task", cmd_synth_data},
      {"split", "carve the dataset into disjoint experiment splits", cmd_split},
      {"train", "train the unprotected model on d_tr", cmd_train},
      {"distill", "select references, make soft labels, train theta_p", cmd_distill},
      {"attack", "run the membership-inference suite against the models", cmd_attack},
      {"ref-risk", "measure membership risk to the reference data", cmd_ref_risk},
      {"adaptive", "run the distance-based adaptive attack", cmd_adaptive},
      {"entropy-sweep", "distill one student per entropy bucket", cmd_entropy_sweep},
      {"temp-sweep", "distill students across softmax temperatures", cmd_temp_sweep},
      {"refsize-sweep", "distill students across reference sizes", cmd_refsize_sweep},
      {"influence-check", "validate the influence approximation against retraining", cmd_influence_check},
      {"report", "collect stage metrics into one table", cmd_report},
  };
  for (const Entry& entry : entries) {
    add_common(app.add_subcommand(entry.name, entry.help));
  }

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = config_path.empty() ? RunConfig::defaults()
                                        : RunConfig::parse_file(config_path);
    if (!out_override.empty()) cfg.override_out_dir(out_override);
    if (have_seed_override) cfg.override_seed(seed_override);
    ensure_out_dir(cfg);
    for (const Entry& entry : entries) {
      if (app.get_subcommand(entry.name)->parsed()) {
        entry.fn(cfg);
        return 0;
      }
    }
    std::cerr << "no subcommand selected\n";
    return 1;
  } catch (const TrainingDiverged& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  }
}
