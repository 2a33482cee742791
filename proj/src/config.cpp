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

#include "dmp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dmp/errors.hpp"
#include "dmp/rng.hpp"
#include "textio.hpp"

namespace dmp {

const std::vector<ConfigKey>& config_key_table() {
  static const std::vector<ConfigKey> table = {
      // dataset generation
      {"n_samples", "50000", "total synthetic samples to generate"},
      {"n_features", "600", "binary feature vector length"},
      {"n_classes", "100", "number of classes"},
      {"cluster_noise", "0.4", "per-bit flip probability around class centroids"},
      // split sizes
      {"d_tr", "10000", "private training split"},
      {"x_ref_pool", "20000", "reference candidate pool"},
      {"d_test", "5000", "test split (also the held-out non-member eval set)"},
      {"shadow", "10000", "shadow-model split for the NN attack"},
      {"attack_members_known", "5000", "members known to the adversary (from d_tr)"},
      {"attack_nonmembers_known", "5000", "non-members known to the adversary"},
      // architectures
      {"hidden", "256,128", "teacher hidden widths, comma separated"},
      {"student_hidden", "", "student hidden widths; empty = same as hidden"},
      {"attack_hidden", "64", "attack-model hidden width"},
      // teacher training
      {"teacher_epochs", "15", "teacher epochs"},
      {"teacher_batch", "64", "teacher batch size"},
      {"teacher_lr", "0.001", "teacher learning rate"},
      {"teacher_optimizer", "adam", "teacher optimizer: adam or sgd"},
      {"teacher_beta1", "0.9", "teacher Adam beta1"},
      {"teacher_beta2", "0.999", "teacher Adam beta2"},
      {"teacher_eps", "1e-8", "teacher Adam epsilon"},
      {"teacher_weight_decay", "0", "teacher L2 weight decay"},
      {"teacher_dropout", "0", "teacher hidden-unit dropout rate"},
      {"teacher_label_smoothing", "0", "teacher label smoothing"},
      {"teacher_confidence_penalty", "0", "teacher confidence penalty"},
      // student training
      {"student_epochs", "15", "student epochs"},
      {"student_batch", "64", "student batch size"},
      {"student_lr", "0.001", "student learning rate"},
      {"student_optimizer", "adam", "student optimizer: adam or sgd"},
      {"student_beta1", "0.9", "student Adam beta1"},
      {"student_beta2", "0.999", "student Adam beta2"},
      {"student_eps", "1e-8", "student Adam epsilon"},
      {"student_weight_decay", "0", "student L2 weight decay"},
      {"student_dropout", "0.1", "student hidden-unit dropout rate"},
      // attack-model training
      {"attack_epochs", "30", "attack-model epochs"},
      {"attack_batch", "64", "attack-model batch size"},
      {"attack_lr", "0.001", "attack-model learning rate"},
      {"attack_optimizer", "adam", "attack-model optimizer: adam or sgd"},
      // distillation
      {"teacher_temperature", "1", "softmax temperature for soft labels"},
      {"student_temperature", "", "student training temperature; empty = same as teacher"},
      {"ref_size", "12000", "reference rows selected from the pool"},
      {"selection", "lowest_entropy",
       "reference selection: lowest_entropy, all, or bucket:<i>:<k>"},
      {"ref_source", "pool", "reference source: pool or perturb"},
      {"perturb_flip", "0.05", "bit-flip probability for ref_source=perturb"},
      // sweeps
      {"entropy_buckets", "5", "buckets for the entropy sweep"},
      {"temp_sweep", "2,4,6", "teacher temperatures for the temperature sweep"},
      {"refsize_sweep", "1000,2500,5000,7500,10000",
       "reference sizes for the reference-size sweep"},
      // influence check
      {"influence_features", "30", "features of the influence-check task"},
      {"influence_classes", "5", "classes of the influence-check task"},
      {"influence_hidden", "", "influence-model hidden widths; empty = linear"},
      {"influence_train", "300", "training samples of the influence-check task"},
      {"influence_probes", "20", "probe samples for the influence correlation"},
      {"influence_damping", "0.001", "Hessian damping"},
      {"influence_epochs", "200", "influence-model epochs"},
      {"influence_lr", "0.01", "influence-model learning rate"},
      {"influence_noise", "0.2", "cluster noise of the influence-check task"},
      // misc
      {"seed", "7", "global seed; all streams derive from it"},
      {"out_dir", "out", "artifact output directory"},
  };
  return table;
}

namespace {

const ConfigKey* find_key(const std::string& key) {
  for (const ConfigKey& entry : config_key_table()) {
    if (key == entry.key) return &entry;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  const char* p = v.c_str();
  double out = 0.0;
  if (!textio::parse_double(&p, &out) || *p != '\0') {
    throw InvalidInput("config key '" + key + "': bad number '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const unsigned long long out = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw InvalidInput("config key '" + key + "': bad integer '" + v + "'");
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

Optimizer to_optimizer(const std::string& key, const std::string& v) {
  if (v == "adam") return Optimizer::kAdam;
  if (v == "sgd") return Optimizer::kSgd;
  throw InvalidInput("config key '" + key + "': optimizer must be adam or sgd");
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  for (const ConfigKey& entry : config_key_table()) {
    cfg.values_[entry.key] = entry.default_value;
  }
  return cfg;
}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig cfg = defaults();
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key=value", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (find_key(key) == nullptr) {
      throw InvalidInput("unknown config key '" + key + "'");
    }
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw InvalidInput("duplicate config key '" + key + "'");
    }
    seen.push_back(key);
    cfg.values_[key] = value;
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open config file " + path);
  return parse(in);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (find_key(key) == nullptr) {
    throw InvalidInput("unknown config key '" + key + "'");
  }
  values_[key] = value;
}

const std::string& RunConfig::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw InvalidInput("unknown config key '" + key + "'");
  }
  return it->second;
}

std::uint64_t RunConfig::seed() const { return to_u64("seed", raw("seed")); }
void RunConfig::override_seed(std::uint64_t seed) {
  values_["seed"] = std::to_string(seed);
}
std::string RunConfig::out_dir() const { return raw("out_dir"); }
void RunConfig::override_out_dir(const std::string& dir) {
  values_["out_dir"] = dir;
}

std::size_t RunConfig::n_samples() const {
  return to_u64("n_samples", raw("n_samples"));
}
std::size_t RunConfig::n_features() const {
  return to_u64("n_features", raw("n_features"));
}
std::size_t RunConfig::n_classes() const {
  return to_u64("n_classes", raw("n_classes"));
}
double RunConfig::cluster_noise() const {
  return to_double("cluster_noise", raw("cluster_noise"));
}

SplitPlan RunConfig::split_plan() const {
  SplitPlan plan;
  plan.seed = derive_seed(seed(), kSeedSplit);
  plan.sizes.d_tr = to_u64("d_tr", raw("d_tr"));
  plan.sizes.x_ref_pool = to_u64("x_ref_pool", raw("x_ref_pool"));
  plan.sizes.d_test = to_u64("d_test", raw("d_test"));
  plan.sizes.shadow = to_u64("shadow", raw("shadow"));
  plan.sizes.attack_members_known =
      to_u64("attack_members_known", raw("attack_members_known"));
  plan.sizes.attack_nonmembers_known =
      to_u64("attack_nonmembers_known", raw("attack_nonmembers_known"));
  return plan;
}

namespace {

std::vector<std::size_t> parse_widths(const std::string& key,
                                      const std::string& v) {
  std::vector<std::size_t> widths;
  for (const std::string& part : split_commas(v)) {
    widths.push_back(to_u64(key, trim(part)));
  }
  return widths;
}

}  // namespace

std::vector<std::size_t> RunConfig::teacher_hidden() const {
  return parse_widths("hidden", raw("hidden"));
}

std::vector<std::size_t> RunConfig::student_hidden() const {
  const std::string& v = raw("student_hidden");
  if (trim(v).empty()) return teacher_hidden();
  return parse_widths("student_hidden", v);
}

std::size_t RunConfig::attack_hidden() const {
  return to_u64("attack_hidden", raw("attack_hidden"));
}

namespace {

TrainConfig role_train(const RunConfig& cfg, const std::string& prefix,
                       std::uint64_t seed_tag, LossKind loss) {
  TrainConfig train;
  train.epochs = to_u64(prefix + "_epochs", cfg.raw(prefix + "_epochs"));
  train.batch_size = to_u64(prefix + "_batch", cfg.raw(prefix + "_batch"));
  train.learning_rate = to_double(prefix + "_lr", cfg.raw(prefix + "_lr"));
  train.optimizer =
      to_optimizer(prefix + "_optimizer", cfg.raw(prefix + "_optimizer"));
  if (prefix != "attack") {
    train.adam.beta1 = to_double(prefix + "_beta1", cfg.raw(prefix + "_beta1"));
    train.adam.beta2 = to_double(prefix + "_beta2", cfg.raw(prefix + "_beta2"));
    train.adam.eps = to_double(prefix + "_eps", cfg.raw(prefix + "_eps"));
    train.weight_decay =
        to_double(prefix + "_weight_decay", cfg.raw(prefix + "_weight_decay"));
    train.dropout_rate =
        to_double(prefix + "_dropout", cfg.raw(prefix + "_dropout"));
  }
  if (prefix == "teacher") {
    train.label_smoothing = to_double("teacher_label_smoothing",
                                      cfg.raw("teacher_label_smoothing"));
    train.confidence_penalty = to_double("teacher_confidence_penalty",
                                         cfg.raw("teacher_confidence_penalty"));
  }
  train.seed = derive_seed(cfg.seed(), seed_tag);
  train.loss = loss;
  train.validate();
  return train;
}

}  // namespace

TrainConfig RunConfig::teacher_train() const {
  return role_train(*this, "teacher", kSeedTeacher, LossKind::kCrossEntropy);
}

TrainConfig RunConfig::student_train() const {
  return role_train(*this, "student", kSeedStudent, LossKind::kKlDivergence);
}

TrainConfig RunConfig::attack_train() const {
  return role_train(*this, "attack", kSeedAttack, LossKind::kCrossEntropy);
}

double RunConfig::teacher_temperature() const {
  return to_double("teacher_temperature", raw("teacher_temperature"));
}

double RunConfig::student_temperature() const {
  const std::string v = trim(raw("student_temperature"));
  if (v.empty()) return teacher_temperature();
  return to_double("student_temperature", v);
}

std::size_t RunConfig::ref_size() const {
  return to_u64("ref_size", raw("ref_size"));
}

SelectionSpec RunConfig::selection() const {
  const std::string v = trim(raw("selection"));
  SelectionSpec spec;
  if (v == "lowest_entropy") {
    spec.mode = RefSelection::kLowestEntropy;
  } else if (v == "all") {
    spec.mode = RefSelection::kAll;
  } else if (v.rfind("bucket:", 0) == 0) {
    spec.mode = RefSelection::kEntropyBucket;
    // bucket:<index>:<n_buckets>
    const std::size_t c1 = v.find(':');
    const std::size_t c2 = v.find(':', c1 + 1);
    if (c2 == std::string::npos) {
      throw InvalidInput("selection bucket form is bucket:<index>:<n_buckets>");
    }
    spec.bucket_index = to_u64("selection", v.substr(c1 + 1, c2 - c1 - 1));
    spec.n_buckets = to_u64("selection", v.substr(c2 + 1));
  } else {
    throw InvalidInput("config key 'selection': unknown mode '" + v + "'");
  }
  return spec;
}

DmpConfig RunConfig::dmp_config() const {
  DmpConfig dmp;
  dmp.teacher_temperature = teacher_temperature();
  dmp.student_temperature = student_temperature();
  dmp.ref_size = ref_size();
  dmp.selection = selection();
  dmp.teacher_train = teacher_train();
  dmp.student_train = student_train();
  dmp.validate();
  return dmp;
}

std::string RunConfig::ref_source() const {
  const std::string v = trim(raw("ref_source"));
  if (v != "pool" && v != "perturb") {
    throw InvalidInput("config key 'ref_source': must be pool or perturb");
  }
  return v;
}

double RunConfig::perturb_flip() const {
  return to_double("perturb_flip", raw("perturb_flip"));
}

std::size_t RunConfig::entropy_buckets() const {
  return to_u64("entropy_buckets", raw("entropy_buckets"));
}

std::vector<double> RunConfig::temp_sweep() const {
  std::vector<double> out;
  for (const std::string& part : split_commas(raw("temp_sweep"))) {
    out.push_back(to_double("temp_sweep", trim(part)));
  }
  return out;
}

std::vector<std::size_t> RunConfig::refsize_sweep() const {
  return parse_widths("refsize_sweep", raw("refsize_sweep"));
}

std::size_t RunConfig::influence_features() const {
  return to_u64("influence_features", raw("influence_features"));
}
std::size_t RunConfig::influence_classes() const {
  return to_u64("influence_classes", raw("influence_classes"));
}
std::vector<std::size_t> RunConfig::influence_hidden() const {
  const std::string v = trim(raw("influence_hidden"));
  if (v.empty()) return {};
  return parse_widths("influence_hidden", v);
}
std::size_t RunConfig::influence_train() const {
  return to_u64("influence_train", raw("influence_train"));
}
std::size_t RunConfig::influence_probes() const {
  return to_u64("influence_probes", raw("influence_probes"));
}
double RunConfig::influence_damping() const {
  return to_double("influence_damping", raw("influence_damping"));
}
double RunConfig::influence_noise() const {
  return to_double("influence_noise", raw("influence_noise"));
}

TrainConfig RunConfig::influence_recipe() const {
  TrainConfig train;
  train.epochs = to_u64("influence_epochs", raw("influence_epochs"));
  train.batch_size = 32;
  train.learning_rate = to_double("influence_lr", raw("influence_lr"));
  train.optimizer = Optimizer::kAdam;
  train.seed = derive_seed(seed(), kSeedInfluence);
  train.loss = LossKind::kCrossEntropy;
  return train;
}

}  // namespace dmp
