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
#include <map>
#include <string>
#include <vector>

#include "dmp/data.hpp"
#include "dmp/nncore.hpp"
#include "dmp/pipeline.hpp"

namespace dmp {

// Stable per-role seed tags; every stream a run uses is derived from the
// global seed with derive_seed(seed, tag), so pipelines can be re-entered
// mid-way and still reproduce.
enum SeedTag : std::uint64_t {
  kSeedData = 1,
  kSeedSplit = 2,
  kSeedTeacher = 3,
  kSeedStudent = 4,
  kSeedShadow = 5,
  kSeedAttack = 6,
  kSeedPerturb = 7,
  kSeedSweep = 8,
  kSeedInfluence = 9,
};

/// Flat key=value experiment configuration. Unknown keys are an error and
/// every key has a documented default (see config_key_table()).
class RunConfig {
 public:
  /// Parses `key=value` lines; '#' starts a comment. Rejects unknown and
  /// duplicate keys.
  static RunConfig parse(std::istream& in);
  static RunConfig parse_file(const std::string& path);
  static RunConfig defaults();

  void set(const std::string& key, const std::string& value);
  const std::string& raw(const std::string& key) const;

  // typed accessors
  std::uint64_t seed() const;
  void override_seed(std::uint64_t seed);
  std::string out_dir() const;
  void override_out_dir(const std::string& dir);

  std::size_t n_samples() const;
  std::size_t n_features() const;
  std::size_t n_classes() const;
  double cluster_noise() const;

  SplitPlan split_plan() const;

  std::vector<std::size_t> teacher_hidden() const;
  std::vector<std::size_t> student_hidden() const;  // inherits teacher_hidden
  std::size_t attack_hidden() const;

  TrainConfig teacher_train() const;
  TrainConfig student_train() const;
  TrainConfig attack_train() const;

  double teacher_temperature() const;
  double student_temperature() const;  // inherits teacher_temperature
  std::size_t ref_size() const;
  SelectionSpec selection() const;
  DmpConfig dmp_config() const;

  std::string ref_source() const;  // "pool" or "perturb"
  double perturb_flip() const;

  std::size_t entropy_buckets() const;
  std::vector<double> temp_sweep() const;
  std::vector<std::size_t> refsize_sweep() const;

  std::size_t influence_features() const;
  std::size_t influence_classes() const;
  std::vector<std::size_t> influence_hidden() const;
  std::size_t influence_train() const;
  std::size_t influence_probes() const;
  double influence_damping() const;
  double influence_noise() const;
  TrainConfig influence_recipe() const;

 private:
  std::map<std::string, std::string> values_;
};

struct ConfigKey {
  const char* key;
  const char* default_value;
  const char* help;
};

/// Every known key with its default and one-line description.
const std::vector<ConfigKey>& config_key_table();

}  // namespace dmp
