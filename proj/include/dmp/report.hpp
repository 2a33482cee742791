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
#include <string>
#include <vector>

namespace dmp {

struct MetricRow {
  std::string experiment_id;
  std::string metric;
  double value = 0.0;
};

/// Named metric table serialized as `experiment_id,metric,value` CSV.
/// Accuracy metrics (a_*) must lie in [0,1] and e_gen in [-1,1]; add()
/// rejects out-of-range or non-finite values.
class ExperimentReport {
 public:
  void add(const std::string& experiment_id, const std::string& metric,
           double value);
  void merge(const ExperimentReport& other);

  const std::vector<MetricRow>& rows() const { return rows_; }
  std::optional<double> find(const std::string& experiment_id,
                             const std::string& metric) const;

  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
  static ExperimentReport read_csv(std::istream& in);
  static ExperimentReport read_csv(const std::string& path);

 private:
  std::vector<MetricRow> rows_;
};

}  // namespace dmp
