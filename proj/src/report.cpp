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

#include "dmp/report.hpp"

#include <cmath>
#include <fstream>

#include "dmp/errors.hpp"
#include "textio.hpp"

namespace dmp {

void ExperimentReport::add(const std::string& experiment_id,
                           const std::string& metric, double value) {
  if (!std::isfinite(value)) {
    throw InvalidInput("metric '" + metric + "' is not finite");
  }
  if (metric.rfind("a_", 0) == 0 && (value < 0.0 || value > 1.0)) {
    throw InvalidInput("accuracy metric '" + metric + "' outside [0,1]");
  }
  if (metric == "e_gen" && (value < -1.0 || value > 1.0)) {
    throw InvalidInput("e_gen outside [-1,1]");
  }
  rows_.push_back({experiment_id, metric, value});
}

void ExperimentReport::merge(const ExperimentReport& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::optional<double> ExperimentReport::find(const std::string& experiment_id,
                                             const std::string& metric) const {
  for (const MetricRow& row : rows_) {
    if (row.experiment_id == experiment_id && row.metric == metric) {
      return row.value;
    }
  }
  return std::nullopt;
}

void ExperimentReport::write_csv(std::ostream& out) const {
  out << "experiment_id,metric,value\n";
  for (const MetricRow& row : rows_) {
    std::string line = row.experiment_id + "," + row.metric + ",";
    textio::append_double(line, row.value);
    line.push_back('\n');
    out << line;
  }
}

void ExperimentReport::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  write_csv(out);
}

ExperimentReport ExperimentReport::read_csv(std::istream& in) {
  ExperimentReport report;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty report", line_no);
  ++line_no;
  if (line != "experiment_id,metric,value") {
    throw ParseError("bad report header", line_no);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 == std::string::npos ? 0 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ParseError("bad report row", line_no);
    }
    const std::string id = line.substr(0, c1);
    const std::string metric = line.substr(c1 + 1, c2 - c1 - 1);
    const char* p = line.c_str() + c2 + 1;
    double value = 0.0;
    if (!textio::parse_double(&p, &value) || *p != '\0') {
      throw ParseError("bad metric value", line_no);
    }
    report.rows_.push_back({id, metric, value});
  }
  return report;
}

ExperimentReport ExperimentReport::read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  return read_csv(in);
}

}  // namespace dmp
