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

#include "dmp/data.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "dmp/errors.hpp"
#include "dmp/rng.hpp"
#include "textio.hpp"

namespace dmp {

void Dataset::validate() const {
  if (labels.size() != features.rows()) {
    throw InvalidInput("label count does not match feature rows");
  }
  if (n_classes == 0) throw InvalidInput("n_classes must be >= 1");
  for (std::size_t y : labels) {
    if (y >= n_classes) throw InvalidInput("label out of range");
  }
  if (feature_kind == FeatureKind::kBinary) {
    for (double v : features.data()) {
      if (v != 0.0 && v != 1.0) {
        throw InvalidInput("binary dataset contains a non-binary value");
      }
    }
  } else {
    for (double v : features.data()) {
      if (!std::isfinite(v)) throw InvalidInput("non-finite feature value");
    }
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.n_classes = n_classes;
  out.feature_kind = feature_kind;
  out.features = Matrix(indices.size(), features.cols());
  out.labels.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size()) throw InvalidInput("subset index out of range");
    std::memcpy(out.features.row(i), features.row(indices[i]),
                features.cols() * sizeof(double));
    out.labels[i] = labels[indices[i]];
  }
  return out;
}

Dataset synth_purchase(std::size_t n_samples, std::size_t n_features,
                       std::size_t n_classes, double cluster_noise,
                       std::uint64_t seed) {
  if (n_classes == 0 || n_classes > n_samples) {
    throw InvalidInput("need 1 <= n_classes <= n_samples");
  }
  if (n_features == 0) throw InvalidInput("n_features must be >= 1");
  if (cluster_noise < 0.0 || cluster_noise >= 0.5) {
    throw InvalidInput(
        "cluster_noise must be in [0, 0.5); at 0.5 classes are unlearnable");
  }

  Rng rng(seed);
  Matrix centroids(n_classes, n_features);
  for (double& v : centroids.data()) v = rng.bernoulli(0.5) ? 1.0 : 0.0;

  Dataset data;
  data.n_classes = n_classes;
  data.feature_kind = FeatureKind::kBinary;
  data.features = Matrix(n_samples, n_features);
  data.labels.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const std::size_t label = i % n_classes;  // balanced within +-1
    data.labels[i] = label;
    const double* centroid = centroids.row(label);
    double* row = data.features.row(i);
    for (std::size_t j = 0; j < n_features; ++j) {
      const bool flip = rng.bernoulli(cluster_noise);
      row[j] = flip ? 1.0 - centroid[j] : centroid[j];
    }
  }
  return data;
}

SplitParts split(const Dataset& data, const SplitPlan& plan) {
  data.validate();
  const SplitSizes& s = plan.sizes;
  const std::size_t required =
      s.d_tr + s.x_ref_pool + s.d_test + s.shadow + s.attack_nonmembers_known;
  if (required > data.size()) {
    throw InvalidInput("split plan needs " + std::to_string(required) +
                       " samples but dataset has " +
                       std::to_string(data.size()) + " (short by " +
                       std::to_string(required - data.size()) + ")");
  }
  if (s.attack_members_known > s.d_tr / 2) {
    throw InvalidInput("attack_members_known exceeds half of d_tr");
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(plan.seed);
  rng.shuffle(order);

  std::size_t cursor = 0;
  auto take = [&](std::size_t count) {
    std::vector<std::size_t> idx(order.begin() + cursor,
                                 order.begin() + cursor + count);
    cursor += count;
    return idx;
  };

  const std::vector<std::size_t> tr_idx = take(s.d_tr);
  SplitParts parts;
  parts.d_tr = data.subset(tr_idx);
  parts.x_ref_pool = data.subset(take(s.x_ref_pool));
  parts.d_test = data.subset(take(s.d_test));
  parts.shadow = data.subset(take(s.shadow));
  parts.nonmembers_known = data.subset(take(s.attack_nonmembers_known));

  // The adversary knows the first attack_members_known rows of the (already
  // shuffled) training split; the rest are held out for attack evaluation.
  std::vector<std::size_t> known(s.attack_members_known);
  std::iota(known.begin(), known.end(), 0);
  std::vector<std::size_t> rest(s.d_tr - s.attack_members_known);
  std::iota(rest.begin(), rest.end(), s.attack_members_known);
  parts.members_known = parts.d_tr.subset(known);
  parts.members_eval = parts.d_tr.subset(rest);
  return parts;
}

Matrix perturb_synth_ref(const Dataset& d_tr, double flip_probability,
                         std::size_t n_out, std::uint64_t seed) {
  if (flip_probability <= 0.0 || flip_probability >= 0.5) {
    throw InvalidInput("flip_probability must be in (0, 0.5)");
  }
  if (d_tr.feature_kind != FeatureKind::kBinary) {
    throw InvalidInput("perturb_synth_ref requires binary features");
  }
  if (d_tr.size() == 0) throw InvalidInput("d_tr is empty");

  Rng rng(seed);
  Matrix out(n_out, d_tr.n_features());
  for (std::size_t i = 0; i < n_out; ++i) {
    const double* src = d_tr.features.row(rng.below(d_tr.size()));
    double* row = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) {
      const bool flip = rng.bernoulli(flip_probability);
      row[j] = flip ? 1.0 - src[j] : src[j];
    }
  }
  return out;
}

void SoftLabelSet::validate() const {
  if (inputs.rows() != soft_labels.rows()) {
    throw InvalidInput("soft label rows do not match input rows");
  }
  if (teacher_temperature <= 0.0) {
    throw InvalidInput("teacher_temperature must be > 0");
  }
  for (std::size_t i = 0; i < soft_labels.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < soft_labels.cols(); ++j) {
      const double p = soft_labels(i, j);
      if (p < 0.0 || p > 1.0) {
        throw InvalidInput("soft label outside [0,1] at row " +
                           std::to_string(i));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvalidInput("soft label row " + std::to_string(i) +
                         " does not sum to 1");
    }
  }
}

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kDatasetMagic = "dmp-dataset v1";
constexpr const char* kSoftMagic = "dmp-softlabels v1";

// Parses "key=value" fields from a header line after the magic prefix.
std::string header_field(const std::string& line, const std::string& key,
                         std::size_t line_no) {
  const std::string needle = " " + key + "=";
  const std::size_t pos = line.find(needle);
  if (pos == std::string::npos) {
    throw ParseError("header missing field '" + key + "'", line_no);
  }
  const std::size_t start = pos + needle.size();
  std::size_t end = line.find(' ', start);
  if (end == std::string::npos) end = line.size();
  return line.substr(start, end - start);
}

std::size_t header_size_t(const std::string& line, const std::string& key,
                          std::size_t line_no) {
  const std::string v = header_field(line, key, line_no);
  char* end = nullptr;
  const unsigned long long n = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ParseError("bad integer for '" + key + "'", line_no);
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

void save_dataset(const Dataset& data, std::ostream& out) {
  data.validate();
  std::string buf;
  buf.reserve(1 << 16);
  buf += kDatasetMagic;
  buf += " n=" + std::to_string(data.size()) +
         " d=" + std::to_string(data.n_features()) +
         " c=" + std::to_string(data.n_classes) + " kind=";
  buf += data.feature_kind == FeatureKind::kBinary ? "binary" : "continuous";
  buf.push_back('\n');
  for (std::size_t i = 0; i < data.size(); ++i) {
    buf += std::to_string(data.labels[i]);
    const double* row = data.features.row(i);
    for (std::size_t j = 0; j < data.n_features(); ++j) {
      buf.push_back(',');
      textio::append_double(buf, row[j]);
    }
    buf.push_back('\n');
    if (buf.size() > (1 << 20)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  save_dataset(data, out);
}

Dataset load_dataset(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty dataset file", line_no);
  ++line_no;
  if (line.rfind(kDatasetMagic, 0) != 0) {
    throw ParseError("bad dataset header", line_no);
  }
  const std::size_t n = header_size_t(line, "n", line_no);
  const std::size_t d = header_size_t(line, "d", line_no);
  const std::size_t c = header_size_t(line, "c", line_no);
  const std::string kind = header_field(line, "kind", line_no);
  if (kind != "binary" && kind != "continuous") {
    throw ParseError("kind must be binary or continuous", line_no);
  }

  Dataset data;
  data.n_classes = c;
  data.feature_kind =
      kind == "binary" ? FeatureKind::kBinary : FeatureKind::kContinuous;
  data.features = Matrix(n, d);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("dataset truncated after " + std::to_string(i) +
                           " of " + std::to_string(n) + " rows",
                       line_no);
    }
    ++line_no;
    const char* p = line.c_str();
    char* end = nullptr;
    data.labels[i] = static_cast<std::size_t>(std::strtoull(p, &end, 10));
    if (end == p) throw ParseError("missing label", line_no);
    p = end;
    double* row = data.features.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      if (*p != ',') throw ParseError("expected ','", line_no);
      ++p;
      if (!textio::parse_double(&p, &row[j])) {
        throw ParseError("row has fewer than " + std::to_string(d) +
                             " features",
                         line_no);
      }
      if (!std::isfinite(row[j])) {
        throw ParseError("non-finite feature value", line_no);
      }
    }
    if (*p != '\0') throw ParseError("trailing characters after row", line_no);
  }
  data.validate();
  return data;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  return load_dataset(in);
}

void save_soft_labels(const SoftLabelSet& set, std::ostream& out) {
  set.validate();
  std::string buf;
  buf.reserve(1 << 16);
  buf += kSoftMagic;
  buf += " n=" + std::to_string(set.size()) +
         " d=" + std::to_string(set.inputs.cols()) +
         " c=" + std::to_string(set.soft_labels.cols()) + " T=";
  textio::append_double(buf, set.teacher_temperature);
  buf.push_back('\n');
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double* x = set.inputs.row(i);
    for (std::size_t j = 0; j < set.inputs.cols(); ++j) {
      if (j > 0) buf.push_back(',');
      textio::append_double(buf, x[j]);
    }
    buf.push_back('|');
    const double* p = set.soft_labels.row(i);
    for (std::size_t j = 0; j < set.soft_labels.cols(); ++j) {
      if (j > 0) buf.push_back(',');
      textio::append_double(buf, p[j]);
    }
    buf.push_back('\n');
    if (buf.size() > (1 << 20)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
}

void save_soft_labels(const SoftLabelSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  save_soft_labels(set, out);
}

SoftLabelSet load_soft_labels(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty soft-label file", line_no);
  ++line_no;
  if (line.rfind(kSoftMagic, 0) != 0) {
    throw ParseError("bad soft-label header", line_no);
  }
  const std::size_t n = header_size_t(line, "n", line_no);
  const std::size_t d = header_size_t(line, "d", line_no);
  const std::size_t c = header_size_t(line, "c", line_no);
  const std::string t_str = header_field(line, "T", line_no);
  const char* tp = t_str.c_str();
  double temperature = 0.0;
  if (!textio::parse_double(&tp, &temperature)) {
    throw ParseError("bad temperature", line_no);
  }

  SoftLabelSet set;
  set.teacher_temperature = temperature;
  set.inputs = Matrix(n, d);
  set.soft_labels = Matrix(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("soft-label file truncated after " + std::to_string(i) +
                           " of " + std::to_string(n) + " rows",
                       line_no);
    }
    ++line_no;
    const char* p = line.c_str();
    double* x = set.inputs.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      if (j > 0) {
        if (*p != ',') throw ParseError("expected ','", line_no);
        ++p;
      }
      if (!textio::parse_double(&p, &x[j])) {
        throw ParseError("input row too short", line_no);
      }
    }
    if (*p != '|') throw ParseError("expected '|'", line_no);
    ++p;
    double* probs = set.soft_labels.row(i);
    for (std::size_t j = 0; j < c; ++j) {
      if (j > 0) {
        if (*p != ',') throw ParseError("expected ','", line_no);
        ++p;
      }
      if (!textio::parse_double(&p, &probs[j])) {
        throw ParseError("probability row too short", line_no);
      }
    }
    if (*p != '\0') throw ParseError("trailing characters after row", line_no);
  }
  set.validate();
  return set;
}

SoftLabelSet load_soft_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  return load_soft_labels(in);
}

}  // namespace dmp
