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

#include "dmp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "dmp/errors.hpp"
#include "textio.hpp"

namespace dmp {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("pearson length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw InvalidInput("pearson needs at least 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw NumericalError("correlation undefined: zero-variance column");
  }
  return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("spearman length mismatch");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

double median(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("median of empty range");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Histogram make_histogram(std::span<const double> member_values,
                         std::span<const double> nonmember_values,
                         std::size_t n_bins) {
  if (member_values.empty() || nonmember_values.empty()) {
    throw InvalidInput("histogram needs nonempty value sets");
  }
  double lo = member_values[0], hi = member_values[0];
  for (double v : member_values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : nonmember_values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1e-12;  // all values identical: one degenerate span

  Histogram h;
  h.bin_left.resize(n_bins);
  h.bin_right.resize(n_bins);
  h.member_frac.assign(n_bins, 0.0);
  h.nonmember_frac.assign(n_bins, 0.0);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    h.bin_left[b] = lo + width * static_cast<double>(b);
    h.bin_right[b] = lo + width * static_cast<double>(b + 1);
  }
  auto bin_of = [&](double v) {
    std::size_t b = static_cast<std::size_t>((v - lo) / width);
    return std::min(b, n_bins - 1);
  };
  for (double v : member_values) {
    h.member_frac[bin_of(v)] += 1.0 / static_cast<double>(member_values.size());
  }
  for (double v : nonmember_values) {
    h.nonmember_frac[bin_of(v)] +=
        1.0 / static_cast<double>(nonmember_values.size());
  }
  return h;
}

void Histogram::write_csv(std::ostream& out) const {
  out << "bin_left,bin_right,member_frac,nonmember_frac\n";
  for (std::size_t b = 0; b < bin_left.size(); ++b) {
    std::string line;
    textio::append_double(line, bin_left[b]);
    line.push_back(',');
    textio::append_double(line, bin_right[b]);
    line.push_back(',');
    textio::append_double(line, member_frac[b]);
    line.push_back(',');
    textio::append_double(line, nonmember_frac[b]);
    line.push_back('\n');
    out << line;
  }
}

}  // namespace dmp
