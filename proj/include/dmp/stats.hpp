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
#include <span>
#include <vector>

namespace dmp {

/// Sample Pearson correlation. Throws NumericalError if either column has
/// zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

/// Median of a copy of the values (mean of the middle two for even counts).
double median(std::span<const double> values);

/// Side-by-side member/non-member histogram over a shared range.
struct Histogram {
  std::vector<double> bin_left, bin_right;
  std::vector<double> member_frac, nonmember_frac;

  // CSV columns: bin_left,bin_right,member_frac,nonmember_frac
  void write_csv(std::ostream& out) const;
};

Histogram make_histogram(std::span<const double> member_values,
                         std::span<const double> nonmember_values,
                         std::size_t n_bins = 24);

}  // namespace dmp
