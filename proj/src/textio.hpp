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

#include <cstdio>
#include <cstdlib>
#include <string>

namespace dmp::textio {

/// Appends a double with 17 significant digits (exact 64-bit round trip).
inline void append_double(std::string& out, double v) {
  if (v == 0.0) {  // covers the 0/1 fast path of binary feature files
    out.push_back('0');
    return;
  }
  if (v == 1.0) {
    out.push_back('1');
    return;
  }
  char buf[40];
  int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

inline std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

/// Parses a double starting at *p; advances *p past the number.
/// Returns false if no number was consumed.
inline bool parse_double(const char** p, double* out) {
  char* end = nullptr;
  *out = std::strtod(*p, &end);
  if (end == *p) return false;
  *p = end;
  return true;
}

}  // namespace dmp::textio
