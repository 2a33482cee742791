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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dmp {

/// Argument violates an operation's precondition (dimension mismatch,
/// out-of-range parameter, infeasible request).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A text artifact could not be parsed. Carries the 1-based number of the
/// last line that was read (the offending line, or the last good one for
/// truncated files).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Training produced a non-finite loss. Names the epoch where it happened.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& msg, std::size_t epoch)
      : std::runtime_error(msg + " (epoch " + std::to_string(epoch) + ")"),
        epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Numerical failure: non-SPD Hessian after damping, undefined correlation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dmp
