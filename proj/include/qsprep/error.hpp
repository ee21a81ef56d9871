// Copyright 2026 The qsprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
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
#include <utility>
#include <vector>

namespace qsprep {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or qubit counts that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented invariant (norm, trace, Hermiticity, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Pivoted Cholesky met a pivot below the negative tolerance.
class IndefiniteMatrixError : public Error {
 public:
  using Error::Error;
};

/// Incomplete Cholesky failed even after all diagonal-shift retries.
class BreakdownError : public Error {
 public:
  BreakdownError(const std::string& what, std::vector<double> shifts)
      : Error(what), shifts_(std::move(shifts)) {}

  /// Diagonal shifts attempted, in order (0 is the unshifted attempt).
  const std::vector<double>& shifts() const noexcept { return shifts_; }

 private:
  std::vector<double> shifts_;
};

/// Malformed gates, unsupported operations on a circuit, or width limits.
class CircuitError : public Error {
 public:
  using Error::Error;
};

/// Text that is not in the supported QASM subset.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qsprep
