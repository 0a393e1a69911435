// Copyright 2026 The steinkit Authors.
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

#ifndef STEINKIT_COMMON_HPP
#define STEINKIT_COMMON_HPP

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace steinkit {

/// Column vector of doubles.
using Vector = Eigen::VectorXd;

/// Dense row-major matrix. Particle sets are stored one particle per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ErrorKind {
  kInvalidArgument,
  kDegenerateEnsemble,
  kUnsupportedOperation,
  kNumericalOverflow,
  kSingularTransform,
  kInvalidApproximation,
  kDegenerateWeights,
  kResourceLimit,
  kInvalidLambda,
  kNumerical,
};

/// Stable identifier used in machine-parsable error lines.
std::string_view to_string(ErrorKind kind);

/// Single exception type for the library. `kind()` classifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  /// True for failures raised by numerics rather than by bad inputs.
  [[nodiscard]] bool is_numerical() const noexcept;

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) {
    fail(ErrorKind::kInvalidArgument, what);
  }
}

/// log(sum(exp(v))) without overflow. Returns -inf for an empty or all -inf input.
double log_sum_exp(const Vector& v);

}  // namespace steinkit

#endif  // STEINKIT_COMMON_HPP
