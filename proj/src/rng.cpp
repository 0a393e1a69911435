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

#include "steinkit/rng.hpp"

#include <cmath>
#include <limits>

namespace steinkit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return "invalid-argument";
    case ErrorKind::kDegenerateEnsemble:
      return "degenerate-ensemble";
    case ErrorKind::kUnsupportedOperation:
      return "unsupported-operation";
    case ErrorKind::kNumericalOverflow:
      return "numerical-overflow";
    case ErrorKind::kSingularTransform:
      return "singular-transform";
    case ErrorKind::kInvalidApproximation:
      return "invalid-approximation";
    case ErrorKind::kDegenerateWeights:
      return "degenerate-weights";
    case ErrorKind::kResourceLimit:
      return "resource-limit";
    case ErrorKind::kInvalidLambda:
      return "invalid-lambda";
    case ErrorKind::kNumerical:
      return "numerical";
  }
  return "unknown";
}

bool Error::is_numerical() const noexcept {
  switch (kind_) {
    case ErrorKind::kNumericalOverflow:
    case ErrorKind::kSingularTransform:
    case ErrorKind::kInvalidApproximation:
    case ErrorKind::kDegenerateWeights:
    case ErrorKind::kDegenerateEnsemble:
    case ErrorKind::kNumerical:
      return true;
    default:
      return false;
  }
}

double log_sum_exp(const Vector& v) {
  if (v.size() == 0) {
    return -std::numeric_limits<double>::infinity();
  }
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) {
    return m;
  }
  return m + std::log((v.array() - m).exp().sum());
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t master_seed, std::uint64_t stream_id)
    : key_(splitmix64(splitmix64(master_seed) ^ splitmix64(~stream_id))), engine_(key_) {}

Rng Rng::split(std::uint64_t stream_id) const { return Rng(key_, stream_id); }

double Rng::uniform() { return uniform_(engine_); }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }

double Rng::normal() { return normal_(engine_); }

std::size_t Rng::uniform_index(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

Vector Rng::normal_vector(Eigen::Index d) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    v[i] = normal();
  }
  return v;
}

Matrix Rng::normal_matrix(Eigen::Index n, Eigen::Index d) {
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      m(i, j) = normal();
    }
  }
  return m;
}

}  // namespace steinkit
