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

#ifndef STEINKIT_KERNELS_HPP
#define STEINKIT_KERNELS_HPP

#include <cmath>
#include <optional>

#include "steinkit/common.hpp"

namespace steinkit {

/// RBF kernel k(x, y) = exp(-|x - y|^2 / h).
///
/// Note the bandwidth convention: h divides the squared distance directly,
/// there is no 2h^2 in the denominator.
struct KernelSpec {
  /// Explicit bandwidth, or empty for the median heuristic.
  std::optional<double> bandwidth;

  static KernelSpec median() { return KernelSpec{}; }
  static KernelSpec fixed(double h);

  [[nodiscard]] bool is_median() const noexcept { return !bandwidth.has_value(); }
};

double rbf_eval(const Vector& x, const Vector& y, double h);

/// Gradient of k(x, y) in its first argument: -(2/h)(x - y) k(x, y).
Vector rbf_grad_x(const Vector& x, const Vector& y, double h);

/// Gradient of k(x, y) in its second argument: (2/h)(x - y) k(x, y).
Vector rbf_grad_y(const Vector& x, const Vector& y, double h);

/// Trace of the mixed Hessian: k(x, y) (2d/h - 4|x - y|^2 / h^2).
double rbf_grad_xy_trace(const Vector& x, const Vector& y, double h);

/// med^2 / (2 ln(n + 1)) where med is the exact median pairwise distance.
/// Median of the n(n-1)/2 pairwise Euclidean distances (exact selection).
/// Throws degenerate-ensemble when it is zero.
double median_distance(const Matrix& points);

double median_bandwidth(const Matrix& points);

/// Returns the explicit bandwidth or the median heuristic over `points`.
double resolve_bandwidth(const KernelSpec& spec, const Matrix& points);

/// w_x w_y k(x, y).
double weighted_kernel_eval(const Vector& x, const Vector& y, double w_x, double w_y, double h);

namespace detail {

// Unchecked building blocks shared by the serial and OpenMP kernels. Inputs
// are raw row pointers of length d.

inline double squared_distance(const double* x, const double* y, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double r = x[k] - y[k];
    s += r * r;
  }
  return s;
}

// Score-based Stein kernel with scores sx, sy.
inline double stein_kernel(const double* x, const double* y, const double* sx, const double* sy,
                           Eigen::Index d, double h) {
  double r2 = 0.0;
  double ss = 0.0;
  double sxr = 0.0;
  double syr = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double r = x[k] - y[k];
    r2 += r * r;
    ss += sx[k] * sy[k];
    sxr += sx[k] * r;
    syr += sy[k] * r;
  }
  const double kxy = std::exp(-r2 / h);
  return kxy * (ss + (2.0 / h) * (sxr - syr) + 2.0 * static_cast<double>(d) / h -
                4.0 * r2 / (h * h));
}

}  // namespace detail

}  // namespace steinkit

#endif  // STEINKIT_KERNELS_HPP
