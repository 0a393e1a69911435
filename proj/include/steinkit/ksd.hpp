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

#ifndef STEINKIT_KSD_HPP
#define STEINKIT_KSD_HPP

#include <functional>
#include <vector>

#include "steinkit/gfsvgd.hpp"

namespace steinkit {

using PairKernelFn = std::function<double(const Vector&, const Vector&)>;

/// kappa_p(x, y) for the RBF kernel given the scores at x and y.
double stein_kernel(const Vector& x, const Vector& y, const Vector& sx, const Vector& sy, double h);
double stein_kernel(const Vector& x, const Vector& y, const ScoreFn& score, double h);

/// w(x) kappa_rho(x, y) w(y) with w = rho / p. Uses only log p.
double gf_stein_kernel(const Vector& x, const Vector& y, const Surrogate& surrogate,
                       const LogDensityFn& log_p, double h);

/// p(x)^a p(y)^a [(a+1)^2 s_x'k s_y + (a+1) s_x' grad_y k + (a+1) s_y' grad_x k + tr].
/// p is the unnormalized density, so the overall scale is arbitrary.
double alpha_stein_kernel(const Vector& x, const Vector& y, const LogDensityFn& log_p,
                          const ScoreFn& score, double alpha, double h);

double v_statistic(const Matrix& kernel_matrix);
double u_statistic(const Matrix& kernel_matrix);
double v_statistic(const Matrix& points, const PairKernelFn& kernel);
double u_statistic(const Matrix& points, const PairKernelFn& kernel);

/// kappa_p over all pairs of rows.
Matrix stein_kernel_matrix(const Matrix& points, const ContinuousTarget& target, double h);

/// Gradient-free Stein matrix stored as exp(log_scale) * scaled.
///
/// Weights are shifted by their maximum before the pairwise products, so
/// `scaled` stays finite when rho / p is tiny or huge.
struct GfKernelMatrix {
  Matrix scaled;
  double log_scale = 0.0;
  Vector log_w;

  [[nodiscard]] Matrix full() const;
};

GfKernelMatrix gf_stein_kernel_matrix(const Matrix& points, const Surrogate& surrogate,
                                      const LogDensityFn& log_p, double h);

/// Euclidean projection onto {u : u >= 0, sum u = 1}.
Vector project_to_simplex(const Vector& v);

struct BbisOptions {
  int max_iter = 10000;
  double tol = 1e-10;
};

struct BbisResult {
  Vector weights;
  double objective = 0.0;        // u' K u for the returned weights
  int iterations = 0;
  bool converged = false;        // false means max_iter was hit
  std::vector<double> accepted;  // objective after each accepted iterate
};

/// min u'Ku on the simplex by monotone accelerated projected gradient.
BbisResult bbis_weights(const Matrix& kernel_matrix, const BbisOptions& options = {});
BbisResult bbis_weights(const Matrix& points, const Surrogate& surrogate,
                        const LogDensityFn& log_p, double h, const BbisOptions& options = {});

/// sqrt(u' K u). The kernel-dependent constant is not included.
double bbis_error_bound(const Vector& weights, const Matrix& kernel_matrix);

}  // namespace steinkit

#endif  // STEINKIT_KSD_HPP
