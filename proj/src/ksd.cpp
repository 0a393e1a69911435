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

#include "steinkit/ksd.hpp"

#include <algorithm>
#include <limits>

#include "steinkit/parallel_kernels.hpp"

namespace steinkit {

namespace {

void check_points(const Vector& x, const Vector& y, double h) {
  require(x.size() >= 1 && x.size() == y.size(), "points must share a positive dimension");
  require(std::isfinite(h) && h > 0.0, "bandwidth must be positive");
}

}  // namespace

double stein_kernel(const Vector& x, const Vector& y, const Vector& sx, const Vector& sy, double h) {
  check_points(x, y, h);
  require(sx.size() == x.size() && sy.size() == y.size(), "score dimension mismatch");
  return detail::stein_kernel(x.data(), y.data(), sx.data(), sy.data(), x.size(), h);
}

double stein_kernel(const Vector& x, const Vector& y, const ScoreFn& score, double h) {
  return stein_kernel(x, y, score(x), score(y), h);
}

double gf_stein_kernel(const Vector& x, const Vector& y, const Surrogate& surrogate,
                       const LogDensityFn& log_p, double h) {
  const double lwx = surrogate.log_density(x) - log_p(x);
  const double lwy = surrogate.log_density(y) - log_p(y);
  if (lwx == -std::numeric_limits<double>::infinity() ||
      lwy == -std::numeric_limits<double>::infinity()) {
    return 0.0;
  }
  return std::exp(lwx + lwy) * stein_kernel(x, y, surrogate.score(x), surrogate.score(y), h);
}

double alpha_stein_kernel(const Vector& x, const Vector& y, const LogDensityFn& log_p,
                          const ScoreFn& score, double alpha, double h) {
  check_points(x, y, h);
  const Vector sx = score(x);
  const Vector sy = score(y);
  const Eigen::Index d = x.size();
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
  const double a1 = alpha + 1.0;
  const double kxy = std::exp(-r2 / h);
  const double inner = kxy * (a1 * a1 * ss + a1 * (2.0 / h) * (sxr - syr) +
                              2.0 * static_cast<double>(d) / h - 4.0 * r2 / (h * h));
  return std::exp(alpha * (log_p(x) + log_p(y))) * inner;
}

double v_statistic(const Matrix& kernel_matrix) {
  require(kernel_matrix.rows() >= 1 && kernel_matrix.rows() == kernel_matrix.cols(),
          "V-statistic needs a nonempty square matrix");
  return kernel_matrix.mean();
}

double u_statistic(const Matrix& kernel_matrix) {
  const Eigen::Index n = kernel_matrix.rows();
  require(n >= 2 && n == kernel_matrix.cols(), "U-statistic needs n >= 2");
  const double off = kernel_matrix.sum() - kernel_matrix.trace();
  return off / (static_cast<double>(n) * static_cast<double>(n - 1));
}

namespace {

Matrix pair_matrix(const Matrix& points, const PairKernelFn& kernel) {
  const Eigen::Index n = points.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector xi = points.row(i).transpose();
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = kernel(xi, points.row(j).transpose());
    }
  }
  return k;
}

}  // namespace

double v_statistic(const Matrix& points, const PairKernelFn& kernel) {
  require(points.rows() >= 1, "V-statistic needs n >= 1");
  return v_statistic(pair_matrix(points, kernel));
}

double u_statistic(const Matrix& points, const PairKernelFn& kernel) {
  require(points.rows() >= 2, "U-statistic needs n >= 2");
  return u_statistic(pair_matrix(points, kernel));
}

Matrix stein_kernel_matrix(const Matrix& points, const ContinuousTarget& target, double h) {
  return omp::stein_kernel_matrix(points, target.scores(points), h);
}

Matrix GfKernelMatrix::full() const { return std::exp(log_scale) * scaled; }

GfKernelMatrix gf_stein_kernel_matrix(const Matrix& points, const Surrogate& surrogate,
                                      const LogDensityFn& log_p, double h) {
  const Eigen::Index n = points.rows();
  require(n >= 1, "need at least one point");
  GfKernelMatrix out;
  out.log_w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector xi = points.row(i).transpose();
    out.log_w[i] = surrogate.log_density(xi) - log_p(xi);
  }
  const double m = out.log_w.maxCoeff();
  if (!std::isfinite(m)) {
    fail(ErrorKind::kDegenerateWeights, "importance weights are all zero or non-finite");
  }
  out.log_scale = 2.0 * m;
  const Vector w = (out.log_w.array() - m).exp();
  out.scaled = omp::stein_kernel_matrix(points, surrogate.scores(points), h);
  out.scaled = w.asDiagonal() * out.scaled * w.asDiagonal();
  return out;
}

Vector project_to_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  require(n >= 1, "cannot project an empty vector");
  Vector u = v;
  std::sort(u.data(), u.data() + n, std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) {
      theta = t;
    }
  }
  return (v.array() - theta).max(0.0);
}

BbisResult bbis_weights(const Matrix& kernel_matrix, const BbisOptions& options) {
  const Eigen::Index n = kernel_matrix.rows();
  require(n >= 1 && n == kernel_matrix.cols(), "BBIS needs a nonempty square matrix");
  require(kernel_matrix.allFinite(), "BBIS matrix must be finite");
  require(options.max_iter >= 1 && options.tol >= 0.0, "invalid BBIS options");
  const Eigen::MatrixXd k = 0.5 * (kernel_matrix + kernel_matrix.transpose());
  auto objective = [&k](const Vector& u) { return u.dot(k * u); };

  BbisResult res;
  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  double fx = objective(x);
  res.accepted.push_back(fx);
  const double lipschitz = 2.0 * k.cwiseAbs().rowwise().sum().maxCoeff();
  if (n == 1 || !(lipschitz > 0.0)) {
    res.weights = x;
    res.objective = fx;
    res.converged = true;
    return res;
  }
  double step = 1.0 / lipschitz;
  Vector x_prev = x;
  Vector y = x;
  double t = 1.0;
  for (int it = 1; it <= options.max_iter; ++it) {
    res.iterations = it;
    Vector z = project_to_simplex(y - step * (2.0 * (k * y)));
    double fz = objective(z);
    if (fz > fx) {
      // Momentum overshoot: restart from x with a plain step; shrink the step
      // only if that plain step still increases the objective.
      z = project_to_simplex(x - step * (2.0 * (k * x)));
      fz = objective(z);
      while (fz > fx && step > 1e-300) {
        step *= 0.5;
        z = project_to_simplex(x - step * (2.0 * (k * x)));
        fz = objective(z);
      }
      t = 1.0;
      y = x;
      if (fz > fx) {
        continue;
      }
    }
    const double decrease = fx - fz;
    x_prev = x;
    x = z;
    fx = fz;
    res.accepted.push_back(fx);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    if (decrease <= options.tol * std::max(std::abs(fx), std::numeric_limits<double>::min())) {
      res.converged = true;
      break;
    }
  }
  res.weights = x;
  res.objective = fx;
  return res;
}

BbisResult bbis_weights(const Matrix& points, const Surrogate& surrogate,
                        const LogDensityFn& log_p, double h, const BbisOptions& options) {
  // The minimizer does not depend on the positive scale factor.
  BbisResult res = bbis_weights(gf_stein_kernel_matrix(points, surrogate, log_p, h).scaled, options);
  return res;
}

double bbis_error_bound(const Vector& weights, const Matrix& kernel_matrix) {
  require(weights.size() == kernel_matrix.rows() && kernel_matrix.rows() == kernel_matrix.cols(),
          "weights and matrix sizes differ");
  const double q = weights.dot(kernel_matrix * weights);
  if (q < -1e-10) {
    fail(ErrorKind::kNumerical, "negative quadratic form in the BBIS bound");
  }
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace steinkit
