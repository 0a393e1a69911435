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

#include "steinkit/parallel_kernels.hpp"

#include <omp.h>

#include "steinkit/kernels.hpp"

namespace steinkit {

namespace {

void check_bandwidth(double h) { require(std::isfinite(h) && h > 0.0, "bandwidth must be positive"); }

inline void gram_row(const Matrix& x, const Matrix& y, double h, Eigen::Index i, Matrix& out) {
  const Eigen::Index d = x.cols();
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    out(i, j) = std::exp(-detail::squared_distance(x.row(i).data(), y.row(j).data(), d) / h);
  }
}

inline void direction_row(const Matrix& src, const Matrix& scores, const Vector& a,
                          const Matrix& tgt, double h, Eigen::Index i, Matrix& out) {
  const Eigen::Index d = src.cols();
  const double* y = tgt.row(i).data();
  double* o = out.row(i).data();
  for (Eigen::Index k = 0; k < d; ++k) {
    o[k] = 0.0;
  }
  for (Eigen::Index j = 0; j < src.rows(); ++j) {
    const double* x = src.row(j).data();
    const double* s = scores.row(j).data();
    const double kxy = std::exp(-detail::squared_distance(x, y, d) / h);
    const double c = a[j] * kxy;
    for (Eigen::Index k = 0; k < d; ++k) {
      o[k] += c * (s[k] - 2.0 / h * (x[k] - y[k]));
    }
  }
}

inline void stein_row(const Matrix& x, const Matrix& s, double h, Eigen::Index i, Matrix& out) {
  const Eigen::Index d = x.cols();
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    out(i, j) = detail::stein_kernel(x.row(i).data(), x.row(j).data(), s.row(i).data(),
                                     s.row(j).data(), d, h);
  }
}

void check_direction_args(const Matrix& src, const Matrix& scores, const Vector& a,
                          const Matrix& tgt, double h) {
  check_bandwidth(h);
  require(scores.rows() == src.rows() && scores.cols() == src.cols(), "score shape mismatch");
  require(a.size() == src.rows(), "coefficient count mismatch");
  require(tgt.cols() == src.cols(), "target dimension mismatch");
}

}  // namespace

namespace serial {

Matrix rbf_gram(const Matrix& x, const Matrix& y, double h) {
  check_bandwidth(h);
  require(x.cols() == y.cols(), "dimension mismatch");
  Matrix out(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    gram_row(x, y, h, i, out);
  }
  return out;
}

Matrix stein_direction(const Matrix& sources, const Matrix& source_scores, const Vector& coeffs,
                       const Matrix& targets, double h) {
  check_direction_args(sources, source_scores, coeffs, targets, h);
  Matrix out(targets.rows(), targets.cols());
  for (Eigen::Index i = 0; i < targets.rows(); ++i) {
    direction_row(sources, source_scores, coeffs, targets, h, i, out);
  }
  return out;
}

Matrix stein_kernel_matrix(const Matrix& x, const Matrix& scores, double h) {
  check_bandwidth(h);
  require(scores.rows() == x.rows() && scores.cols() == x.cols(), "score shape mismatch");
  Matrix out(x.rows(), x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    stein_row(x, scores, h, i, out);
  }
  return out;
}

}  // namespace serial

namespace omp {

Matrix rbf_gram(const Matrix& x, const Matrix& y, double h) {
  check_bandwidth(h);
  require(x.cols() == y.cols(), "dimension mismatch");
  Matrix out(x.rows(), y.rows());
  const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    gram_row(x, y, h, i, out);
  }
  return out;
}

Matrix stein_direction(const Matrix& sources, const Matrix& source_scores, const Vector& coeffs,
                       const Matrix& targets, double h) {
  check_direction_args(sources, source_scores, coeffs, targets, h);
  Matrix out(targets.rows(), targets.cols());
  const Eigen::Index n = targets.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    direction_row(sources, source_scores, coeffs, targets, h, i, out);
  }
  return out;
}

Matrix stein_kernel_matrix(const Matrix& x, const Matrix& scores, double h) {
  check_bandwidth(h);
  require(scores.rows() == x.rows() && scores.cols() == x.cols(), "score shape mismatch");
  Matrix out(x.rows(), x.rows());
  const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    stein_row(x, scores, h, i, out);
  }
  return out;
}

}  // namespace omp

void set_num_threads(int n) {
  if (n >= 1) {
    omp_set_num_threads(n);
  }
}

}  // namespace steinkit
