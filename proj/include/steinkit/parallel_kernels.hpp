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

#ifndef STEINKIT_PARALLEL_KERNELS_HPP
#define STEINKIT_PARALLEL_KERNELS_HPP

#include "steinkit/common.hpp"

// Pairwise kernel assemblies in two flavors with identical arithmetic.
// `serial` is the reference; `omp` splits output rows across threads. Each
// output entry is produced by one thread with a fixed summation order, so the
// two agree bit for bit at any thread count.

namespace steinkit {

#define STEINKIT_DECLARE_KERNELS                                                            \
  /* G(i, j) = k(x_i, y_j). */                                                              \
  Matrix rbf_gram(const Matrix& x, const Matrix& y, double h);                             \
  /* Row i = sum_j a_j [s_j k(x_j, y_i) + grad_{x_j} k(x_j, y_i)], j in fixed order. */    \
  Matrix stein_direction(const Matrix& sources, const Matrix& source_scores,              \
                         const Vector& coeffs, const Matrix& targets, double h);          \
  /* K(i, j) = kappa_p(x_i, x_j) given scores s_i. */                                       \
  Matrix stein_kernel_matrix(const Matrix& x, const Matrix& scores, double h);

namespace serial {
STEINKIT_DECLARE_KERNELS
}  // namespace serial

namespace omp {
STEINKIT_DECLARE_KERNELS
}  // namespace omp

#undef STEINKIT_DECLARE_KERNELS

/// Sets the OpenMP team size used by the `omp` kernels. n < 1 is ignored.
void set_num_threads(int n);

}  // namespace steinkit

#endif  // STEINKIT_PARALLEL_KERNELS_HPP
