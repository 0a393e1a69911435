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


#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "steinkit/kernels.hpp"
#include "steinkit/parallel_kernels.hpp"
#include "steinkit/rng.hpp"

namespace steinkit {
namespace {

TEST(RbfEval, IdentityIsOne) {
  const Vector x = vec({0.3, -1.2, 4.0});
  EXPECT_DOUBLE_EQ(rbf_eval(x, x, 0.7), 1.0);
}

TEST(RbfEval, AnalyticValues) {
  EXPECT_NEAR(rbf_eval(vec({0.0}), vec({1.0}), 1.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(rbf_eval(vec({0.0, 0.0}), vec({1.0, 1.0}), 2.0), std::exp(-1.0), 1e-15);
}

TEST(RbfEval, RejectsBadInput) {
  EXPECT_STEINKIT_ERROR(rbf_eval(vec({0.0}), vec({1.0}), 0.0), ErrorKind::kInvalidArgument);
  EXPECT_STEINKIT_ERROR(rbf_eval(vec({0.0}), vec({1.0}), -1.0), ErrorKind::kInvalidArgument);
  EXPECT_STEINKIT_ERROR(rbf_eval(vec({std::numeric_limits<double>::quiet_NaN()}), vec({1.0}), 1.0),
                        ErrorKind::kInvalidArgument);
  EXPECT_STEINKIT_ERROR(rbf_eval(vec({0.0}), vec({INFINITY}), 1.0), ErrorKind::kInvalidArgument);
}

TEST(RbfEval, SymmetricAndInUnitInterval) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vector x = rng.normal_vector(4);
    const Vector y = rng.normal_vector(4);
    const double h = 0.1 + rng.uniform(0.0, 3.0);
    const double k = rbf_eval(x, y, h);
    EXPECT_EQ(k, rbf_eval(y, x, h));
    EXPECT_GT(k, 0.0);
    EXPECT_LE(k, 1.0);
  }
}

TEST(RbfGradX, ZeroAtCoincidentPoints) {
  const Vector x = vec({1.0, 2.0});
  EXPECT_EQ(rbf_grad_x(x, x, 1.3), Vector::Zero(2));
}

TEST(RbfGradX, AnalyticValue) {
  EXPECT_NEAR(rbf_grad_x(vec({1.0}), vec({0.0}), 1.0)[0], -2.0 * std::exp(-1.0), 1e-15);
}

TEST(RbfGradX, MatchesFiniteDifferences) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Vector x = rng.normal_vector(3);
    const Vector y = rng.normal_vector(3);
    const double h = 0.5 + rng.uniform();
    const auto f = [&](const oracle::Vec& z) { return rbf_eval(z, y, h); };
    const Vector fd = oracle::gradient(f, x, 1e-6);
    EXPECT_LT((rbf_grad_x(x, y, h) - fd).norm() / std::max(fd.norm(), 1e-3), 1e-6);
  }
}

TEST(RbfGradX, AntisymmetricInArguments) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Vector x = rng.normal_vector(2);
    const Vector y = rng.normal_vector(2);
    EXPECT_LT((rbf_grad_x(x, y, 1.1) + rbf_grad_y(x, y, 1.1)).norm(), 1e-15);
    EXPECT_LT((rbf_grad_x(x, y, 1.1) + rbf_grad_x(y, x, 1.1)).norm(), 1e-15);
  }
}

TEST(RbfGradXyTrace, MatchesMixedFiniteDifferences) {
  Rng rng(4);
  const Vector x = rng.normal_vector(3);
  const Vector y = rng.normal_vector(3);
  const double h = 1.4;
  const auto gx = [&](const oracle::Vec& yy) { return oracle::Vec(rbf_grad_x(x, yy, h)); };
  const oracle::Mat j = oracle::jacobian(gx, y, 1e-6);
  EXPECT_NEAR(rbf_grad_xy_trace(x, y, h), j.trace(), 1e-7);
}

TEST(MedianBandwidth, TwoPoints) {
  Matrix pts(2, 1);
  pts << 0.0, 2.0;
  EXPECT_NEAR(median_bandwidth(pts), 4.0 / (2.0 * std::log(3.0)), 1e-12);
  EXPECT_NEAR(median_bandwidth(pts), 1.820478, 1e-6);
}

TEST(MedianBandwidth, ThreeCollinearPoints) {
  Matrix pts(3, 1);
  pts << 0.0, 1.0, 2.0;
  // Pairwise distances {1, 1, 2}.
  EXPECT_NEAR(median_bandwidth(pts), 1.0 / (2.0 * std::log(4.0)), 1e-12);
}

TEST(MedianBandwidth, EvenCountAveragesMiddlePair) {
  Matrix pts(4, 1);
  pts << 0.0, 1.0, 3.0, 7.0;
  // Distances {1, 3, 7, 2, 6, 4}: sorted 1 2 3 4 6 7, median 3.5.
  EXPECT_NEAR(median_bandwidth(pts), 3.5 * 3.5 / (2.0 * std::log(5.0)), 1e-12);
}

TEST(MedianBandwidth, DegenerateEnsembleRaises) {
  Matrix pts(4, 2);
  pts << 1, 1, 1, 1, 2, 2, 2, 2;
  // Distances {0, 0, 2x sqrt2, ...}: 0 0 r r r r, median r.
  EXPECT_GT(median_bandwidth(pts), 0.0);
  Matrix same = Matrix::Constant(3, 2, 0.5);
  EXPECT_STEINKIT_ERROR(median_bandwidth(same), ErrorKind::kDegenerateEnsemble);
  Matrix dup(4, 1);
  dup << 0.0, 0.0, 0.0, 1.0;
  // Distances {0, 0, 1, 0, 1, 1}: median 0.5 so still positive.
  EXPECT_GT(median_bandwidth(dup), 0.0);
  Matrix dup2(6, 1);
  dup2 << 0, 0, 0, 0, 0, 1;
  EXPECT_STEINKIT_ERROR(median_bandwidth(dup2), ErrorKind::kDegenerateEnsemble);
}

TEST(MedianBandwidth, TranslationInvariantAndQuadraticInScale) {
  Rng rng(5);
  const Matrix pts = rng.normal_matrix(30, 3);
  const double h = median_bandwidth(pts);
  const Matrix moved = pts.rowwise() + Eigen::RowVector3d(5.0, -2.0, 0.5);
  EXPECT_NEAR(median_bandwidth(moved), h, 1e-12 * h);
  EXPECT_NEAR(median_bandwidth(3.0 * pts), 9.0 * h, 1e-12 * h);
}

TEST(ResolveBandwidth, FixedOrMedian) {
  Matrix pts(2, 1);
  pts << 0.0, 2.0;
  EXPECT_EQ(resolve_bandwidth(KernelSpec::fixed(0.3), pts), 0.3);
  EXPECT_EQ(resolve_bandwidth(KernelSpec::median(), pts), median_bandwidth(pts));
  EXPECT_STEINKIT_ERROR(KernelSpec::fixed(0.0), ErrorKind::kInvalidArgument);
}

TEST(WeightedKernelEval, Examples) {
  const Vector x = vec({0.1, 0.2});
  const Vector y = vec({-0.4, 1.0});
  EXPECT_EQ(weighted_kernel_eval(x, y, 1.0, 1.0, 0.8), rbf_eval(x, y, 0.8));
  EXPECT_EQ(weighted_kernel_eval(x, y, 0.0, 5.0, 0.8), 0.0);
  EXPECT_DOUBLE_EQ(weighted_kernel_eval(x, x, 2.0, 3.0, 0.8), 6.0);
  EXPECT_STEINKIT_ERROR(weighted_kernel_eval(x, y, -1.0, 1.0, 0.8), ErrorKind::kInvalidArgument);
}

TEST(WeightedKernelEval, GramIsPositiveSemidefinite) {
  Rng rng(6);
  const int n = 40;
  const Matrix pts = rng.normal_matrix(n, 2);
  Eigen::MatrixXd g(n, n);
  std::vector<double> w(n);
  for (auto& wi : w) {
    wi = rng.uniform(0.0, 3.0);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      g(i, j) = weighted_kernel_eval(pts.row(i).transpose(), pts.row(j).transpose(),
                                     w[static_cast<std::size_t>(i)],
                                     w[static_cast<std::size_t>(j)], 0.9);
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * g.norm());
}

TEST(ParallelKernels, OmpMatchesSerialBitwise) {
  Rng rng(7);
  const Matrix x = rng.normal_matrix(57, 3);
  const Matrix y = rng.normal_matrix(31, 3);
  const Matrix s = rng.normal_matrix(57, 3);
  Vector a = rng.normal_vector(57);
  for (int threads : {1, 2, 4}) {
    set_num_threads(threads);
    EXPECT_EQ(serial::rbf_gram(x, y, 1.3), omp::rbf_gram(x, y, 1.3));
    EXPECT_EQ(serial::stein_direction(x, s, a, y, 1.3), omp::stein_direction(x, s, a, y, 1.3));
    EXPECT_EQ(serial::stein_kernel_matrix(x, s, 1.3), omp::stein_kernel_matrix(x, s, 1.3));
  }
}

TEST(ParallelKernels, AgreeWithPointwiseFunctions) {
  Rng rng(8);
  const Matrix x = rng.normal_matrix(6, 2);
  const Matrix y = rng.normal_matrix(4, 2);
  const Matrix s = rng.normal_matrix(6, 2);
  const Vector a = Vector::Constant(6, 1.0 / 6.0);
  const double h = 0.7;
  const Matrix g = omp::rbf_gram(x, y, h);
  const Matrix dir = omp::stein_direction(x, s, a, y, h);
  const oracle::Rbf r{h};
  for (int i = 0; i < 4; ++i) {
    Vector expect = Vector::Zero(2);
    for (int j = 0; j < 6; ++j) {
      const Vector xj = x.row(j).transpose();
      const Vector yi = y.row(i).transpose();
      EXPECT_NEAR(g(j, i), r.k(xj, yi), 1e-15);
      expect += a[j] * (s.row(j).transpose() * r.k(xj, yi) + r.dx(xj, yi));
    }
    EXPECT_LT((dir.row(i).transpose() - expect).norm(), 1e-14);
  }
}

}  // namespace
}  // namespace steinkit
