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

#include "steinkit/gof.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "steinkit/parallel_kernels.hpp"

namespace steinkit {

GofStatistic gof_statistic_continuous(const Matrix& x_data, const ContinuousParameterization& param,
                                      const GofOptions& options) {
  require(x_data.rows() >= 2, "goodness-of-fit needs at least two data points");
  GofStatistic out;
  out.continuous = x_data;
  if (options.bandwidth) {
    out.bandwidth = *options.bandwidth;
  } else {
    const double med = median_distance(x_data);
    out.bandwidth = med * med;
  }
  const Surrogate rho = make_surrogate(param, options.surrogate, options.tau, options.lambda);
  out.kernel = gf_stein_kernel_matrix(
      x_data, rho, [&param](const Vector& x) { return param.pc_log_density(x); }, out.bandwidth);
  out.value = u_statistic(out.kernel.scaled) * std::exp(out.kernel.log_scale);
  return out;
}

GofStatistic gof_statistic(const Matrix& z_data, const DiscreteTarget& null_target,
                           const GofOptions& options, Rng& rng) {
  const ContinuousParameterization param(null_target);
  return gof_statistic_continuous(continuize_data(z_data, param, rng), param, options);
}

Vector bootstrap_null(const Matrix& kernel_matrix, int m, const Rng& rng) {
  require(m >= 1, "need at least one bootstrap replicate");
  const Eigen::Index n = kernel_matrix.rows();
  require(n >= 1 && n == kernel_matrix.cols(), "bootstrap needs a square matrix");
  Vector out(m);
  if (n == 1) {
    out.setZero();
    return out;
  }
  const Eigen::MatrixXd k = kernel_matrix;
  const Vector diag = k.diagonal();
  constexpr int kBatch = 64;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int start = 0; start < m; start += kBatch) {
    const int count = std::min(kBatch, m - start);
    Eigen::MatrixXd v = Eigen::MatrixXd::Constant(n, count, -inv_n);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < count; ++r) {
      Rng stream = rng.split(static_cast<std::uint64_t>(start + r));
      for (Eigen::Index draw = 0; draw < n; ++draw) {
        v(static_cast<Eigen::Index>(stream.uniform_index(static_cast<std::size_t>(n))), r) += inv_n;
      }
    }
    const Eigen::MatrixXd kv = k * v;
    for (int r = 0; r < count; ++r) {
      const double quad = v.col(r).dot(kv.col(r));
      const double self = v.col(r).cwiseAbs2().dot(diag);
      out[start + r] = quad - self;
    }
  }
  return out;
}

TestReport make_report(double statistic, const Vector& replicates, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  const Eigen::Index m = replicates.size();
  require(m >= 1, "need bootstrap replicates");
  TestReport rep;
  rep.statistic = statistic;
  rep.replicates = static_cast<int>(m);
  rep.alpha = alpha;
  const auto r = (replicates.array() >= statistic).count();
  rep.p_value = (static_cast<double>(r) + 1.0) / (static_cast<double>(m) + 1.0);
  rep.reject = rep.p_value < alpha;
  // Reject iff r <= R with R = ceil(alpha (m + 1)) - 2, i.e. iff the statistic
  // exceeds the (R + 1)-th largest replicate.
  const auto big_r = static_cast<Eigen::Index>(std::ceil(alpha * (static_cast<double>(m) + 1.0))) - 2;
  if (big_r < 0) {
    rep.critical_value = std::numeric_limits<double>::infinity();
  } else if (big_r >= m) {
    rep.critical_value = -std::numeric_limits<double>::infinity();
  } else {
    Vector sorted = replicates;
    std::sort(sorted.data(), sorted.data() + m, std::greater<>());
    rep.critical_value = sorted[big_r];
  }
  rep.replicate_mean = replicates.mean();
  rep.replicate_sd = m > 1 ? std::sqrt((replicates.array() - rep.replicate_mean).square().sum() /
                                       static_cast<double>(m - 1))
                           : 0.0;
  return rep;
}

TestReport gof_test(const Matrix& z_data, const DiscreteTarget& null_target,
                    const GofOptions& options, std::uint64_t seed) {
  Rng continuize_rng(seed, 1);
  const GofStatistic stat = gof_statistic(z_data, null_target, options, continuize_rng);
  const Vector reps = bootstrap_null(stat.kernel.scaled, options.replicates, Rng(seed, 2)) *
                      std::exp(stat.kernel.log_scale);
  TestReport rep = make_report(stat.value, reps, options.alpha);
  rep.seed = seed;
  rep.bandwidth = stat.bandwidth;
  return rep;
}

double mmd_hamming(const Matrix& z1, const Matrix& z2) {
  require(z1.cols() == z2.cols() && z1.cols() >= 1, "sample sets must share a dimension");
  require(z1.rows() >= 1 && z2.rows() >= 1, "sample sets must be nonempty");
  const double d = static_cast<double>(z1.cols());
  auto mean_kernel = [d](const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.rows(); ++j) {
        const auto diff = (a.row(i).array() != b.row(j).array()).count();
        s += std::exp(-static_cast<double>(diff) / d);
      }
    }
    return s / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
  };
  return mean_kernel(z1, z1) + mean_kernel(z2, z2) - 2.0 * mean_kernel(z1, z2);
}

double weighted_mmd(const WeightedSample& x, const Matrix& y, double h) {
  require(x.positions.cols() == y.cols(), "sample dimensions differ");
  require(y.rows() >= 1 && x.positions.rows() >= 1, "sample sets must be nonempty");
  const Vector& w = x.normalized;
  const double m = static_cast<double>(y.rows());
  const Matrix kxx = omp::rbf_gram(x.positions, x.positions, h);
  const Matrix kxy = omp::rbf_gram(x.positions, y, h);
  const Matrix kyy = omp::rbf_gram(y, y, h);
  return w.dot(kxx * w) - 2.0 / m * (w.transpose() * kxy).sum() + kyy.sum() / (m * m);
}

}  // namespace steinkit
