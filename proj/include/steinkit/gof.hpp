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

#ifndef STEINKIT_GOF_HPP
#define STEINKIT_GOF_HPP

#include <cstdint>
#include <optional>

#include "steinkit/discrete.hpp"
#include "steinkit/ksd.hpp"
#include "steinkit/steinis.hpp"

namespace steinkit {

struct GofOptions {
  double alpha = 0.05;
  int replicates = 1000;
  SurrogateMode surrogate = SurrogateMode::kBase;
  std::optional<double> bandwidth;  // med^2 of the continuized data if empty
  double tau = 10.0;
  std::optional<double> lambda;
};

struct TestReport {
  double statistic = 0.0;
  int replicates = 0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  double bandwidth = 0.0;
  double replicate_mean = 0.0;
  double replicate_sd = 0.0;
};

struct GofStatistic {
  double value = 0.0;     // U-statistic of the weighted Stein matrix
  double bandwidth = 0.0;
  GfKernelMatrix kernel;  // reused by the bootstrap
  Matrix continuous;      // continuized data
};

/// Continuizes the data, builds K~ for p_c with the chosen surrogate and
/// returns its off-diagonal U-statistic.
GofStatistic gof_statistic(const Matrix& z_data, const DiscreteTarget& null_target,
                           const GofOptions& options, Rng& rng);

/// Same, from already continuized data.
GofStatistic gof_statistic_continuous(const Matrix& x_data, const ContinuousParameterization& param,
                                      const GofOptions& options);

/// m replicates of sum_{i != j} (u_i - 1/n) K_ij (u_j - 1/n) with
/// u ~ Multinomial(n; 1/n) / n. Replicate r draws from `rng.split(r)`.
Vector bootstrap_null(const Matrix& kernel_matrix, int m, const Rng& rng);

/// Level-alpha test. Continuization uses stream 1 of `seed`, the bootstrap stream 2.
TestReport gof_test(const Matrix& z_data, const DiscreteTarget& null_target,
                    const GofOptions& options, std::uint64_t seed);

/// Builds a report from a statistic and its bootstrap replicates. The critical
/// value is the order statistic that makes reject, p < alpha and
/// statistic > critical agree.
TestReport make_report(double statistic, const Vector& replicates, double alpha);

/// Biased MMD^2 with k(z, z') = exp(-Hamming(z, z') / d).
double mmd_hamming(const Matrix& z1, const Matrix& z2);

/// Importance-weighted MMD^2 between a weighted sample and exact draws y.
double weighted_mmd(const WeightedSample& x, const Matrix& y, double h);

}  // namespace steinkit

#endif  // STEINKIT_GOF_HPP
