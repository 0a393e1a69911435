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
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "steinkit/discrete.hpp"

namespace steinkit {
namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

ContinuousParameterization uniform_param(int k) {
  std::vector<double> states;
  for (int i = 0; i < k; ++i) {
    states.push_back(static_cast<double>(i));
  }
  return ContinuousParameterization(categorical_target(states, std::vector<double>(k, 1.0)));
}

TEST(InverseNormalCdf, Examples) {
  EXPECT_EQ(inverse_normal_cdf(0.5), 0.0);
  EXPECT_NEAR(inverse_normal_cdf(0.25), oracle::phi_inverse_bisection(0.25), 1e-12);
  EXPECT_NEAR(inverse_normal_cdf(0.25), -0.674490, 1e-6);
}

TEST(InverseNormalCdf, SymmetricAndAccurate) {
  for (double u : {1e-10, 1e-7, 1e-4, 0.01, 0.1, 0.3, 0.45, 0.5, 0.77, 0.99, 1.0 - 1e-10}) {
    const double x = inverse_normal_cdf(u);
    EXPECT_NEAR(phi(x), u, 1e-12) << u;
  }
  // Dyadic u keeps 1 - u exact.
  for (double u : {std::ldexp(1.0, -30), std::ldexp(1.0, -20), std::ldexp(1.0, -10), 0.125, 0.375}) {
    EXPECT_NEAR(inverse_normal_cdf(1.0 - u), -inverse_normal_cdf(u), 1e-12 * 7.0) << u;
  }
}

TEST(InverseNormalCdf, DomainErrors) {
  EXPECT_STEINKIT_ERROR(inverse_normal_cdf(0.0), ErrorKind::kInvalidArgument);
  EXPECT_STEINKIT_ERROR(inverse_normal_cdf(1.0), ErrorKind::kInvalidArgument);
  EXPECT_STEINKIT_ERROR(inverse_normal_cdf(-0.2), ErrorKind::kInvalidArgument);
}

TEST(EvenPartition, ThresholdsHaveEqualMass) {
  for (int k = 2; k <= 7; ++k) {
    const auto eta = uniform_param(k).thresholds();
    ASSERT_EQ(eta.size(), static_cast<std::size_t>(k - 1));
    for (int i = 0; i < k - 1; ++i) {
      EXPECT_NEAR(phi(eta[i]), (i + 1.0) / k, 1e-9);
      if (i > 0) {
        EXPECT_GT(eta[i], eta[i - 1]);
      }
    }
  }
}

TEST(GammaMap, BinaryIsSign) {
  const ContinuousParameterization param(
      categorical_target({-1.0, 1.0}, {1.0, 1.0}));
  EXPECT_EQ(gamma_map(vec({-0.3}), param)[0], -1.0);
  EXPECT_EQ(gamma_map(vec({0.0}), param)[0], 1.0);
  EXPECT_EQ(gamma_map(vec({2.0}), param)[0], 1.0);
}

TEST(GammaMap, FiveStatesMiddleAndFrequencies) {
  const ContinuousParameterization param = uniform_param(5);
  EXPECT_LT(inverse_normal_cdf(0.4), 0.0);
  EXPECT_EQ(gamma_map(vec({0.0}), param)[0], 2.0);
  Rng rng(110);
  std::vector<int> counts(5, 0);
  constexpr int kDraws = 1000000;
  for (int i = 0; i < kDraws; ++i) {
    ++counts[param.bin_of(rng.normal())];
  }
  for (int c : counts) {
    EXPECT_NEAR(c / static_cast<double>(kDraws), 0.2, 0.002);
  }
}

TEST(GammaMap, MultiDimensionalConcatenation) {
  IsingParams ip = ising_grid(1, 3, 0.1);
  const ContinuousParameterization param(ising_target(ip));
  EXPECT_EQ(gamma_map(vec({-1.0, 0.0, 3.0}), param), vec({-1.0, 1.0, 1.0}));
}

TEST(PcLogDensity, UniformTargetIsBasePlusConstant) {
  const ContinuousParameterization param = uniform_param(4);
  const double c = pc_log_density(vec({0.0}), param) - param.log_p0(vec({0.0}));
  for (double x : {-3.0, -0.5, 0.2, 1.7}) {
    EXPECT_NEAR(pc_log_density(vec({x}), param) - param.log_p0(vec({x})), c, 1e-14);
  }
}

TEST(PcLogDensity, ConstantShiftOfTarget) {
  DiscreteTarget t = categorical_target({0.0, 1.0, 2.0}, {0.25, 0.45, 0.3});
  DiscreteTarget u = t;
  u.log_mass = [f = t.log_mass](const Vector& z) { return f(z) + 3.25; };
  const ContinuousParameterization a(t);
  const ContinuousParameterization b(u);
  for (double x : {-2.0, 0.0, 0.9}) {
    EXPECT_NEAR(b.pc_log_density(vec({x})) - a.pc_log_density(vec({x})), 3.25, 1e-14);
  }
}

// Simpson integral of exp(pc_log_density) over [lo, hi].
double bin_integral(const ContinuousParameterization& param, double lo, double hi) {
  constexpr int kSteps = 20000;
  const double dx = (hi - lo) / kSteps;
  double s = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double w = (i == 0 || i == kSteps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    // Nudge the right end inside the bin; boundaries belong to the upper bin.
    const double x = i == kSteps ? hi - 1e-12 : lo + i * dx;
    s += w * std::exp(param.pc_log_density(vec({x})));
  }
  return s * dx / 3.0;
}

TEST(PcLogDensity, BinIntegralsReproduceMasses) {
  const std::vector<std::vector<double>> cases = {
      {0.25, 0.45, 0.3}, {0.7, 0.3}, {0.1, 0.2, 0.3, 0.1, 0.3}, {1.0, 2.0, 3.0, 4.0}};
  for (const auto& masses : cases) {
    std::vector<double> states;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      states.push_back(static_cast<double>(i));
    }
    const ContinuousParameterization param(categorical_target(states, masses));
    std::vector<double> edges = {-12.0};
    edges.insert(edges.end(), param.thresholds().begin(), param.thresholds().end());
    edges.push_back(12.0);
    std::vector<double> ints;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      ints.push_back(bin_integral(param, edges[i], edges[i + 1]));
      total += ints.back();
    }
    double mass_total = 0.0;
    for (double m : masses) {
      mass_total += m;
    }
    for (std::size_t i = 0; i < masses.size(); ++i) {
      EXPECT_NEAR(ints[i] / total, masses[i] / mass_total, 1e-6);
    }
  }
}

TEST(IsingSurrogate, NoCouplingIsIsotropicGaussian) {
  IsingParams ip;
  ip.dims = 3;
  ip.field = vec({0.5, -1.0, 0.0});
  const Surrogate s = ising_surrogate(ip, 2.0);
  const Vector x = vec({0.3, 0.1, -0.7});
  EXPECT_LT((s.score(x) - (ip.field - 2.0 * x)).norm(), 1e-15);
  EXPECT_NEAR(s.log_density(x) - s.log_density(ip.field / 2.0),
              -(x - ip.field / 2.0).squaredNorm(), 1e-14);
}

TEST(IsingSurrogate, ScoreMatchesFiniteDifferences) {
  Rng rng(111);
  IsingParams ip = ising_grid(3, 3, 0.4);
  ip.field = rng.normal_vector(9);
  const Surrogate s = ising_surrogate(ip, default_ising_lambda(ip));
  for (int i = 0; i < 20; ++i) {
    const Vector x = rng.normal_vector(9);
    EXPECT_LT(oracle::rel_err(s.score(x), oracle::gradient(s.log_density, x, 1e-5)), 1e-5);
  }
}

TEST(IsingSurrogate, DefaultLambdaAlwaysPositiveDefinite) {
  Rng rng(112);
  for (int t = 0; t < 20; ++t) {
    IsingParams ip = ising_grid(3, 4, 0.0);
    for (auto& e : ip.edges) {
      e.theta = 3.0 * rng.normal();
    }
    EXPECT_NO_THROW(ising_surrogate(ip, default_ising_lambda(ip)));
  }
}

TEST(IsingSurrogate, SmallLambdaRejected) {
  EXPECT_STEINKIT_ERROR(ising_surrogate(ising_grid(3, 3, 1.0), 0.1), ErrorKind::kInvalidLambda);
}

TEST(SignRelaxation, Values) {
  EXPECT_EQ(sign_relaxation(0.0), 0.0);
  EXPECT_LT(std::abs(sign_relaxation(10.0) - 1.0), 1e-4);
  EXPECT_LT(std::abs(sign_relaxation(-10.0) + 1.0), 1e-4);
  for (double t : {-3.0, -0.4, 0.7, 2.5}) {
    EXPECT_NEAR(sign_relaxation(t), 2.0 / (1.0 + std::exp(-t)) - 1.0, 1e-15);
  }
}

TEST(SmoothRelaxationSurrogate, ScoreMatchesFiniteDifferences) {
  Rng rng(113);
  const DiscreteTarget t = bernoulli_rbm_target(random_bernoulli_rbm(8, 4, rng));
  for (double tau : {1.0, 10.0}) {
    const Surrogate s = smooth_relaxation_surrogate(t, tau);
    for (int i = 0; i < 20; ++i) {
      const Vector x = rng.normal_vector(8);
      const double eps = tau > 1.0 ? 1e-6 : 1e-5;
      EXPECT_LT(oracle::rel_err(s.score(x), oracle::gradient(s.log_density, x, eps)), 1e-5);
    }
  }
}

TEST(SmoothRelaxationSurrogate, NeedsRelaxableTarget) {
  EXPECT_STEINKIT_ERROR(smooth_relaxation_surrogate(categorical_target({0.0, 1.0}, {1.0, 1.0})),
                        ErrorKind::kUnsupportedOperation);
}

TEST(SampleDiscrete, CategoricalFrequencies) {
  const DiscreteTarget t = categorical_target({-1.0, -0.5, 0.0, 0.5, 1.0}, {0.1, 0.2, 0.3, 0.1, 0.3});
  DiscreteSampleConfig cfg;
  Rng rng(114);
  const DiscreteSamples s = sample_discrete(t, cfg, rng);
  EXPECT_LT(total_variation(empirical_distribution(t, s.states), brute_force_distribution(t)), 0.05);
}

TEST(SampleDiscrete, UniformTargetFrequencies) {
  const ContinuousParameterization param = uniform_param(4);
  DiscreteSampleConfig cfg;
  cfg.n = 400;
  cfg.iterations = 200;
  Rng rng(115);
  const DiscreteSamples s = sample_discrete(param.target(), cfg, rng);
  const Vector freq = empirical_distribution(param.target(), s.states);
  const double se = std::sqrt(0.25 * 0.75 / 400.0);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(freq[i], 0.25, 3.0 * se);
  }
}

TEST(SampleDiscrete, IsingSurrogateAndExactPathAgree) {
  const DiscreteTarget t = ising_target(ising_grid(3, 3, 0.2));
  const Vector exact = brute_force_means(t);
  for (const SurrogateMode mode : {SurrogateMode::kExact, SurrogateMode::kIsing}) {
    DiscreteSampleConfig cfg;
    cfg.n = 500;
    cfg.iterations = 200;
    cfg.surrogate = mode;
    Rng rng(116);
    const DiscreteSamples s = sample_discrete(t, cfg, rng);
    const Vector means = s.states.colwise().mean().transpose();
    // Three binomial standard errors of a +-1 site mean.
    EXPECT_LT((means - exact).cwiseAbs().maxCoeff(), 3.0 / std::sqrt(500.0));
  }
}

TEST(ContinuizeData, RoundTrip) {
  const DiscreteTarget t = categorical_target({-1.0, -0.5, 0.0, 0.5, 1.0}, {0.1, 0.2, 0.3, 0.1, 0.3});
  const ContinuousParameterization param(t);
  Rng rng(117);
  const Matrix z = sample_exact(t, 2000, rng);
  const Matrix x = continuize_data(z, param, rng);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    EXPECT_EQ(gamma_map(x.row(i).transpose(), param), z.row(i).transpose());
  }
}

TEST(ContinuizeData, UniformStatesGiveStandardNormal) {
  const ContinuousParameterization param = uniform_param(3);
  Rng rng(118);
  const Matrix z = sample_exact(param.target(), 100000, rng);
  const Matrix x = continuize_data(z, param, rng);
  const std::vector<double> xs(x.data(), x.data() + x.size());
  EXPECT_LT(oracle::ks_statistic_normal(xs), 1.63 / std::sqrt(100000.0));
}

TEST(ContinuizeData, BinaryPlusIsPositive) {
  const ContinuousParameterization param(categorical_target({-1.0, 1.0}, {1.0, 1.0}));
  Rng rng(119);
  const Matrix x = continuize_data(Matrix::Ones(1000, 1), param, rng);
  EXPECT_GT(x.minCoeff(), 0.0);
}

TEST(ContinuizeData, UnknownStateRejected) {
  const ContinuousParameterization param(categorical_target({-1.0, 1.0}, {1.0, 1.0}));
  Rng rng(120);
  EXPECT_STEINKIT_ERROR(continuize_data(Matrix::Constant(1, 1, 0.5), param, rng),
                        ErrorKind::kInvalidArgument);
}

TEST(TotalVariation, Examples) {
  EXPECT_DOUBLE_EQ(total_variation(vec({0.5, 0.5}), vec({1.0, 0.0})), 0.5);
  EXPECT_EQ(total_variation(vec({0.2, 0.8}), vec({0.2, 0.8})), 0.0);
}

}  // namespace
}  // namespace steinkit
