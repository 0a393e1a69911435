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
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "steinkit/steinis.hpp"

namespace steinkit {
namespace {

Sampler gaussian_sampler(const Vector& mu, double sigma) {
  return [mu, sigma](Eigen::Index n, Rng& rng) { return sample_gaussian(mu, sigma, n, rng); };
}

LogDensityFn gaussian_logpdf(const Vector& mu, double sigma) {
  return [mu, sigma](const Vector& x) { return gaussian_log_pdf(x, mu, sigma); };
}

TEST(LeaderVelocityField, SingleLeaderAtModeIsStationary) {
  const LeaderVelocityField f(Matrix::Zero(1, 1), gaussian_target(Vector::Zero(1), 1.0), 1.0);
  EXPECT_EQ(f.velocity(Vector::Zero(1)), Vector::Zero(1));
}

TEST(LeaderVelocityField, JacobianMatchesFiniteDifferences) {
  Rng rng(70);
  const ContinuousTarget p = gmm_target(vec({0.5, 0.5}), {vec({1.0, 0.0, -1.0}), vec({-1.0, 1.0, 0.0})}, 0.7);
  const LeaderVelocityField f(rng.normal_matrix(15, 3), p, 1.3);
  for (int i = 0; i < 20; ++i) {
    const Vector y = rng.normal_vector(3);
    const Matrix fd = oracle::jacobian([&](const Vector& z) { return f.velocity(z); }, y, 1e-5);
    EXPECT_LT((f.jacobian(y) - fd).norm() / fd.norm(), 1e-5);
  }
}

TEST(LeaderVelocityField, PermutationInvariant) {
  Rng rng(71);
  const ContinuousTarget p = gaussian_target(vec({0.5, -0.5}), 1.0);
  const Matrix leaders = rng.normal_matrix(6, 2);
  const Matrix reversed = leaders.colwise().reverse();
  const LeaderVelocityField a(leaders, p, 0.9);
  const LeaderVelocityField b(reversed, p, 0.9);
  const Vector y = vec({0.3, 0.1});
  EXPECT_LT((a.velocity(y) - b.velocity(y)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((a.jacobian(y) - b.jacobian(y)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LeaderVelocityField, LeaderVelocitiesMatchPointwise) {
  Rng rng(72);
  const LeaderVelocityField f(rng.normal_matrix(9, 2), gaussian_target(Vector::Zero(2), 2.0), 1.1);
  const Matrix v = f.leader_velocities();
  for (int j = 0; j < 9; ++j) {
    EXPECT_LT((v.row(j).transpose() - f.velocity(f.leaders().row(j).transpose())).norm(), 1e-14);
  }
}

TEST(LeaderVelocityField, MissingScoreIsUnsupported) {
  ContinuousTarget p = gaussian_target(Vector::Zero(1), 1.0);
  p.score = nullptr;
  EXPECT_STEINKIT_ERROR(LeaderVelocityField(Matrix::Zero(2, 1), p, 1.0),
                        ErrorKind::kUnsupportedOperation);
}

TEST(LogdetExact, Examples) {
  EXPECT_EQ(logdet_exact(Matrix::Zero(3, 3), 0.1), 0.0);
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 3.0;
  EXPECT_NEAR(logdet_exact(a, 0.1), std::log(1.56), 1e-15);
}

TEST(LogdetExact, MatchesCofactorExpansion) {
  Rng rng(73);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = rng.normal_matrix(5, 5);
    const Matrix m = Matrix::Identity(5, 5) + 0.3 * a;
    EXPECT_NEAR(logdet_exact(a, 0.3), std::log(std::abs(oracle::cofactor_det(m))), 1e-10);
  }
}

TEST(LogdetExact, SingularRaises) {
  EXPECT_STEINKIT_ERROR(logdet_exact(-10.0 * Matrix::Identity(2, 2), 0.1),
                        ErrorKind::kSingularTransform);
}

TEST(LogdetFirstOrder, DiagonalIsExact) {
  const Matrix a = vec({0.5, -1.0, 2.0}).asDiagonal();
  EXPECT_NEAR(logdet_firstorder(a, 0.2), logdet_exact(a, 0.2), 1e-15);
}

TEST(LogdetFirstOrder, SwapMatrix) {
  Matrix a(2, 2);
  a << 0.0, 1.0, 1.0, 0.0;
  EXPECT_EQ(logdet_firstorder(a, 0.1), 0.0);
  EXPECT_NEAR(logdet_exact(a, 0.1), std::log(0.99), 1e-15);
}

TEST(LogdetFirstOrder, ErrorIsSecondOrder) {
  Rng rng(74);
  for (int t = 0; t < 20; ++t) {
    const Matrix g = rng.normal_matrix(4, 4);
    const Matrix a = 0.5 * (g + g.transpose());
    const double eps = 0.05 / a.cwiseAbs().rowwise().sum().maxCoeff();
    const double e1 = std::abs(logdet_firstorder(a, eps) - logdet_exact(a, eps));
    const double e2 = std::abs(logdet_firstorder(a, eps / 2) - logdet_exact(a, eps / 2));
    EXPECT_GE(e1 / e2, 3.5);
    EXPECT_LE(e1 / e2, 4.5);
  }
}

TEST(LogdetFirstOrder, RejectsLargeSteps) {
  Matrix a(2, 2);
  a << 0.0, 6.0, 6.0, 0.0;
  EXPECT_STEINKIT_ERROR(logdet_firstorder(a, 0.2), ErrorKind::kInvalidApproximation);
}

TEST(TransportFollowers, HalvesMatchWhole) {
  Rng rng(75);
  const LeaderVelocityField f(rng.normal_matrix(20, 2), gaussian_target(vec({1.0, 0.0}), 1.0), 1.0);
  const Matrix y = rng.normal_matrix(30, 2);
  for (const DetMode mode : {DetMode::kExact, DetMode::kFirstOrder, DetMode::kAuto}) {
    const FollowerUpdate whole = transport_followers(f, y, 0.05, mode);
    const FollowerUpdate top = transport_followers(f, y.topRows(13), 0.05, mode);
    const FollowerUpdate bottom = transport_followers(f, y.bottomRows(17), 0.05, mode);
    EXPECT_EQ(whole.positions.topRows(13), top.positions);
    EXPECT_EQ(whole.positions.bottomRows(17), bottom.positions);
    EXPECT_EQ(whole.logdet.head(13), top.logdet);
    EXPECT_EQ(whole.logdet.tail(17), bottom.logdet);
  }
}

TEST(TransportFollowers, AutoModeGuardsSmallFactors) {
  // One leader at the mode, h = 0.1: at distance 0.3 the diagonal of A is about -6.5,
  // so 1 + eps a < 0.5 while eps |A| < 1.
  const LeaderVelocityField f(Matrix::Zero(1, 1), gaussian_target(Vector::Zero(1), 1.0), 0.1);
  Matrix y(2, 1);
  y << 0.3, 3.0;
  const FollowerUpdate u = transport_followers(f, y, 0.1, DetMode::kAuto);
  EXPECT_LT(1.0 + 0.1 * f.jacobian(vec({0.3}))(0, 0), 0.5);
  EXPECT_EQ(u.exact_count, 1);
  EXPECT_EQ(transport_followers(f, y, 0.2, DetMode::kAuto).exact_count, 2);
  EXPECT_EQ(transport_followers(f, y, 0.1, DetMode::kFirstOrder).exact_count, 0);
}

TEST(RunSteinIs, NoIterationsIsPlainImportanceSampling) {
  const ContinuousTarget p = gaussian_target(vec({1.0}), 0.5);
  SteinIsConfig cfg;
  cfg.iterations = 0;
  cfg.n_leaders = 5;
  cfg.n_followers = 50;
  Rng rng(76);
  const SteinIsResult r =
      run_steinis(p, gaussian_sampler(Vector::Zero(1), 2.0), gaussian_logpdf(Vector::Zero(1), 2.0), cfg, rng);
  for (int i = 0; i < 50; ++i) {
    const Vector x = r.sample.positions.row(i).transpose();
    EXPECT_DOUBLE_EQ(r.sample.log_weights[i], p.log_density(x) - gaussian_log_pdf(x, Vector::Zero(1), 2.0));
  }
}

TEST(RunSteinIs, TrackedDensityIntegratesToOne) {
  const ContinuousTarget p = gaussian_target(vec({1.0}), 0.5);
  constexpr int kGrid = 2001;
  const Matrix grid = Vector::LinSpaced(kGrid, -8.0, 8.0);
  SteinIsConfig cfg;
  cfg.n_leaders = 50;
  cfg.n_followers = kGrid;
  cfg.iterations = 200;
  cfg.det_mode = DetMode::kExact;
  const Sampler sampler = [&](Eigen::Index n, Rng& rng) -> Matrix {
    return n == kGrid ? grid : sample_gaussian(Vector::Zero(1), 1.0, n, rng);
  };
  Rng rng(77);
  const SteinIsResult r = run_steinis(p, sampler, gaussian_logpdf(Vector::Zero(1), 1.0), cfg, rng);
  const Matrix& y = r.ensemble.followers;
  double integral = 0.0;
  double mean = 0.0;
  for (int i = 1; i < kGrid; ++i) {
    ASSERT_GT(y(i, 0), y(i - 1, 0));
    const double q0 = std::exp(r.ensemble.follower_log_q[i - 1]);
    const double q1 = std::exp(r.ensemble.follower_log_q[i]);
    integral += 0.5 * (y(i, 0) - y(i - 1, 0)) * (q0 + q1);
    mean += 0.5 * (y(i, 0) - y(i - 1, 0)) * (y(i - 1, 0) * q0 + y(i, 0) * q1);
  }
  EXPECT_NEAR(integral, 1.0, 0.02);
  // The tracked density must have moved toward the target for this to say anything.
  EXPECT_GT(mean, 0.3);
}

TEST(RunSteinIs, NormalizerIsUnbiasedOnMixture) {
  Rng setup(78);
  std::vector<Vector> means;
  for (int i = 0; i < 10; ++i) {
    means.push_back(vec({setup.uniform(-1.0, 1.0), setup.uniform(-1.0, 1.0)}));
  }
  const ContinuousTarget p =
      shifted(gmm_target(Vector::Constant(10, 0.1), means, 1.0), std::log(2.0) - gmm_log_normalizer(2, 1.0));
  SteinIsConfig cfg;
  cfg.n_leaders = 30;
  cfg.n_followers = 50;
  cfg.iterations = 100;
  std::vector<double> z;
  for (int t = 0; t < 100; ++t) {
    Rng rng(79, static_cast<std::uint64_t>(t));
    z.push_back(run_steinis(p, gaussian_sampler(Vector::Zero(2), 4.0),
                            gaussian_logpdf(Vector::Zero(2), 4.0), cfg, rng)
                    .z_hat);
  }
  const auto s = oracle::mean_se(z);
  EXPECT_LT(std::abs(s.mean - 2.0), 3.0 * s.se);
  EXPECT_LT(std::abs(s.mean - 2.0), 0.1);
}

TEST(RunSteinIs, RejectsAdamSchedule) {
  SteinIsConfig cfg;
  cfg.schedule = StepSchedule::adam();
  Rng rng(80);
  EXPECT_STEINKIT_ERROR(run_steinis(gaussian_target(Vector::Zero(1), 1.0),
                                    gaussian_sampler(Vector::Zero(1), 1.0),
                                    gaussian_logpdf(Vector::Zero(1), 1.0), cfg, rng),
                        ErrorKind::kInvalidArgument);
}

TEST(SelfNormalizedExpectation, Examples) {
  Matrix x(3, 2);
  x << 1.0, 2.0, 3.0, 4.0, 5.0, 9.0;
  const auto id = [](const Vector& v) { return v; };
  const WeightedSample uniform = WeightedSample::from_log_weights(x, Vector::Constant(3, -4.0));
  EXPECT_LT((self_normalized_expectation(uniform, id) - vec({3.0, 5.0})).norm(), 1e-14);
  const WeightedSample skewed = WeightedSample::from_log_weights(x, vec({0.0, 1.0, -2.0}));
  EXPECT_NEAR(self_normalized_expectation(skewed, [](const Vector&) { return vec({7.5}); })[0], 7.5, 1e-15);
  const double inf = std::numeric_limits<double>::infinity();
  const WeightedSample one = WeightedSample::from_log_weights(x, vec({-inf, 0.0, -inf}));
  EXPECT_EQ(self_normalized_expectation(one, id), vec({3.0, 4.0}));
  EXPECT_NEAR(skewed.normalized.sum(), 1.0, 1e-12);
}

TEST(SelfNormalizedExpectation, DegenerateWeightsRaise) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_STEINKIT_ERROR(WeightedSample::from_log_weights(Matrix::Zero(2, 1), vec({-inf, -inf})),
                        ErrorKind::kDegenerateWeights);
}

TEST(PathIntegration, IdenticalDistributionsGiveZero) {
  const ContinuousTarget p = gaussian_target(Vector::Zero(1), 1.0);
  // The V-statistic diagonal adds about eps E k(x, x) / n per step, so keep the path short.
  PathIntegrationConfig cfg;
  cfg.iterations = 30;
  cfg.kernel = KernelSpec::fixed(1.0);
  Rng rng(81);
  const auto q0 = gaussian_logpdf(Vector::Zero(1), 1.0);
  const PathIntegrationResult r = path_integration_logz(
      shifted(p, -0.5 * std::log(2.0 * std::numbers::pi)), gaussian_sampler(Vector::Zero(1), 1.0), q0, cfg, rng);
  EXPECT_LT(std::abs(r.log_z), 0.05);
}

TEST(PathIntegration, GaussianLogNormalizer) {
  const ContinuousTarget p = gaussian_target(Vector::Zero(1), 1.0);
  PathIntegrationConfig cfg;
  cfg.iterations = 300;
  cfg.kernel = KernelSpec::median();
  cfg.schedule = StepSchedule::constant(0.02);
  cfg.q0_draws = 100000;
  Rng rng(82);
  const PathIntegrationResult r = path_integration_logz(
      p, gaussian_sampler(Vector::Zero(1), 2.0), gaussian_logpdf(Vector::Zero(1), 2.0), cfg, rng);
  EXPECT_NEAR(r.log_z, 0.5 * std::log(2.0 * std::numbers::pi), 0.15);
}

TEST(PathIntegration, ScalingShiftsEstimate) {
  const ContinuousTarget p = gaussian_target(vec({0.3}), 1.5);
  PathIntegrationConfig cfg;
  cfg.n = 50;
  cfg.iterations = 40;
  cfg.q0_draws = 1000;
  const auto run = [&](const ContinuousTarget& t) {
    Rng rng(83);
    return path_integration_logz(t, gaussian_sampler(Vector::Zero(1), 1.0),
                                 gaussian_logpdf(Vector::Zero(1), 1.0), cfg, rng);
  };
  const PathIntegrationResult a = run(p);
  const PathIntegrationResult b = run(shifted(p, 2.5));
  EXPECT_EQ(a.kl_path, b.kl_path);
  EXPECT_NEAR(b.log_z - a.log_z, 2.5, 1e-10);
}

}  // namespace
}  // namespace steinkit
