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

#ifndef STEINKIT_STEINIS_HPP
#define STEINKIT_STEINIS_HPP

#include <functional>
#include <vector>

#include "steinkit/svgd.hpp"

namespace steinkit {

/// Draws n points from q0.
using Sampler = std::function<Matrix(Eigen::Index n, Rng& rng)>;

/// Transport built from leader particles only.
///
/// phi(y) = (1/|A|) sum_j [s(x_j) k(x_j, y) + grad_{x_j} k(x_j, y)] and its
/// Jacobian A(y) = d phi / d y, both analytic for the RBF kernel.
class LeaderVelocityField {
 public:
  LeaderVelocityField(Matrix leaders, const ContinuousTarget& target, double h);

  [[nodiscard]] Vector velocity(const Vector& y) const;
  [[nodiscard]] Matrix jacobian(const Vector& y) const;
  /// phi and A at y in one pass. `phi` must hold d values.
  void evaluate(const double* y, double* phi, Matrix& jac) const;

  /// phi at every leader, assembled with the shared direction kernel.
  [[nodiscard]] Matrix leader_velocities() const;

  [[nodiscard]] const Matrix& leaders() const noexcept { return leaders_; }
  [[nodiscard]] double bandwidth() const noexcept { return h_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return leaders_.cols(); }

 private:
  Matrix leaders_;
  Matrix scores_;
  double h_;
};

/// log|det(I + eps A)| by partial-pivot LU. Throws singular-transform when a
/// pivot falls below 1e-14 in magnitude.
double logdet_exact(const Matrix& a, double eps);

/// sum_k log(1 + eps a_kk). Throws invalid-approximation unless
/// eps |A|_inf < 1 and every 1 + eps a_kk > 0.
double logdet_firstorder(const Matrix& a, double eps);

enum class DetMode { kExact, kFirstOrder, kAuto };

/// Result of pushing a batch of followers through y -> y + eps phi(y).
struct FollowerUpdate {
  Matrix positions;
  Vector logdet;          // log|det(I + eps A(y_i))|
  bool one_to_one = true; // false if any determinant factor was <= 0
  int exact_count = 0;    // followers that used the exact determinant
};

/// Each row is a function of that follower alone given the field.
FollowerUpdate transport_followers(const LeaderVelocityField& field, const Matrix& followers,
                                   double eps, DetMode mode);

struct LeaderFollowerEnsemble {
  Matrix leaders;
  Matrix followers;
  Vector follower_log_q;
  std::vector<double> step_history;  // accepted epsilon per iteration
};

struct WeightedSample {
  Matrix positions;
  Vector log_weights;  // unnormalized
  Vector normalized;   // sums to 1

  static WeightedSample from_log_weights(Matrix positions, Vector log_weights);
  [[nodiscard]] double ess() const;
};

struct SteinIsConfig {
  Eigen::Index n_leaders = 100;
  Eigen::Index n_followers = 100;
  int iterations = 100;
  KernelSpec kernel;  // median heuristic over the leaders by default
  StepSchedule schedule = StepSchedule::decay(0.1, 0.5);
  DetMode det_mode = DetMode::kAuto;
  int max_halvings = 5;
};

struct SteinIsResult {
  WeightedSample sample;
  double log_z_hat = 0.0;
  double z_hat = 0.0;
  LeaderFollowerEnsemble ensemble;
  int halvings = 0;        // total epsilon halvings across iterations
  long exact_dets = 0;     // follower determinants computed exactly
  long firstorder_dets = 0;
};

SteinIsResult run_steinis(const ContinuousTarget& target, const Sampler& q0_sampler,
                          const LogDensityFn& q0_logpdf, const SteinIsConfig& config, Rng& rng);

/// sum_i w_i f(x_i) with normalized weights.
Vector self_normalized_expectation(const WeightedSample& sample,
                                   const std::function<Vector(const Vector&)>& f);

struct PathIntegrationConfig {
  Eigen::Index n = 200;
  int iterations = 500;
  KernelSpec kernel;
  StepSchedule schedule = StepSchedule::constant(0.05);
  Eigen::Index q0_draws = 10000;
};

struct PathIntegrationResult {
  double log_z = 0.0;
  double kl_path = 0.0;   // accumulated eps * KSD^2
  double q0_term = 0.0;   // mean of log q0 - log p over fresh q0 draws
  std::vector<double> ksd2;
};

PathIntegrationResult path_integration_logz(const ContinuousTarget& target,
                                            const Sampler& q0_sampler,
                                            const LogDensityFn& q0_logpdf,
                                            const PathIntegrationConfig& config, Rng& rng);

}  // namespace steinkit

#endif  // STEINKIT_STEINIS_HPP
