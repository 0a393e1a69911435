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

#ifndef STEINKIT_DISCRETE_HPP
#define STEINKIT_DISCRETE_HPP

#include <vector>

#include "steinkit/gfsvgd.hpp"
#include "steinkit/models.hpp"

namespace steinkit {

double normal_cdf(double x);

/// Phi^{-1}(u) for u in (0, 1): rational approximation plus one Newton step.
double inverse_normal_cdf(double u);

/// Even partition of R^d into K^d bins of equal standard-normal mass, with
/// the density p_c(x) = p0(x) p*(Gamma(x)) built on top.
class ContinuousParameterization {
 public:
  explicit ContinuousParameterization(DiscreteTarget target);

  [[nodiscard]] int dims() const noexcept { return target_.dims; }
  [[nodiscard]] int alphabet_size() const noexcept { return target_.alphabet_size(); }
  [[nodiscard]] const DiscreteTarget& target() const noexcept { return target_; }
  /// Interior thresholds eta_1 < ... < eta_{K-1}.
  [[nodiscard]] const std::vector<double>& thresholds() const noexcept { return eta_; }

  /// Bin of a scalar: i with x in [eta_i, eta_{i+1}), boundaries go up.
  [[nodiscard]] int bin_of(double x) const;
  /// Per-coordinate alphabet indices of Gamma(x).
  [[nodiscard]] std::vector<int> gamma_indices(const Vector& x) const;
  /// Gamma(x) as alphabet values.
  [[nodiscard]] Vector gamma(const Vector& x) const;

  /// log of the product standard normal density.
  [[nodiscard]] double log_p0(const Vector& x) const;
  /// log p0(x) + log p*(Gamma(x)).
  [[nodiscard]] double pc_log_density(const Vector& x) const;
  /// p_c as a score-free continuous target.
  [[nodiscard]] ContinuousTarget pc_target() const;

 private:
  DiscreteTarget target_;
  std::vector<double> eta_;
};

/// Free function forms.
Vector gamma_map(const Vector& x, const ContinuousParameterization& param);
double pc_log_density(const Vector& x, const ContinuousParameterization& param);

/// Largest absolute row sum of the surrogate matrix A = -Theta, plus one.
double default_ising_lambda(const IsingParams& params);

/// rho(x) = exp(b'x - x'(A + lambda I)x / 2) with A = -Theta.
Surrogate ising_surrogate(const IsingParams& params, double lambda);

/// sigma(t) = 2 / (1 + e^{-t}) - 1.
double sign_relaxation(double t);

/// log rho(x) = log p0(x) + E(sigma(tau x)) with E the target's relaxed energy.
Surrogate smooth_relaxation_surrogate(const DiscreteTarget& target, double tau = 10.0);

/// rho = p0, the product standard normal.
Surrogate base_surrogate(int dims);

enum class SurrogateMode { kBase, kIsing, kRelaxation, kExact };

/// Builds the surrogate for `mode`. kExact uses p_c itself with a zero score
/// inside each bin, which gives w = 1.
Surrogate make_surrogate(const ContinuousParameterization& param, SurrogateMode mode,
                         double tau = 10.0, std::optional<double> lambda = {});

struct DiscreteSampleConfig {
  Eigen::Index n = 500;
  int iterations = 500;
  KernelSpec kernel;
  StepSchedule schedule = StepSchedule::adam(0.05);
  SurrogateMode surrogate = SurrogateMode::kBase;
  WeightMode weight_mode = WeightMode::kSelfNormalized;
  double tau = 10.0;
  std::optional<double> lambda;
  double init_mean = 0.0;  // initial particles N(init_mean, 1) per coordinate
};

struct DiscreteSamples {
  Matrix states;                        // n x d alphabet values
  std::vector<std::vector<int>> indices; // n x d alphabet indices
  Matrix continuous;                    // final particles
  std::vector<double> ess;
};

/// GF-SVGD on p_c followed by z = Gamma(x).
DiscreteSamples sample_discrete(const DiscreteTarget& target, const DiscreteSampleConfig& config,
                                Rng& rng);

/// x_j = Phi^{-1}(U[(i-1)/K, i/K)) for the i-th state of z_j.
Matrix continuize_data(const Matrix& z_samples, const ContinuousParameterization& param, Rng& rng);

/// Empirical state frequencies in lexicographic state order.
Vector empirical_distribution(const DiscreteTarget& target, const Matrix& states);

double total_variation(const Vector& p, const Vector& q);

}  // namespace steinkit

#endif  // STEINKIT_DISCRETE_HPP
