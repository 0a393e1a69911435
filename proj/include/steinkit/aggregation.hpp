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

#ifndef STEINKIT_AGGREGATION_HPP
#define STEINKIT_AGGREGATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "steinkit/common.hpp"
#include "steinkit/rng.hpp"

namespace steinkit {

struct GaussianModel {
  Vector mean;
  Matrix cov;
};

struct GmmModel {
  Vector weights;
  std::vector<Vector> means;
  std::vector<Matrix> covs;

  [[nodiscard]] int components() const noexcept { return static_cast<int>(means.size()); }
};

enum class Family { kGaussian, kGmm };

struct LocalModel {
  Family family = Family::kGaussian;
  GaussianModel gaussian;
  GmmModel gmm;
  int machine = 0;

  static LocalModel from(GaussianModel g, int machine = 0);
  static LocalModel from(GmmModel g, int machine = 0);
  [[nodiscard]] int dim() const;
};

struct EmOptions {
  double tol = 1e-6;  // on the mean log-likelihood per sample
  int max_iter = 500;
  int kmeans_iter = 20;
};

struct AggregationOptions {
  /// Gaussian only: keep each model's covariance and estimate the mean alone.
  bool known_covariance = false;
  EmOptions em;
};

struct AggregationResult {
  std::string method;
  LocalModel model;
  int bootstrap_n = 0;
  int machines = 0;
  int iterations = 0;       // EM iterations of the final fit (GMM)
  std::vector<std::string> warnings;
};

double gaussian_log_density(const Vector& x, const GaussianModel& g);
double model_log_density(const Vector& x, const LocalModel& m);
Matrix sample_model(const LocalModel& m, Eigen::Index n, Rng& rng);

/// Weighted Gaussian MLE (mean and 1/sum(w) covariance). Empty weights are uniform.
GaussianModel gaussian_mle(const Matrix& data, const Vector& weights = {});

/// Weighted EM. Starts from `init` when given, otherwise from seeded
/// k-means++ with Lloyd refinement. `loglik`, if given, receives the mean
/// weighted log-likelihood after every E-step.
GmmModel fit_gmm(const Matrix& data, int components, Rng& rng, const EmOptions& options = {},
                 const Vector& weights = {}, const GmmModel* init = nullptr,
                 std::vector<double>* loglik = nullptr);

/// Local MLE for machine `machine`.
LocalModel local_mle(const Matrix& data, Family family, int components, Rng& rng,
                     int machine = 0, const EmOptions& options = {});

/// KL(p || q) + KL(q || p) for Gaussians.
double symmetric_kl(const GaussianModel& p, const GaussianModel& q);

/// Minimum-cost assignment; result[i] is the column assigned to row i.
std::vector<int> hungarian(const Matrix& cost);

/// Permutation per model aligning its components to `models[0]`.
std::vector<std::vector<int>> match_components(const std::vector<GmmModel>& models);
GmmModel permute_components(const GmmModel& m, const std::vector<int>& perm);

/// Parameter vector: Gaussian (mean, vech(cov)); GMM (pi_1..pi_{K-1},
/// means, vech(covs)) in component order.
Vector parameters(const LocalModel& m);
LocalModel from_parameters(const Vector& theta, const LocalModel& like);

AggregationResult kl_naive(const std::vector<LocalModel>& models, int n, Rng& rng,
                           const AggregationOptions& options = {});
AggregationResult kl_control(const std::vector<LocalModel>& models, int n, Rng& rng,
                             const AggregationOptions& options = {});
AggregationResult kl_weighted(const std::vector<LocalModel>& models, int n, Rng& rng,
                              const AggregationOptions& options = {});
AggregationResult linear_average(const std::vector<LocalModel>& models);

/// argmin_theta sum_k KL(p_k || p_theta) over Gaussians: moment matching.
/// With `known_covariance` the covariance is held at the average local
/// covariance and only the mean (the average of the local means) is fitted.
GaussianModel exact_kl_average_gaussian(const std::vector<LocalModel>& models,
                                        const AggregationOptions& options = {});

/// |theta(est) - theta(ref)|^2, after component matching for GMMs.
double parameter_error(const LocalModel& estimate, const LocalModel& reference);

struct RateConfig {
  int machines = 10;
  int dim = 5;
  std::vector<int> ns{50, 100, 200, 400, 800};
  int trials = 200;
  double local_n = 6e6;  // size N / machines of each machine's raw data
  std::uint64_t seed = 1;
  /// Machines share the true covariance and only means are aggregated.
  bool known_covariance = true;
  bool include_control = true;
  bool include_linear = false;
};

struct RateRow {
  std::string method;
  int machines = 0;
  int n = 0;
  int trial = 0;
  double mse = 0.0;
};

/// Gaussian rate simulation. Local MLEs are drawn from their asymptotic
/// distribution around a fixed seeded truth and reused across n within a
/// trial. Errors are measured against the exact KL average of those MLEs.
std::vector<RateRow> gaussian_rate_experiment(const RateConfig& config);

/// Least-squares slope of log y on log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace steinkit

#endif  // STEINKIT_AGGREGATION_HPP
