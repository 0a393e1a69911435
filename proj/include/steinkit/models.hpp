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

#ifndef STEINKIT_MODELS_HPP
#define STEINKIT_MODELS_HPP

#include <functional>
#include <optional>
#include <vector>

#include "steinkit/common.hpp"
#include "steinkit/rng.hpp"

namespace steinkit {

using LogDensityFn = std::function<double(const Vector&)>;
using ScoreFn = std::function<Vector(const Vector&)>;

/// Unnormalized continuous density p(x) with an optional analytic score.
struct ContinuousTarget {
  int dim = 0;
  LogDensityFn log_density;  // log p(x) up to an additive constant
  ScoreFn score;             // grad log p(x); may be empty

  [[nodiscard]] bool has_score() const { return static_cast<bool>(score); }

  /// log p at every row of `x`.
  [[nodiscard]] Vector log_densities(const Matrix& x) const;
  /// Score at every row of `x`. Throws unsupported-operation without a score.
  [[nodiscard]] Matrix scores(const Matrix& x) const;
};

/// Adds `c` to the log density. The score is unchanged.
ContinuousTarget shifted(const ContinuousTarget& target, double c);

struct IsingEdge {
  int i = 0;
  int j = 0;
  double theta = 0.0;
};

/// Pairwise binary model on {-1, +1}^d. `field` is an optional linear term,
/// empty meaning zero.
struct IsingParams {
  int dims = 0;
  std::vector<IsingEdge> edges;
  Vector field;

  /// Symmetric coupling matrix with entries theta_ij.
  [[nodiscard]] Matrix coupling_matrix() const;
};

/// rows x cols lattice with 4-neighbour edges of equal strength.
IsingParams ising_grid(int rows, int cols, double theta);

struct GaussBernoulliRBMParams {
  Matrix B;  // d x d'
  Vector b;  // d
  Vector c;  // d'
};

struct BernoulliRBMParams {
  Matrix W;  // d x M
  Vector b;  // d
  Vector c;  // M
};

/// Unnormalized mass on a product alphabet.
///
/// States are vectors of alphabet values. Relaxable targets also expose the
/// same energy evaluated at real-valued states, with its gradient.
struct DiscreteTarget {
  int dims = 0;
  std::vector<double> alphabet;
  LogDensityFn log_mass;
  LogDensityFn relaxed_log_mass;  // optional
  ScoreFn relaxed_grad;           // optional
  std::optional<IsingParams> ising;

  [[nodiscard]] bool is_relaxable() const { return relaxed_log_mass && relaxed_grad; }
  [[nodiscard]] int alphabet_size() const { return static_cast<int>(alphabet.size()); }
  /// Index of `value` in the alphabet, or -1.
  [[nodiscard]] int state_index(double value) const;
};

ContinuousTarget gaussian_target(const Vector& mu, double sigma);
ContinuousTarget gmm_target(const Vector& weights, const std::vector<Vector>& means, double sigma);
ContinuousTarget gauss_bernoulli_rbm_target(const GaussBernoulliRBMParams& params);

/// log of the normalized density of N(mu, sigma I).
double gaussian_log_pdf(const Vector& x, const Vector& mu, double sigma);
/// n draws from N(mu, sigma I).
Matrix sample_gaussian(const Vector& mu, double sigma, Eigen::Index n, Rng& rng);

/// Exact log normalizer of `gmm_target` (the weights sum to one).
double gmm_log_normalizer(int dim, double sigma);

DiscreteTarget ising_target(const IsingParams& params);
DiscreteTarget bernoulli_rbm_target(const BernoulliRBMParams& params);
/// One coordinate with arbitrary state values and masses.
DiscreteTarget categorical_target(const std::vector<double>& states,
                                  const std::vector<double>& masses);

/// B entries uniform on {+-0.5}, b and c standard normal.
GaussBernoulliRBMParams random_gauss_bernoulli_rbm(int d, int d_hidden, Rng& rng);
/// W entries N(0, 1/M) with b, c standard normal.
BernoulliRBMParams random_bernoulli_rbm(int d, int m, Rng& rng);

/// One systematic-scan Gibbs sweep over all coordinates.
Vector gibbs_sweep(const DiscreteTarget& target, const Vector& state, Rng& rng);

/// Number of states K^d, or throws resource-limit above 2^20.
std::size_t state_count(const DiscreteTarget& target);
/// State at lexicographic position `index` (last coordinate varies fastest).
Vector state_at(const DiscreteTarget& target, std::size_t index);
/// Lexicographic position of a state of alphabet values.
std::size_t state_position(const DiscreteTarget& target, const Vector& state);

/// Exact probabilities over all K^d states in lexicographic order.
Vector brute_force_distribution(const DiscreteTarget& target);
/// Per-coordinate expectations under the exact distribution.
Vector brute_force_means(const DiscreteTarget& target);
/// n exact draws (rows of alphabet values) by inversion of the enumerated CDF.
Matrix sample_exact(const DiscreteTarget& target, Eigen::Index n, Rng& rng);

/// Central differences of the log density with step `eps`.
Vector finite_difference_score(const LogDensityFn& log_density, const Vector& x, double eps);
Vector finite_difference_score(const ContinuousTarget& target, const Vector& x, double eps);

}  // namespace steinkit

#endif  // STEINKIT_MODELS_HPP
