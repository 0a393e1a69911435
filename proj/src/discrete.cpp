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

#include "steinkit/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace steinkit {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double inverse_normal_cdf(double u) {
  require(u > 0.0 && u < 1.0, "inverse normal CDF needs u in (0, 1)");
  // Acklam's rational approximation, relative error about 1e-9.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x = 0.0;
  if (u < p_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - p_low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Newton step.
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (pdf > 0.0) {
    // Phi(x) - u, evaluated on whichever tail keeps precision.
    const double resid = u < 0.5 ? normal_cdf(x) - u
                                 : (1.0 - u) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    x -= resid / pdf;
  }
  return x;
}

ContinuousParameterization::ContinuousParameterization(DiscreteTarget target)
    : target_(std::move(target)) {
  require(target_.dims >= 1, "discrete target needs at least one coordinate");
  require(target_.alphabet_size() >= 2, "alphabet needs K >= 2 states");
  require(static_cast<bool>(target_.log_mass), "discrete target needs a log mass");
  const int k = target_.alphabet_size();
  for (int i = 1; i < k; ++i) {
    eta_.push_back(inverse_normal_cdf(static_cast<double>(i) / k));
  }
}

int ContinuousParameterization::bin_of(double x) const {
  return static_cast<int>(std::upper_bound(eta_.begin(), eta_.end(), x) - eta_.begin());
}

std::vector<int> ContinuousParameterization::gamma_indices(const Vector& x) const {
  require(x.size() == dims(), "dimension mismatch");
  std::vector<int> idx(static_cast<std::size_t>(dims()));
  for (int j = 0; j < dims(); ++j) {
    idx[static_cast<std::size_t>(j)] = bin_of(x[j]);
  }
  return idx;
}

Vector ContinuousParameterization::gamma(const Vector& x) const {
  const auto idx = gamma_indices(x);
  Vector z(dims());
  for (int j = 0; j < dims(); ++j) {
    z[j] = target_.alphabet[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
  }
  return z;
}

double ContinuousParameterization::log_p0(const Vector& x) const {
  return -0.5 * x.squaredNorm() - 0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi);
}

double ContinuousParameterization::pc_log_density(const Vector& x) const {
  return log_p0(x) + target_.log_mass(gamma(x));
}

ContinuousTarget ContinuousParameterization::pc_target() const {
  ContinuousTarget t;
  t.dim = dims();
  t.log_density = [self = *this](const Vector& x) { return self.pc_log_density(x); };
  return t;
}

Vector gamma_map(const Vector& x, const ContinuousParameterization& param) { return param.gamma(x); }

double pc_log_density(const Vector& x, const ContinuousParameterization& param) {
  return param.pc_log_density(x);
}

double default_ising_lambda(const IsingParams& params) {
  return 1.0 + params.coupling_matrix().cwiseAbs().rowwise().sum().maxCoeff();
}

Surrogate ising_surrogate(const IsingParams& params, double lambda) {
  require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive");
  const int d = params.dims;
  const Eigen::MatrixXd m =
      -Eigen::MatrixXd(params.coupling_matrix()) + lambda * Eigen::MatrixXd::Identity(d, d);
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::kInvalidLambda, "A + lambda I is not positive definite");
  }
  const Vector b = params.field.size() == 0 ? Vector::Zero(d) : params.field;
  Surrogate s;
  s.dim = d;
  s.log_density = [m, b](const Vector& x) { return b.dot(x) - 0.5 * x.dot(m * x); };
  s.score = [m, b](const Vector& x) -> Vector { return b - m * x; };
  return s;
}

double sign_relaxation(double t) {
  // 2 / (1 + e^{-t}) - 1 = tanh(t / 2), written so that large |t| is exact.
  return std::tanh(0.5 * t);
}

Surrogate smooth_relaxation_surrogate(const DiscreteTarget& target, double tau) {
  if (!target.is_relaxable()) {
    fail(ErrorKind::kUnsupportedOperation, "target has no relaxed energy");
  }
  require(std::isfinite(tau) && tau > 0.0, "temperature must be positive");
  const auto energy = target.relaxed_log_mass;
  const auto grad = target.relaxed_grad;
  Surrogate s;
  s.dim = target.dims;
  s.log_density = [energy, tau](const Vector& x) {
    const Vector z = (tau * x).unaryExpr([](double t) { return sign_relaxation(t); });
    return -0.5 * x.squaredNorm() + energy(z);
  };
  s.score = [grad, tau](const Vector& x) -> Vector {
    const Vector z = (tau * x).unaryExpr([](double t) { return sign_relaxation(t); });
    const Vector dz = tau * 0.5 * (1.0 - z.array().square());
    return -x + dz.cwiseProduct(grad(z));
  };
  return s;
}

Surrogate base_surrogate(int dims) {
  require(dims >= 1, "dimension must be positive");
  Surrogate s;
  s.dim = dims;
  s.log_density = [](const Vector& x) { return -0.5 * x.squaredNorm(); };
  s.score = [](const Vector& x) -> Vector { return -x; };
  return s;
}

Surrogate make_surrogate(const ContinuousParameterization& param, SurrogateMode mode, double tau,
                         std::optional<double> lambda) {
  switch (mode) {
    case SurrogateMode::kBase:
      return base_surrogate(param.dims());
    case SurrogateMode::kIsing: {
      if (!param.target().ising) {
        fail(ErrorKind::kUnsupportedOperation, "Ising surrogate needs an Ising target");
      }
      const IsingParams& ip = *param.target().ising;
      return ising_surrogate(ip, lambda.value_or(default_ising_lambda(ip)));
    }
    case SurrogateMode::kRelaxation:
      return smooth_relaxation_surrogate(param.target(), tau);
    case SurrogateMode::kExact: {
      Surrogate s;
      s.dim = param.dims();
      s.log_density = [param](const Vector& x) { return param.pc_log_density(x); };
      s.score = [](const Vector& x) -> Vector { return -x; };
      return s;
    }
  }
  fail(ErrorKind::kInvalidArgument, "unknown surrogate mode");
}

DiscreteSamples sample_discrete(const DiscreteTarget& target, const DiscreteSampleConfig& config,
                                Rng& rng) {
  require(config.n >= 1 && config.iterations >= 0, "invalid sampler size");
  const ContinuousParameterization param(target);
  const Surrogate rho = make_surrogate(param, config.surrogate, config.tau, config.lambda);
  Matrix init = rng.normal_matrix(config.n, target.dims).array() + config.init_mean;
  GfOptions opts;
  opts.weight_mode = config.weight_mode;
  GfRun run = run_gf_svgd(param.pc_target(), rho, std::move(init), config.iterations,
                          config.kernel, config.schedule, opts);
  DiscreteSamples out;
  out.continuous = std::move(run.ensemble.positions);
  out.ess = std::move(run.ess);
  out.states.resize(config.n, target.dims);
  for (Eigen::Index i = 0; i < config.n; ++i) {
    const Vector x = out.continuous.row(i).transpose();
    out.indices.push_back(param.gamma_indices(x));
    out.states.row(i) = param.gamma(x).transpose();
  }
  return out;
}

Matrix continuize_data(const Matrix& z_samples, const ContinuousParameterization& param, Rng& rng) {
  require(z_samples.cols() == param.dims(), "data dimension mismatch");
  const int k = param.alphabet_size();
  const auto& eta = param.thresholds();
  Matrix x(z_samples.rows(), z_samples.cols());
  for (Eigen::Index i = 0; i < z_samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < z_samples.cols(); ++j) {
      const int s = param.target().state_index(z_samples(i, j));
      require(s >= 0, "data contains a state outside the alphabet");
      double y = 0.0;
      do {
        y = (s + rng.uniform()) / k;
      } while (y <= 0.0 || y >= 1.0);
      double v = inverse_normal_cdf(y);
      // Keep Gamma(x) = z exact when rounding lands next to a threshold.
      if (s > 0 && v < eta[static_cast<std::size_t>(s - 1)]) {
        v = eta[static_cast<std::size_t>(s - 1)];
      }
      if (s < k - 1 && v >= eta[static_cast<std::size_t>(s)]) {
        v = std::nextafter(eta[static_cast<std::size_t>(s)], -INFINITY);
      }
      x(i, j) = v;
    }
  }
  return x;
}

Vector empirical_distribution(const DiscreteTarget& target, const Matrix& states) {
  Vector f = Vector::Zero(static_cast<Eigen::Index>(state_count(target)));
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    f[static_cast<Eigen::Index>(state_position(target, states.row(i).transpose()))] += 1.0;
  }
  return f / static_cast<double>(std::max<Eigen::Index>(states.rows(), 1));
}

double total_variation(const Vector& p, const Vector& q) {
  require(p.size() == q.size(), "distributions differ in size");
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace steinkit
