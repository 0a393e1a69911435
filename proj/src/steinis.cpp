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

#include "steinkit/steinis.hpp"

#include <string>

#include "steinkit/parallel_kernels.hpp"

namespace steinkit {

LeaderVelocityField::LeaderVelocityField(Matrix leaders, const ContinuousTarget& target, double h)
    : leaders_(std::move(leaders)), h_(h) {
  require(leaders_.rows() >= 1, "need at least one leader");
  require(leaders_.cols() == target.dim, "leader dimension does not match the target");
  require(std::isfinite(h) && h > 0.0, "bandwidth must be positive");
  scores_ = target.scores(leaders_);
}

void LeaderVelocityField::evaluate(const double* y, double* phi, Matrix& jac) const {
  const Eigen::Index d = leaders_.cols();
  const double inv_n = 1.0 / static_cast<double>(leaders_.rows());
  const double c1 = 2.0 / h_;
  const double c2 = 4.0 / (h_ * h_);
  jac.setZero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    phi[a] = 0.0;
  }
  for (Eigen::Index j = 0; j < leaders_.rows(); ++j) {
    const double* x = leaders_.row(j).data();
    const double* s = scores_.row(j).data();
    const double k = std::exp(-detail::squared_distance(x, y, d) / h_);
    for (Eigen::Index a = 0; a < d; ++a) {
      const double ra = x[a] - y[a];
      phi[a] += k * (s[a] - c1 * ra);
      for (Eigen::Index b = 0; b < d; ++b) {
        const double rb = x[b] - y[b];
        jac(a, b) += k * (c1 * s[a] * rb - c2 * ra * rb);
      }
      jac(a, a) += k * c1;
    }
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    phi[a] *= inv_n;
  }
  jac *= inv_n;
}

Vector LeaderVelocityField::velocity(const Vector& y) const {
  require(y.size() == dim(), "dimension mismatch");
  Vector phi(dim());
  Matrix jac;
  evaluate(y.data(), phi.data(), jac);
  return phi;
}

Matrix LeaderVelocityField::jacobian(const Vector& y) const {
  require(y.size() == dim(), "dimension mismatch");
  Vector phi(dim());
  Matrix jac;
  evaluate(y.data(), phi.data(), jac);
  return jac;
}

Matrix LeaderVelocityField::leader_velocities() const {
  const Vector coeffs =
      Vector::Constant(leaders_.rows(), 1.0 / static_cast<double>(leaders_.rows()));
  return omp::stein_direction(leaders_, scores_, coeffs, leaders_, h_);
}

namespace {

struct SignedLogDet {
  double log_abs = 0.0;
  double sign = 1.0;
  bool singular = false;
};

SignedLogDet signed_logdet(const Matrix& a, double eps) {
  const Eigen::Index d = a.rows();
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d) + eps * Eigen::MatrixXd(a);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const Eigen::MatrixXd& u = lu.matrixLU();
  SignedLogDet out;
  out.sign = lu.permutationP().determinant();
  for (Eigen::Index i = 0; i < d; ++i) {
    const double p = u(i, i);
    if (std::abs(p) < 1e-14) {
      out.singular = true;
    }
    out.log_abs += std::log(std::abs(p));
    if (p < 0.0) {
      out.sign = -out.sign;
    }
  }
  return out;
}

double inf_norm(const Matrix& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

void check_square(const Matrix& a) {
  require(a.rows() >= 1 && a.rows() == a.cols(), "matrix must be square and nonempty");
  require(a.allFinite(), "matrix must be finite");
}

}  // namespace

double logdet_exact(const Matrix& a, double eps) {
  check_square(a);
  const SignedLogDet r = signed_logdet(a, eps);
  if (r.singular) {
    fail(ErrorKind::kSingularTransform, "I + eps A is singular");
  }
  return r.log_abs;
}

double logdet_firstorder(const Matrix& a, double eps) {
  check_square(a);
  if (!(std::abs(eps) * inf_norm(a) < 1.0)) {
    fail(ErrorKind::kInvalidApproximation, "first-order determinant needs eps |A|_inf < 1");
  }
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const double f = 1.0 + eps * a(k, k);
    if (!(f > 0.0)) {
      fail(ErrorKind::kInvalidApproximation, "first-order determinant factor is not positive");
    }
    s += std::log(f);
  }
  return s;
}

FollowerUpdate transport_followers(const LeaderVelocityField& field, const Matrix& followers,
                                   double eps, DetMode mode) {
  require(followers.cols() == field.dim(), "follower dimension mismatch");
  const Eigen::Index n = followers.rows();
  const Eigen::Index d = followers.cols();
  FollowerUpdate out;
  out.positions.resize(n, d);
  out.logdet.resize(n);
  std::vector<char> ok(static_cast<std::size_t>(n), 1);
  std::vector<char> exact(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    Matrix jac;
    Vector phi(d);
    field.evaluate(followers.row(i).data(), phi.data(), jac);
    out.positions.row(i) = followers.row(i) + eps * phi.transpose();
    bool use_exact = mode == DetMode::kExact;
    if (mode == DetMode::kAuto) {
      use_exact = eps > 0.1 || eps * inf_norm(jac) >= 1.0;
      for (Eigen::Index k = 0; k < d && !use_exact; ++k) {
        use_exact = std::abs(1.0 + eps * jac(k, k)) < 0.5;
      }
    }
    const auto idx = static_cast<std::size_t>(i);
    if (use_exact) {
      exact[idx] = 1;
      const SignedLogDet r = signed_logdet(jac, eps);
      ok[idx] = static_cast<char>(!r.singular && r.sign > 0.0);
      out.logdet[i] = r.log_abs;
    } else {
      double s = 0.0;
      bool good = eps * inf_norm(jac) < 1.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double f = 1.0 + eps * jac(k, k);
        good = good && f > 0.0;
        s += std::log(std::abs(f));
      }
      ok[idx] = static_cast<char>(good);
      out.logdet[i] = s;
    }
  }
  for (std::size_t i = 0; i < ok.size(); ++i) {
    out.one_to_one = out.one_to_one && ok[i] != 0;
    out.exact_count += exact[i];
  }
  return out;
}

WeightedSample WeightedSample::from_log_weights(Matrix positions, Vector log_weights) {
  require(positions.rows() == log_weights.size() && log_weights.size() >= 1,
          "one log weight per position");
  const double lse = log_sum_exp(log_weights);
  if (!std::isfinite(lse) || log_weights.hasNaN()) {
    fail(ErrorKind::kDegenerateWeights, "no positive finite importance weight");
  }
  WeightedSample s;
  s.positions = std::move(positions);
  s.log_weights = std::move(log_weights);
  s.normalized = (s.log_weights.array() - lse).exp();
  s.normalized /= s.normalized.sum();
  return s;
}

double WeightedSample::ess() const { return 1.0 / normalized.squaredNorm(); }

SteinIsResult run_steinis(const ContinuousTarget& target, const Sampler& q0_sampler,
                          const LogDensityFn& q0_logpdf, const SteinIsConfig& config, Rng& rng) {
  require(config.n_leaders >= 1 && config.n_followers >= 1, "need leaders and followers");
  require(config.iterations >= 0, "iteration count must be nonnegative");
  require(config.schedule.mode != ScheduleMode::kAdam,
          "SteinIS needs a shared scalar step; adam is not a valid schedule here");
  require(config.max_halvings >= 0, "max_halvings must be nonnegative");
  config.schedule.validate();
  if (!target.has_score()) {
    fail(ErrorKind::kUnsupportedOperation, "SteinIS needs the target score");
  }

  SteinIsResult res;
  LeaderFollowerEnsemble& ens = res.ensemble;
  ens.leaders = q0_sampler(config.n_leaders, rng);
  ens.followers = q0_sampler(config.n_followers, rng);
  require(ens.leaders.cols() == target.dim && ens.followers.cols() == target.dim,
          "q0 sampler dimension does not match the target");
  ens.follower_log_q.resize(config.n_followers);
  for (Eigen::Index i = 0; i < config.n_followers; ++i) {
    ens.follower_log_q[i] = q0_logpdf(ens.followers.row(i).transpose());
  }

  for (int it = 0; it < config.iterations; ++it) {
    const double h = config.n_leaders >= 2 ? resolve_bandwidth(config.kernel, ens.leaders)
                                           : config.kernel.bandwidth.value_or(1.0);
    const LeaderVelocityField field(ens.leaders, target, h);
    double eps = config.schedule.scalar_step(it);
    FollowerUpdate upd = transport_followers(field, ens.followers, eps, config.det_mode);
    int tries = 0;
    while (!upd.one_to_one) {
      if (tries == config.max_halvings) {
        fail(ErrorKind::kSingularTransform,
             "transport not one-to-one after halving the step at iteration " + std::to_string(it));
      }
      ++tries;
      eps *= 0.5;
      upd = transport_followers(field, ens.followers, eps, config.det_mode);
    }
    res.halvings += tries;
    res.exact_dets += upd.exact_count;
    res.firstorder_dets += config.n_followers - upd.exact_count;
    ens.leaders += eps * field.leader_velocities();
    ens.followers = std::move(upd.positions);
    ens.follower_log_q -= upd.logdet;
    ens.step_history.push_back(eps);
    if (!ens.followers.allFinite() || !ens.leaders.allFinite() ||
        !ens.follower_log_q.allFinite()) {
      fail(ErrorKind::kNumericalOverflow, "non-finite state at iteration " + std::to_string(it));
    }
  }

  const Vector log_w = target.log_densities(ens.followers) - ens.follower_log_q;
  res.sample = WeightedSample::from_log_weights(ens.followers, log_w);
  res.log_z_hat = log_sum_exp(log_w) - std::log(static_cast<double>(config.n_followers));
  res.z_hat = std::exp(res.log_z_hat);
  return res;
}

Vector self_normalized_expectation(const WeightedSample& sample,
                                   const std::function<Vector(const Vector&)>& f) {
  require(sample.normalized.size() == sample.positions.rows() && sample.positions.rows() >= 1,
          "weighted sample is empty or inconsistent");
  if (!sample.normalized.allFinite() || !(sample.normalized.maxCoeff() > 0.0)) {
    fail(ErrorKind::kDegenerateWeights, "no positive normalized weight");
  }
  Vector acc;
  for (Eigen::Index i = 0; i < sample.positions.rows(); ++i) {
    const Vector v = f(sample.positions.row(i).transpose());
    if (i == 0) {
      acc = Vector::Zero(v.size());
    }
    acc += sample.normalized[i] * v;
  }
  return acc;
}

PathIntegrationResult path_integration_logz(const ContinuousTarget& target,
                                            const Sampler& q0_sampler,
                                            const LogDensityFn& q0_logpdf,
                                            const PathIntegrationConfig& config, Rng& rng) {
  require(config.n >= 2 && config.q0_draws >= 1, "need n >= 2 particles and q0 draws");
  require(config.schedule.mode != ScheduleMode::kAdam,
          "path integration needs a scalar step schedule");
  config.schedule.validate();
  if (!target.has_score()) {
    fail(ErrorKind::kUnsupportedOperation, "path integration needs the target score");
  }
  PathIntegrationResult res;
  Matrix x = q0_sampler(config.n, rng);
  const Vector coeffs = Vector::Constant(config.n, 1.0 / static_cast<double>(config.n));
  for (int it = 0; it < config.iterations; ++it) {
    const double h = resolve_bandwidth(config.kernel, x);
    const Matrix s = target.scores(x);
    const double ksd2 = omp::stein_kernel_matrix(x, s, h).mean();
    const double eps = config.schedule.scalar_step(it);
    res.ksd2.push_back(ksd2);
    res.kl_path += eps * ksd2;
    x += eps * omp::stein_direction(x, s, coeffs, x, h);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e8) {
      fail(ErrorKind::kNumericalOverflow, "particles diverged at iteration " + std::to_string(it));
    }
  }
  const Matrix y = q0_sampler(config.q0_draws, rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const Vector yi = y.row(i).transpose();
    acc += q0_logpdf(yi) - target.log_density(yi);
  }
  res.q0_term = acc / static_cast<double>(y.rows());
  res.log_z = res.kl_path - res.q0_term;
  return res;
}

}  // namespace steinkit
