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

#include "steinkit/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace steinkit {

namespace {

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double log_2cosh(double t) { return std::abs(t) + std::log1p(std::exp(-2.0 * std::abs(t))); }

double sigmoid(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void check_dim(const Vector& x, int dim) {
  require(x.size() == dim, "input dimension does not match the model");
}

}  // namespace

Vector ContinuousTarget::log_densities(const Matrix& x) const {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[i] = log_density(x.row(i).transpose());
  }
  return out;
}

Matrix ContinuousTarget::scores(const Matrix& x) const {
  if (!has_score()) {
    fail(ErrorKind::kUnsupportedOperation, "target has no score; use the gradient-free sampler");
  }
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out.row(i) = score(x.row(i).transpose()).transpose();
  }
  return out;
}

ContinuousTarget shifted(const ContinuousTarget& target, double c) {
  ContinuousTarget out = target;
  out.log_density = [lp = target.log_density, c](const Vector& x) { return lp(x) + c; };
  return out;
}

Matrix IsingParams::coupling_matrix() const {
  Matrix a = Matrix::Zero(dims, dims);
  for (const auto& e : edges) {
    a(e.i, e.j) += e.theta;
    a(e.j, e.i) += e.theta;
  }
  return a;
}

IsingParams ising_grid(int rows, int cols, double theta) {
  require(rows >= 1 && cols >= 1, "grid must be nonempty");
  IsingParams p;
  p.dims = rows * cols;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      if (c + 1 < cols) {
        p.edges.push_back({i, i + 1, theta});
      }
      if (r + 1 < rows) {
        p.edges.push_back({i, i + cols, theta});
      }
    }
  }
  return p;
}

int DiscreteTarget::state_index(double value) const {
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (alphabet[i] == value) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

ContinuousTarget gaussian_target(const Vector& mu, double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), "sigma must be positive");
  require(mu.size() >= 1 && mu.allFinite(), "mean must be finite and nonempty");
  const int d = static_cast<int>(mu.size());
  ContinuousTarget t;
  t.dim = d;
  t.log_density = [mu, sigma, d](const Vector& x) {
    check_dim(x, d);
    return -(x - mu).squaredNorm() / (2.0 * sigma);
  };
  t.score = [mu, sigma, d](const Vector& x) -> Vector {
    check_dim(x, d);
    return -(x - mu) / sigma;
  };
  return t;
}

ContinuousTarget gmm_target(const Vector& weights, const std::vector<Vector>& means, double sigma) {
  require(!means.empty(), "mixture needs at least one component");
  require(weights.size() == static_cast<Eigen::Index>(means.size()), "one weight per component");
  require(sigma > 0.0, "sigma must be positive");
  require((weights.array() >= 0.0).all(), "mixture weights must be nonnegative");
  require(std::abs(weights.sum() - 1.0) <= 1e-12, "mixture weights must sum to one");
  const int d = static_cast<int>(means.front().size());
  Matrix mu(static_cast<Eigen::Index>(means.size()), d);
  for (std::size_t i = 0; i < means.size(); ++i) {
    require(means[i].size() == d, "component means must share a dimension");
    mu.row(static_cast<Eigen::Index>(i)) = means[i].transpose();
  }
  const Vector log_w = weights.array().log();
  auto component_logs = [mu, log_w, sigma](const Vector& x) {
    Vector l(mu.rows());
    for (Eigen::Index i = 0; i < mu.rows(); ++i) {
      l[i] = log_w[i] - (x.transpose() - mu.row(i)).squaredNorm() / (2.0 * sigma);
    }
    return l;
  };
  ContinuousTarget t;
  t.dim = d;
  t.log_density = [component_logs, d](const Vector& x) {
    check_dim(x, d);
    return log_sum_exp(component_logs(x));
  };
  t.score = [component_logs, mu, sigma, d](const Vector& x) -> Vector {
    check_dim(x, d);
    const Vector l = component_logs(x);
    const Vector r = (l.array() - log_sum_exp(l)).exp();
    Vector s = Vector::Zero(d);
    for (Eigen::Index i = 0; i < mu.rows(); ++i) {
      s += r[i] * (mu.row(i).transpose() - x);
    }
    return s / sigma;
  };
  return t;
}

double gmm_log_normalizer(int dim, double sigma) {
  return 0.5 * dim * std::log(2.0 * std::numbers::pi * sigma);
}

ContinuousTarget gauss_bernoulli_rbm_target(const GaussBernoulliRBMParams& params) {
  const Eigen::Index d = params.B.rows();
  require(d >= 1 && params.b.size() == d && params.c.size() == params.B.cols(),
          "inconsistent Gauss-Bernoulli RBM shapes");
  require(params.B.allFinite() && params.b.allFinite() && params.c.allFinite(),
          "RBM parameters must be finite");
  const Matrix B = params.B;
  const Vector b = params.b;
  const Vector c = params.c;
  ContinuousTarget t;
  t.dim = static_cast<int>(d);
  t.log_density = [B, b, c, d](const Vector& x) {
    check_dim(x, static_cast<int>(d));
    const Vector phi = B.transpose() * x + c;
    double s = b.dot(x) - 0.5 * x.squaredNorm();
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      s += log_2cosh(phi[i]);
    }
    return s;
  };
  t.score = [B, b, c, d](const Vector& x) -> Vector {
    check_dim(x, static_cast<int>(d));
    const Vector phi = B.transpose() * x + c;
    return b - x + B * phi.array().tanh().matrix();
  };
  return t;
}

double gaussian_log_pdf(const Vector& x, const Vector& mu, double sigma) {
  const double d = static_cast<double>(x.size());
  return -(x - mu).squaredNorm() / (2.0 * sigma) - 0.5 * d * std::log(2.0 * std::numbers::pi * sigma);
}

Matrix sample_gaussian(const Vector& mu, double sigma, Eigen::Index n, Rng& rng) {
  require(sigma > 0.0, "sigma must be positive");
  Matrix x = rng.normal_matrix(n, mu.size()) * std::sqrt(sigma);
  x.rowwise() += mu.transpose();
  return x;
}

DiscreteTarget ising_target(const IsingParams& params) {
  require(params.dims >= 1, "Ising model needs at least one spin");
  for (const auto& e : params.edges) {
    require(0 <= e.i && e.i < e.j && e.j < params.dims, "Ising edges need 0 <= i < j < d");
    require(std::isfinite(e.theta), "Ising couplings must be finite");
  }
  require(params.field.size() == 0 || params.field.size() == params.dims, "field size mismatch");
  const Matrix theta = params.coupling_matrix();
  const Vector field = params.field.size() == 0 ? Vector::Zero(params.dims) : params.field;
  DiscreteTarget t;
  t.dims = params.dims;
  t.alphabet = {-1.0, 1.0};
  t.ising = params;
  // 0.5 z'Theta z equals the edge sum because Theta holds each edge twice.
  t.relaxed_log_mass = [theta, field](const Vector& z) {
    return field.dot(z) + 0.5 * z.dot(theta * z);
  };
  t.relaxed_grad = [theta, field](const Vector& z) -> Vector { return field + theta * z; };
  const auto edges = params.edges;
  t.log_mass = [edges, field](const Vector& z) {
    double s = field.dot(z);
    for (const auto& e : edges) {
      s += e.theta * z[e.i] * z[e.j];
    }
    return s;
  };
  return t;
}

DiscreteTarget bernoulli_rbm_target(const BernoulliRBMParams& params) {
  const Eigen::Index d = params.W.rows();
  require(d >= 1 && params.b.size() == d && params.c.size() == params.W.cols(),
          "inconsistent Bernoulli RBM shapes");
  const Matrix W = params.W;
  const Vector b = params.b;
  const Vector c = params.c;
  DiscreteTarget t;
  t.dims = static_cast<int>(d);
  t.alphabet = {-1.0, 1.0};
  t.relaxed_log_mass = [W, b, c](const Vector& z) {
    const Vector phi = W.transpose() * z + c;
    double s = b.dot(z);
    for (Eigen::Index k = 0; k < phi.size(); ++k) {
      s += softplus(phi[k]);
    }
    return s;
  };
  t.relaxed_grad = [W, b, c](const Vector& z) -> Vector {
    const Vector phi = W.transpose() * z + c;
    return b + W * phi.unaryExpr([](double v) { return sigmoid(v); });
  };
  t.log_mass = t.relaxed_log_mass;
  return t;
}

DiscreteTarget categorical_target(const std::vector<double>& states,
                                  const std::vector<double>& masses) {
  require(states.size() >= 2 && states.size() == masses.size(), "need K >= 2 states with masses");
  for (double m : masses) {
    require(m > 0.0 && std::isfinite(m), "categorical masses must be positive");
  }
  DiscreteTarget t;
  t.dims = 1;
  t.alphabet = states;
  t.log_mass = [states, masses](const Vector& z) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i] == z[0]) {
        return std::log(masses[i]);
      }
    }
    fail(ErrorKind::kInvalidArgument, "state outside the categorical alphabet");
  };
  return t;
}

GaussBernoulliRBMParams random_gauss_bernoulli_rbm(int d, int d_hidden, Rng& rng) {
  require(d >= 1 && d_hidden >= 1, "RBM sizes must be positive");
  GaussBernoulliRBMParams p;
  p.B.resize(d, d_hidden);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d_hidden; ++j) {
      p.B(i, j) = rng.uniform() < 0.5 ? -0.5 : 0.5;
    }
  }
  p.b = rng.normal_vector(d);
  p.c = rng.normal_vector(d_hidden);
  return p;
}

BernoulliRBMParams random_bernoulli_rbm(int d, int m, Rng& rng) {
  require(d >= 1 && m >= 1, "RBM sizes must be positive");
  BernoulliRBMParams p;
  p.W = rng.normal_matrix(d, m) / std::sqrt(static_cast<double>(m));
  p.b = rng.normal_vector(d);
  p.c = rng.normal_vector(m);
  return p;
}

Vector gibbs_sweep(const DiscreteTarget& target, const Vector& state, Rng& rng) {
  require(state.size() == target.dims, "state dimension mismatch");
  const int k = target.alphabet_size();
  Vector z = state;
  Vector logits(k);
  for (int c = 0; c < target.dims; ++c) {
    for (int a = 0; a < k; ++a) {
      z[c] = target.alphabet[static_cast<std::size_t>(a)];
      logits[a] = target.log_mass(z);
    }
    const Vector p = (logits.array() - log_sum_exp(logits)).exp();
    const double u = rng.uniform();
    int pick = k - 1;
    double acc = 0.0;
    for (int a = 0; a < k; ++a) {
      acc += p[a];
      if (u < acc) {
        pick = a;
        break;
      }
    }
    z[c] = target.alphabet[static_cast<std::size_t>(pick)];
  }
  return z;
}

std::size_t state_count(const DiscreteTarget& target) {
  const double k = static_cast<double>(target.alphabet_size());
  const double total = std::pow(k, target.dims);
  if (total > static_cast<double>(1 << 20)) {
    fail(ErrorKind::kResourceLimit, "state space exceeds 2^20 states");
  }
  return static_cast<std::size_t>(total);
}

Vector state_at(const DiscreteTarget& target, std::size_t index) {
  const auto k = static_cast<std::size_t>(target.alphabet_size());
  Vector z(target.dims);
  for (int c = target.dims - 1; c >= 0; --c) {
    z[c] = target.alphabet[index % k];
    index /= k;
  }
  return z;
}

std::size_t state_position(const DiscreteTarget& target, const Vector& state) {
  const auto k = static_cast<std::size_t>(target.alphabet_size());
  std::size_t index = 0;
  for (int c = 0; c < target.dims; ++c) {
    const int a = target.state_index(state[c]);
    require(a >= 0, "state value outside the alphabet");
    index = index * k + static_cast<std::size_t>(a);
  }
  return index;
}

Vector brute_force_distribution(const DiscreteTarget& target) {
  const std::size_t n = state_count(target);
  Vector logs(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    logs[static_cast<Eigen::Index>(s)] = target.log_mass(state_at(target, s));
  }
  Vector p = (logs.array() - logs.maxCoeff()).exp();
  return p / p.sum();
}

Vector brute_force_means(const DiscreteTarget& target) {
  const Vector p = brute_force_distribution(target);
  Vector m = Vector::Zero(target.dims);
  for (Eigen::Index s = 0; s < p.size(); ++s) {
    m += p[s] * state_at(target, static_cast<std::size_t>(s));
  }
  return m;
}

Matrix sample_exact(const DiscreteTarget& target, Eigen::Index n, Rng& rng) {
  const Vector p = brute_force_distribution(target);
  std::vector<double> cdf(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (Eigen::Index s = 0; s < p.size(); ++s) {
    acc += p[s];
    cdf[static_cast<std::size_t>(s)] = acc;
  }
  Matrix out(n, target.dims);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) {
      --it;
    }
    out.row(i) = state_at(target, static_cast<std::size_t>(it - cdf.begin())).transpose();
  }
  return out;
}

Vector finite_difference_score(const LogDensityFn& log_density, const Vector& x, double eps) {
  require(eps > 0.0, "finite-difference step must be positive");
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + eps;
    const double up = log_density(xp);
    xp[i] = x[i] - eps;
    const double down = log_density(xp);
    xp[i] = x[i];
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

Vector finite_difference_score(const ContinuousTarget& target, const Vector& x, double eps) {
  return finite_difference_score(target.log_density, x, eps);
}

}  // namespace steinkit
