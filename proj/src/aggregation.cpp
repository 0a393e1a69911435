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

#include "steinkit/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace steinkit {

namespace {

constexpr double kLogRatioClip = 30.0;

Eigen::Index vech_size(Eigen::Index d) { return d * (d + 1) / 2; }

Vector vech(const Matrix& s) {
  const Eigen::Index d = s.rows();
  Vector v(vech_size(d));
  Eigen::Index k = 0;
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a; b < d; ++b) {
      v[k++] = s(a, b);
    }
  }
  return v;
}

Matrix unvech(const Vector& v, Eigen::Index d) {
  Matrix s(d, d);
  Eigen::Index k = 0;
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a; b < d; ++b) {
      s(a, b) = v[k];
      s(b, a) = v[k];
      ++k;
    }
  }
  return s;
}

// Score of log N(x | mu, S) with respect to vech(S); off-diagonal entries
// count twice because S_ab and S_ba move together.
Vector vech_cov_score(const Matrix& prec, const Vector& r) {
  const Vector pr = prec * r;
  const Matrix g = 0.5 * (pr * pr.transpose() - prec);
  Vector v = vech(g);
  const Eigen::Index d = prec.rows();
  Eigen::Index k = 0;
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a; b < d; ++b) {
      if (a != b) {
        v[k] *= 2.0;
      }
      ++k;
    }
  }
  return v;
}

bool is_pd(const Matrix& s) {
  const Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(s)};
  return llt.info() == Eigen::Success;
}

Matrix regularized(Matrix s, std::vector<std::string>* warnings) {
  s = 0.5 * (s + s.transpose()).eval();
  if (!is_pd(s)) {
    s += 1e-8 * Matrix::Identity(s.rows(), s.cols());
    if (warnings != nullptr) {
      warnings->push_back("singular covariance regularized with 1e-8 I");
    }
  }
  return s;
}

struct GaussianCache {
  Vector mean;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_norm = 0.0;

  explicit GaussianCache(const GaussianModel& g) : mean(g.mean), llt(Eigen::MatrixXd(g.cov)) {
    if (llt.info() != Eigen::Success) {
      fail(ErrorKind::kNumerical, "covariance is not positive definite");
    }
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    log_norm = -0.5 * logdet - 0.5 * static_cast<double>(mean.size()) * std::log(2.0 * std::numbers::pi);
  }

  [[nodiscard]] double log_pdf(const Vector& x) const {
    const Vector z = llt.matrixL().solve(x - mean);
    return log_norm - 0.5 * z.squaredNorm();
  }
};

Matrix inverse(const Matrix& s) {
  return Eigen::LLT<Eigen::MatrixXd>(Eigen::MatrixXd(s)).solve(Eigen::MatrixXd::Identity(s.rows(), s.cols()));
}

}  // namespace

LocalModel LocalModel::from(GaussianModel g, int machine) {
  LocalModel m;
  m.family = Family::kGaussian;
  m.gaussian = std::move(g);
  m.machine = machine;
  return m;
}

LocalModel LocalModel::from(GmmModel g, int machine) {
  LocalModel m;
  m.family = Family::kGmm;
  m.gmm = std::move(g);
  m.machine = machine;
  return m;
}

int LocalModel::dim() const {
  return static_cast<int>(family == Family::kGaussian ? gaussian.mean.size() : gmm.means.front().size());
}

double gaussian_log_density(const Vector& x, const GaussianModel& g) {
  return GaussianCache(g).log_pdf(x);
}

double model_log_density(const Vector& x, const LocalModel& m) {
  if (m.family == Family::kGaussian) {
    return gaussian_log_density(x, m.gaussian);
  }
  Vector l(m.gmm.components());
  for (int c = 0; c < m.gmm.components(); ++c) {
    l[c] = std::log(m.gmm.weights[c]) +
           gaussian_log_density(x, GaussianModel{m.gmm.means[static_cast<std::size_t>(c)],
                                                 m.gmm.covs[static_cast<std::size_t>(c)]});
  }
  return log_sum_exp(l);
}

Matrix sample_model(const LocalModel& m, Eigen::Index n, Rng& rng) {
  const int d = m.dim();
  Matrix x(n, d);
  if (m.family == Family::kGaussian) {
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(Eigen::MatrixXd(m.gaussian.cov)).matrixL();
    for (Eigen::Index i = 0; i < n; ++i) {
      x.row(i) = (m.gaussian.mean + l * rng.normal_vector(d)).transpose();
    }
    return x;
  }
  std::vector<Eigen::MatrixXd> chol;
  for (const auto& c : m.gmm.covs) {
    chol.push_back(Eigen::LLT<Eigen::MatrixXd>(Eigen::MatrixXd(c)).matrixL());
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    int c = 0;
    double acc = m.gmm.weights[0];
    while (u >= acc && c + 1 < m.gmm.components()) {
      ++c;
      acc += m.gmm.weights[c];
    }
    const auto cs = static_cast<std::size_t>(c);
    x.row(i) = (m.gmm.means[cs] + chol[cs] * rng.normal_vector(d)).transpose();
  }
  return x;
}

GaussianModel gaussian_mle(const Matrix& data, const Vector& weights) {
  const Eigen::Index n = data.rows();
  require(n >= 1, "MLE needs data");
  const Vector w = weights.size() == 0 ? Vector::Ones(n) : weights;
  require(w.size() == n && (w.array() >= 0.0).all() && w.sum() > 0.0, "invalid data weights");
  const double wsum = w.sum();
  GaussianModel g;
  g.mean = (data.transpose() * w) / wsum;
  const Matrix centered = data.rowwise() - g.mean.transpose();
  g.cov = (centered.transpose() * w.asDiagonal() * centered) / wsum;
  g.cov = regularized(g.cov, nullptr);
  return g;
}

namespace {

GmmModel kmeans_init(const Matrix& x, int k, Rng& rng, int iters) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Matrix centers(k, d);
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n))));
  Vector dist = Vector::Constant(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], (x.row(i) - centers.row(c - 1)).squaredNorm());
    }
    const double total = dist.sum();
    double u = rng.uniform() * total;
    Eigen::Index pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      u -= dist[i];
      if (u < 0.0) {
        pick = i;
        break;
      }
    }
    centers.row(c) = x.row(pick);
  }
  std::vector<int> label(static_cast<std::size_t>(n), 0);
  for (int it = 0; it < iters; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      label[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    Matrix sums = Matrix::Zero(k, d);
    Vector counts = Vector::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(label[static_cast<std::size_t>(i)]) += x.row(i);
      counts[label[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) {
        centers.row(c) = sums.row(c) / counts[c];
      }
    }
  }
  const GaussianModel global = gaussian_mle(x);
  GmmModel g;
  g.weights = Vector::Zero(k);
  for (int c = 0; c < k; ++c) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (label[static_cast<std::size_t>(i)] == c) {
        rows.push_back(i);
      }
    }
    g.means.push_back(centers.row(c).transpose());
    if (static_cast<Eigen::Index>(rows.size()) > d) {
      Matrix sub(static_cast<Eigen::Index>(rows.size()), d);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        sub.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
      }
      g.covs.push_back(gaussian_mle(sub).cov);
    } else {
      g.covs.push_back(global.cov);
    }
    g.weights[c] = std::max<double>(static_cast<double>(rows.size()), 1.0);
  }
  g.weights /= g.weights.sum();
  return g;
}

}  // namespace

GmmModel fit_gmm(const Matrix& data, int components, Rng& rng, const EmOptions& options,
                 const Vector& weights, const GmmModel* init, std::vector<double>* loglik) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  require(components >= 1 && n >= components, "EM needs at least one point per component");
  const Vector w = weights.size() == 0 ? Vector::Ones(n) : weights;
  require(w.size() == n && (w.array() >= 0.0).all() && w.sum() > 0.0, "invalid data weights");
  const double wsum = w.sum();
  GmmModel g = init != nullptr ? *init : kmeans_init(data, components, rng, options.kmeans_iter);
  require(g.components() == components, "initial model has the wrong component count");

  Matrix logr(n, components);
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iter; ++it) {
    for (int c = 0; c < components; ++c) {
      const auto cs = static_cast<std::size_t>(c);
      const GaussianCache cache(GaussianModel{g.means[cs], g.covs[cs]});
      const double lw = std::log(g.weights[c]);
      for (Eigen::Index i = 0; i < n; ++i) {
        logr(i, c) = lw + cache.log_pdf(data.row(i).transpose());
      }
    }
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector row = logr.row(i).transpose();
      const double l = log_sum_exp(row);
      ll += w[i] * l;
      logr.row(i).array() -= l;
    }
    ll /= wsum;
    if (loglik != nullptr) {
      loglik->push_back(ll);
    }
    if (std::abs(ll - prev) < options.tol) {
      break;
    }
    prev = ll;
    const Matrix r = logr.array().exp();
    for (int c = 0; c < components; ++c) {
      const auto cs = static_cast<std::size_t>(c);
      const Vector rc = r.col(c).cwiseProduct(w);
      const double nc = rc.sum();
      if (nc <= 1e-12 * wsum) {
        continue;  // keep the previous component
      }
      g.weights[c] = nc / wsum;
      g.means[cs] = data.transpose() * rc / nc;
      const Matrix centered = data.rowwise() - g.means[cs].transpose();
      g.covs[cs] = regularized(centered.transpose() * rc.asDiagonal() * centered / nc, nullptr);
    }
    g.weights /= g.weights.sum();
  }
  (void)d;
  return g;
}

LocalModel local_mle(const Matrix& data, Family family, int components, Rng& rng, int machine,
                     const EmOptions& options) {
  require(data.rows() > data.cols(), "need more points than dimensions for a covariance");
  if (family == Family::kGaussian) {
    return LocalModel::from(gaussian_mle(data), machine);
  }
  if (components == 1) {
    GmmModel g;
    const GaussianModel one = gaussian_mle(data);
    g.weights = Vector::Ones(1);
    g.means = {one.mean};
    g.covs = {one.cov};
    return LocalModel::from(std::move(g), machine);
  }
  return LocalModel::from(fit_gmm(data, components, rng, options), machine);
}

double symmetric_kl(const GaussianModel& p, const GaussianModel& q) {
  const double d = static_cast<double>(p.mean.size());
  const Matrix pi = inverse(p.cov);
  const Matrix qi = inverse(q.cov);
  const Vector dm = q.mean - p.mean;
  // The log-determinant terms cancel in the sum.
  const double kl_pq = 0.5 * ((qi * p.cov).trace() + dm.dot(qi * dm) - d);
  const double kl_qp = 0.5 * ((pi * q.cov).trace() + dm.dot(pi * dm) - d);
  return kl_pq + kl_qp;
}

std::vector<int> hungarian(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  require(n >= 1 && cost.cols() == n, "assignment needs a square cost matrix");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0);
  std::vector<int> way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j] == 0) {
          const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j] != 0) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), 0);
  for (int j = 1; j <= n; ++j) {
    assignment[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  }
  return assignment;
}

namespace {

std::vector<int> match_to(const GmmModel& reference, const GmmModel& m) {
  if (reference.components() != m.components()) {
    fail(ErrorKind::kUnsupportedOperation, "mixtures with different component counts cannot be matched");
  }
  const int k = reference.components();
  Matrix cost(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      cost(i, j) = symmetric_kl(
          GaussianModel{reference.means[static_cast<std::size_t>(i)], reference.covs[static_cast<std::size_t>(i)]},
          GaussianModel{m.means[static_cast<std::size_t>(j)], m.covs[static_cast<std::size_t>(j)]});
    }
  }
  return hungarian(cost);
}

}  // namespace

std::vector<std::vector<int>> match_components(const std::vector<GmmModel>& models) {
  require(!models.empty(), "need at least one mixture");
  std::vector<std::vector<int>> perms;
  for (const auto& m : models) {
    perms.push_back(match_to(models.front(), m));
  }
  return perms;
}

GmmModel permute_components(const GmmModel& m, const std::vector<int>& perm) {
  GmmModel out;
  out.weights.resize(m.components());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const auto j = static_cast<std::size_t>(perm[i]);
    out.weights[static_cast<Eigen::Index>(i)] = m.weights[static_cast<Eigen::Index>(j)];
    out.means.push_back(m.means[j]);
    out.covs.push_back(m.covs[j]);
  }
  return out;
}

Vector parameters(const LocalModel& m) {
  if (m.family == Family::kGaussian) {
    const Vector v = vech(m.gaussian.cov);
    Vector theta(m.gaussian.mean.size() + v.size());
    theta << m.gaussian.mean, v;
    return theta;
  }
  const int k = m.gmm.components();
  const Eigen::Index d = m.dim();
  const Eigen::Index block = d + vech_size(d);
  Vector theta(k - 1 + k * block);
  theta.head(k - 1) = m.gmm.weights.head(k - 1);
  for (int c = 0; c < k; ++c) {
    const auto cs = static_cast<std::size_t>(c);
    theta.segment(k - 1 + c * block, d) = m.gmm.means[cs];
    theta.segment(k - 1 + c * block + d, vech_size(d)) = vech(m.gmm.covs[cs]);
  }
  return theta;
}

LocalModel from_parameters(const Vector& theta, const LocalModel& like) {
  const Eigen::Index d = like.dim();
  LocalModel m = like;
  if (like.family == Family::kGaussian) {
    require(theta.size() == d + vech_size(d), "parameter length mismatch");
    m.gaussian.mean = theta.head(d);
    m.gaussian.cov = unvech(theta.tail(vech_size(d)), d);
    return m;
  }
  const int k = like.gmm.components();
  const Eigen::Index block = d + vech_size(d);
  require(theta.size() == k - 1 + k * block, "parameter length mismatch");
  m.gmm.weights.head(k - 1) = theta.head(k - 1);
  m.gmm.weights[k - 1] = 1.0 - theta.head(k - 1).sum();
  for (int c = 0; c < k; ++c) {
    const auto cs = static_cast<std::size_t>(c);
    m.gmm.means[cs] = theta.segment(k - 1 + c * block, d);
    m.gmm.covs[cs] = unvech(theta.segment(k - 1 + c * block + d, vech_size(d)), d);
  }
  return m;
}

namespace {

void check_models(const std::vector<LocalModel>& models) {
  require(!models.empty(), "need at least one local model");
  for (const auto& m : models) {
    require(m.family == models.front().family && m.dim() == models.front().dim(),
            "local models must share a family and dimension");
    if (m.family == Family::kGmm) {
      require(m.gmm.components() == models.front().gmm.components(),
              "local mixtures must share a component count");
    }
  }
}

// Bootstrap draws of machine k use stream k of `rng`, so every estimator
// called with the same rng sees the same samples.
std::vector<Matrix> bootstrap(const std::vector<LocalModel>& models, int n, const Rng& rng) {
  require(n >= 1, "need at least one bootstrap draw per machine");
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < models.size(); ++k) {
    Rng stream = rng.split(k);
    out.push_back(sample_model(models[k], n, stream));
  }
  return out;
}

Matrix stack(const std::vector<Matrix>& parts) {
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    rows += p.rows();
  }
  Matrix out(rows, parts.front().cols());
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p;
    r += p.rows();
  }
  return out;
}

Matrix mean_covariance(const std::vector<LocalModel>& models) {
  Matrix s = Matrix::Zero(models.front().dim(), models.front().dim());
  for (const auto& m : models) {
    s += m.gaussian.cov;
  }
  return s / static_cast<double>(models.size());
}

// MLE of the model family on (weighted) data. `init` seeds EM for mixtures.
LocalModel refit(const Matrix& x, const LocalModel& like, const AggregationOptions& options,
                 const Vector& weights, const GmmModel* init, Rng& rng, int* iterations) {
  if (like.family == Family::kGaussian) {
    GaussianModel g = gaussian_mle(x, weights);
    if (options.known_covariance) {
      g.cov = like.gaussian.cov;
    }
    return LocalModel::from(std::move(g), like.machine);
  }
  std::vector<double> trace;
  GmmModel g = fit_gmm(x, like.gmm.components(), rng, options.em, weights, init, &trace);
  if (iterations != nullptr) {
    *iterations = static_cast<int>(trace.size());
  }
  return LocalModel::from(std::move(g), like.machine);
}

LocalModel pooled_template(const std::vector<LocalModel>& models, const AggregationOptions& options) {
  LocalModel like = models.front();
  if (like.family == Family::kGaussian && options.known_covariance) {
    like.gaussian.cov = mean_covariance(models);
  }
  return like;
}

}  // namespace

AggregationResult linear_average(const std::vector<LocalModel>& models) {
  for (const auto& m : models) {
    if (m.family == Family::kGmm && m.gmm.components() != models.front().gmm.components()) {
      fail(ErrorKind::kUnsupportedOperation,
           "linear averaging needs matching parameterizations; component counts differ");
    }
  }
  check_models(models);
  AggregationResult res;
  res.method = "linear";
  res.machines = static_cast<int>(models.size());
  if (models.front().family == Family::kGaussian) {
    Vector theta = Vector::Zero(parameters(models.front()).size());
    for (const auto& m : models) {
      theta += parameters(m);
    }
    res.model = from_parameters(theta / static_cast<double>(models.size()), models.front());
    return res;
  }
  std::vector<GmmModel> gmms;
  for (const auto& m : models) {
    gmms.push_back(m.gmm);
  }
  const auto perms = match_components(gmms);
  GmmModel avg = gmms.front();
  avg.weights.setZero();
  for (auto& mu : avg.means) {
    mu.setZero();
  }
  for (auto& s : avg.covs) {
    s.setZero();
  }
  const double inv = 1.0 / static_cast<double>(gmms.size());
  for (std::size_t k = 0; k < gmms.size(); ++k) {
    const GmmModel p = permute_components(gmms[k], perms[k]);
    avg.weights += inv * p.weights;
    for (int c = 0; c < p.components(); ++c) {
      const auto cs = static_cast<std::size_t>(c);
      avg.means[cs] += inv * p.means[cs];
      avg.covs[cs] += inv * p.covs[cs];
    }
  }
  res.model = LocalModel::from(std::move(avg));
  return res;
}

AggregationResult kl_naive(const std::vector<LocalModel>& models, int n, Rng& rng,
                           const AggregationOptions& options) {
  check_models(models);
  AggregationResult res;
  res.method = "kl-naive";
  res.bootstrap_n = n;
  res.machines = static_cast<int>(models.size());
  const Matrix pooled = stack(bootstrap(models, n, rng));
  const LocalModel like = pooled_template(models, options);
  GmmModel init;
  if (like.family == Family::kGmm) {
    init = linear_average(models).model.gmm;
  }
  Rng em_rng = rng.split(models.size());
  res.model = refit(pooled, like, options, {}, like.family == Family::kGmm ? &init : nullptr, em_rng,
                    &res.iterations);
  return res;
}

namespace {

struct BootstrapRefits {
  std::vector<Matrix> samples;
  std::vector<LocalModel> refits;
};

BootstrapRefits bootstrap_refits(const std::vector<LocalModel>& models, int n, Rng& rng,
                                 const AggregationOptions& options) {
  BootstrapRefits b;
  b.samples = bootstrap(models, n, rng);
  for (std::size_t k = 0; k < models.size(); ++k) {
    Rng em_rng = rng.split(models.size() + 1 + k);
    const GmmModel* init = models[k].family == Family::kGmm ? &models[k].gmm : nullptr;
    b.refits.push_back(refit(b.samples[k], models[k], options, {}, init, em_rng, nullptr));
  }
  return b;
}

}  // namespace

AggregationResult kl_weighted(const std::vector<LocalModel>& models, int n, Rng& rng,
                              const AggregationOptions& options) {
  check_models(models);
  AggregationResult res;
  res.method = "kl-weighted";
  res.bootstrap_n = n;
  res.machines = static_cast<int>(models.size());
  const BootstrapRefits b = bootstrap_refits(models, n, rng, options);
  Vector weights(static_cast<Eigen::Index>(models.size()) * n);
  bool clipped = false;
  for (std::size_t k = 0; k < models.size(); ++k) {
    for (int j = 0; j < n; ++j) {
      const Vector x = b.samples[k].row(j).transpose();
      double lr = model_log_density(x, models[k]) - model_log_density(x, b.refits[k]);
      if (std::abs(lr) > kLogRatioClip) {
        clipped = true;
        lr = std::clamp(lr, -kLogRatioClip, kLogRatioClip);
      }
      weights[static_cast<Eigen::Index>(k) * n + j] = std::exp(lr);
    }
  }
  if (clipped) {
    res.warnings.push_back("importance ratios clipped at exp(+-30)");
  }
  const LocalModel like = pooled_template(models, options);
  GmmModel init;
  if (like.family == Family::kGmm) {
    init = linear_average(models).model.gmm;
  }
  Rng em_rng = rng.split(models.size());
  res.model = refit(stack(b.samples), like, options, weights,
                    like.family == Family::kGmm ? &init : nullptr, em_rng, &res.iterations);
  return res;
}

namespace {

// Rows are per-sample scores of log p(x | theta) at `at`, in the layout of
// `parameters` (mean block only when `mean_only`).
Matrix score_rows(const LocalModel& at, const Matrix& x, bool mean_only) {
  const Eigen::Index d = at.dim();
  if (at.family == Family::kGaussian) {
    const Matrix prec = inverse(at.gaussian.cov);
    const Eigen::Index p = mean_only ? d : d + vech_size(d);
    Matrix s(x.rows(), p);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Vector r = x.row(i).transpose() - at.gaussian.mean;
      s.row(i).head(d) = (prec * r).transpose();
      if (!mean_only) {
        s.row(i).tail(vech_size(d)) = vech_cov_score(prec, r).transpose();
      }
    }
    return s;
  }
  const GmmModel& g = at.gmm;
  const int k = g.components();
  const Eigen::Index block = d + vech_size(d);
  std::vector<Matrix> precs;
  for (const auto& c : g.covs) {
    precs.push_back(inverse(c));
  }
  Matrix s = Matrix::Zero(x.rows(), k - 1 + k * block);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector xi = x.row(i).transpose();
    Vector l(k);
    for (int c = 0; c < k; ++c) {
      const auto cs = static_cast<std::size_t>(c);
      l[c] = std::log(g.weights[c]) + gaussian_log_density(xi, GaussianModel{g.means[cs], g.covs[cs]});
    }
    const Vector r = (l.array() - log_sum_exp(l)).exp();
    for (int c = 0; c + 1 < k; ++c) {
      s(i, c) = r[c] / g.weights[c] - r[k - 1] / g.weights[k - 1];
    }
    for (int c = 0; c < k; ++c) {
      const auto cs = static_cast<std::size_t>(c);
      const Vector res = xi - g.means[cs];
      s.row(i).segment(k - 1 + c * block, d) = (r[c] * (precs[cs] * res)).transpose();
      s.row(i).segment(k - 1 + c * block + d, vech_size(d)) =
          (r[c] * vech_cov_score(precs[cs], res)).transpose();
    }
  }
  return s;
}

Vector param_vector(const LocalModel& m, bool mean_only) {
  return mean_only ? Vector(m.gaussian.mean) : parameters(m);
}

bool valid_model(const LocalModel& m) {
  if (m.family == Family::kGaussian) {
    return m.gaussian.mean.allFinite() && is_pd(m.gaussian.cov);
  }
  if (!(m.gmm.weights.array() > 0.0).all()) {
    return false;
  }
  for (const auto& c : m.gmm.covs) {
    if (!is_pd(c)) {
      return false;
    }
  }
  return true;
}

}  // namespace

AggregationResult kl_control(const std::vector<LocalModel>& models, int n, Rng& rng,
                             const AggregationOptions& options) {
  check_models(models);
  const bool mean_only = models.front().family == Family::kGaussian && options.known_covariance;
  AggregationResult res = kl_naive(models, n, rng, options);
  res.method = "kl-control";
  BootstrapRefits b = bootstrap_refits(models, n, rng, options);

  std::vector<LocalModel> local = models;
  if (local.front().family == Family::kGmm) {
    // Align every machine (and its refit, which EM started from it) with the
    // pooled fit so the corrections add up component by component.
    for (std::size_t k = 0; k < local.size(); ++k) {
      const auto perm = match_to(res.model.gmm, local[k].gmm);
      local[k].gmm = permute_components(local[k].gmm, perm);
      b.refits[k].gmm = permute_components(b.refits[k].gmm, perm);
    }
  }

  const Vector theta_kl = param_vector(res.model, mean_only);
  const Eigen::Index p = theta_kl.size();
  Eigen::MatrixXd fisher_sum = Eigen::MatrixXd::Zero(p, p);
  Vector weighted_diff = Vector::Zero(p);
  for (std::size_t k = 0; k < local.size(); ++k) {
    const Matrix s = score_rows(local[k], b.samples[k], mean_only);
    const Eigen::MatrixXd fisher = (s.transpose() * s) / static_cast<double>(n);
    fisher_sum += fisher;
    weighted_diff += fisher * (param_vector(b.refits[k], mean_only) - param_vector(local[k], mean_only));
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(fisher_sum);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) {
    res.warnings.push_back("singular Fisher sum; ridge 1e-8 added");
    ldlt.compute(fisher_sum + 1e-8 * Eigen::MatrixXd::Identity(p, p));
  }
  const Vector correction = -ldlt.solve(Eigen::VectorXd(weighted_diff));
  LocalModel out = res.model;
  if (mean_only) {
    out.gaussian.mean = theta_kl + correction;
  } else {
    out = from_parameters(theta_kl + correction, res.model);
  }
  if (!valid_model(out)) {
    res.warnings.push_back("control correction left the parameter space; returning the pooled fit");
    return res;
  }
  res.model = std::move(out);
  return res;
}

GaussianModel exact_kl_average_gaussian(const std::vector<LocalModel>& models,
                                        const AggregationOptions& options) {
  check_models(models);
  require(models.front().family == Family::kGaussian, "exact KL average needs Gaussian models");
  const double inv = 1.0 / static_cast<double>(models.size());
  GaussianModel g;
  g.mean = Vector::Zero(models.front().dim());
  Matrix second = Matrix::Zero(models.front().dim(), models.front().dim());
  for (const auto& m : models) {
    g.mean += inv * m.gaussian.mean;
    second += inv * (m.gaussian.cov + m.gaussian.mean * m.gaussian.mean.transpose());
  }
  g.cov = options.known_covariance ? mean_covariance(models) : second - g.mean * g.mean.transpose();
  return g;
}

double parameter_error(const LocalModel& estimate, const LocalModel& reference) {
  require(estimate.family == reference.family, "cannot compare different families");
  if (estimate.family == Family::kGaussian) {
    return (parameters(estimate) - parameters(reference)).squaredNorm();
  }
  LocalModel aligned = estimate;
  aligned.gmm = permute_components(estimate.gmm, match_to(reference.gmm, estimate.gmm));
  return (parameters(aligned) - parameters(reference)).squaredNorm();
}

std::vector<RateRow> gaussian_rate_experiment(const RateConfig& config) {
  require(config.machines >= 1 && config.dim >= 1 && config.trials >= 1 && !config.ns.empty(),
          "invalid rate experiment grid");
  require(config.local_n > config.dim, "local sample size must exceed the dimension");
  const int d = config.dim;
  Rng truth_rng(config.seed, 0);
  const Vector mu_star = truth_rng.normal_vector(d);
  const Matrix b = truth_rng.normal_matrix(d, d);
  const Matrix sigma_star = 0.5 * Matrix::Identity(d, d) + b * b.transpose() / static_cast<double>(d);
  const Eigen::MatrixXd l_star = Eigen::LLT<Eigen::MatrixXd>(Eigen::MatrixXd(sigma_star)).matrixL();
  const double scale = 1.0 / std::sqrt(config.local_n);

  std::vector<std::vector<RateRow>> per_trial(static_cast<std::size_t>(config.trials));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < config.trials; ++t) {
    Rng trial_rng(config.seed, 1 + static_cast<std::uint64_t>(t));
    std::vector<LocalModel> locals;
    for (int k = 0; k < config.machines; ++k) {
      // Asymptotic law of the local MLE: mean noise L z / sqrt(N) and
      // covariance L (I + E) L' with E symmetric Gaussian, var(E_ii) = 2/N.
      GaussianModel g;
      g.mean = mu_star + l_star * trial_rng.normal_vector(d) * scale;
      Eigen::MatrixXd e(d, d);
      for (int a = 0; a < d; ++a) {
        e(a, a) = std::sqrt(2.0) * scale * trial_rng.normal();
        for (int c = a + 1; c < d; ++c) {
          e(a, c) = scale * trial_rng.normal();
          e(c, a) = e(a, c);
        }
      }
      g.cov = config.known_covariance
                  ? Eigen::MatrixXd(sigma_star)
                  : Eigen::MatrixXd(l_star * (Eigen::MatrixXd::Identity(d, d) + e) * l_star.transpose());
      locals.push_back(LocalModel::from(std::move(g), k));
    }
    AggregationOptions options;
    options.known_covariance = config.known_covariance;
    const LocalModel reference = LocalModel::from(exact_kl_average_gaussian(locals, options));
    auto& rows = per_trial[static_cast<std::size_t>(t)];
    for (std::size_t i = 0; i < config.ns.size(); ++i) {
      const int n = config.ns[i];
      Rng n_rng = trial_rng.split(1000 + i);
      auto record = [&](const AggregationResult& r) {
        rows.push_back({r.method, config.machines, n, t, parameter_error(r.model, reference)});
      };
      record(kl_naive(locals, n, n_rng, options));
      record(kl_weighted(locals, n, n_rng, options));
      if (config.include_control) {
        record(kl_control(locals, n, n_rng, options));
      }
      if (config.include_linear) {
        record(linear_average(locals));
      }
    }
  }
  std::vector<RateRow> all;
  for (auto& rows : per_trial) {
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return all;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "slope needs at least two points");
  double mx = 0.0;
  double my = 0.0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "log-log slope needs positive values");
    mx += std::log(x[i]) / m;
    my += std::log(y[i]) / m;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace steinkit
