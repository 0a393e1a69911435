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

#include "steinkit/gfsvgd.hpp"

#include <algorithm>
#include <sstream>
#include <string>

#include "steinkit/parallel_kernels.hpp"

namespace steinkit {

Vector Surrogate::log_densities(const Matrix& x) const {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[i] = log_density(x.row(i).transpose());
  }
  return out;
}

Matrix Surrogate::scores(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out.row(i) = score(x.row(i).transpose()).transpose();
  }
  return out;
}

Surrogate surrogate_from(const ContinuousTarget& target) {
  if (!target.has_score()) {
    fail(ErrorKind::kUnsupportedOperation, "a surrogate needs an analytic score");
  }
  return Surrogate{target.dim, target.log_density, target.score};
}

Vector rank_normalized_weights(const Vector& log_w) {
  const Eigen::Index n = log_w.size();
  require(n >= 1, "need at least one weight");
  Vector sorted = log_w;
  std::sort(sorted.data(), sorted.data() + n);
  Vector gamma(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    // Count of entries >= log_w[j], ties included.
    const auto first = std::lower_bound(sorted.data(), sorted.data() + n, log_w[j]);
    const auto count = static_cast<double>(sorted.data() + n - first);
    gamma[j] = static_cast<double>(n) / count;
  }
  return gamma;
}

WeightTrack compute_weights(const Vector& log_w, WeightMode mode) {
  const Eigen::Index n = log_w.size();
  require(n >= 1, "need at least one weight");
  WeightTrack t;
  t.log_w = log_w;
  t.max_log_w = log_w.maxCoeff();
  if (!std::isfinite(t.max_log_w) || log_w.hasNaN()) {
    std::ostringstream msg;
    msg << "importance weights degenerate; max log-weight " << t.max_log_w;
    fail(ErrorKind::kDegenerateWeights, msg.str());
  }
  const Vector w = (log_w.array() - t.max_log_w).exp();
  const double sum = w.sum();
  t.ess = sum * sum / w.squaredNorm();
  switch (mode) {
    case WeightMode::kSelfNormalized:
      t.normalized = w / sum;
      break;
    case WeightMode::kPlain: {
      t.normalized = log_w.array().exp() / static_cast<double>(n);
      if (!t.normalized.allFinite()) {
        fail(ErrorKind::kNumericalOverflow, "unnormalized importance weights overflow");
      }
      break;
    }
    case WeightMode::kRank: {
      const Vector gamma = rank_normalized_weights(log_w);
      t.normalized = gamma / gamma.sum();
      break;
    }
  }
  return t;
}

Matrix gf_svgd_direction(const Matrix& particles, const ContinuousTarget& target,
                         const Surrogate& surrogate, double h, WeightMode mode,
                         WeightTrack* track) {
  require(particles.rows() >= 1, "need at least one particle");
  require(particles.cols() == target.dim && surrogate.dim == target.dim,
          "particle, target and surrogate dimensions must agree");
  const Vector log_w = surrogate.log_densities(particles) - target.log_densities(particles);
  WeightTrack weights = compute_weights(log_w, mode);
  const Matrix scores = surrogate.scores(particles);
  Matrix dir = omp::stein_direction(particles, scores, weights.normalized, particles, h);
  if (track != nullptr) {
    *track = std::move(weights);
  }
  return dir;
}

Surrogate kernel_curve_surrogate(const Matrix& anchors, const Vector& anchor_logp,
                                 double smoothing_h) {
  require(anchors.rows() >= 1 && anchor_logp.size() == anchors.rows(),
          "need one log density per anchor");
  require(std::isfinite(smoothing_h) && smoothing_h > 0.0, "smoothing bandwidth must be positive");
  const int d = static_cast<int>(anchors.cols());
  auto terms = [anchors, anchor_logp, smoothing_h](const Vector& x) {
    Vector t(anchors.rows());
    for (Eigen::Index j = 0; j < anchors.rows(); ++j) {
      t[j] = anchor_logp[j] - (anchors.row(j).transpose() - x).squaredNorm() / smoothing_h;
    }
    return t;
  };
  Surrogate s;
  s.dim = d;
  s.log_density = [terms](const Vector& x) { return log_sum_exp(terms(x)); };
  s.score = [terms, anchors, smoothing_h](const Vector& x) -> Vector {
    const Vector t = terms(x);
    const Vector r = (t.array() - log_sum_exp(t)).exp();
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index j = 0; j < anchors.rows(); ++j) {
      g += r[j] * (anchors.row(j).transpose() - x);
    }
    return (2.0 / smoothing_h) * g;
  };
  return s;
}

namespace {

void gf_step(ParticleEnsemble& ensemble, const ContinuousTarget& target,
             const Surrogate& surrogate, const KernelSpec& kernel, const StepSchedule& schedule,
             const GfOptions& options, std::vector<double>& ess) {
  const Matrix& x = ensemble.positions;
  const double h = resolve_bandwidth(kernel, x);
  WeightTrack track;
  const Matrix dir = gf_svgd_direction(x, target, surrogate, h, options.weight_mode, &track);
  ess.push_back(track.ess);
  if (x.rows() >= 2 && track.ess < 2.0) {
    std::ostringstream msg;
    msg << "effective sample size " << track.ess << " below 2 at iteration "
        << ensemble.iteration << "; max log-weight " << track.max_log_w;
    fail(ErrorKind::kDegenerateWeights, msg.str());
  }
  Vector scale;
  if (options.weight_scaled_steps) {
    const Vector w = (track.log_w.array() - track.max_log_w).exp();
    scale = w / w.mean();
  }
  apply_direction(ensemble, dir, schedule, scale);
}

}  // namespace

GfRun run_gf_svgd(const ContinuousTarget& target, const Surrogate& surrogate, Matrix initial,
                  int iters, const KernelSpec& kernel, const StepSchedule& schedule,
                  const GfOptions& options, const EnsembleObserver& observer) {
  require(iters >= 0, "iteration count must be nonnegative");
  GfRun run{ParticleEnsemble(std::move(initial)), {}};
  if (observer) {
    observer(run.ensemble);
  }
  for (int it = 0; it < iters; ++it) {
    gf_step(run.ensemble, target, surrogate, kernel, schedule, options, run.ess);
    if (observer) {
      observer(run.ensemble);
    }
  }
  return run;
}

GfRun run_agf_svgd(const ContinuousTarget& target, const ContinuousTarget& p0,
                   const std::vector<double>& betas, Matrix initial, const KernelSpec& kernel,
                   const StepSchedule& schedule, const AgfOptions& options,
                   const EnsembleObserver& observer) {
  require(betas.size() >= 2 && betas.front() == 0.0 && betas.back() == 1.0,
          "temperatures must run from 0 to 1");
  const auto stages = annealed_targets(p0, target, betas);
  GfRun run{ParticleEnsemble(std::move(initial)), {}};
  if (observer) {
    observer(run.ensemble);
  }
  for (std::size_t l = 1; l < stages.size(); ++l) {
    const Matrix& x = run.ensemble.positions;
    Surrogate rho;
    if (options.surrogate_factory) {
      rho = options.surrogate_factory(x, stages[l]);
    } else {
      const double hs = options.smoothing_h ? *options.smoothing_h : median_bandwidth(x);
      rho = kernel_curve_surrogate(x, stages[l].log_densities(x), hs);
    }
    gf_step(run.ensemble, stages[l], rho, kernel, schedule, options.gf, run.ess);
    if (observer) {
      observer(run.ensemble);
    }
  }
  return run;
}

}  // namespace steinkit
