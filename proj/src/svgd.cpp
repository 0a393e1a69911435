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

#include "steinkit/svgd.hpp"

#include <string>

#include "steinkit/parallel_kernels.hpp"

namespace steinkit {

namespace {

constexpr double kDivergenceBound = 1e8;

}  // namespace

StepSchedule StepSchedule::constant(double eps) {
  StepSchedule s;
  s.mode = ScheduleMode::kConstant;
  s.step = eps;
  return s;
}

StepSchedule StepSchedule::adam(double eps) {
  StepSchedule s;
  s.mode = ScheduleMode::kAdam;
  s.step = eps;
  return s;
}

StepSchedule StepSchedule::decay(double alpha, double power) {
  StepSchedule s;
  s.mode = ScheduleMode::kDecay;
  s.step = alpha;
  s.decay_power = power;
  return s;
}

void StepSchedule::validate() const {
  require(std::isfinite(step) && step >= 0.0, "step size must be finite and nonnegative");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
          "adam betas must lie in [0, 1)");
  require(delta > 0.0, "adam delta must be positive");
  require(decay_power >= 0.0, "decay power must be nonnegative");
}

double StepSchedule::scalar_step(int iteration) const {
  switch (mode) {
    case ScheduleMode::kConstant:
      return step;
    case ScheduleMode::kDecay:
      return step / std::pow(1.0 + iteration, decay_power);
    case ScheduleMode::kAdam:
      break;
  }
  fail(ErrorKind::kInvalidArgument, "adam has no scalar step");
}

Matrix svgd_direction(const Matrix& particles, const ContinuousTarget& target, double h) {
  require(particles.rows() >= 1, "need at least one particle");
  require(particles.cols() == target.dim, "particle dimension does not match the target");
  const Matrix scores = target.scores(particles);
  const Vector coeffs = Vector::Constant(particles.rows(), 1.0 / static_cast<double>(particles.rows()));
  return omp::stein_direction(particles, scores, coeffs, particles, h);
}

void apply_direction(ParticleEnsemble& ensemble, const Matrix& direction,
                     const StepSchedule& schedule, const Vector& per_particle_scale) {
  schedule.validate();
  Matrix& x = ensemble.positions;
  require(direction.rows() == x.rows() && direction.cols() == x.cols(), "direction shape mismatch");
  Matrix delta;
  Matrix next_m;
  Matrix next_v;
  if (schedule.mode == ScheduleMode::kAdam) {
    if (ensemble.adam_m.rows() != x.rows() || ensemble.adam_m.cols() != x.cols()) {
      ensemble.adam_m = Matrix::Zero(x.rows(), x.cols());
      ensemble.adam_v = Matrix::Zero(x.rows(), x.cols());
    }
    const double t = ensemble.iteration + 1.0;
    next_m = schedule.beta1 * ensemble.adam_m + (1.0 - schedule.beta1) * direction;
    next_v = schedule.beta2 * ensemble.adam_v +
             (1.0 - schedule.beta2) * direction.cwiseProduct(direction);
    const double c1 = 1.0 - std::pow(schedule.beta1, t);
    const double c2 = 1.0 - std::pow(schedule.beta2, t);
    delta = schedule.step * (next_m.array() / c1) /
            ((next_v.array() / c2).sqrt() + schedule.delta);
  } else {
    delta = schedule.scalar_step(ensemble.iteration) * direction;
  }
  if (per_particle_scale.size() != 0) {
    require(per_particle_scale.size() == x.rows(), "step scale count mismatch");
    delta = per_particle_scale.asDiagonal() * delta;
  }
  const Matrix next = x + delta;
  if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kDivergenceBound) {
    fail(ErrorKind::kNumericalOverflow,
         "particles diverged at iteration " + std::to_string(ensemble.iteration));
  }
  x = next;
  if (schedule.mode == ScheduleMode::kAdam) {
    ensemble.adam_m = std::move(next_m);
    ensemble.adam_v = std::move(next_v);
  }
  ++ensemble.iteration;
}

void svgd_step(ParticleEnsemble& ensemble, const ContinuousTarget& target,
               const KernelSpec& kernel, const StepSchedule& schedule) {
  const double h = resolve_bandwidth(kernel, ensemble.positions);
  apply_direction(ensemble, svgd_direction(ensemble.positions, target, h), schedule);
}

ParticleEnsemble run_svgd(const ContinuousTarget& target, Matrix initial, int iters,
                          const KernelSpec& kernel, const StepSchedule& schedule,
                          const EnsembleObserver& observer) {
  require(iters >= 0, "iteration count must be nonnegative");
  ParticleEnsemble ensemble(std::move(initial));
  if (observer) {
    observer(ensemble);
  }
  for (int it = 0; it < iters; ++it) {
    svgd_step(ensemble, target, kernel, schedule);
    if (observer) {
      observer(ensemble);
    }
  }
  return ensemble;
}

std::vector<ContinuousTarget> annealed_targets(const ContinuousTarget& p0,
                                               const ContinuousTarget& p,
                                               const std::vector<double>& betas) {
  require(p0.dim == p.dim, "annealing endpoints must share a dimension");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    require(betas[i] >= 0.0 && betas[i] <= 1.0, "temperatures must lie in [0, 1]");
    require(i == 0 || betas[i] > betas[i - 1], "temperatures must be strictly increasing");
  }
  std::vector<ContinuousTarget> out;
  out.reserve(betas.size());
  for (double beta : betas) {
    if (beta == 0.0) {
      out.push_back(p0);
      continue;
    }
    if (beta == 1.0) {
      out.push_back(p);
      continue;
    }
    ContinuousTarget t;
    t.dim = p.dim;
    t.log_density = [a = p0.log_density, b = p.log_density, beta](const Vector& x) {
      return (1.0 - beta) * a(x) + beta * b(x);
    };
    if (p0.has_score() && p.has_score()) {
      t.score = [a = p0.score, b = p.score, beta](const Vector& x) -> Vector {
        return (1.0 - beta) * a(x) + beta * b(x);
      };
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<double> linear_betas(int stages) {
  require(stages >= 1, "need at least one annealing stage");
  std::vector<double> b(static_cast<std::size_t>(stages) + 1);
  for (int i = 0; i <= stages; ++i) {
    b[static_cast<std::size_t>(i)] = static_cast<double>(i) / stages;
  }
  b.back() = 1.0;
  return b;
}

ParticleEnsemble run_annealed_svgd(const ContinuousTarget& p0, const ContinuousTarget& p,
                                   const std::vector<double>& betas, int steps_per_stage,
                                   Matrix initial, const KernelSpec& kernel,
                                   const StepSchedule& schedule,
                                   const EnsembleObserver& observer) {
  require(betas.size() >= 2 && betas.front() == 0.0 && betas.back() == 1.0,
          "temperatures must run from 0 to 1");
  require(steps_per_stage >= 1, "need at least one step per temperature");
  const auto targets = annealed_targets(p0, p, betas);
  ParticleEnsemble ensemble(std::move(initial));
  if (observer) {
    observer(ensemble);
  }
  for (std::size_t l = 1; l < targets.size(); ++l) {
    for (int s = 0; s < steps_per_stage; ++s) {
      svgd_step(ensemble, targets[l], kernel, schedule);
      if (observer) {
        observer(ensemble);
      }
    }
  }
  return ensemble;
}

}  // namespace steinkit
