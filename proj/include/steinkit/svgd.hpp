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

#ifndef STEINKIT_SVGD_HPP
#define STEINKIT_SVGD_HPP

#include <functional>
#include <vector>

#include "steinkit/kernels.hpp"
#include "steinkit/models.hpp"

namespace steinkit {

enum class ScheduleMode { kConstant, kAdam, kDecay };

struct StepSchedule {
  ScheduleMode mode = ScheduleMode::kAdam;
  double step = 0.05;  // epsilon for constant and adam, alpha for decay
  double beta1 = 0.9;
  double beta2 = 0.999;
  double delta = 1e-8;
  double decay_power = 0.5;  // beta in alpha / (1 + l)^beta

  static StepSchedule constant(double eps);
  static StepSchedule adam(double eps = 0.05);
  static StepSchedule decay(double alpha, double power);

  void validate() const;
  /// Scalar step at iteration l (constant and decay modes).
  [[nodiscard]] double scalar_step(int iteration) const;
};

struct ParticleEnsemble {
  Matrix positions;  // n x d
  int iteration = 0;
  Matrix adam_m;  // first moments, allocated lazily
  Matrix adam_v;  // second moments, allocated lazily

  explicit ParticleEnsemble(Matrix x = {}) : positions(std::move(x)) {}
};

using EnsembleObserver = std::function<void(const ParticleEnsemble&)>;

/// Jacobi SVGD direction: row i = (1/n) sum_j [s(x_j) k(x_j, x_i) + grad_{x_j} k(x_j, x_i)].
Matrix svgd_direction(const Matrix& particles, const ContinuousTarget& target, double h);

/// Moves every particle by the schedule applied to `direction` and bumps the
/// iteration counter. `per_particle_scale`, if nonempty, multiplies each row
/// of the displacement. Throws numerical-overflow when a coordinate leaves
/// [-1e8, 1e8] or becomes non-finite; the ensemble is left unchanged then.
void apply_direction(ParticleEnsemble& ensemble, const Matrix& direction,
                     const StepSchedule& schedule, const Vector& per_particle_scale = {});

void svgd_step(ParticleEnsemble& ensemble, const ContinuousTarget& target,
               const KernelSpec& kernel, const StepSchedule& schedule);

/// Runs `iters` SVGD steps. The observer sees the initial state and every step.
ParticleEnsemble run_svgd(const ContinuousTarget& target, Matrix initial, int iters,
                          const KernelSpec& kernel, const StepSchedule& schedule,
                          const EnsembleObserver& observer = {});

/// Geometric path p_l with log p_l = (1 - beta_l) log p0 + beta_l log p.
std::vector<ContinuousTarget> annealed_targets(const ContinuousTarget& p0,
                                               const ContinuousTarget& p,
                                               const std::vector<double>& betas);

/// Schedule 0 = beta_0 < ... < beta_T = 1 with uniform spacing.
std::vector<double> linear_betas(int stages);

/// `steps_per_stage` SVGD steps against each p_l, l = 1..T, starting from
/// `initial` (draws from p0 supplied by the caller).
ParticleEnsemble run_annealed_svgd(const ContinuousTarget& p0, const ContinuousTarget& p,
                                   const std::vector<double>& betas, int steps_per_stage,
                                   Matrix initial, const KernelSpec& kernel,
                                   const StepSchedule& schedule,
                                   const EnsembleObserver& observer = {});

}  // namespace steinkit

#endif  // STEINKIT_SVGD_HPP
