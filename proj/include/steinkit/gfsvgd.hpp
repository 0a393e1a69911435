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

#ifndef STEINKIT_GFSVGD_HPP
#define STEINKIT_GFSVGD_HPP

#include <functional>
#include <vector>

#include "steinkit/svgd.hpp"

namespace steinkit {

/// Differentiable auxiliary density rho with its score.
struct Surrogate {
  int dim = 0;
  LogDensityFn log_density;
  ScoreFn score;

  [[nodiscard]] Vector log_densities(const Matrix& x) const;
  [[nodiscard]] Matrix scores(const Matrix& x) const;
};

/// Uses a target with an analytic score as its own surrogate (w = 1).
Surrogate surrogate_from(const ContinuousTarget& target);

enum class WeightMode { kSelfNormalized, kPlain, kRank };

/// Importance weights w_j = rho(x_j) / p(x_j), kept in log space.
struct WeightTrack {
  Vector log_w;
  Vector normalized;  // coefficients used by the direction, summing to 1 (or n * w / n)
  double max_log_w = 0.0;
  double ess = 0.0;   // (sum w)^2 / sum w^2
};

WeightTrack compute_weights(const Vector& log_w, WeightMode mode);

/// gamma_j = n / #{i : mu_i >= mu_j}.
Vector rank_normalized_weights(const Vector& log_w);

/// Row i = (1/Z) sum_j w_j [s_rho(x_j) k(x_j, x_i) + grad_{x_j} k(x_j, x_i)].
/// Only the log density of `target` is used. `track`, if given, receives the
/// weights.
Matrix gf_svgd_direction(const Matrix& particles, const ContinuousTarget& target,
                         const Surrogate& surrogate, double h, WeightMode mode,
                         WeightTrack* track = nullptr);

/// log rho(x) = LSE_j [anchor_logp_j - |x_j - x|^2 / h].
Surrogate kernel_curve_surrogate(const Matrix& anchors, const Vector& anchor_logp,
                                 double smoothing_h);

struct GfOptions {
  WeightMode weight_mode = WeightMode::kSelfNormalized;
  /// Scales particle i's displacement by w_i / mean(w).
  bool weight_scaled_steps = false;
};

struct GfRun {
  ParticleEnsemble ensemble;
  std::vector<double> ess;  // one entry per iteration
};

/// GF-SVGD loop. Raises degenerate-weights when ESS drops below 2 (n >= 2).
GfRun run_gf_svgd(const ContinuousTarget& target, const Surrogate& surrogate, Matrix initial,
                  int iters, const KernelSpec& kernel, const StepSchedule& schedule,
                  const GfOptions& options = {}, const EnsembleObserver& observer = {});

/// Builds the surrogate for stage l+1 from the current particles. The
/// default is `kernel_curve_surrogate` with the given smoothing bandwidth.
using SurrogateFactory =
    std::function<Surrogate(const Matrix& particles, const ContinuousTarget& stage_target)>;

struct AgfOptions {
  /// Smoothing bandwidth for the kernel curve; empty means the median
  /// heuristic over the current particles.
  std::optional<double> smoothing_h;
  SurrogateFactory surrogate_factory;  // overrides the kernel curve when set
  GfOptions gf;
};

/// Annealed GF-SVGD: one GF step against each p_{l+1} with a fresh surrogate.
GfRun run_agf_svgd(const ContinuousTarget& target, const ContinuousTarget& p0,
                   const std::vector<double>& betas, Matrix initial, const KernelSpec& kernel,
                   const StepSchedule& schedule, const AgfOptions& options = {},
                   const EnsembleObserver& observer = {});

}  // namespace steinkit

#endif  // STEINKIT_GFSVGD_HPP
