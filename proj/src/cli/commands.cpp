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

#include "steinkit/cli/commands.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <map>

#include "steinkit/aggregation.hpp"
#include "steinkit/gof.hpp"
#include "steinkit/ksd.hpp"

namespace steinkit::cli {
namespace {

using nlohmann::json;

// Stream ids under the master seed. Trial t uses kTrialStream + t.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kTrialStream = 100;

constexpr double kMaxEnumeratedStates = 1 << 20;

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::vector<std::string> coordinate_columns(const char* prefix, Eigen::Index d) {
  std::vector<std::string> cols;
  for (Eigen::Index j = 0; j < d; ++j) {
    cols.push_back(prefix + std::to_string(j));
  }
  return cols;
}

const ModelSpec& require_model(const ExperimentConfig& c) {
  if (!c.model) {
    throw ConfigError(c.subcommand + " needs a model");
  }
  return *c.model;
}

ContinuousTarget continuous_model(const ExperimentConfig& c) {
  const ModelSpec& m = require_model(c);
  if (m.is_discrete()) {
    throw ConfigError(c.subcommand + " needs a continuous model, got " + m.type);
  }
  return m.continuous();
}

DiscreteTarget discrete_model(const ExperimentConfig& c) {
  const ModelSpec& m = require_model(c);
  if (!m.is_discrete()) {
    throw ConfigError(c.subcommand + " needs a discrete model, got " + m.type);
  }
  return m.discrete();
}

bool enumerable(const DiscreteTarget& t) {
  return t.dims * std::log(static_cast<double>(t.alphabet_size())) <= std::log(kMaxEnumeratedStates);
}

Matrix draw(const GaussianSpec& g, int dim, Eigen::Index n, Rng& rng) {
  return sample_gaussian(g.mean_vector(dim), g.variance, n, rng);
}

Matrix initial_particles(const ExperimentConfig& c, int dim, const GaussianSpec& fallback) {
  Rng rng = Rng(c.seed).split(kInitStream);
  return draw(c.algorithm.init.value_or(fallback), dim, c.algorithm.n, rng);
}

Surrogate continuous_surrogate(const ExperimentConfig& c, const ContinuousTarget& target) {
  const auto& spec = c.algorithm.surrogate;
  if (!spec || spec->type == "target") {
    return surrogate_from(target);
  }
  if (spec->type == "gaussian") {
    const GaussianSpec g{spec->mean.value_or(std::vector<double>{0.0}), spec->variance.value_or(1.0)};
    return surrogate_from(gaussian_target(g.mean_vector(target.dim), g.variance));
  }
  throw ConfigError("surrogate type " + spec->type + " does not apply to continuous models");
}

// Runs trials in parallel; body(t, rng) gets the stream for trial t. The
// first exception is rethrown after the loop.
void for_each_trial(const ExperimentConfig& c, const std::function<void(int, Rng&)>& body) {
  const Rng master(c.seed);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < c.algorithm.trials; ++t) {
    try {
      Rng rng = master.split(kTrialStream + static_cast<std::uint64_t>(t));
      body(t, rng);
    } catch (...) {
#pragma omp critical(steinkit_trial_error)
      if (!error) {
        error = std::current_exception();
      }
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

json trial_seeds(const ExperimentConfig& c) {
  json keys = json::array();
  for (int t = 0; t < c.algorithm.trials; ++t) {
    keys.push_back(Rng(c.seed).split(kTrialStream + static_cast<std::uint64_t>(t)).key());
  }
  return keys;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) {
    return 0.0;
  }
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) {
    s += (x - m) * (x - m);
  }
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Moments of the ensemble at recorded iterations.
EnsembleObserver moment_recorder(const ExperimentConfig& c, int last, std::vector<MetricRow>& rows) {
  const int every = c.algorithm.record_every;
  return [&rows, every, last](const ParticleEnsemble& e) {
    if (e.iteration % every != 0 && e.iteration != last) {
      return;
    }
    const Vector mean = e.positions.colwise().mean().transpose();
    const Vector var = (e.positions.rowwise() - mean.transpose()).array().square().colwise().mean();
    for (Eigen::Index j = 0; j < mean.size(); ++j) {
      rows.push_back({e.iteration, "mean_" + std::to_string(j), mean[j]});
    }
    for (Eigen::Index j = 0; j < var.size(); ++j) {
      rows.push_back({e.iteration, "var_" + std::to_string(j), var[j]});
    }
  };
}

void record_particles(RunOutput& out, const Matrix& x) {
  const Vector mean = x.colwise().mean().transpose();
  out.results["final_mean"] = to_std(mean);
  out.results["final_variance"] =
      to_std((x.rowwise() - mean.transpose()).array().square().colwise().mean().transpose());
  out.samples = SampleTable{coordinate_columns("x", x.cols()), x};
}

void record_ess(RunOutput& out, const std::vector<double>& ess) {
  for (std::size_t i = 0; i < ess.size(); ++i) {
    out.metrics.push_back({static_cast<long>(i), "ess", ess[i]});
  }
  if (!ess.empty()) {
    out.results["final_ess"] = ess.back();
  }
}

RunOutput cmd_svgd(const ExperimentConfig& c) {
  const ContinuousTarget target = continuous_model(c);
  const AlgorithmSpec& a = c.algorithm;
  RunOutput out;
  const ParticleEnsemble e =
      run_svgd(target, initial_particles(c, target.dim, GaussianSpec{}), a.iters, a.kernel,
               a.schedule.value_or(StepSchedule::adam()), moment_recorder(c, a.iters, out.metrics));
  record_particles(out, e.positions);
  return out;
}

RunOutput cmd_gfsvgd(const ExperimentConfig& c) {
  const ContinuousTarget target = continuous_model(c);
  const AlgorithmSpec& a = c.algorithm;
  RunOutput out;
  const GfRun run = run_gf_svgd(target, continuous_surrogate(c, target),
                                initial_particles(c, target.dim, GaussianSpec{}), a.iters, a.kernel,
                                a.schedule.value_or(StepSchedule::adam()),
                                GfOptions{a.weight_mode, a.weight_scaled_steps},
                                moment_recorder(c, a.iters, out.metrics));
  record_particles(out, run.ensemble.positions);
  record_ess(out, run.ess);
  return out;
}

RunOutput cmd_agf_svgd(const ExperimentConfig& c) {
  const ContinuousTarget target = continuous_model(c);
  const AlgorithmSpec& a = c.algorithm;
  if (a.surrogate && a.surrogate->type != "target") {
    throw ConfigError("agf-svgd builds its own surrogate; only surrogate type 'target' is accepted");
  }
  const ContinuousTarget p0 = gaussian_target(a.p0.mean_vector(target.dim), a.p0.variance);
  const std::vector<double> betas = a.betas.empty() ? linear_betas(100) : a.betas;
  AgfOptions options;
  options.smoothing_h = a.smoothing_h;
  options.gf = GfOptions{a.weight_mode, a.weight_scaled_steps};
  RunOutput out;
  const GfRun run = run_agf_svgd(target, p0, betas, initial_particles(c, target.dim, a.p0), a.kernel,
                                 a.schedule.value_or(StepSchedule::adam()), options,
                                 moment_recorder(c, static_cast<int>(betas.size()), out.metrics));
  record_particles(out, run.ensemble.positions);
  record_ess(out, run.ess);
  return out;
}

RunOutput cmd_steinis(const ExperimentConfig& c) {
  const ContinuousTarget target = continuous_model(c);
  const AlgorithmSpec& a = c.algorithm;
  const Vector mu = a.q0.mean_vector(target.dim);
  const double var = a.q0.variance;
  SteinIsConfig cfg;
  cfg.n_leaders = a.leaders;
  cfg.n_followers = a.followers;
  cfg.iterations = a.iters;
  cfg.kernel = a.kernel;
  cfg.schedule = a.schedule.value_or(cfg.schedule);
  cfg.det_mode = a.det_mode;
  cfg.max_halvings = a.max_halvings;

  std::vector<SteinIsResult> results(static_cast<std::size_t>(a.trials));
  for_each_trial(c, [&](int t, Rng& rng) {
    results[static_cast<std::size_t>(t)] = run_steinis(
        target, [&](Eigen::Index n, Rng& r) { return sample_gaussian(mu, var, n, r); },
        [&](const Vector& x) { return gaussian_log_pdf(x, mu, var); }, cfg, rng);
  });

  RunOutput out;
  std::vector<double> z;
  std::vector<double> log_z;
  for (std::size_t t = 0; t < results.size(); ++t) {
    const SteinIsResult& r = results[t];
    const long i = static_cast<long>(t);
    out.metrics.push_back({i, "log_z_hat", r.log_z_hat});
    out.metrics.push_back({i, "z_hat", r.z_hat});
    out.metrics.push_back({i, "ess", r.sample.ess()});
    out.metrics.push_back({i, "halvings", static_cast<double>(r.halvings)});
    out.metrics.push_back({i, "exact_dets", static_cast<double>(r.exact_dets)});
    z.push_back(r.z_hat);
    log_z.push_back(r.log_z_hat);
  }
  out.results["z_hat_mean"] = mean_of(z);
  out.results["z_hat_sd"] = sd_of(z);
  out.results["log_z_hat_mean"] = mean_of(log_z);
  out.results["trial_seeds"] = trial_seeds(c);
  const WeightedSample& s = results.front().sample;
  Matrix table(s.positions.rows(), s.positions.cols() + 1);
  table << s.positions, s.normalized;
  auto cols = coordinate_columns("x", s.positions.cols());
  cols.emplace_back("weight");
  out.samples = SampleTable{cols, table};
  return out;
}

RunOutput cmd_path_logz(const ExperimentConfig& c) {
  const ContinuousTarget target = continuous_model(c);
  const AlgorithmSpec& a = c.algorithm;
  const Vector mu = a.q0.mean_vector(target.dim);
  const double var = a.q0.variance;
  PathIntegrationConfig cfg;
  cfg.n = a.n;
  cfg.iterations = a.iters;
  cfg.kernel = a.kernel;
  cfg.schedule = a.schedule.value_or(cfg.schedule);
  cfg.q0_draws = a.q0_draws;

  std::vector<PathIntegrationResult> results(static_cast<std::size_t>(a.trials));
  for_each_trial(c, [&](int t, Rng& rng) {
    results[static_cast<std::size_t>(t)] = path_integration_logz(
        target, [&](Eigen::Index n, Rng& r) { return sample_gaussian(mu, var, n, r); },
        [&](const Vector& x) { return gaussian_log_pdf(x, mu, var); }, cfg, rng);
  });

  RunOutput out;
  std::vector<double> log_z;
  for (std::size_t t = 0; t < results.size(); ++t) {
    const long i = static_cast<long>(t);
    out.metrics.push_back({i, "log_z", results[t].log_z});
    out.metrics.push_back({i, "kl_path", results[t].kl_path});
    out.metrics.push_back({i, "q0_term", results[t].q0_term});
    log_z.push_back(results[t].log_z);
  }
  const auto& ksd2 = results.front().ksd2;
  for (std::size_t l = 0; l < ksd2.size(); ++l) {
    out.metrics.push_back({static_cast<long>(l), "ksd2_trial0", ksd2[l]});
  }
  out.results["log_z_mean"] = mean_of(log_z);
  out.results["log_z_sd"] = sd_of(log_z);
  out.results["trial_seeds"] = trial_seeds(c);
  return out;
}

RunOutput cmd_discrete_sample(const ExperimentConfig& c) {
  const DiscreteTarget target = discrete_model(c);
  const AlgorithmSpec& a = c.algorithm;
  DiscreteSampleConfig cfg;
  cfg.n = a.n;
  cfg.iterations = a.iters;
  cfg.kernel = a.kernel;
  cfg.schedule = a.schedule.value_or(cfg.schedule);
  if (a.surrogate) {
    cfg.surrogate = a.surrogate->discrete_mode();
    cfg.tau = a.surrogate->tau;
    cfg.lambda = a.surrogate->lambda;
  }
  cfg.weight_mode = a.weight_mode;
  cfg.init_mean = a.init_mean;
  Rng rng = Rng(c.seed).split(kInitStream);
  const DiscreteSamples s = sample_discrete(target, cfg, rng);

  RunOutput out;
  record_ess(out, s.ess);
  out.results["sample_mean"] = to_std(s.states.colwise().mean().transpose());
  if (enumerable(target)) {
    const double tv = total_variation(empirical_distribution(target, s.states),
                                      brute_force_distribution(target));
    out.metrics.push_back({a.iters, "tv", tv});
    out.results["tv"] = tv;
    out.results["exact_mean"] = to_std(brute_force_means(target));
  }
  out.samples = SampleTable{coordinate_columns("z", s.states.cols()), s.states};
  return out;
}

RunOutput cmd_gof(const ExperimentConfig& c) {
  const DiscreteTarget null_target = discrete_model(c);
  const AlgorithmSpec& a = c.algorithm;
  if (a.data_n < 2) {
    throw ConfigError("gof needs algorithm.data with a model and n");
  }
  const DiscreteTarget data_target = a.data_model->is_discrete()
                                         ? a.data_model->discrete()
                                         : throw ConfigError("gof data model must be discrete");
  if (data_target.dims != null_target.dims) {
    throw ConfigError("gof data and null models differ in dimension");
  }
  GofOptions options;
  options.alpha = a.alpha;
  options.replicates = a.replicates;
  if (a.surrogate) {
    options.surrogate = a.surrogate->discrete_mode();
    options.tau = a.surrogate->tau;
    options.lambda = a.surrogate->lambda;
  }
  options.bandwidth = a.kernel.bandwidth;

  std::vector<TestReport> reports(static_cast<std::size_t>(a.trials));
  for_each_trial(c, [&](int t, Rng& rng) {
    const Matrix data = sample_exact(data_target, a.data_n, rng);
    reports[static_cast<std::size_t>(t)] = gof_test(data, null_target, options, rng.split(1).key());
  });

  RunOutput out;
  double rejections = 0.0;
  for (std::size_t t = 0; t < reports.size(); ++t) {
    const TestReport& r = reports[t];
    const long i = static_cast<long>(t);
    out.metrics.push_back({i, "statistic", r.statistic});
    out.metrics.push_back({i, "critical_value", r.critical_value});
    out.metrics.push_back({i, "p_value", r.p_value});
    out.metrics.push_back({i, "reject", r.reject ? 1.0 : 0.0});
    out.metrics.push_back({i, "bandwidth", r.bandwidth});
    rejections += r.reject ? 1.0 : 0.0;
  }
  out.results["rejection_rate"] = rejections / static_cast<double>(reports.size());
  const TestReport& first = reports.front();
  out.results["first_trial"] = {{"statistic", first.statistic},
                                {"critical_value", first.critical_value},
                                {"p_value", first.p_value},
                                {"reject", first.reject},
                                {"replicate_mean", first.replicate_mean},
                                {"replicate_sd", first.replicate_sd},
                                {"bootstrap_seed", first.seed}};
  out.results["trial_seeds"] = trial_seeds(c);
  return out;
}

RunOutput cmd_bbis(const ExperimentConfig& c) {
  const ContinuousTarget target = continuous_model(c);
  const AlgorithmSpec& a = c.algorithm;
  Rng rng = Rng(c.seed).split(kInitStream);
  const Matrix x = draw(a.q0, target.dim, a.n, rng);
  const Surrogate surrogate = continuous_surrogate(c, target);
  const double h = resolve_bandwidth(a.kernel, x);
  const BbisResult r = bbis_weights(x, surrogate, target.log_density, h, BbisOptions{a.max_iter, a.tol});
  const GfKernelMatrix k = gf_stein_kernel_matrix(x, surrogate, target.log_density, h);
  const double scale = std::exp(0.5 * k.log_scale);
  const Vector uniform = Vector::Constant(a.n, 1.0 / a.n);

  RunOutput out;
  for (std::size_t i = 0; i < r.accepted.size(); ++i) {
    out.metrics.push_back({static_cast<long>(i), "objective", r.accepted[i]});
  }
  out.results["objective"] = r.objective;
  out.results["iterations"] = r.iterations;
  out.results["converged"] = r.converged;
  out.results["bandwidth"] = h;
  out.results["bound_uniform"] = scale * bbis_error_bound(uniform, k.scaled);
  out.results["bound_bbis"] = scale * bbis_error_bound(r.weights, k.scaled);
  out.results["weighted_mean"] = to_std(x.transpose() * r.weights);
  out.results["ess"] = 1.0 / r.weights.squaredNorm();
  Matrix table(x.rows(), x.cols() + 1);
  table << x, r.weights;
  auto cols = coordinate_columns("x", x.cols());
  cols.emplace_back("weight");
  out.samples = SampleTable{cols, table};
  return out;
}

RunOutput cmd_aggregate(const ExperimentConfig& c) {
  const AlgorithmSpec& a = c.algorithm;
  RateConfig cfg;
  cfg.machines = a.machines;
  cfg.dim = a.dim;
  cfg.ns = a.grid;
  cfg.trials = a.trials;
  cfg.local_n = a.local_n;
  cfg.seed = c.seed;
  cfg.known_covariance = a.known_covariance;
  cfg.include_control = a.include_control;
  cfg.include_linear = a.include_linear;
  const std::vector<RateRow> rows = gaussian_rate_experiment(cfg);

  RunOutput out;
  std::map<std::string, std::map<int, std::vector<double>>> by_method;
  std::vector<std::string> order;
  for (const RateRow& r : rows) {
    out.metrics.push_back({r.trial, r.method + "@n=" + std::to_string(r.n), r.mse});
    if (!by_method.count(r.method)) {
      order.push_back(r.method);
    }
    by_method[r.method][r.n].push_back(r.mse);
  }
  for (const std::string& method : order) {
    std::vector<double> ns;
    std::vector<double> mse;
    for (const auto& [n, v] : by_method[method]) {
      ns.push_back(n);
      mse.push_back(mean_of(v));
    }
    json entry = {{"n", ns}, {"mean_mse", mse}};
    if (ns.size() >= 2 && method != "linear") {
      entry["loglog_slope"] = loglog_slope(ns, mse);
    }
    out.results[method] = entry;
  }
  return out;
}

RunOutput cmd_oracle(const ExperimentConfig& c) {
  const ModelSpec& m = require_model(c);
  const AlgorithmSpec& a = c.algorithm;
  const std::string check = a.check.value_or(m.is_discrete() ? "distribution" : "score");
  RunOutput out;
  if (check == "distribution") {
    const DiscreteTarget t = discrete_model(c);
    if (!enumerable(t)) {
      throw ConfigError("state space too large to enumerate");
    }
    const Vector p = brute_force_distribution(t);
    Matrix table(p.size(), t.dims + 1);
    for (Eigen::Index s = 0; s < p.size(); ++s) {
      table.row(s) << state_at(t, static_cast<std::size_t>(s)).transpose(), p[s];
      out.metrics.push_back({static_cast<long>(s), "p", p[s]});
    }
    auto cols = coordinate_columns("z", t.dims);
    cols.emplace_back("p");
    out.samples = SampleTable{cols, table};
    out.results["mean"] = to_std(brute_force_means(t));
    out.results["states"] = p.size();
    return out;
  }
  const ContinuousTarget t = continuous_model(c);
  if (!t.has_score()) {
    throw ConfigError("model has no analytic score to check");
  }
  const Matrix x = initial_particles(c, t.dim, GaussianSpec{});
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector xi = x.row(i).transpose();
    const double err = (t.score(xi) - finite_difference_score(t, xi, a.fd_eps)).cwiseAbs().maxCoeff();
    out.metrics.push_back({static_cast<long>(i), "score_fd_max_abs_err", err});
    worst = std::max(worst, err);
  }
  out.results["score_fd_max_abs_err"] = worst;
  out.results["fd_eps"] = a.fd_eps;
  return out;
}

}  // namespace

RunOutput run_command(const ExperimentConfig& c) {
  static const std::map<std::string, RunOutput (*)(const ExperimentConfig&)> table = {
      {"svgd", cmd_svgd},
      {"gfsvgd", cmd_gfsvgd},
      {"agf-svgd", cmd_agf_svgd},
      {"steinis", cmd_steinis},
      {"path-logz", cmd_path_logz},
      {"discrete-sample", cmd_discrete_sample},
      {"gof", cmd_gof},
      {"bbis", cmd_bbis},
      {"aggregate", cmd_aggregate},
      {"oracle", cmd_oracle},
  };
  const auto it = table.find(c.subcommand);
  if (it == table.end()) {
    throw ConfigError("unknown subcommand '" + c.subcommand + "'");
  }
  return it->second(c);
}

}  // namespace steinkit::cli
