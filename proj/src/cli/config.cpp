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

#include "steinkit/cli/config.hpp"

#include <algorithm>
#include <fstream>

#include "steinkit/cli/schema.hpp"

namespace steinkit::cli {
namespace {

using nlohmann::json;

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    out = obj[key].get<T>();
  }
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& out) {
  if (obj.contains(key)) {
    out = obj[key].get<T>();
  }
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

GaussianSpec parse_gaussian(const json& j) {
  GaussianSpec g;
  read(j, "mean", g.mean);
  read(j, "variance", g.variance);
  return g;
}

ModelSpec parse_model(const json& j) {
  ModelSpec m;
  m.type = j["type"].get<std::string>();
  read(j, "mean", m.mean);
  read(j, "variance", m.variance);
  read(j, "weights", m.weights);
  read(j, "means", m.means);
  read(j, "hidden", m.hidden);
  read(j, "seed", m.seed);
  read(j, "rows", m.rows);
  read(j, "cols", m.cols);
  read(j, "theta", m.theta);
  read(j, "states", m.states);
  read(j, "masses", m.masses);
  if (j.contains("dim")) {
    m.dim = j["dim"].get<int>();
  } else if (m.type == "gaussian") {
    m.dim = static_cast<int>(m.mean.size());
  } else if (m.type == "gmm" && !m.means.empty()) {
    m.dim = static_cast<int>(m.means.front().size());
  }

  if (m.type == "gaussian" && m.mean.size() != 1 && static_cast<int>(m.mean.size()) != m.dim) {
    throw ConfigError("model.mean has " + std::to_string(m.mean.size()) + " entries for dim " +
                      std::to_string(m.dim));
  }
  if (m.type == "gmm") {
    if (m.means.empty()) {
      throw ConfigError("gmm model needs means");
    }
    if (m.weights.empty()) {
      m.weights.assign(m.means.size(), 1.0 / static_cast<double>(m.means.size()));
    }
    if (m.weights.size() != m.means.size()) {
      throw ConfigError("gmm weights and means differ in length");
    }
    for (const auto& mu : m.means) {
      if (static_cast<int>(mu.size()) != m.dim) {
        throw ConfigError("gmm means must all have dim entries");
      }
    }
  }
  if (m.type == "categorical" && (m.states.empty() || m.states.size() != m.masses.size())) {
    throw ConfigError("categorical model needs states and masses of equal length");
  }
  return m;
}

SurrogateSpec parse_surrogate(const json& j) {
  SurrogateSpec s;
  s.type = j["type"].get<std::string>();
  read(j, "mean", s.mean);
  read(j, "variance", s.variance);
  read(j, "tau", s.tau);
  read(j, "lambda", s.lambda);
  return s;
}

StepSchedule parse_schedule(const json& j) {
  const std::string mode = j["mode"].get<std::string>();
  StepSchedule s;
  if (mode == "constant") {
    s = StepSchedule::constant(j.value("step", 0.05));
  } else if (mode == "adam") {
    s = StepSchedule::adam(j.value("step", 0.05));
  } else {
    s = StepSchedule::decay(j.value("step", 0.1), j.value("power", 0.5));
  }
  read(j, "beta1", s.beta1);
  read(j, "beta2", s.beta2);
  read(j, "delta", s.delta);
  return s;
}

AlgorithmSpec parse_algorithm(const json& j) {
  AlgorithmSpec a;
  read(j, "n", a.n);
  read(j, "iters", a.iters);
  read(j, "record_every", a.record_every);
  if (j.contains("schedule")) {
    a.schedule = parse_schedule(j["schedule"]);
  }
  if (j.contains("bandwidth") && j["bandwidth"].is_number()) {
    a.kernel = KernelSpec::fixed(j["bandwidth"].get<double>());
  }
  if (j.contains("init")) {
    a.init = parse_gaussian(j["init"]);
  }
  if (j.contains("surrogate")) {
    a.surrogate = parse_surrogate(j["surrogate"]);
  }
  if (j.contains("weight_mode")) {
    const std::string w = j["weight_mode"].get<std::string>();
    a.weight_mode = w == "plain" ? WeightMode::kPlain
                    : w == "rank" ? WeightMode::kRank
                                  : WeightMode::kSelfNormalized;
  }
  read(j, "weight_scaled_steps", a.weight_scaled_steps);
  if (j.contains("betas")) {
    a.betas = j["betas"].is_array() ? j["betas"].get<std::vector<double>>()
                                    : linear_betas(j["betas"].get<int>());
  }
  read(j, "smoothing_h", a.smoothing_h);
  if (j.contains("p0")) {
    a.p0 = parse_gaussian(j["p0"]);
  }
  if (j.contains("q0")) {
    a.q0 = parse_gaussian(j["q0"]);
  }
  read(j, "q0_draws", a.q0_draws);
  read(j, "leaders", a.leaders);
  read(j, "followers", a.followers);
  if (j.contains("det_mode")) {
    const std::string d = j["det_mode"].get<std::string>();
    a.det_mode = d == "exact" ? DetMode::kExact : d == "first_order" ? DetMode::kFirstOrder : DetMode::kAuto;
  }
  read(j, "max_halvings", a.max_halvings);
  read(j, "init_mean", a.init_mean);
  read(j, "trials", a.trials);
  read(j, "alpha", a.alpha);
  read(j, "replicates", a.replicates);
  if (j.contains("data")) {
    a.data_model = parse_model(j["data"]["model"]);
    a.data_n = j["data"]["n"].get<int>();
  }
  read(j, "max_iter", a.max_iter);
  read(j, "tol", a.tol);
  read(j, "grid", a.grid);
  read(j, "machines", a.machines);
  read(j, "dim", a.dim);
  read(j, "local_n", a.local_n);
  read(j, "known_covariance", a.known_covariance);
  read(j, "include_control", a.include_control);
  read(j, "include_linear", a.include_linear);
  read(j, "check", a.check);
  read(j, "fd_eps", a.fd_eps);
  return a;
}

}  // namespace

Vector GaussianSpec::mean_vector(int dim) const {
  if (mean.size() == 1) {
    return Vector::Constant(dim, mean.front());
  }
  if (static_cast<int>(mean.size()) != dim) {
    throw ConfigError("gaussian mean has " + std::to_string(mean.size()) + " entries for dim " +
                      std::to_string(dim));
  }
  return to_vector(mean);
}

bool ModelSpec::is_discrete() const {
  return type == "ising" || type == "bernoulli_rbm" || type == "categorical";
}

ContinuousTarget ModelSpec::continuous() const {
  if (type == "gaussian") {
    return gaussian_target(GaussianSpec{mean, variance}.mean_vector(dim), variance);
  }
  if (type == "gmm") {
    std::vector<Vector> mus;
    for (const auto& mu : means) {
      mus.push_back(to_vector(mu));
    }
    return gmm_target(to_vector(weights), mus, variance);
  }
  if (type == "gauss_bernoulli_rbm") {
    Rng rng(seed);
    return gauss_bernoulli_rbm_target(random_gauss_bernoulli_rbm(dim, hidden, rng));
  }
  throw ConfigError("model type " + type + " is not continuous");
}

DiscreteTarget ModelSpec::discrete() const {
  if (type == "ising") {
    return ising_target(ising_grid(rows, cols, theta));
  }
  if (type == "bernoulli_rbm") {
    Rng rng(seed);
    return bernoulli_rbm_target(random_bernoulli_rbm(dim, hidden, rng));
  }
  if (type == "categorical") {
    return categorical_target(states, masses);
  }
  throw ConfigError("model type " + type + " is not discrete");
}

SurrogateMode SurrogateSpec::discrete_mode() const {
  if (type == "base") return SurrogateMode::kBase;
  if (type == "ising") return SurrogateMode::kIsing;
  if (type == "relaxation") return SurrogateMode::kRelaxation;
  if (type == "exact") return SurrogateMode::kExact;
  throw ConfigError("surrogate type " + type + " does not apply to discrete models");
}

ExperimentConfig parse_config(const json& doc, const Overrides& overrides) {
  const std::vector<std::string> errors = config_validator().validate(doc);
  if (!errors.empty()) {
    std::string msg = "config does not match schema: " + errors.front();
    if (errors.size() > 1) {
      msg += " (+" + std::to_string(errors.size() - 1) + " more)";
    }
    throw ConfigError(msg);
  }

  ExperimentConfig c;
  if (doc.contains("subcommand")) {
    c.subcommand = doc["subcommand"].get<std::string>();
  }
  if (overrides.subcommand) {
    if (!c.subcommand.empty() && c.subcommand != *overrides.subcommand) {
      throw ConfigError("config is for '" + c.subcommand + "' but '" + *overrides.subcommand +
                        "' was requested");
    }
    c.subcommand = *overrides.subcommand;
  }
  if (c.subcommand.empty()) {
    throw ConfigError("no subcommand given");
  }
  if (std::find(subcommands().begin(), subcommands().end(), c.subcommand) == subcommands().end()) {
    throw ConfigError("unknown subcommand '" + c.subcommand + "'");
  }
  read(doc, "seed", c.seed);
  if (overrides.seed) {
    c.seed = *overrides.seed;
  }
  read(doc, "output", c.output);
  if (overrides.output) {
    c.output = *overrides.output;
  }
  if (doc.contains("model")) {
    c.model = parse_model(doc["model"]);
  }
  c.algorithm = parse_algorithm(doc.value("algorithm", json::object()));

  c.echo = doc;
  c.echo["subcommand"] = c.subcommand;
  c.echo["seed"] = c.seed;
  c.echo["output"] = c.output;
  return c;
}

ExperimentConfig load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc, overrides);
}

}  // namespace steinkit::cli
