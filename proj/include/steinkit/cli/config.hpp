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

#ifndef STEINKIT_CLI_CONFIG_HPP
#define STEINKIT_CLI_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "steinkit/discrete.hpp"
#include "steinkit/gfsvgd.hpp"
#include "steinkit/models.hpp"
#include "steinkit/steinis.hpp"
#include "steinkit/svgd.hpp"

namespace steinkit::cli {

/// Raised for malformed or invalid configs. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "svgd", "gfsvgd", "agf-svgd", "steinis", "path-logz",
      "discrete-sample", "gof", "bbis", "aggregate", "oracle"};
  return names;
}

struct GaussianSpec {
  std::vector<double> mean{0.0};  // a single entry is broadcast
  double variance = 1.0;

  [[nodiscard]] Vector mean_vector(int dim) const;
};

struct ModelSpec {
  std::string type;
  int dim = 1;
  std::vector<double> mean{0.0};
  double variance = 1.0;
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  int hidden = 1;
  std::uint64_t seed = 0;  // parameters of random RBMs
  int rows = 1;
  int cols = 1;
  double theta = 0.0;
  std::vector<double> states;
  std::vector<double> masses;

  [[nodiscard]] bool is_discrete() const;
  [[nodiscard]] ContinuousTarget continuous() const;
  [[nodiscard]] DiscreteTarget discrete() const;
};

struct SurrogateSpec {
  std::string type = "target";
  std::optional<std::vector<double>> mean;
  std::optional<double> variance;
  double tau = 10.0;
  std::optional<double> lambda;

  [[nodiscard]] SurrogateMode discrete_mode() const;
};

struct AlgorithmSpec {
  int n = 100;
  int iters = 100;
  int record_every = 1;
  std::optional<StepSchedule> schedule;
  KernelSpec kernel;
  std::optional<GaussianSpec> init;
  std::optional<SurrogateSpec> surrogate;
  WeightMode weight_mode = WeightMode::kSelfNormalized;
  bool weight_scaled_steps = false;
  std::vector<double> betas;  // empty means linear_betas(100)
  std::optional<double> smoothing_h;
  GaussianSpec p0;
  GaussianSpec q0;
  int q0_draws = 10000;
  int leaders = 100;
  int followers = 100;
  DetMode det_mode = DetMode::kAuto;
  int max_halvings = 5;
  double init_mean = 0.0;
  int trials = 1;
  double alpha = 0.05;
  int replicates = 1000;
  std::optional<ModelSpec> data_model;
  int data_n = 0;
  int max_iter = 10000;
  double tol = 1e-10;
  std::vector<int> grid{50, 100, 200, 400, 800};
  int machines = 10;
  int dim = 5;
  double local_n = 6e6;
  bool known_covariance = true;
  bool include_control = true;
  bool include_linear = false;
  std::optional<std::string> check;
  double fd_eps = 1e-5;
};

struct ExperimentConfig {
  std::string subcommand;
  std::optional<ModelSpec> model;
  AlgorithmSpec algorithm;
  std::uint64_t seed = 0;
  std::string output = "steinkit_out";
  nlohmann::json echo;  // effective config; re-running from it reproduces the run
};

struct Overrides {
  std::optional<std::string> subcommand;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
};

/// Validates `doc` against the schema, applies overrides and builds the config.
ExperimentConfig parse_config(const nlohmann::json& doc, const Overrides& overrides = {});

ExperimentConfig load_config(const std::string& path, const Overrides& overrides = {});

}  // namespace steinkit::cli

#endif  // STEINKIT_CLI_CONFIG_HPP
