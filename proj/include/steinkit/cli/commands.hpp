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

#ifndef STEINKIT_CLI_COMMANDS_HPP
#define STEINKIT_CLI_COMMANDS_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "steinkit/cli/config.hpp"
#include "steinkit/cli/csv.hpp"

namespace steinkit::cli {

struct SampleTable {
  std::vector<std::string> columns;
  Matrix values;
};

struct RunOutput {
  std::vector<MetricRow> metrics;
  nlohmann::json results = nlohmann::json::object();  // final estimates
  std::optional<SampleTable> samples;
};

RunOutput run_command(const ExperimentConfig& config);

}  // namespace steinkit::cli

#endif  // STEINKIT_CLI_COMMANDS_HPP
