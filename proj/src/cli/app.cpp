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

#include "steinkit/cli/app.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "steinkit/cli/commands.hpp"
#include "steinkit/cli/config.hpp"
#include "steinkit/parallel_kernels.hpp"

namespace steinkit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int report_error(int code, const std::string& kind, const std::string& message) {
  const json line = {{"status", "error"}, {"exit_code", code}, {"kind", kind}, {"message", message}};
  std::cerr << line.dump() << '\n';
  return code;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  body(out);
  if (!out) {
    throw ConfigError("failed writing " + path.string());
  }
}

void write_outputs(const ExperimentConfig& config, const RunOutput& run, int threads) {
  const fs::path dir(config.output);
  fs::create_directories(dir);
  write_file(dir / "metrics.csv", [&](std::ostream& o) { write_metrics(o, run.metrics); });
  json outputs = {"metrics.csv", "summary.json"};
  if (run.samples) {
    write_file(dir / "samples.csv",
               [&](std::ostream& o) { write_table(o, run.samples->columns, run.samples->values); });
    outputs.push_back("samples.csv");
  }
  const json summary = {{"subcommand", config.subcommand},
                        {"seed", config.seed},
                        {"threads", threads},
                        {"results", run.results},
                        {"outputs", outputs},
                        {"config", config.echo}};
  write_file(dir / "summary.json", [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
}

}  // namespace

int run_main(int argc, char** argv) {
  CLI::App app{"steinkit: Stein-discrepancy sampling and testing experiments", "steinkit"};
  std::optional<std::string> subcommand;
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int threads = 1;
  app.add_option("subcommand", subcommand, "Experiment to run")
      ->check(CLI::IsMember(subcommands()));
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);
    }
    return report_error(kExitConfig, "usage", e.what());
  }

  try {
    const Overrides overrides{subcommand, seed, out_dir};
    const ExperimentConfig config =
        config_path ? load_config(*config_path, overrides) : parse_config(json::object(), overrides);
    set_num_threads(threads);
    const RunOutput run = run_command(config);
    write_outputs(config, run, threads);
    return kExitOk;
  } catch (const ConfigError& e) {
    return report_error(kExitConfig, "config", e.what());
  } catch (const Error& e) {
    return report_error(e.is_numerical() ? kExitNumerical : kExitConfig, std::string(to_string(e.kind())),
                        e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error(kExitConfig, "io", e.what());
  } catch (const std::exception& e) {
    return report_error(kExitNumerical, "internal", e.what());
  }
}

}  // namespace steinkit::cli
