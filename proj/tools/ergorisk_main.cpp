// Copyright 2026 The ErgoRisk Authors
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

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "ergorisk/cli/commands.hpp"
#include "ergorisk/cli/config.hpp"
#include "ergorisk/errors.hpp"

namespace {

int default_workers() {
  if (const char* env = std::getenv("ERGORISK_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring invalid ERGORISK_WORKERS='" << env << "'\n";
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ergorisk;

  CLI::App app{"Ergodic-risk constrained LQR experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int workers = 0;
  std::string format;

  const char* descriptions[][2] = {
      {"check", "screen the standing assumptions"},
      {"solve", "solve the risk-constrained problem"},
      {"estimate", "compare analytic and Monte Carlo risk variances"},
      {"simulate", "simulate seeded closed-loop rollouts"},
      {"compare", "matched-seed comparison against the LQR gain"}};
  for (const auto& [name, description] : descriptions) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--out", out_dir, "output directory, overrides the config");
    sub->add_option("--workers", workers, "worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", format, "bundle format")
        ->check(CLI::IsMember({"json", "csv"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommand(command);
  try {
    cli::ExperimentConfig config = cli::load_config(config_path);
    if (sub->count("--seed")) config.seed = seed;
    if (sub->count("--out")) config.output.dir = out_dir;
    if (sub->count("--format")) {
      config.output.format =
          format == "csv" ? cli::OutputFormat::kCsv : cli::OutputFormat::kJson;
    }
    cli::RunOptions run;
    run.out_dir = config.output.dir;
    run.workers = sub->count("--workers") ? workers : default_workers();

    const cli::CommandOutcome outcome = cli::run_command(command, config, run);
    if (outcome.bundle.contains("error")) {
      std::cerr << outcome.bundle["error"]["message"].get<std::string>()
                << '\n';
    }
    std::cout << outcome.bundle_path.string() << '\n';
    return outcome.exit_code;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return cli::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitSolver;
  }
}
