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

// Workflow drivers behind the command-line subcommands. Each command writes
// its result bundle and trace files into the output directory and returns
// the bundle together with a process exit code.

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ergorisk/cli/config.hpp"
#include "ergorisk/errors.hpp"

namespace ergorisk::cli {

inline constexpr const char* kToolName = "ergorisk";
inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitIo = 4;

// Exit code for a library error.
int exit_code_for(ErrorCode code);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  int workers = 1;
  // Skip the created_at field; used to compare bundles byte for byte.
  bool omit_timestamp = false;
};

struct CommandOutcome {
  int exit_code = kExitOk;
  nlohmann::json bundle;
  std::filesystem::path bundle_path;
};

// Assumption screening only.
CommandOutcome cmd_check(const ExperimentConfig& config, const RunOptions& run);

// lqr_solve, beta_bar resolution, primal_dual_solve. Solver errors are
// recorded in the bundle under "error" with exit code 3.
CommandOutcome cmd_solve(const ExperimentConfig& config, const RunOptions& run);

// Analytic gamma_N^2 next to the Monte Carlo CLT variance, the N_t/t trace
// and a normality statistic for the gain selected by config.gain.
CommandOutcome cmd_estimate(const ExperimentConfig& config,
                            const RunOptions& run);

// Seeded rollouts under the selected gain; one trajectory CSV per rollout.
CommandOutcome cmd_simulate(const ExperimentConfig& config,
                            const RunOptions& run);

// Matched-seed rollouts under K_LQR and the selected gain.
CommandOutcome cmd_compare(const ExperimentConfig& config,
                           const RunOptions& run);

// Dispatch by subcommand name; unknown names are a validation failure.
CommandOutcome run_command(const std::string& name,
                           const ExperimentConfig& config,
                           const RunOptions& run);

}  // namespace ergorisk::cli
