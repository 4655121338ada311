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

// Experiment configuration: a single JSON document with the sections
// system, noise, cost, risk, schedule, solver, simulation, gain, output and
// a master seed, plus an optional free-text description. Matrices are row-major nested arrays. Unknown keys are
// rejected.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ergorisk/control.hpp"
#include "ergorisk/pdopt.hpp"

namespace ergorisk::cli {

struct GeneratorSpec {
  int n = 2;
  int m = 1;
  int d = 2;
  double rho_target = 0.9;
  std::uint64_t seed = 0;
};

struct SystemSpec {
  // Exactly one of inline matrices or generator parameters is set.
  std::optional<Matrix> a, b, h;
  std::optional<GeneratorSpec> generator;
};

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kGaussian;
  double nu = 0.0;
  std::optional<Matrix> sigma_w;  // default identity
  std::optional<Matrix> samples;  // empirical only, N x d
};

struct BetaBarSpec {
  enum class Mode { kRatio, kAbsolute };
  Mode mode = Mode::kRatio;
  double value = 0.8;
};

struct CostConfig {
  std::optional<Matrix> q, r;  // default identity
};

struct RiskSpec {
  std::optional<Matrix> qc, rc;  // default identity, zero
  BetaBarSpec beta_bar;
};

struct ScheduleSpec {
  bool enabled = false;
  int period = 500;
  double magnitude = 1.0;
  std::optional<Vector> direction;  // default e_1
};

struct SolverSpec {
  double eps = 1e-8;
  long outer_cap = 0;
  int inner_cap = 200;
  double tol_b_rel = 1e-3;
  double lambda0 = 1.0;
};

struct SimulationSpec {
  long horizon = 10000;
  int rollouts = 200;
  bool burn_in = true;
  long burn_in_steps = -1;
  long trace_stride = 100;
};

enum class GainSource { kLqr, kSolved, kExplicit };

struct GainSpec {
  GainSource source = GainSource::kSolved;
  std::optional<Matrix> k;
};

enum class OutputFormat { kJson, kCsv };

struct OutputSpec {
  std::string dir = "out";
  OutputFormat format = OutputFormat::kJson;
};

struct ExperimentConfig {
  SystemSpec system;
  NoiseSpec noise;
  CostConfig cost;
  RiskSpec risk;
  ScheduleSpec schedule;
  SolverSpec solver;
  SimulationSpec simulation;
  GainSpec gain;
  OutputSpec output;
  std::uint64_t seed = 0;
  std::string description;  // free text, carried through unchanged
};

// Throws ConfigError for unknown keys, wrong types and bad enum values, and
// ShapeError (naming the field) for ragged or mis-sized matrices.
ExperimentConfig parse_config(const nlohmann::json& document);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);  // IoError if unreadable

// Canonical form with every default filled in.
nlohmann::json to_json(const ExperimentConfig& config);
std::string serialize_config(const ExperimentConfig& config);

// FNV-1a 64 of the canonical form without the output section, as 16 hex
// digits.
std::string config_hash(const ExperimentConfig& config);

std::string to_string(GainSource source);
std::string to_string(OutputFormat format);

// Resolved problem data. build_system runs the LinearSystem checks, so it
// throws NotStabilizable / RiskMomentUnavailable / ShapeError as appropriate.
LinearSystem build_system(const ExperimentConfig& config);
ControlProblem build_problem(const ExperimentConfig& config);
PdConfig build_pd_config(const ExperimentConfig& config, double beta_bar);
DisturbanceSchedule build_schedule(const ExperimentConfig& config,
                                   Eigen::Index state_dim);

// beta_bar in absolute units; ratio form is scaled by gamma_N^2(K_LQR).
double resolve_beta_bar(const ExperimentConfig& config,
                        const ControlProblem& problem);

struct AssumptionCheck {
  std::string id;  // "A1".."A4", plus auxiliary checks
  std::string description;
  bool passed = false;
  std::string detail;
};

// Screens the standing assumptions on the raw matrices without throwing for
// violations: noise law, stabilizability, Q > 0 with H full row rank, and
// Slater's condition for the resolved beta_bar. Auxiliary checks cover
// shapes, R > 0, Qc >= 0 and controllability of (A + B K_LQR, H).
std::vector<AssumptionCheck> check_assumptions(const ExperimentConfig& config);

}  // namespace ergorisk::cli
