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

// Primal-dual solver for
//
//   min_K J(K)   s.t.  gamma_N^2(K) <= beta_bar,  K stabilizing,
//
// alternating an inner Hewer solve of K*(lambda) with projected dual ascent
//   lambda_{m+1} = max(0, lambda_m + eta_m (gamma_N^2(K) - beta_bar)),
//   eta_m        = (gamma_N^2(K_0) - beta_bar)^{-1} (m + 1)^{-1/2}.

#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "ergorisk/control.hpp"

namespace ergorisk {

struct PdConfig {
  double beta_bar = 0.0;
  double eps = 1e-8;
  // Outer iteration cap; 0 selects min(theoretical_outer_iterations(eps),
  // kDefaultOuterCap).
  long outer_cap = 0;
  double lambda0 = 1.0;
  int inner_max_iterations = 200;
  // Constraint activity band tol_b = tol_b_rel * beta_bar.
  double tol_b_rel = 1e-3;
  // Early stop: |slack| <= tol_b and |lambda step| <= lambda_step_tol for
  // stop_window consecutive outer steps.
  double lambda_step_tol = 1e-6;
  int stop_window = 5;
};

inline constexpr long kDefaultOuterCap = 200000;

// ceil(c_T ln(ln(1/eps)) / eps^2), saturated at LONG_MAX.
long theoretical_outer_iterations(double eps, double c_t = 1.0);

long resolve_outer_cap(const PdConfig& config);

enum class SlaterStatus { kStrictlyFeasible, kBoundary, kInfeasibleEvidence };

std::string_view to_string(SlaterStatus status);

struct SlaterReport {
  SlaterStatus status = SlaterStatus::kBoundary;
  double gamma_lqr = 0.0;
  double best_gamma = 0.0;
  // (lambda, gamma_N^2(K*(lambda))) for the sweep lambda = 1 .. 1e4.
  std::vector<std::pair<double, double>> sweep;
};

// Screens for a strictly feasible gain among K_LQR and K*(lambda) for
// lambda in {1, 10, 1e2, 1e3, 1e4}. Infeasibility is reported (heuristically)
// when every value sits above beta_bar and either beta_bar <= 0 or the sweep
// has flattened out (last relative decrease < 1e-2).
SlaterReport check_slater(const ControlProblem& problem, double beta_bar,
                          const HewerOptions& inner = {});

struct KktReport {
  Matrix k_final;
  double lambda_avg = 0.0;
  double lambda_last = 0.0;
  double lambda_max = 0.0;
  double grad_norm = 0.0;
  double slack = 0.0;        // gamma_N^2(K_final) - beta_bar
  double cs_residual = 0.0;  // lambda_last * slack
  double j_final = 0.0;
  double gamma_final = 0.0;
  double beta_bar = 0.0;
  double tol_b = 0.0;
  long outer_iters = 0;
  long total_inner_iters = 0;
  bool feasible = false;
  // The initial gain was already feasible and K*(0) is returned directly.
  bool short_circuit = false;
  SlaterStatus slater = SlaterStatus::kStrictlyFeasible;
};

struct PdTraceRow {
  long m;
  double lambda;
  double gamma;
  double slack;
  double cost;
  double grad_norm;
  int inner_iters;
};

struct PdResult {
  KktReport report;
  std::vector<PdTraceRow> trace;
};

// Runs the primal-dual iteration from K0 (default K_LQR). Infeasibility
// evidence yields a report with feasible == false instead of an error;
// StabilityLost and NoConvergence from the inner solver propagate.
PdResult primal_dual_solve(const ControlProblem& problem,
                           const PdConfig& config,
                           const std::optional<Matrix>& k0 = std::nullopt);

struct DualValue {
  double value = 0.0;             // tr(P V) + lambda beta[Qc]
  double lagrangian_value = 0.0;  // L(K*(lambda), lambda) evaluated directly
  Matrix k;                       // K*(lambda)
};

// Dual function at lambda. Throws NumericalError if the two evaluations
// disagree by more than 1e-8 relative.
DualValue dual_function(const ControlProblem& problem, double lambda,
                        double beta_bar,
                        const std::optional<Matrix>& k_warm = std::nullopt,
                        const HewerOptions& inner = {1e-16, 200});

void write_pd_trace_csv(std::ostream& os, const std::vector<PdTraceRow>& trace);

}  // namespace ergorisk
