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

#include "ergorisk/pdopt.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <ostream>

#include "ergorisk/errors.hpp"
#include "ergorisk/io.hpp"

namespace ergorisk {
namespace {

// J(K) and gamma_N^2(K) from one Lyapunov solve. m4 does not depend on K
// when Rc = 0.
struct ClosedLoopFacts {
  double cost;
  double gamma;
};

ClosedLoopFacts closed_loop_facts(const ControlProblem& problem,
                                  const Matrix& k, double m4) {
  const Matrix sigma = stationary_covariance(problem.sys, k);
  const Matrix qk = problem.cost.q + k.transpose() * problem.cost.r * k;
  return {(qk * sigma).trace(),
          gamma_n_from_covariance(problem.sys, problem.risk.qc, sigma, m4)};
}

void fill_final(const ControlProblem& problem, KktReport& report,
                double m4) {
  const ClosedLoopFacts facts =
      closed_loop_facts(problem, report.k_final, m4);
  report.j_final = facts.cost;
  report.gamma_final = facts.gamma;
  report.slack = facts.gamma - report.beta_bar;
  report.cs_residual = report.lambda_last * report.slack;
  report.feasible = report.slack <= report.tol_b;
}

}  // namespace

long theoretical_outer_iterations(double eps, double c_t) {
  if (!(eps > 0.0 && eps < 1.0 / std::exp(1.0))) return 1;
  const double count =
      std::ceil(c_t * std::log(std::log(1.0 / eps)) / (eps * eps));
  if (!(count < static_cast<double>(LONG_MAX))) return LONG_MAX;
  return std::max(1L, static_cast<long>(count));
}

long resolve_outer_cap(const PdConfig& config) {
  if (config.outer_cap > 0) return config.outer_cap;
  return std::min(theoretical_outer_iterations(config.eps), kDefaultOuterCap);
}

std::string_view to_string(SlaterStatus status) {
  switch (status) {
    case SlaterStatus::kStrictlyFeasible: return "strictly_feasible";
    case SlaterStatus::kBoundary: return "boundary";
    case SlaterStatus::kInfeasibleEvidence: return "infeasible_evidence";
  }
  return "unknown";
}

SlaterReport check_slater(const ControlProblem& problem, double beta_bar,
                          const HewerOptions& inner) {
  const double margin = 1e-9 * std::max(1.0, std::abs(beta_bar));
  SlaterReport report;
  Matrix k = lqr_solve(problem.sys, problem.cost);
  report.gamma_lqr = gamma_n_analytic(problem.sys, k, problem.risk);
  report.best_gamma = report.gamma_lqr;
  for (double lambda : {1.0, 10.0, 1e2, 1e3, 1e4}) {
    k = hewer_solve(problem, lambda, k, inner).gain;
    const double gamma = gamma_n_analytic(problem.sys, k, problem.risk);
    report.sweep.emplace_back(lambda, gamma);
    report.best_gamma = std::min(report.best_gamma, gamma);
  }
  if (report.best_gamma < beta_bar - margin) {
    report.status = SlaterStatus::kStrictlyFeasible;
    return report;
  }
  const double last = report.sweep.back().second;
  const double previous = report.sweep[report.sweep.size() - 2].second;
  const bool flattened = previous - last < 1e-2 * std::abs(previous);
  if (report.best_gamma > beta_bar + margin && (beta_bar <= 0.0 || flattened)) {
    report.status = SlaterStatus::kInfeasibleEvidence;
  } else {
    report.status = SlaterStatus::kBoundary;
  }
  return report;
}

PdResult primal_dual_solve(const ControlProblem& problem,
                           const PdConfig& config,
                           const std::optional<Matrix>& k0) {
  if (problem.risk.depends_on_input()) {
    throw Error(ErrorCode::kRcNotZero,
                "the primal-dual solver supports Rc = 0 only");
  }
  if (!(config.eps > 0.0) || !std::isfinite(config.beta_bar) ||
      !(config.lambda0 >= 0.0) || config.stop_window < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "need eps > 0, finite beta_bar, lambda0 >= 0, stop_window >= 1");
  }
  const HewerOptions inner{config.eps, config.inner_max_iterations};
  const double m4 =
      m4_exact(problem.sys.noise(), problem.risk.qc, problem.sys.h());

  PdResult result;
  KktReport& report = result.report;
  report.beta_bar = config.beta_bar;
  report.tol_b = config.tol_b_rel * std::abs(config.beta_bar);

  Matrix k = k0 ? *k0 : lqr_solve(problem.sys, problem.cost);
  double gamma0 = closed_loop_facts(problem, k, m4).gamma;

  if (gamma0 <= config.beta_bar) {
    // The step size below is undefined for a feasible start. If the
    // unconstrained optimum is feasible too, it is the KKT point with
    // lambda = 0; otherwise restart the dual ascent from it.
    HewerResult unconstrained = hewer_solve(problem, 0.0, k, inner);
    report.total_inner_iters += unconstrained.iterations;
    k = std::move(unconstrained.gain);
    const double gamma_free = closed_loop_facts(problem, k, m4).gamma;
    if (gamma_free <= config.beta_bar) {
      report.k_final = k;
      report.grad_norm = unconstrained.grad_norm;
      report.short_circuit = true;
      fill_final(problem, report, m4);
      return result;
    }
    gamma0 = gamma_free;
  }

  const SlaterReport slater = check_slater(problem, config.beta_bar, inner);
  report.slater = slater.status;
  if (slater.status == SlaterStatus::kInfeasibleEvidence) {
    report.k_final = k;
    report.grad_norm = lagrangian_gradient(problem.sys, problem.cost,
                                           problem.risk, k, 0.0)
                           .norm();
    fill_final(problem, report, m4);
    report.feasible = false;
    return result;
  }

  const long cap = resolve_outer_cap(config);
  const double scale = 1.0 / (gamma0 - config.beta_bar);
  double lambda = config.lambda0;
  double lambda_sum = 0.0;
  int calm = 0;
  long m = 0;
  for (; m < cap; ++m) {
    HewerResult solved = hewer_solve(problem, lambda, k, inner);
    k = std::move(solved.gain);
    report.total_inner_iters += solved.iterations;
    report.grad_norm = solved.grad_norm;

    const ClosedLoopFacts facts = closed_loop_facts(problem, k, m4);
    const double slack = facts.gamma - config.beta_bar;
    const double eta = scale / std::sqrt(static_cast<double>(m + 1));
    const double next = std::max(0.0, lambda + eta * slack);
    result.trace.push_back({m, lambda, facts.gamma, slack, facts.cost,
                            solved.grad_norm, solved.iterations});

    const double step = std::abs(next - lambda);
    lambda = next;
    lambda_sum += lambda;
    report.lambda_max = std::max(report.lambda_max, lambda);

    calm = (std::abs(slack) <= report.tol_b &&
            step <= config.lambda_step_tol)
               ? calm + 1
               : 0;
    if (calm >= config.stop_window) {
      ++m;
      break;
    }
  }
  report.outer_iters = m;
  report.lambda_last = lambda;
  report.lambda_avg = m > 0 ? lambda_sum / static_cast<double>(m) : lambda;
  report.k_final = k;
  fill_final(problem, report, m4);
  return result;
}

DualValue dual_function(const ControlProblem& problem, double lambda,
                        double beta_bar, const std::optional<Matrix>& k_warm,
                        const HewerOptions& inner) {
  const auto& [sys, cost, risk] = problem;
  const Matrix start = k_warm ? *k_warm : lqr_solve(sys, cost);
  DualValue out;
  out.k = hewer_solve(problem, lambda, start, inner).gain;

  const Matrix v = sys.noise_covariance();
  const Matrix qcv = risk.qc * v;
  const double beta =
      -4.0 * (qcv * qcv).trace() + m4_exact(sys.noise(), risk.qc, sys.h()) -
      beta_bar;
  const Matrix p = value_matrix(sys, cost, risk, out.k, lambda);
  out.value = (p * v).trace() + lambda * beta;
  out.lagrangian_value = lagrangian(sys, cost, risk, out.k, lambda, beta_bar);

  const double scale =
      std::max({1.0, std::abs(out.value), std::abs(out.lagrangian_value)});
  if (std::abs(out.value - out.lagrangian_value) > 1e-8 * scale) {
    throw Error(ErrorCode::kNumerical,
                "dual value " + format_number(out.value) +
                    " disagrees with the Lagrangian " +
                    format_number(out.lagrangian_value));
  }
  return out;
}

void write_pd_trace_csv(std::ostream& os,
                        const std::vector<PdTraceRow>& trace) {
  os << "m,lambda,gamma_n,slack,cost,grad_norm,inner_iters\n";
  for (const auto& row : trace) {
    os << row.m << ',' << format_number(row.lambda) << ','
       << format_number(row.gamma) << ',' << format_number(row.slack) << ','
       << format_number(row.cost) << ',' << format_number(row.grad_norm)
       << ',' << row.inner_iters << '\n';
  }
}

}  // namespace ergorisk
