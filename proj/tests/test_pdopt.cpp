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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ergorisk/errors.hpp"
#include "ergorisk/pdopt.hpp"
#include "fixtures.hpp"

namespace ergorisk {
namespace {

using testing::scalar;
using testing::scalar_problem;

double gamma_lqr(const ControlProblem& p) {
  return gamma_n_analytic(p.sys, lqr_solve(p.sys, p.cost), p.risk);
}

TEST(OuterCap, TheoreticalCountAndResolution) {
  // ln(ln(1e2)) / 1e-4 = 15271.8...
  EXPECT_EQ(theoretical_outer_iterations(1e-2), 15272);
  EXPECT_EQ(theoretical_outer_iterations(0.5), 1);
  PdConfig cfg;
  EXPECT_EQ(resolve_outer_cap(cfg), kDefaultOuterCap);
  cfg.outer_cap = 17;
  EXPECT_EQ(resolve_outer_cap(cfg), 17);
}

TEST(Slater, Screening) {
  const ControlProblem p = scalar_problem(2.0);
  const double g = gamma_lqr(p);
  EXPECT_EQ(check_slater(p, 2.0 * g).status, SlaterStatus::kStrictlyFeasible);
  EXPECT_EQ(check_slater(p, 0.8 * g).status, SlaterStatus::kStrictlyFeasible);
  EXPECT_EQ(check_slater(p, 0.0).status, SlaterStatus::kInfeasibleEvidence);
  // With a = 0.5 the risk floor is 2 (m4 with a dead-beat gain) while
  // 0.8 * gamma(K_LQR) is below it.
  const ControlProblem tight = scalar_problem(0.5);
  EXPECT_EQ(check_slater(tight, 0.8 * gamma_lqr(tight)).status,
            SlaterStatus::kInfeasibleEvidence);
}

TEST(PrimalDual, InactiveConstraintReturnsLqr) {
  const ControlProblem p = scalar_problem(2.0);
  PdConfig cfg;
  cfg.beta_bar = 2.0 * gamma_lqr(p);
  const PdResult r = primal_dual_solve(p, cfg);
  EXPECT_TRUE(r.report.short_circuit);
  EXPECT_TRUE(r.report.feasible);
  EXPECT_EQ(r.report.lambda_last, 0.0);
  const Matrix k_lqr = lqr_solve(p.sys, p.cost);
  EXPECT_LT((r.report.k_final - k_lqr).norm(), 1e-8);
}

TEST(PrimalDual, ScalarFamilyActiveConstraint) {
  for (double a : {1.2, 1.5, 2.0}) {
    const ControlProblem p = scalar_problem(a);
    PdConfig cfg;
    cfg.beta_bar = 0.8 * gamma_lqr(p);
    const PdResult r = primal_dual_solve(p, cfg);
    const KktReport& k = r.report;
    EXPECT_TRUE(k.feasible) << "a=" << a;
    EXPECT_LE(std::abs(k.slack), k.tol_b) << "a=" << a;
    EXPECT_GT(k.lambda_last, 0.0);
    EXPECT_LT(k.grad_norm, 1e-4);
    EXPECT_GE(k.j_final,
              lqr_cost(p.sys, p.cost, lqr_solve(p.sys, p.cost)) - 1e-9);
    EXPECT_LE(std::abs(k.cs_residual), 1e-3 * std::max(1.0, k.j_final));

    const auto opt = oracle::golden_section_dual(testing::to_oracle(p),
                                                 cfg.beta_bar);
    EXPECT_NEAR(k.gamma_final, opt.gamma, 1e-2 * opt.gamma);
    const DualValue d = dual_function(p, k.lambda_avg, cfg.beta_bar);
    EXPECT_LE(std::abs(k.j_final - d.value), 0.05 * k.j_final);
    EXPECT_NEAR(dual_function(p, opt.lambda, cfg.beta_bar).value, opt.cost,
                1e-3 * opt.cost);
  }
}

TEST(PrimalDual, DualIteratesStayNonNegativeAndBounded) {
  const auto family = testing::feasible_family(21, 5);
  ASSERT_EQ(family.size(), 5u);
  for (const auto& inst : family) {
    PdConfig cfg;
    cfg.beta_bar = inst.beta_bar;
    const PdResult r = primal_dual_solve(inst.problem, cfg);
    for (const auto& row : r.trace) EXPECT_GE(row.lambda, 0.0);
    EXPECT_TRUE(std::isfinite(r.report.lambda_max));
    EXPECT_GE(r.report.j_final, lqr_cost(inst.problem.sys, inst.problem.cost,
                                          inst.k_lqr) -
                                    1e-9);
  }
}

TEST(PrimalDual, InfeasibleTargetReportsInsteadOfThrowing) {
  const ControlProblem p = scalar_problem(2.0);
  PdConfig cfg;
  cfg.beta_bar = 0.5;
  const PdResult r = primal_dual_solve(p, cfg);
  EXPECT_FALSE(r.report.feasible);
  EXPECT_EQ(r.report.slater, SlaterStatus::kInfeasibleEvidence);
}

TEST(PrimalDual, RejectsInputDependentRisk) {
  ControlProblem p = scalar_problem(2.0);
  p.risk.rc = scalar(1.0);
  PdConfig cfg;
  cfg.beta_bar = 1.0;
  try {
    primal_dual_solve(p, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRcNotZero);
  }
}

TEST(PrimalDual, TraceCsvHeader) {
  const ControlProblem p = scalar_problem(2.0);
  PdConfig cfg;
  cfg.beta_bar = 0.8 * gamma_lqr(p);
  const PdResult r = primal_dual_solve(p, cfg);
  std::ostringstream os;
  write_pd_trace_csv(os, r.trace);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "m,lambda,gamma_n,slack,cost,grad_norm,inner_iters");
  EXPECT_EQ(r.trace.size(), static_cast<std::size_t>(r.report.outer_iters));
}

TEST(Dual, ZeroMultiplierIsLqrCost) {
  const ControlProblem p = scalar_problem(2.0);
  const DualValue d = dual_function(p, 0.0, 1.0);
  EXPECT_NEAR(d.value, lqr_cost(p.sys, p.cost, lqr_solve(p.sys, p.cost)),
              1e-10);
}

TEST(Dual, ConcaveAndRiskMonotone) {
  const auto family = testing::feasible_family(33, 20);
  ASSERT_EQ(family.size(), 20u);
  for (const auto& inst : family) {
    std::vector<double> grid{0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
    std::vector<DualValue> values;
    Matrix warm = inst.k_lqr;
    for (double lambda : grid) {
      values.push_back(dual_function(inst.problem, lambda, inst.beta_bar, warm));
      warm = values.back().k;
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double g_prev =
          gamma_n_analytic(inst.problem.sys, values[i - 1].k, inst.problem.risk);
      const double g_here =
          gamma_n_analytic(inst.problem.sys, values[i].k, inst.problem.risk);
      EXPECT_LE(g_here, g_prev + 1e-9 * g_prev);
    }
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double lo = grid[i - 1], hi = grid[i + 1];
      const double mid = 0.5 * (lo + hi);
      const double chord = 0.5 * (values[i - 1].value + values[i + 1].value);
      EXPECT_GE(dual_function(inst.problem, mid, inst.beta_bar, warm).value,
                chord - 1e-9 * std::max(1.0, std::abs(chord)));
    }
  }
}

}  // namespace
}  // namespace ergorisk
