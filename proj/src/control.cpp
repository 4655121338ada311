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

#include "ergorisk/control.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <utility>

#include "ergorisk/errors.hpp"
#include "ergorisk/io.hpp"

namespace ergorisk {
namespace {

void require_input_free(const RiskFunctional& risk) {
  if (risk.depends_on_input()) {
    throw Error(ErrorCode::kRcNotZero,
                "value matrix and gradient are defined for Rc = 0 only");
  }
}

void require_nonnegative(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument,
                "lambda must be finite and >= 0, got " +
                    format_number(lambda));
  }
}

// Q_K + 4 lambda Qc V Qc.
Matrix shifted_weight(const LinearSystem& sys, const CostSpec& cost,
                      const RiskFunctional& risk, const Matrix& k,
                      double lambda) {
  const Matrix v = sys.noise_covariance();
  return symmetrize(cost.q + k.transpose() * cost.r * k +
                    4.0 * lambda * risk.qc * v * risk.qc);
}

struct GradientParts {
  Matrix a_k;
  Matrix sigma;
  Matrix p;
  Matrix grad;
};

GradientParts gradient_parts(const LinearSystem& sys, const CostSpec& cost,
                             const RiskFunctional& risk, const Matrix& k,
                             double lambda) {
  require_input_free(risk);
  require_nonnegative(lambda);
  GradientParts parts;
  parts.a_k = sys.closed_loop(k);
  parts.sigma = solve_lyapunov_discrete(parts.a_k, sys.noise_covariance());
  parts.p = solve_lyapunov_discrete(
      parts.a_k.transpose(), shifted_weight(sys, cost, risk, k, lambda));
  parts.grad = 2.0 *
               (cost.r * k + sys.b().transpose() * parts.p * parts.a_k) *
               parts.sigma;
  return parts;
}

}  // namespace

void validate_cost(const LinearSystem& sys, const CostSpec& cost) {
  require_shape(cost.q, sys.state_dim(), sys.state_dim(), "Q");
  require_shape(cost.r, sys.input_dim(), sys.input_dim(), "R");
  if (!is_positive_definite(cost.q)) {
    throw Error(ErrorCode::kShape, "Q must be symmetric positive definite");
  }
  if (!is_positive_definite(cost.r)) {
    throw Error(ErrorCode::kShape, "R must be symmetric positive definite");
  }
}

Matrix stationary_covariance(const LinearSystem& sys, const Matrix& k) {
  return solve_lyapunov_discrete(sys.closed_loop(k), sys.noise_covariance());
}

double lqr_cost(const LinearSystem& sys, const CostSpec& cost,
                const Matrix& k) {
  const Matrix sigma = stationary_covariance(sys, k);
  return ((cost.q + k.transpose() * cost.r * k) * sigma).trace();
}

Matrix value_matrix(const LinearSystem& sys, const CostSpec& cost,
                    const RiskFunctional& risk, const Matrix& k,
                    double lambda) {
  require_input_free(risk);
  require_nonnegative(lambda);
  return solve_lyapunov_discrete(sys.closed_loop(k).transpose(),
                                 shifted_weight(sys, cost, risk, k, lambda));
}

LagrangianForms lagrangian_forms(const LinearSystem& sys, const CostSpec& cost,
                                 const RiskFunctional& risk, const Matrix& k,
                                 double lambda, double beta_bar) {
  require_nonnegative(lambda);
  const Matrix sigma = stationary_covariance(sys, k);
  const Matrix qk = cost.q + k.transpose() * cost.r * k;
  const double j = (qk * sigma).trace();
  const double gamma = gamma_n_analytic(sys, k, risk);

  const Matrix v = sys.noise_covariance();
  const Matrix qc_k = risk.qc_k(k);
  const Matrix qcv = qc_k * v;
  const double m4 = m4_exact(sys.noise(), qc_k, sys.h());
  const double beta = -4.0 * (qcv * qcv).trace() + m4 - beta_bar;

  LagrangianForms forms;
  forms.raw = j + lambda * (gamma - beta_bar);
  forms.expanded =
      ((qk + 4.0 * lambda * qcv * qc_k) * sigma).trace() + lambda * beta;
  return forms;
}

double lagrangian(const LinearSystem& sys, const CostSpec& cost,
                  const RiskFunctional& risk, const Matrix& k, double lambda,
                  double beta_bar) {
  return lagrangian_forms(sys, cost, risk, k, lambda, beta_bar).raw;
}

Matrix lagrangian_gradient(const LinearSystem& sys, const CostSpec& cost,
                           const RiskFunctional& risk, const Matrix& k,
                           double lambda) {
  return gradient_parts(sys, cost, risk, k, lambda).grad;
}

LagrangianPoint evaluate_lagrangian(const ControlProblem& problem,
                                    const Matrix& k, double lambda) {
  const auto& [sys, cost, risk] = problem;
  GradientParts parts = gradient_parts(sys, cost, risk, k, lambda);
  LagrangianPoint point;
  point.k = k;
  point.lambda = lambda;
  point.value = lagrangian(sys, cost, risk, k, lambda, 0.0);
  point.grad_norm = parts.grad.norm();
  point.p = std::move(parts.p);
  point.sigma = std::move(parts.sigma);
  point.grad = std::move(parts.grad);
  return point;
}

HewerResult hewer_solve(const ControlProblem& problem, double lambda,
                        const Matrix& k_init, const HewerOptions& options) {
  const auto& [sys, cost, risk] = problem;
  if (!(options.eps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "eps must be > 0");
  }
  if (!is_schur_stable(sys.closed_loop(k_init))) {
    throw Error(ErrorCode::kUnstableMatrix,
                "Hewer iteration needs a stabilizing initial gain");
  }
  const double threshold = std::sqrt(options.eps);

  HewerResult result;
  Matrix k = k_init;
  for (int it = 0;; ++it) {
    const GradientParts parts = gradient_parts(sys, cost, risk, k, lambda);
    const double grad_norm = parts.grad.norm();
    const double value =
        (shifted_weight(sys, cost, risk, k, lambda) * parts.sigma).trace();
    result.trace.push_back(
        {it, value, grad_norm, spectral_radius(parts.a_k)});
    if (grad_norm < threshold) {
      result.gain = std::move(k);
      result.iterations = it;
      result.grad_norm = grad_norm;
      return result;
    }
    if (it >= options.max_iterations) {
      throw Error(ErrorCode::kNoConvergence,
                  "Hewer iteration stopped at the cap of " +
                      std::to_string(options.max_iterations) +
                      " with gradient norm " + format_number(grad_norm));
    }
    // G = -(R + B^T P B)^{-1} grad Sigma_K^{-1}; Sigma_K > 0, so solve
    // Sigma_K G^T = grad^T with a Cholesky factorization.
    const Matrix curvature = cost.r + sys.b().transpose() * parts.p * sys.b();
    const Matrix grad_sigma_inv =
        parts.sigma.llt().solve(parts.grad.transpose()).transpose();
    const Matrix direction = -curvature.llt().solve(grad_sigma_inv);
    Matrix next = k + 0.5 * direction;
    if (!is_schur_stable(sys.closed_loop(next))) {
      throw StabilityLost(k, "Hewer iterate " + std::to_string(it + 1) +
                                 " is not stabilizing");
    }
    k = std::move(next);
  }
}

Matrix lqr_solve(const LinearSystem& sys, const CostSpec& cost) {
  const Matrix p = solve_dare(sys.a(), sys.b(), cost.q, cost.r);
  return riccati_gain(sys.a(), sys.b(), cost.r, p);
}

void write_hewer_trace_csv(std::ostream& os,
                           const std::vector<HewerTraceRow>& trace) {
  os << "iteration,lagrangian,grad_norm,rho\n";
  for (const auto& row : trace) {
    os << row.iteration << ',' << format_number(row.lagrangian) << ','
       << format_number(row.grad_norm) << ',' << format_number(row.rho)
       << '\n';
  }
}

Policy::Policy(std::shared_ptr<const ControlProblem> problem, Matrix gain)
    : problem_(std::move(problem)), gain_(std::move(gain)) {
  require_shape(gain_, problem_->sys.input_dim(), problem_->sys.state_dim(),
                "K");
}

void Policy::set_gain(Matrix gain) {
  require_shape(gain, problem_->sys.input_dim(), problem_->sys.state_dim(),
                "K");
  gain_ = std::move(gain);
  rho_.reset();
  sigma_.reset();
  cost_.reset();
  gamma_.reset();
}

double Policy::spectral_radius() const {
  if (!rho_) rho_ = ergorisk::spectral_radius(problem_->sys.closed_loop(gain_));
  return *rho_;
}

bool Policy::is_stabilizing() const {
  return spectral_radius() < 1.0 - kStabilityTol;
}

const Matrix& Policy::sigma() const {
  if (!sigma_) sigma_ = stationary_covariance(problem_->sys, gain_);
  return *sigma_;
}

double Policy::cost() const {
  if (!cost_) {
    const CostSpec& c = problem_->cost;
    cost_ = ((c.q + gain_.transpose() * c.r * gain_) * sigma()).trace();
  }
  return *cost_;
}

double Policy::gamma_n() const {
  if (!gamma_) gamma_ = gamma_n_analytic(problem_->sys, gain_, problem_->risk);
  return *gamma_;
}

}  // namespace ergorisk
