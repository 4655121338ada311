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

// Policy-space quantities for linear feedback U = K X:
//
//   Sigma_K      = A_K Sigma_K A_K^T + H Sigma_W H^T
//   J(K)         = tr((Q + K^T R K) Sigma_K)
//   L(K, lambda) = J(K) + lambda (gamma_N^2(K) - beta_bar)
//
// For an input-free risk functional (Rc = 0) the Lagrangian gradient is
//   grad L = 2 (R K + B^T P A_K) Sigma_K,
//   P      = A_K^T P A_K + Q_K + 4 lambda Qc V Qc,   V = H Sigma_W H^T,
// and its minimizer over stabilizing gains is reached by the Hewer
// (quasi-Newton) iteration  K <- K - 1/2 (R + B^T P B)^{-1} grad Sigma_K^{-1}.

#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "ergorisk/matops.hpp"
#include "ergorisk/risk.hpp"
#include "ergorisk/system.hpp"

namespace ergorisk {

struct CostSpec {
  Matrix q;  // n x n, Q > 0
  Matrix r;  // m x m, R > 0
};

// Throws ShapeError on mis-sized or indefinite weights.
void validate_cost(const LinearSystem& sys, const CostSpec& cost);

struct ControlProblem {
  LinearSystem sys;
  CostSpec cost;
  RiskFunctional risk;
};

// Throws UnstableMatrix when A + B K is not Schur stable.
Matrix stationary_covariance(const LinearSystem& sys, const Matrix& k);

double lqr_cost(const LinearSystem& sys, const CostSpec& cost,
                const Matrix& k);

// P_(K, lambda). Throws RcNotZero for input-dependent risk functionals.
Matrix value_matrix(const LinearSystem& sys, const CostSpec& cost,
                    const RiskFunctional& risk, const Matrix& k,
                    double lambda);

// The Lagrangian evaluated two ways:
//   raw      = J(K) + lambda (gamma_N^2(K) - beta_bar)
//   expanded = tr((Q_K + 4 lambda Qc_K V Qc_K) Sigma_K) + lambda beta[Qc_K]
// with beta[Qc_K] = -4 tr((Qc_K V)^2) + m4[Qc_K] - beta_bar.
struct LagrangianForms {
  double raw = 0.0;
  double expanded = 0.0;
};

LagrangianForms lagrangian_forms(const LinearSystem& sys, const CostSpec& cost,
                                 const RiskFunctional& risk, const Matrix& k,
                                 double lambda, double beta_bar);

double lagrangian(const LinearSystem& sys, const CostSpec& cost,
                  const RiskFunctional& risk, const Matrix& k, double lambda,
                  double beta_bar);

Matrix lagrangian_gradient(const LinearSystem& sys, const CostSpec& cost,
                           const RiskFunctional& risk, const Matrix& k,
                           double lambda);

struct LagrangianPoint {
  Matrix k;
  double lambda = 0.0;
  Matrix p;
  Matrix sigma;
  double value = 0.0;  // L(K, lambda) with beta_bar = 0
  Matrix grad;
  double grad_norm = 0.0;
};

LagrangianPoint evaluate_lagrangian(const ControlProblem& problem,
                                    const Matrix& k, double lambda);

struct HewerOptions {
  double eps = 1e-8;  // stop once |grad|_F < sqrt(eps)
  int max_iterations = 200;
};

struct HewerTraceRow {
  int iteration;
  double lagrangian;  // tr((Q_K + 4 lambda Qc V Qc) Sigma_K)
  double grad_norm;
  double rho;
};

struct HewerResult {
  Matrix gain;
  int iterations = 0;  // accepted K updates
  double grad_norm = 0.0;
  std::vector<HewerTraceRow> trace;
};

// Minimizes L(., lambda) from a stabilizing K_init with step size 1/2.
// Throws UnstableMatrix for a destabilizing K_init, StabilityLost when an
// iterate leaves the stabilizing set and NoConvergence at the iteration cap.
HewerResult hewer_solve(const ControlProblem& problem, double lambda,
                        const Matrix& k_init, const HewerOptions& options = {});

// K_LQR from the DARE. Throws NotStabilizable.
Matrix lqr_solve(const LinearSystem& sys, const CostSpec& cost);

void write_hewer_trace_csv(std::ostream& os,
                           const std::vector<HewerTraceRow>& trace);

// A gain bound to its problem, with closed-loop facts computed on first use.
// Not safe for concurrent first access.
class Policy {
 public:
  Policy(std::shared_ptr<const ControlProblem> problem, Matrix gain);

  const Matrix& gain() const { return gain_; }
  void set_gain(Matrix gain);

  double spectral_radius() const;
  bool is_stabilizing() const;
  const Matrix& sigma() const;
  double cost() const;
  double gamma_n() const;

 private:
  std::shared_ptr<const ControlProblem> problem_;
  Matrix gain_;
  mutable std::optional<double> rho_;
  mutable std::optional<Matrix> sigma_;
  mutable std::optional<double> cost_;
  mutable std::optional<double> gamma_;
};

}  // namespace ergorisk
