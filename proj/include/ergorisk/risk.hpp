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

// Ergodic-risk statistics for the quadratic risk functional
//   g(x, u) = x^T Qc x + u^T Rc u
// along a closed loop U_t = K X_t.
//
// With A_K = A + B K, Qc_K = Qc + K^T Rc K and V = H Sigma_W H^T, the risk
// increment is
//   C_{t+1} = X_{t+1}^T Qc_K X_{t+1} - X_t^T A_K^T Qc_K A_K X_t - tr(Qc_K V),
// a martingale difference. S_t sums C_s, N_t sums E[C_s^2 | F_{s-1}], and
// N_t / t converges to
//   gamma_N^2(K) = 4 tr(Qc_K V Qc_K (Sigma_K - V)) + m4[Qc_K],
//   m4[Qc_K]     = E[tr(Qc_K H (W W^T - Sigma_W) H^T)^2].

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ergorisk/matops.hpp"
#include "ergorisk/noise.hpp"
#include "ergorisk/system.hpp"

namespace ergorisk {

struct RiskFunctional {
  Matrix qc;  // n x n, PSD
  Matrix rc;  // m x m, PSD

  // Qc + K^T Rc K.
  Matrix qc_k(const Matrix& k) const;
  double evaluate(const Vector& x, const Vector& u) const;
  bool depends_on_input() const { return rc.size() > 0 && rc.norm() > 0.0; }
};

// Throws ShapeError unless Qc and Rc are sized for `sys` and symmetric PSD.
void validate_risk(const LinearSystem& sys, const RiskFunctional& risk);

struct RiskRunningStats {
  long t = 0;
  double s = 0.0;  // S_t
  double n = 0.0;  // N_t

  double normalized_s() const;  // S_t / sqrt(t)
  double normalized_n() const;  // N_t / t
};

enum class GammaMethod { kAnalytic, kMcConditional, kMcCltVariance };

struct GammaEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero iff method == kAnalytic
  GammaMethod method = GammaMethod::kAnalytic;
  long samples = 0;
};

struct ScalarEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

struct VectorEstimate {
  Vector value;
  Vector std_error;
  long samples = 0;
};

// Per-closed-loop constants for the increment and its conditional variance
//   E[C_{t+1}^2 | F_t] = 4 x^T A_K^T Qc_K V Qc_K A_K x
//                        + 4 M3^T Qc_K A_K x + m4.
class RiskContext {
 public:
  RiskContext(const LinearSystem& sys, const Matrix& k,
              const RiskFunctional& risk);

  double increment(const Vector& x, const Vector& x_next) const;
  double conditional_variance(const Vector& x) const;

  const Matrix& closed_loop() const { return a_k_; }
  const Matrix& qc_k() const { return qc_k_; }
  double m4() const { return m4_; }
  const Vector& m3() const { return m3_; }

 private:
  Matrix a_k_;
  Matrix qc_k_;
  Matrix predict_;   // A_K^T Qc_K A_K
  Matrix variance_;  // 4 A_K^T Qc_K V Qc_K A_K
  Vector linear_;    // 4 A_K^T Qc_K M3
  double trace_term_ = 0.0;
  double m4_ = 0.0;
  Vector m3_;
};

// C_{t+1} for the transition x -> x_next.
double risk_increment(const LinearSystem& sys, const Matrix& k,
                      const Matrix& qc_k, const Vector& x_next,
                      const Vector& x);

// S_{t+1} = S_t + C_{t+1},  N_{t+1} = N_t + E[C_{t+1}^2 | F_t].
RiskRunningStats accumulate(const RiskRunningStats& stats,
                            const RiskContext& context, const Vector& x,
                            const Vector& x_next);

// 2 tr((H^T Qc_K H Sigma_W)^2). Throws WrongNoiseModel for non-gaussian noise.
double m4_analytic_gaussian(const NoiseModel& model, const Matrix& qc_k,
                            const Matrix& h);

// m4 in closed form for the model: gaussian as above; student_t through the
// chi-square scale mixture (E[tau^4] = (nu-2)/(nu-4)); empirical by exact
// averaging over the support.
double m4_exact(const NoiseModel& model, const Matrix& qc_k, const Matrix& h);

// M3 = E[H W tr(Qc_K H (W W^T - Sigma_W) H^T)]; zero for symmetric laws.
Vector m3_exact(const NoiseModel& model, const Matrix& qc_k, const Matrix& h);

// Sample estimates (samples >= 1e4) with standard errors.
ScalarEstimate m4_monte_carlo(const Matrix& qc_k, const Matrix& h,
                              const NoiseModel& model, long samples,
                              std::uint64_t seed);
VectorEstimate m3_monte_carlo(const Matrix& qc_k, const Matrix& h,
                              const NoiseModel& model, long samples,
                              std::uint64_t seed);

// 4 tr(Qc_K V Qc_K (Sigma_K - V)) + m4 given a precomputed Sigma_K.
double gamma_n_from_covariance(const LinearSystem& sys, const Matrix& qc_k,
                               const Matrix& sigma_k, double m4);

// Requires K stabilizing and (A_K, H) controllable; throws UnstableMatrix,
// NotControllable or RiskMomentUnavailable.
double gamma_n_analytic(const LinearSystem& sys, const Matrix& k,
                        const RiskFunctional& risk);

// ceil(ln(1e-6) / ln(rho(A_K))), at least 1.
long mixing_horizon(double rho);

struct EstimatorOptions {
  bool burn_in = true;
  long burn_in_steps = -1;  // -1: 10 * mixing_horizon(rho(A_K))
  int workers = 1;
};

long resolve_burn_in(const LinearSystem& sys, const Matrix& k,
                     const EstimatorOptions& options);

struct EstimatorTraceRow {
  long t;
  double normalized_s;
  double normalized_n;
};

struct LlnRun {
  RiskRunningStats stats;
  double increment_mean = 0.0;
  double increment_stderr = 0.0;
  std::vector<EstimatorTraceRow> trace;
};

// One rollout of T steps (after burn-in) from X_0 = 0 accumulating S_t, N_t.
// A trace row is kept every `stride` steps (0 disables the trace).
LlnRun run_lln(const LinearSystem& sys, const Matrix& k,
               const RiskFunctional& risk, long horizon, std::uint64_t seed,
               long stride = 0, const EstimatorOptions& options = {});

// S_T / sqrt(T) for `rollouts` independent rollouts, in rollout order.
std::vector<double> clt_samples(const LinearSystem& sys, const Matrix& k,
                                const RiskFunctional& risk, long horizon,
                                int rollouts, std::uint64_t seed,
                                const EstimatorOptions& options = {});

// Unbiased sample variance with a jackknife standard error.
ScalarEstimate variance_with_jackknife(const std::vector<double>& samples);

// Sample variance of S_T / sqrt(T) across rollouts (rollouts >= 100).
GammaEstimate gamma_mc_clt(const LinearSystem& sys, const Matrix& k,
                           const RiskFunctional& risk, long horizon,
                           int rollouts, std::uint64_t seed,
                           const EstimatorOptions& options = {});

// Mean of N_T / T across rollouts with its standard error.
GammaEstimate gamma_mc_conditional(const LinearSystem& sys, const Matrix& k,
                                   const RiskFunctional& risk, long horizon,
                                   int rollouts, std::uint64_t seed,
                                   const EstimatorOptions& options = {});

// Kolmogorov-Smirnov distance between the empirical law of `samples` and
// N(0, 1).
double ks_statistic_normal(std::vector<double> samples);

// Asymptotic critical value sqrt(-ln(alpha / 2) / 2) / sqrt(n).
double ks_critical_value(std::size_t n, double alpha = 0.01);

void write_estimator_trace_csv(std::ostream& os,
                               const std::vector<EstimatorTraceRow>& trace);

}  // namespace ergorisk
