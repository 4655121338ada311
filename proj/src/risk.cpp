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

#include "ergorisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "ergorisk/errors.hpp"
#include "ergorisk/io.hpp"
#include "ergorisk/parallel.hpp"
#include "ergorisk/rng.hpp"

namespace ergorisk {
namespace {

// H^T Qc_K H, the quadratic form acting on the noise.
Matrix noise_form(const Matrix& qc_k, const Matrix& h) {
  return symmetrize(h.transpose() * qc_k * h);
}

void require_min_samples(long samples) {
  if (samples < 10000) {
    throw Error(ErrorCode::kInvalidArgument,
                "Monte Carlo moment estimates need at least 1e4 samples");
  }
}

Vector zero_state(const LinearSystem& sys) {
  return Vector::Zero(sys.state_dim());
}

}  // namespace

Matrix RiskFunctional::qc_k(const Matrix& k) const {
  if (rc.size() == 0) return qc;
  return symmetrize(qc + k.transpose() * rc * k);
}

double RiskFunctional::evaluate(const Vector& x, const Vector& u) const {
  double value = x.dot(qc * x);
  if (rc.size() > 0) value += u.dot(rc * u);
  return value;
}

void validate_risk(const LinearSystem& sys, const RiskFunctional& risk) {
  require_shape(risk.qc, sys.state_dim(), sys.state_dim(), "Qc");
  require_shape(risk.rc, sys.input_dim(), sys.input_dim(), "Rc");
  if (!is_positive_semidefinite(risk.qc)) {
    throw Error(ErrorCode::kShape, "Qc must be symmetric PSD");
  }
  if (!is_positive_semidefinite(risk.rc)) {
    throw Error(ErrorCode::kShape, "Rc must be symmetric PSD");
  }
}

double RiskRunningStats::normalized_s() const {
  return t > 0 ? s / std::sqrt(static_cast<double>(t)) : 0.0;
}

double RiskRunningStats::normalized_n() const {
  return t > 0 ? n / static_cast<double>(t) : 0.0;
}

RiskContext::RiskContext(const LinearSystem& sys, const Matrix& k,
                         const RiskFunctional& risk)
    : a_k_(sys.closed_loop(k)), qc_k_(risk.qc_k(k)) {
  require_shape(qc_k_, sys.state_dim(), sys.state_dim(), "Qc_K");
  const Matrix v = sys.noise_covariance();
  const Matrix qv = qc_k_ * v;
  predict_ = symmetrize(a_k_.transpose() * qc_k_ * a_k_);
  variance_ = symmetrize(4.0 * a_k_.transpose() * qv * qc_k_ * a_k_);
  trace_term_ = qv.trace();
  m4_ = m4_exact(sys.noise(), qc_k_, sys.h());
  m3_ = m3_exact(sys.noise(), qc_k_, sys.h());
  linear_ = 4.0 * a_k_.transpose() * qc_k_ * m3_;
}

double RiskContext::increment(const Vector& x, const Vector& x_next) const {
  return x_next.dot(qc_k_ * x_next) - x.dot(predict_ * x) - trace_term_;
}

double RiskContext::conditional_variance(const Vector& x) const {
  return x.dot(variance_ * x) + linear_.dot(x) + m4_;
}

double risk_increment(const LinearSystem& sys, const Matrix& k,
                      const Matrix& qc_k, const Vector& x_next,
                      const Vector& x) {
  const Matrix a_k = sys.closed_loop(k);
  const Vector predicted = a_k * x;
  const double trace_term = (qc_k * sys.noise_covariance()).trace();
  return x_next.dot(qc_k * x_next) - predicted.dot(qc_k * predicted) -
         trace_term;
}

RiskRunningStats accumulate(const RiskRunningStats& stats,
                            const RiskContext& context, const Vector& x,
                            const Vector& x_next) {
  RiskRunningStats next = stats;
  next.t += 1;
  next.s += context.increment(x, x_next);
  next.n += context.conditional_variance(x);
  return next;
}

double m4_analytic_gaussian(const NoiseModel& model, const Matrix& qc_k,
                            const Matrix& h) {
  if (model.kind() != NoiseKind::kGaussian) {
    throw Error(ErrorCode::kWrongNoiseModel,
                "gaussian m4 formula called with " +
                    std::string(to_string(model.kind())) + " noise");
  }
  const Matrix ms = noise_form(qc_k, h) * model.covariance();
  return 2.0 * (ms * ms).trace();
}

double m4_exact(const NoiseModel& model, const Matrix& qc_k, const Matrix& h) {
  const Matrix form = noise_form(qc_k, h);
  switch (model.kind()) {
    case NoiseKind::kGaussian:
      return m4_analytic_gaussian(model, qc_k, h);
    case NoiseKind::kStudentT: {
      // W = tau G with G ~ N(0, Sigma_W), tau^2 = (nu-2) / chi2_nu, so
      // E[(W^T M W)^2] = E[tau^4] (2 tr((M S)^2) + tr(M S)^2).
      const double nu = model.nu();
      if (!(nu > 4.0)) {
        throw Error(ErrorCode::kRiskMomentUnavailable,
                    "student_t m4 needs nu > 4, got " + format_number(nu));
      }
      const double tau4 = (nu - 2.0) / (nu - 4.0);
      const Matrix ms = form * model.covariance();
      const double tr = ms.trace();
      const double tr2 = (ms * ms).trace();
      return tau4 * (2.0 * tr2 + tr * tr) - tr * tr;
    }
    case NoiseKind::kEmpirical: {
      const Matrix& w = model.support();
      const double mean_form = (form * model.covariance()).trace();
      const Vector q =
          ((w * form).cwiseProduct(w)).rowwise().sum().array() - mean_form;
      return q.squaredNorm() / static_cast<double>(w.rows());
    }
  }
  return 0.0;
}

Vector m3_exact(const NoiseModel& model, const Matrix& qc_k, const Matrix& h) {
  if (model.kind() != NoiseKind::kEmpirical) {
    return Vector::Zero(h.rows());
  }
  const Matrix form = noise_form(qc_k, h);
  const Matrix& w = model.support();
  const double mean_form = (form * model.covariance()).trace();
  const Vector q =
      ((w * form).cwiseProduct(w)).rowwise().sum().array() - mean_form;
  const Vector ew = w.transpose() * q / static_cast<double>(w.rows());
  return h * ew;
}

ScalarEstimate m4_monte_carlo(const Matrix& qc_k, const Matrix& h,
                              const NoiseModel& model, long samples,
                              std::uint64_t seed) {
  require_min_samples(samples);
  const Matrix form = noise_form(qc_k, h);
  const double mean_form = (form * model.covariance()).trace();
  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long i = 0; i < samples; ++i) {
    const Vector w = model.sample(rng);
    const double q = w.dot(form * w) - mean_form;
    const double q2 = q * q;
    sum += q2;
    sum_sq += q2 * q2;
  }
  const double count = static_cast<double>(samples);
  const double mean = sum / count;
  const double var = std::max(0.0, (sum_sq - count * mean * mean) /
                                       (count - 1.0));
  return {mean, std::sqrt(var / count), samples};
}

VectorEstimate m3_monte_carlo(const Matrix& qc_k, const Matrix& h,
                              const NoiseModel& model, long samples,
                              std::uint64_t seed) {
  require_min_samples(samples);
  const Matrix form = noise_form(qc_k, h);
  const double mean_form = (form * model.covariance()).trace();
  const Eigen::Index n = h.rows();
  Rng rng(seed);
  Vector sum = Vector::Zero(n);
  Vector sum_sq = Vector::Zero(n);
  for (long i = 0; i < samples; ++i) {
    const Vector w = model.sample(rng);
    const Vector term = h * w * (w.dot(form * w) - mean_form);
    sum += term;
    sum_sq += term.cwiseProduct(term);
  }
  const double count = static_cast<double>(samples);
  VectorEstimate out;
  out.value = sum / count;
  const Vector var =
      ((sum_sq - count * out.value.cwiseProduct(out.value)) / (count - 1.0))
          .cwiseMax(0.0);
  out.std_error = (var / count).cwiseSqrt();
  out.samples = samples;
  return out;
}

double gamma_n_from_covariance(const LinearSystem& sys, const Matrix& qc_k,
                               const Matrix& sigma_k, double m4) {
  const Matrix v = sys.noise_covariance();
  return 4.0 * (qc_k * v * qc_k * (sigma_k - v)).trace() + m4;
}

double gamma_n_analytic(const LinearSystem& sys, const Matrix& k,
                        const RiskFunctional& risk) {
  const Matrix a_k = sys.closed_loop(k);
  const Matrix sigma_k =
      solve_lyapunov_discrete(a_k, sys.noise_covariance());
  if (!is_controllable(a_k, sys.h())) {
    throw Error(ErrorCode::kNotControllable, "(A_K, H) is not controllable");
  }
  const Matrix qc_k = risk.qc_k(k);
  return gamma_n_from_covariance(sys, qc_k, sigma_k,
                                 m4_exact(sys.noise(), qc_k, sys.h()));
}

long mixing_horizon(double rho) {
  if (!(rho > 0.0)) return 1;
  if (!(rho < 1.0)) {
    throw Error(ErrorCode::kUnstableMatrix,
                "mixing horizon undefined for rho >= 1");
  }
  return std::max(1L, static_cast<long>(std::ceil(std::log(1e-6) /
                                                  std::log(rho))));
}

long resolve_burn_in(const LinearSystem& sys, const Matrix& k,
                     const EstimatorOptions& options) {
  if (!options.burn_in) return 0;
  if (options.burn_in_steps >= 0) return options.burn_in_steps;
  return 10 * mixing_horizon(spectral_radius(sys.closed_loop(k)));
}

LlnRun run_lln(const LinearSystem& sys, const Matrix& k,
               const RiskFunctional& risk, long horizon, std::uint64_t seed,
               long stride, const EstimatorOptions& options) {
  if (horizon < 1) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  }
  const RiskContext context(sys, k, risk);
  const long burn_in = resolve_burn_in(sys, k, options);
  RolloutStepper stepper(sys, k, zero_state(sys), seed);
  for (long i = 0; i < burn_in; ++i) stepper.step();

  LlnRun run;
  double sum_sq = 0.0;
  for (long i = 0; i < horizon; ++i) {
    const Vector x = stepper.state();
    const Vector& x_next = stepper.step();
    const double c = context.increment(x, x_next);
    run.stats.t += 1;
    run.stats.s += c;
    run.stats.n += context.conditional_variance(x);
    sum_sq += c * c;
    if (stride > 0 && run.stats.t % stride == 0) {
      run.trace.push_back({run.stats.t, run.stats.normalized_s(),
                           run.stats.normalized_n()});
    }
  }
  const double count = static_cast<double>(horizon);
  run.increment_mean = run.stats.s / count;
  if (horizon > 1) {
    const double var = std::max(
        0.0, (sum_sq - count * run.increment_mean * run.increment_mean) /
                 (count - 1.0));
    run.increment_stderr = std::sqrt(var / count);
  }
  return run;
}

std::vector<double> clt_samples(const LinearSystem& sys, const Matrix& k,
                                const RiskFunctional& risk, long horizon,
                                int rollouts, std::uint64_t seed,
                                const EstimatorOptions& options) {
  if (horizon < 1 || rollouts < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "horizon and rollouts must be >= 1");
  }
  const RiskContext context(sys, k, risk);
  const long burn_in = resolve_burn_in(sys, k, options);
  const double root_t = std::sqrt(static_cast<double>(horizon));
  std::vector<double> out(static_cast<std::size_t>(rollouts));
  parallel_for(out.size(), options.workers, [&](std::size_t r) {
    RolloutStepper stepper(sys, k, zero_state(sys), mix_seed(seed, r));
    for (long i = 0; i < burn_in; ++i) stepper.step();
    double s = 0.0;
    for (long i = 0; i < horizon; ++i) {
      const Vector x = stepper.state();
      s += context.increment(x, stepper.step());
    }
    out[r] = s / root_t;
  });
  return out;
}

ScalarEstimate variance_with_jackknife(const std::vector<double>& samples) {
  const std::size_t count = samples.size();
  if (count < 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "jackknife variance needs at least 3 samples");
  }
  const double n = static_cast<double>(count);
  double s1 = 0.0;
  double s2 = 0.0;
  for (double y : samples) {
    s1 += y;
    s2 += y * y;
  }
  const double variance = (s2 - s1 * s1 / n) / (n - 1.0);
  std::vector<double> loo(count);
  double loo_mean = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double y = samples[i];
    const double t1 = s1 - y;
    const double ss = (s2 - y * y) - t1 * t1 / (n - 1.0);
    loo[i] = ss / (n - 2.0);
    loo_mean += loo[i];
  }
  loo_mean /= n;
  double spread = 0.0;
  for (double v : loo) spread += (v - loo_mean) * (v - loo_mean);
  return {variance, std::sqrt((n - 1.0) / n * spread),
          static_cast<long>(count)};
}

GammaEstimate gamma_mc_clt(const LinearSystem& sys, const Matrix& k,
                           const RiskFunctional& risk, long horizon,
                           int rollouts, std::uint64_t seed,
                           const EstimatorOptions& options) {
  if (rollouts < 100) {
    throw Error(ErrorCode::kInvalidArgument,
                "gamma_mc_clt needs at least 100 rollouts");
  }
  const ScalarEstimate var = variance_with_jackknife(
      clt_samples(sys, k, risk, horizon, rollouts, seed, options));
  return {var.value, var.std_error, GammaMethod::kMcCltVariance, var.samples};
}

GammaEstimate gamma_mc_conditional(const LinearSystem& sys, const Matrix& k,
                                   const RiskFunctional& risk, long horizon,
                                   int rollouts, std::uint64_t seed,
                                   const EstimatorOptions& options) {
  if (horizon < 1 || rollouts < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "need horizon >= 1 and at least 2 rollouts");
  }
  const RiskContext context(sys, k, risk);
  const long burn_in = resolve_burn_in(sys, k, options);
  std::vector<double> values(static_cast<std::size_t>(rollouts));
  parallel_for(values.size(), options.workers, [&](std::size_t r) {
    RolloutStepper stepper(sys, k, zero_state(sys), mix_seed(seed, r));
    for (long i = 0; i < burn_in; ++i) stepper.step();
    double n = 0.0;
    for (long i = 0; i < horizon; ++i) {
      n += context.conditional_variance(stepper.state());
      stepper.step();
    }
    values[r] = n / static_cast<double>(horizon);
  });
  const double count = static_cast<double>(rollouts);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= count;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (count - 1.0) / count),
          GammaMethod::kMcConditional, rollouts};
}

double ks_statistic_normal(std::vector<double> samples) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-samples[i] / std::sqrt(2.0));
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    worst = std::max({worst, cdf - lo, hi - cdf});
  }
  return worst;
}

double ks_critical_value(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) /
         std::sqrt(static_cast<double>(n));
}

void write_estimator_trace_csv(std::ostream& os,
                               const std::vector<EstimatorTraceRow>& trace) {
  os << "t,S_t_over_sqrt_t,N_t_over_t\n";
  for (const auto& row : trace) {
    os << row.t << ',' << format_number(row.normalized_s) << ','
       << format_number(row.normalized_n) << '\n';
  }
}

}  // namespace ergorisk
