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

#include "ergorisk/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ergorisk/errors.hpp"
#include "ergorisk/io.hpp"
#include "ergorisk/parallel.hpp"
#include "ergorisk/rng.hpp"

namespace ergorisk::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kKurtosisWarning = 20.0;
constexpr int kMaxTrajectoryFiles = 16;

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo,
                "cannot create output directory '" + dir.string() + "'");
  }
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  writer(out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

json error_json(const Error& e) {
  return {{"code", std::string(error_name(e.code()))}, {"message", e.what()}};
}

json assumptions_json(const std::vector<AssumptionCheck>& checks) {
  json out = json::array();
  for (const auto& c : checks) {
    out.push_back({{"id", c.id},
                   {"description", c.description},
                   {"passed", c.passed},
                   {"detail", c.detail}});
  }
  return out;
}

// Throws ConfigError listing the failed checks among `required`.
// A failed check whose cause the problem builder can name (heavy tails,
// missing stabilizability, bad shapes) is rethrown with that error code.
void require_checks(const ExperimentConfig& config,
                    const std::vector<AssumptionCheck>& checks,
                    std::initializer_list<const char*> required) {
  std::string failed;
  for (const auto& c : checks) {
    if (c.passed) continue;
    for (const char* id : required) {
      if (c.id == id) failed += "\n  " + c.id + " (" + c.description + "): " + c.detail;
    }
  }
  if (!failed.empty()) {
    build_problem(config);
    throw Error(ErrorCode::kConfig, "assumption checks failed:" + failed);
  }
}

class BundleWriter {
 public:
  BundleWriter(std::string command, const ExperimentConfig& config,
               const RunOptions& run)
      : command_(std::move(command)), run_(run), format_(config.output.format) {
    bundle_["tool"] = kToolName;
    bundle_["version"] = kToolVersion;
    bundle_["command"] = command_;
    bundle_["config_hash"] = config_hash(config);
    bundle_["seed"] = config.seed;
    if (!run.omit_timestamp) bundle_["created_at"] = utc_timestamp();
    ensure_dir(run.out_dir);
    write_file(run.out_dir / "config.json", [&](std::ostream& os) {
      os << serialize_config(config);
    });
  }

  json& bundle() { return bundle_; }

  fs::path path(const std::string& name) const { return run_.out_dir / name; }

  void add_file(const std::string& key, const std::string& name) {
    bundle_["files"][key] = name;
  }

  CommandOutcome finish(int exit_code) {
    bundle_["exit_code"] = exit_code;
    CommandOutcome outcome;
    outcome.exit_code = exit_code;
    if (format_ == OutputFormat::kCsv) {
      outcome.bundle_path = run_.out_dir / (command_ + ".csv");
      write_file(outcome.bundle_path, [&](std::ostream& os) {
        os << "key,value\n";
        const json flat = bundle_.flatten();
        for (const auto& [key, value] : flat.items()) {
          os << key << ',';
          if (value.is_number_float()) {
            os << format_number(value.get<double>());
          } else if (value.is_string()) {
            std::string text = value.get<std::string>();
            std::replace(text.begin(), text.end(), '\n', ' ');
            std::replace(text.begin(), text.end(), ',', ';');
            os << text;
          } else {
            os << value.dump();
          }
          os << '\n';
        }
      });
    } else {
      outcome.bundle_path = run_.out_dir / (command_ + ".json");
      write_file(outcome.bundle_path,
                 [&](std::ostream& os) { os << bundle_.dump(2) << '\n'; });
    }
    outcome.bundle = bundle_;
    return outcome;
  }

 private:
  std::string command_;
  const RunOptions& run_;
  OutputFormat format_;
  json bundle_;
};

json kkt_json(const KktReport& r) {
  return {{"K_final", matrix_json(r.k_final)},
          {"lambda_avg", r.lambda_avg},
          {"lambda_last", r.lambda_last},
          {"lambda_max", r.lambda_max},
          {"grad_norm", r.grad_norm},
          {"slack", r.slack},
          {"cs_residual", r.cs_residual},
          {"J_final", r.j_final},
          {"gamma_final", r.gamma_final},
          {"beta_bar", r.beta_bar},
          {"tol_b", r.tol_b},
          {"outer_iters", r.outer_iters},
          {"total_inner_iters", r.total_inner_iters},
          {"feasible", r.feasible},
          {"short_circuit", r.short_circuit},
          {"slater", std::string(to_string(r.slater))}};
}

EstimatorOptions estimator_options(const ExperimentConfig& c, int workers) {
  EstimatorOptions opts;
  opts.burn_in = c.simulation.burn_in;
  opts.burn_in_steps = c.simulation.burn_in_steps;
  opts.workers = workers;
  return opts;
}

// Gain named by config.gain; for "solved" the KKT report is attached.
struct SelectedGain {
  Matrix k;
  std::optional<KktReport> kkt;
};

SelectedGain select_gain(const ExperimentConfig& c,
                         const ControlProblem& problem) {
  SelectedGain out;
  switch (c.gain.source) {
    case GainSource::kLqr:
      out.k = lqr_solve(problem.sys, problem.cost);
      break;
    case GainSource::kExplicit:
      out.k = *c.gain.k;
      if (!is_schur_stable(problem.sys.closed_loop(out.k))) {
        throw Error(ErrorCode::kInvalidArgument,
                    "gain.K is not stabilizing (spectral radius " +
                        format_number(spectral_radius(
                            problem.sys.closed_loop(out.k))) +
                        ")");
      }
      break;
    case GainSource::kSolved: {
      const double beta_bar = resolve_beta_bar(c, problem);
      PdResult result =
          primal_dual_solve(problem, build_pd_config(c, beta_bar));
      out.k = result.report.k_final;
      out.kkt = std::move(result.report);
      break;
    }
  }
  return out;
}

template <typename Body>
CommandOutcome guarded(BundleWriter& writer, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    writer.bundle()["error"] = error_json(e);
    return writer.finish(exit_code_for(e.code()));
  }
}

// Summary of one arm of a matched-seed comparison, accumulated per rollout.
struct ArmRollout {
  bool diverged = false;
  long truncation_time = 0;
  double cost = 0.0;       // time-averaged stage cost
  double n_over_t = 0.0;   // N_T / T
  std::vector<double> peaks;
  std::vector<long> recoveries;  // -1 when not recovered before the next gust
};

struct ArmTrace {
  std::vector<double> norm;
  std::vector<double> n_over_t;
};

ArmRollout run_arm(const ControlProblem& problem, const Matrix& k,
                   const DisturbanceSchedule& schedule, long burn_in,
                   long horizon, std::uint64_t seed, double band,
                   ArmTrace* trace) {
  ArmRollout out;
  const RiskContext context(problem.sys, k, problem.risk);
  RolloutOptions options;
  options.schedule = schedule;
  RolloutStepper stepper(problem.sys, k, Vector::Zero(problem.sys.state_dim()),
                         seed, options);
  try {
    for (long i = 0; i < burn_in; ++i) stepper.step();
    RiskRunningStats stats;
    double cost = 0.0;
    bool in_window = false;
    long since_gust = 0;
    double peak = 0.0;
    long recovery = -1;
    auto close_window = [&] {
      if (!in_window) return;
      out.peaks.push_back(peak);
      out.recoveries.push_back(recovery);
    };
    for (long i = 0; i < horizon; ++i) {
      const Vector x = stepper.state();
      const Vector u = stepper.input();
      cost += x.dot(problem.cost.q * x) + u.dot(problem.cost.r * u);
      const Vector& next = stepper.step();
      stats = accumulate(stats, context, x, next);
      const double norm = next.norm();
      if (stepper.last_step_had_gust()) {
        close_window();
        in_window = true;
        since_gust = 0;
        peak = norm;
        recovery = norm <= band ? 0 : -1;
      } else if (in_window) {
        ++since_gust;
        peak = std::max(peak, norm);
        if (recovery < 0 && norm <= band) recovery = since_gust;
      }
      if (trace) {
        trace->norm.push_back(norm);
        trace->n_over_t.push_back(stats.normalized_n());
      }
    }
    close_window();
    out.cost = cost / static_cast<double>(horizon);
    out.n_over_t = stats.normalized_n();
  } catch (const DivergedRollout& e) {
    out.diverged = true;
    out.truncation_time = e.truncation_time();
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& v) {
  MeanStderr out;
  if (v.empty()) return {std::nan(""), std::nan("")};
  const double n = static_cast<double>(v.size());
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

json arm_json(const std::vector<ArmRollout>& rollouts, const Matrix& k,
              const ControlProblem& problem, double band) {
  std::vector<double> costs, risks, peaks, recoveries;
  long diverged = 0, unrecovered = 0;
  json truncations = json::array();
  for (const auto& r : rollouts) {
    if (r.diverged) {
      ++diverged;
      truncations.push_back(r.truncation_time);
      continue;
    }
    costs.push_back(r.cost);
    risks.push_back(r.n_over_t);
    peaks.insert(peaks.end(), r.peaks.begin(), r.peaks.end());
    for (long rec : r.recoveries) {
      if (rec < 0) {
        ++unrecovered;
      } else {
        recoveries.push_back(static_cast<double>(rec));
      }
    }
  }
  const MeanStderr cost = mean_stderr(costs);
  const MeanStderr risk = mean_stderr(risks);
  json out = {{"K", matrix_json(k)},
              {"J_analytic", lqr_cost(problem.sys, problem.cost, k)},
              {"gamma_analytic", gamma_n_analytic(problem.sys, k, problem.risk)},
              {"empirical_cost", {{"mean", cost.mean}, {"std_error", cost.std_error}}},
              {"n_over_t", {{"mean", risk.mean}, {"std_error", risk.std_error}}},
              {"recovery_band", band},
              {"gusts", peaks.size()},
              {"peak_norm_median", median(peaks)},
              {"recovery_steps_mean", mean_stderr(recoveries).mean},
              {"unrecovered_gusts", unrecovered},
              {"diverged_rollouts", diverged},
              {"truncation_times", truncations}};
  return out;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShape:
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kNotStabilizable:
    case ErrorCode::kNotControllable:
    case ErrorCode::kRiskMomentUnavailable:
    case ErrorCode::kWrongNoiseModel:
    case ErrorCode::kRcNotZero:
    case ErrorCode::kGeneratorExhausted:
      return kExitValidation;
    case ErrorCode::kIo:
      return kExitIo;
    case ErrorCode::kUnstableMatrix:
    case ErrorCode::kDivergedRollout:
    case ErrorCode::kStabilityLost:
    case ErrorCode::kNoConvergence:
    case ErrorCode::kEigenFailure:
    case ErrorCode::kNumerical:
      return kExitSolver;
  }
  return kExitSolver;
}

CommandOutcome cmd_check(const ExperimentConfig& config, const RunOptions& run) {
  BundleWriter writer("check", config, run);
  return guarded(writer, [&] {
    const auto checks = check_assumptions(config);
    writer.bundle()["assumptions"] = assumptions_json(checks);
    const bool ok = std::all_of(checks.begin(), checks.end(),
                                [](const auto& c) { return c.passed; });
    return writer.finish(ok ? kExitOk : kExitValidation);
  });
}

CommandOutcome cmd_solve(const ExperimentConfig& config, const RunOptions& run) {
  BundleWriter writer("solve", config, run);
  return guarded(writer, [&] {
    const auto checks = check_assumptions(config);
    writer.bundle()["assumptions"] = assumptions_json(checks);
    require_checks(config, checks, {"A1", "A2", "A3", "A4", "R", "Qc", "Rc", "CTRL"});

    const ControlProblem problem = build_problem(config);
    const Matrix k_lqr = lqr_solve(problem.sys, problem.cost);
    const double j_lqr = lqr_cost(problem.sys, problem.cost, k_lqr);
    const double gamma_lqr = gamma_n_analytic(problem.sys, k_lqr, problem.risk);
    const double beta_bar = resolve_beta_bar(config, problem);
    json& b = writer.bundle();
    b["gains"]["K_lqr"] = matrix_json(k_lqr);
    b["scalars"] = {{"J_lqr", j_lqr},
                    {"gamma_lqr", gamma_lqr},
                    {"beta_bar", beta_bar}};

    const PdResult result =
        primal_dual_solve(problem, build_pd_config(config, beta_bar));
    const KktReport& r = result.report;
    b["kkt"] = kkt_json(r);
    b["gains"]["K_star"] = matrix_json(r.k_final);
    b["scalars"]["J_star"] = r.j_final;
    b["scalars"]["gamma_star"] = r.gamma_final;
    b["scalars"]["cost_ratio"] = r.j_final / j_lqr;
    b["scalars"]["gamma_ratio"] = r.gamma_final / gamma_lqr;

    write_file(writer.path("pd_trace.csv"),
               [&](std::ostream& os) { write_pd_trace_csv(os, result.trace); });
    writer.add_file("pd_trace", "pd_trace.csv");
    const HewerResult inner =
        hewer_solve(problem, r.lambda_last, k_lqr,
                    {config.solver.eps, config.solver.inner_cap});
    write_file(writer.path("hewer_trace.csv"),
               [&](std::ostream& os) { write_hewer_trace_csv(os, inner.trace); });
    writer.add_file("hewer_trace", "hewer_trace.csv");
    if (!r.feasible) {
      b["error"] = {{"code", "Infeasible"},
                    {"message", "no gain meeting beta_bar was found"}};
      return writer.finish(kExitSolver);
    }
    return writer.finish(kExitOk);
  });
}

CommandOutcome cmd_estimate(const ExperimentConfig& config,
                            const RunOptions& run) {
  BundleWriter writer("estimate", config, run);
  return guarded(writer, [&] {
    const auto checks = check_assumptions(config);
    writer.bundle()["assumptions"] = assumptions_json(checks);
    require_checks(config, checks, {"A1", "A2", "A3", "R", "Qc", "CTRL"});

    const ControlProblem problem = build_problem(config);
    const SelectedGain gain = select_gain(config, problem);
    const LinearSystem& sys = problem.sys;
    json& b = writer.bundle();
    b["gain"] = {{"source", to_string(config.gain.source)},
                 {"K", matrix_json(gain.k)}};
    if (gain.kkt) b["kkt"] = kkt_json(*gain.kkt);

    json warnings = json::array();
    const double kurtosis = sys.noise().marginal_kurtosis();
    if (kurtosis > kKurtosisWarning) {
      warnings.push_back("marginal kurtosis " + format_number(kurtosis) +
                         " exceeds 20; Monte Carlo estimates converge slowly");
    }
    b["warnings"] = warnings;
    b["noise"] = {{"kind", std::string(to_string(sys.noise().kind()))},
                  {"kurtosis", kurtosis}};

    const double analytic = gamma_n_analytic(sys, gain.k, problem.risk);
    const EstimatorOptions opts = estimator_options(config, run.workers);
    const long horizon = config.simulation.horizon;
    const int rollouts = config.simulation.rollouts;

    if (rollouts < 100) {
      throw Error(ErrorCode::kInvalidArgument,
                  "estimate needs simulation.rollouts >= 100");
    }
    std::vector<double> samples =
        clt_samples(sys, gain.k, problem.risk, horizon, rollouts, config.seed,
                    opts);
    const ScalarEstimate clt = variance_with_jackknife(samples);
    const LlnRun lln =
        run_lln(sys, gain.k, problem.risk, horizon,
                mix_seed(config.seed, static_cast<std::uint64_t>(rollouts)),
                config.simulation.trace_stride, opts);

    const MeanStderr moments = mean_stderr(samples);
    const double sd = std::sqrt(clt.value);
    std::vector<double> standardized;
    standardized.reserve(samples.size());
    for (double s : samples) {
      standardized.push_back(sd > 0.0 ? (s - moments.mean) / sd : 0.0);
    }
    const double ks = ks_statistic_normal(standardized);
    const double ks_crit = ks_critical_value(standardized.size());

    b["gamma"] = {
        {"analytic", analytic},
        {"mc_clt", {{"value", clt.value}, {"std_error", clt.std_error},
                    {"rollouts", rollouts}, {"horizon", horizon}}},
        {"relative_error", analytic > 0.0 ? clt.value / analytic - 1.0 : 0.0},
        {"lln", {{"n_over_t", lln.stats.normalized_n()},
                 {"s_over_t", lln.stats.s / static_cast<double>(lln.stats.t)},
                 {"lln_band", 3.0 * std::sqrt(analytic /
                                              static_cast<double>(lln.stats.t))},
                 {"horizon", lln.stats.t}}}};
    b["normality"] = {{"ks_statistic", ks},
                      {"critical_value_1pct", ks_crit},
                      {"passed", ks < ks_crit}};
    b["burn_in_steps"] = resolve_burn_in(sys, gain.k, opts);

    write_file(writer.path("estimator_trace.csv"), [&](std::ostream& os) {
      write_estimator_trace_csv(os, lln.trace);
    });
    writer.add_file("estimator_trace", "estimator_trace.csv");
    write_file(writer.path("clt_samples.csv"), [&](std::ostream& os) {
      os << "rollout,s_over_sqrt_t\n";
      for (std::size_t i = 0; i < samples.size(); ++i) {
        os << i << ',' << format_number(samples[i]) << '\n';
      }
    });
    writer.add_file("clt_samples", "clt_samples.csv");
    return writer.finish(kExitOk);
  });
}

CommandOutcome cmd_simulate(const ExperimentConfig& config,
                            const RunOptions& run) {
  BundleWriter writer("simulate", config, run);
  return guarded(writer, [&] {
    const auto checks = check_assumptions(config);
    writer.bundle()["assumptions"] = assumptions_json(checks);
    require_checks(config, checks, {"A1", "A2", "A3", "R"});

    const ControlProblem problem = build_problem(config);
    const SelectedGain gain = select_gain(config, problem);
    RolloutOptions options;
    options.schedule = build_schedule(config, problem.sys.state_dim());
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < config.simulation.rollouts; ++r) {
      seeds.push_back(mix_seed(config.seed, static_cast<std::uint64_t>(r)));
    }
    const TrajectoryBatch batch = simulate_batch(
        problem.sys, gain.k, Vector::Zero(problem.sys.state_dim()),
        config.simulation.horizon, seeds, options, run.workers);

    json& b = writer.bundle();
    b["gain"] = {{"source", to_string(config.gain.source)},
                 {"K", matrix_json(gain.k)}};
    const std::string hash = config_hash(config);
    json rollouts = json::array();
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Trajectory& tr = batch[i];
      double cost = 0.0;
      for (long t = 0; t < tr.horizon; ++t) {
        const Vector x = tr.states.col(t);
        const Vector u = tr.inputs.col(t);
        cost += x.dot(problem.cost.q * x) + u.dot(problem.cost.r * u);
      }
      json entry = {{"seed", tr.seed},
                    {"empirical_cost", cost / static_cast<double>(tr.horizon)},
                    {"max_state_norm", tr.states.colwise().norm().maxCoeff()},
                    {"final_state_norm", tr.states.col(tr.horizon).norm()}};
      if (static_cast<int>(i) < kMaxTrajectoryFiles) {
        const std::string name = "rollout_" + std::to_string(i) + ".csv";
        write_file(writer.path(name),
                   [&](std::ostream& os) { write_trajectory_csv(os, tr); });
        write_file(writer.path("rollout_" + std::to_string(i) + ".header.json"),
                   [&](std::ostream& os) {
                     os << trajectory_header_json(tr, hash) << '\n';
                   });
        entry["file"] = name;
      }
      rollouts.push_back(std::move(entry));
    }
    b["rollouts"] = std::move(rollouts);
    b["stationary_cost"] = lqr_cost(problem.sys, problem.cost, gain.k);
    return writer.finish(kExitOk);
  });
}

CommandOutcome cmd_compare(const ExperimentConfig& config,
                           const RunOptions& run) {
  BundleWriter writer("compare", config, run);
  return guarded(writer, [&] {
    const auto checks = check_assumptions(config);
    writer.bundle()["assumptions"] = assumptions_json(checks);
    require_checks(config, checks, {"A1", "A2", "A3", "R", "Qc", "CTRL"});

    const ControlProblem problem = build_problem(config);
    const Matrix k_lqr = lqr_solve(problem.sys, problem.cost);
    const SelectedGain gain = select_gain(config, problem);
    json& b = writer.bundle();
    if (gain.kkt) b["kkt"] = kkt_json(*gain.kkt);
    b["gain_source"] = to_string(config.gain.source);

    const EstimatorOptions opts = estimator_options(config, run.workers);
    const long burn_in = std::max(resolve_burn_in(problem.sys, k_lqr, opts),
                                  resolve_burn_in(problem.sys, gain.k, opts));
    const DisturbanceSchedule schedule =
        build_schedule(config, problem.sys.state_dim());
    const double band_lqr =
        2.0 * std::sqrt(stationary_covariance(problem.sys, k_lqr).trace());
    const double band_star =
        2.0 * std::sqrt(stationary_covariance(problem.sys, gain.k).trace());
    const auto count = static_cast<std::size_t>(config.simulation.rollouts);
    const long horizon = config.simulation.horizon;

    std::vector<ArmRollout> lqr(count), star(count);
    ArmTrace trace_lqr, trace_star;
    parallel_for(count, run.workers, [&](std::size_t r) {
      const std::uint64_t seed = mix_seed(config.seed, r);
      lqr[r] = run_arm(problem, k_lqr, schedule, burn_in, horizon, seed,
                       band_lqr, r == 0 ? &trace_lqr : nullptr);
      star[r] = run_arm(problem, gain.k, schedule, burn_in, horizon, seed,
                        band_star, r == 0 ? &trace_star : nullptr);
    });

    std::vector<double> diffs;
    for (std::size_t r = 0; r < count; ++r) {
      if (!lqr[r].diverged && !star[r].diverged) {
        diffs.push_back(lqr[r].n_over_t - star[r].n_over_t);
      }
    }
    const MeanStderr diff = mean_stderr(diffs);
    b["burn_in_steps"] = burn_in;
    b["rollouts"] = count;
    b["horizon"] = horizon;
    b["arms"]["lqr"] = arm_json(lqr, k_lqr, problem, band_lqr);
    b["arms"]["candidate"] = arm_json(star, gain.k, problem, band_star);
    b["paired_n_over_t"] = {
        {"mean_difference", diff.mean},
        {"std_error", diff.std_error},
        {"separation", diff.std_error > 0.0 ? diff.mean / diff.std_error
                                            : 0.0},
        {"pairs", diffs.size()}};

    write_file(writer.path("compare_trace.csv"), [&](std::ostream& os) {
      os << "t,norm_lqr,norm_candidate,n_over_t_lqr,n_over_t_candidate\n";
      const std::size_t rows =
          std::min(trace_lqr.norm.size(), trace_star.norm.size());
      for (std::size_t t = 0; t < rows; ++t) {
        os << t + 1 << ',' << format_number(trace_lqr.norm[t]) << ','
           << format_number(trace_star.norm[t]) << ','
           << format_number(trace_lqr.n_over_t[t]) << ','
           << format_number(trace_star.n_over_t[t]) << '\n';
      }
    });
    writer.add_file("compare_trace", "compare_trace.csv");
    return writer.finish(kExitOk);
  });
}

CommandOutcome run_command(const std::string& name,
                           const ExperimentConfig& config,
                           const RunOptions& run) {
  if (name == "check") return cmd_check(config, run);
  if (name == "solve") return cmd_solve(config, run);
  if (name == "estimate") return cmd_estimate(config, run);
  if (name == "simulate") return cmd_simulate(config, run);
  if (name == "compare") return cmd_compare(config, run);
  throw Error(ErrorCode::kConfig, "unknown command '" + name + "'");
}

}  // namespace ergorisk::cli
