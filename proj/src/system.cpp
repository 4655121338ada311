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

#include "ergorisk/system.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "ergorisk/errors.hpp"
#include "ergorisk/io.hpp"
#include "ergorisk/parallel.hpp"

namespace ergorisk {

LinearSystem::LinearSystem(Matrix a, Matrix b, Matrix h, NoiseModel noise)
    : a_(std::move(a)), b_(std::move(b)), h_(std::move(h)),
      noise_(std::move(noise)) {
  require_square(a_, "A");
  const Eigen::Index n = a_.rows();
  if (b_.cols() < 1) throw Error(ErrorCode::kShape, "B must have >= 1 column");
  require_shape(b_, n, b_.cols(), "B");
  require_shape(h_, n, noise_.dim(), "H");
  require_finite(a_, "A");
  require_finite(b_, "B");
  require_finite(h_, "H");
  if (!is_stabilizable(a_, b_)) {
    throw Error(ErrorCode::kNotStabilizable, "(A, B) is not stabilizable");
  }
}

Matrix LinearSystem::noise_covariance() const {
  return symmetrize(h_ * sigma_w() * h_.transpose());
}

Matrix LinearSystem::closed_loop(const Matrix& k) const {
  require_shape(k, input_dim(), state_dim(), "K");
  return a_ + b_ * k;
}

LinearSystem LinearSystem::with_noise(NoiseModel noise) const {
  return LinearSystem(a_, b_, h_, std::move(noise));
}

DisturbanceSchedule DisturbanceSchedule::every(int period, double magnitude,
                                               const Vector& direction) {
  if (period < 1) {
    throw Error(ErrorCode::kShape, "schedule period must be >= 1");
  }
  const double norm = direction.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kShape,
                "schedule direction must be a finite non-zero vector");
  }
  DisturbanceSchedule s;
  s.period = period;
  s.magnitude = magnitude;
  s.direction = direction / norm;
  s.enabled = true;
  return s;
}

Vector step_state(const LinearSystem& sys, const Vector& x, const Vector& u,
                  const Vector& w, const DisturbanceSchedule& schedule,
                  long t) {
  Vector next = sys.a() * x;
  next.noalias() += sys.b() * u;
  next.noalias() += sys.h() * w;
  if (schedule.fires(t)) next += schedule.magnitude * schedule.direction;
  return next;
}

RolloutStepper::RolloutStepper(const LinearSystem& sys, Matrix k, Vector x0,
                               std::uint64_t seed, RolloutOptions options)
    : sys_(&sys), k_(std::move(k)), x_(std::move(x0)), rng_(seed),
      options_(std::move(options)) {
  require_shape(k_, sys.input_dim(), sys.state_dim(), "K");
  if (x_.size() != sys.state_dim()) {
    throw Error(ErrorCode::kShape, "x0 must have " +
                                       std::to_string(sys.state_dim()) +
                                       " entries");
  }
  if (options_.schedule.enabled &&
      options_.schedule.direction.size() != sys.state_dim()) {
    throw Error(ErrorCode::kShape,
                "schedule direction must live in the state space");
  }
  u_ = k_ * x_;
  w_ = Vector::Zero(sys.noise_dim());
}

const Vector& RolloutStepper::step() {
  if (options_.inject_noise) {
    w_ = sys_->noise().sample(rng_);
  }
  gust_ = options_.schedule.fires(t_);
  x_ = step_state(*sys_, x_, u_, w_, options_.schedule, t_);
  ++t_;
  if (!(x_.norm() <= kDivergenceNorm)) {
    throw DivergedRollout(t_, "state norm exceeded 1e150 at t = " +
                                  std::to_string(t_));
  }
  u_ = k_ * x_;
  return x_;
}

Trajectory simulate_rollout(const LinearSystem& sys, const Matrix& k,
                            const Vector& x0, long horizon, std::uint64_t seed,
                            const RolloutOptions& options) {
  if (horizon < 1) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  }
  RolloutStepper stepper(sys, k, x0, seed, options);
  Trajectory out;
  out.seed = seed;
  out.horizon = horizon;
  out.schedule = options.schedule;
  out.states.resize(sys.state_dim(), horizon + 1);
  out.inputs.resize(sys.input_dim(), horizon + 1);
  out.noises.resize(sys.noise_dim(), horizon);
  out.states.col(0) = stepper.state();
  out.inputs.col(0) = stepper.input();
  for (long t = 0; t < horizon; ++t) {
    stepper.step();
    out.noises.col(t) = stepper.last_noise();
    out.states.col(t + 1) = stepper.state();
    out.inputs.col(t + 1) = stepper.input();
  }
  return out;
}

TrajectoryBatch simulate_batch(const LinearSystem& sys, const Matrix& k,
                               const Vector& x0, long horizon,
                               const std::vector<std::uint64_t>& seeds,
                               const RolloutOptions& options, int workers) {
  TrajectoryBatch batch(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t i) {
    batch[i] = simulate_rollout(sys, k, x0, horizon, seeds[i], options);
  });
  return batch;
}

double replay_error(const LinearSystem& sys, const Trajectory& trajectory) {
  double worst = 0.0;
  for (long t = 0; t < trajectory.horizon; ++t) {
    const Vector x = trajectory.states.col(t);
    const Vector u = trajectory.inputs.col(t);
    const Vector w = trajectory.noises.col(t);
    const Vector next = step_state(sys, x, u, w, trajectory.schedule, t);
    worst = std::max(
        worst, (next - trajectory.states.col(t + 1)).cwiseAbs().maxCoeff());
  }
  return worst;
}

LinearSystem random_stabilizable_system(int n, int m, int d, Rng& rng,
                                        double rho_target) {
  if (n < 1 || m < 1 || d < 1) {
    throw Error(ErrorCode::kShape, "n, m, d must all be >= 1");
  }
  if (d < n) {
    throw Error(ErrorCode::kShape,
                "H cannot have full row rank with d < n");
  }
  if (!(rho_target > 0.0 && rho_target < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rho_target must lie in (0, 1)");
  }
  auto gaussian = [&rng](int rows, int cols) {
    Matrix out(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) out(i, j) = rng.normal();
    }
    return out;
  };

  constexpr int kMaxTries = 200;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    Matrix a = gaussian(n, n);
    const double rho = spectral_radius(a);
    if (!(rho > 1e-6)) continue;
    const double target = rng.uniform() < 0.5
                              ? rho_target
                              : 1.0 + 0.5 * (1.0 - rho_target);
    a *= target / rho;
    Matrix b = gaussian(n, m);
    Matrix h = gaussian(n, d);
    if (numerical_rank(h) < n) continue;
    const Matrix g = gaussian(d, d);
    Matrix sigma_w = symmetrize(g * g.transpose() / d +
                                0.5 * Matrix::Identity(d, d));
    if (!is_stabilizable(a, b)) continue;
    LinearSystem sys(std::move(a), std::move(b), std::move(h),
                     NoiseModel::gaussian(std::move(sigma_w)));
    const Matrix eye_n = Matrix::Identity(n, n);
    const Matrix eye_m = Matrix::Identity(m, m);
    Matrix p;
    try {
      p = solve_dare(sys.a(), sys.b(), eye_n, eye_m);
    } catch (const Error&) {
      continue;
    }
    const Matrix k = riccati_gain(sys.a(), sys.b(), eye_m, p);
    if (!is_controllable(sys.closed_loop(k), sys.h())) continue;
    return sys;
  }
  throw Error(ErrorCode::kGeneratorExhausted,
              "no valid instance after " + std::to_string(kMaxTries) +
                  " draws");
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
  const Eigen::Index n = trajectory.states.rows();
  const Eigen::Index m = trajectory.inputs.rows();
  const Eigen::Index d = trajectory.noises.rows();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i;
  for (Eigen::Index i = 0; i < m; ++i) os << ",u" << i;
  for (Eigen::Index i = 0; i < d; ++i) os << ",w" << i;
  os << '\n';
  for (long t = 0; t <= trajectory.horizon; ++t) {
    os << t;
    for (Eigen::Index i = 0; i < n; ++i) {
      os << ',' << format_number(trajectory.states(i, t));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      os << ',' << format_number(trajectory.inputs(i, t));
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      os << ',';
      if (t > 0) os << format_number(trajectory.noises(i, t - 1));
    }
    os << '\n';
  }
}

std::string trajectory_header_json(const Trajectory& trajectory,
                                   const std::string& config_hash) {
  nlohmann::json j;
  j["seed"] = trajectory.seed;
  j["config_hash"] = config_hash;
  j["horizon"] = trajectory.horizon;
  j["state_dim"] = trajectory.states.rows();
  j["input_dim"] = trajectory.inputs.rows();
  j["noise_dim"] = trajectory.noises.rows();
  j["gust_enabled"] = trajectory.schedule.enabled;
  if (trajectory.schedule.enabled) {
    j["gust_period"] = trajectory.schedule.period;
    j["gust_magnitude"] = trajectory.schedule.magnitude;
  }
  return j.dump(2);
}

}  // namespace ergorisk
