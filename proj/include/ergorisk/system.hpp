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

// Stochastic LTI plant  X_{t+1} = A X_t + B U_t + H W_{t+1}  under linear
// state feedback U_t = K X_t, with optional scheduled gust offsets.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ergorisk/matops.hpp"
#include "ergorisk/noise.hpp"
#include "ergorisk/rng.hpp"

namespace ergorisk {

// Validated plant. Construction checks dimensions, Sigma_W > 0 (through the
// noise model) and stabilizability of (A, B).
class LinearSystem {
 public:
  LinearSystem(Matrix a, Matrix b, Matrix h, NoiseModel noise);

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Matrix& h() const { return h_; }
  const NoiseModel& noise() const { return noise_; }
  const Matrix& sigma_w() const { return noise_.covariance(); }

  Eigen::Index state_dim() const { return a_.rows(); }
  Eigen::Index input_dim() const { return b_.cols(); }
  Eigen::Index noise_dim() const { return h_.cols(); }

  // H Sigma_W H^T.
  Matrix noise_covariance() const;

  // A + B K; throws ShapeError on a mis-sized gain.
  Matrix closed_loop(const Matrix& k) const;

  LinearSystem with_noise(NoiseModel noise) const;

 private:
  Matrix a_;
  Matrix b_;
  Matrix h_;
  NoiseModel noise_;
};

// Deterministic offset of `magnitude * direction` added to X_{t+1} whenever
// (t + 1) % period == 0.
struct DisturbanceSchedule {
  int period = 1;
  double magnitude = 0.0;
  Vector direction;
  bool enabled = false;

  static DisturbanceSchedule disabled() { return {}; }
  // Normalizes `direction`; throws ShapeError for a zero vector or period < 1.
  static DisturbanceSchedule every(int period, double magnitude,
                                   const Vector& direction);

  // Offset applied on the transition t -> t+1.
  bool fires(long t) const { return enabled && (t + 1) % period == 0; }
};

struct RolloutOptions {
  DisturbanceSchedule schedule;
  bool inject_noise = true;
};

// One seeded rollout. states has T+1 columns (X_0..X_T), inputs has T+1
// columns (U_t = K X_t) and noises has T columns (W_1..W_T).
struct Trajectory {
  std::uint64_t seed = 0;
  long horizon = 0;
  Matrix states;
  Matrix inputs;
  Matrix noises;
  DisturbanceSchedule schedule;
};

using TrajectoryBatch = std::vector<Trajectory>;

// Single transition  A x + B u + H w (+ gust). Simulation and replay both go
// through this function so that recorded rollouts reproduce exactly.
Vector step_state(const LinearSystem& sys, const Vector& x, const Vector& u,
                  const Vector& w, const DisturbanceSchedule& schedule,
                  long t);

// Overflow guard on the state norm.
inline constexpr double kDivergenceNorm = 1e150;

// Streaming closed-loop simulator used by the estimators; it never stores the
// trajectory.
class RolloutStepper {
 public:
  RolloutStepper(const LinearSystem& sys, Matrix k, Vector x0,
                 std::uint64_t seed, RolloutOptions options = {});

  // Advances one step and returns the new state. Throws DivergedRollout.
  const Vector& step();

  long time() const { return t_; }
  const Vector& state() const { return x_; }
  const Vector& input() const { return u_; }
  const Vector& last_noise() const { return w_; }
  const Matrix& gain() const { return k_; }
  bool last_step_had_gust() const { return gust_; }

 private:
  const LinearSystem* sys_;
  Matrix k_;
  Vector x_;
  Vector u_;
  Vector w_;
  Rng rng_;
  RolloutOptions options_;
  long t_ = 0;
  bool gust_ = false;
};

// K may be destabilizing; the rollout still runs until the overflow guard.
Trajectory simulate_rollout(const LinearSystem& sys, const Matrix& k,
                            const Vector& x0, long horizon, std::uint64_t seed,
                            const RolloutOptions& options = {});

// Rollouts for each seed, fanned out across `workers` threads and returned in
// seed order.
TrajectoryBatch simulate_batch(const LinearSystem& sys, const Matrix& k,
                               const Vector& x0, long horizon,
                               const std::vector<std::uint64_t>& seeds,
                               const RolloutOptions& options = {},
                               int workers = 1);

// Max absolute deviation between stored states and states recomputed from
// stored (X_t, U_t, W_{t+1}, gust). Zero for unmodified rollouts.
double replay_error(const LinearSystem& sys, const Trajectory& trajectory);

// Test-instance generator. With probability 1/2 A is scaled to spectral
// radius rho_target; otherwise to 1 + (1 - rho_target) / 2 so that feedback
// is required. Draws until (A, B) is stabilizable and the DARE closed loop
// with unit weights is controllable through H. Requires d >= n.
LinearSystem random_stabilizable_system(int n, int m, int d, Rng& rng,
                                        double rho_target);

// CSV with header "t,x0..,u0..,w0.." and 17 significant digits; the W columns
// of row t hold W_t (empty at t = 0).
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

// JSON header for an exported trajectory.
std::string trajectory_header_json(const Trajectory& trajectory,
                                   const std::string& config_hash);

}  // namespace ergorisk
