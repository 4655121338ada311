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

#pragma once

#include <vector>

#include "ergorisk/control.hpp"
#include "ergorisk/pdopt.hpp"
#include "ergorisk/rng.hpp"
#include "oracles.hpp"

namespace ergorisk::testing {

inline Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

// x+ = a x + u + w with unit weights. With K = 0 and a = 0.5 the closed loop
// has Sigma = 1/(1 - 1/4) = 4/3.
inline LinearSystem scalar_system(double a,
                                  NoiseModel noise = NoiseModel::gaussian(
                                      Matrix::Identity(1, 1))) {
  return LinearSystem(scalar(a), scalar(1.0), scalar(1.0), std::move(noise));
}

inline ControlProblem scalar_problem(double a,
                                     NoiseModel noise = NoiseModel::gaussian(
                                         Matrix::Identity(1, 1))) {
  return ControlProblem{scalar_system(a, std::move(noise)),
                        CostSpec{scalar(1.0), scalar(1.0)},
                        RiskFunctional{scalar(1.0), scalar(0.0)}};
}

inline ControlProblem identity_weighted(const LinearSystem& sys) {
  const auto n = sys.state_dim();
  const auto m = sys.input_dim();
  return ControlProblem{sys,
                        CostSpec{Matrix::Identity(n, n), Matrix::Identity(m, m)},
                        RiskFunctional{Matrix::Identity(n, n),
                                       Matrix::Zero(m, m)}};
}

inline oracle::Instance to_oracle(const ControlProblem& p) {
  return oracle::Instance{p.sys.a(),  p.sys.b(),   p.sys.h(),
                          p.sys.sigma_w(), p.cost.q, p.cost.r,
                          p.risk.qc};
}

// Random problems with identity weights, n in {2,3,4}, m in {1,2}, d = n.
inline ControlProblem random_problem(Rng& rng, int index,
                                     double rho_target = 0.9) {
  const int n = 2 + index % 3;
  const int m = 1 + index % 2;
  return identity_weighted(
      random_stabilizable_system(n, m, n, rng, rho_target));
}

struct FeasibleInstance {
  ControlProblem problem;
  Matrix k_lqr;
  double gamma_lqr;
  double beta_bar;
};

// First `count` random problems for which beta_bar = ratio * gamma(K_LQR)
// admits a strictly feasible gain.
inline std::vector<FeasibleInstance> feasible_family(std::uint64_t seed,
                                                     int count,
                                                     double ratio = 0.8) {
  Rng rng(seed);
  std::vector<FeasibleInstance> out;
  for (int i = 0; static_cast<int>(out.size()) < count && i < 50 * count;
       ++i) {
    ControlProblem p = random_problem(rng, i);
    Matrix k = lqr_solve(p.sys, p.cost);
    const double g = gamma_n_analytic(p.sys, k, p.risk);
    if (check_slater(p, ratio * g).status !=
        SlaterStatus::kStrictlyFeasible) {
      continue;
    }
    out.push_back({std::move(p), std::move(k), g, ratio * g});
  }
  return out;
}

}  // namespace ergorisk::testing
