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

#include <string_view>

#include "ergorisk/matops.hpp"
#include "ergorisk/rng.hpp"

namespace ergorisk {

enum class NoiseKind { kGaussian, kStudentT, kEmpirical };

std::string_view to_string(NoiseKind kind);

// Zero-mean i.i.d. process noise law with covariance exactly Sigma_W.
//
// Student-t samples are  sqrt((nu-2)/nu) * S * z / sqrt(chi2_nu / nu)  with
// z standard normal and S the symmetric square root of Sigma_W. Empirical
// models resample a finite support that is centred and whitened at
// construction so its uniform law has covariance Sigma_W.
class NoiseModel {
 public:
  static NoiseModel gaussian(Matrix sigma_w);
  // Requires nu > 4 (finite fourth moment); throws RiskMomentUnavailable.
  static NoiseModel student_t(double nu, Matrix sigma_w);
  // `samples` holds one draw per row (N x d) with N > d.
  static NoiseModel empirical(const Matrix& samples, Matrix sigma_w);

  NoiseKind kind() const { return kind_; }
  double nu() const { return nu_; }
  Eigen::Index dim() const { return sigma_w_.rows(); }
  const Matrix& covariance() const { return sigma_w_; }
  const Matrix& scale() const { return scale_; }
  // Whitened support of an empirical model (N x d); empty otherwise.
  const Matrix& support() const { return support_; }

  // Largest marginal kurtosis E[w_i^4] / E[w_i^2]^2.
  double marginal_kurtosis() const;

  Vector sample(Rng& rng) const;

 private:
  NoiseModel(NoiseKind kind, double nu, Matrix sigma_w);

  NoiseKind kind_;
  double nu_ = 0.0;
  Matrix sigma_w_;
  Matrix scale_;
  Matrix support_;
};

// `count` i.i.d. draws, one per column (d x count).
Matrix sample_noise(const NoiseModel& model, Rng& rng, int count);

}  // namespace ergorisk
