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

#include "ergorisk/noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "ergorisk/errors.hpp"

namespace ergorisk {

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kGaussian: return "gaussian";
    case NoiseKind::kStudentT: return "student_t";
    case NoiseKind::kEmpirical: return "empirical";
  }
  return "unknown";
}

NoiseModel::NoiseModel(NoiseKind kind, double nu, Matrix sigma_w)
    : kind_(kind), nu_(nu), sigma_w_(std::move(sigma_w)) {
  require_square(sigma_w_, "sigma_w");
  require_finite(sigma_w_, "sigma_w");
  if (!is_positive_definite(sigma_w_)) {
    throw Error(ErrorCode::kShape,
                "sigma_w must be symmetric positive definite");
  }
  sigma_w_ = symmetrize(sigma_w_);
  scale_ = symmetric_sqrt(sigma_w_);
}

NoiseModel NoiseModel::gaussian(Matrix sigma_w) {
  return NoiseModel(NoiseKind::kGaussian, 0.0, std::move(sigma_w));
}

NoiseModel NoiseModel::student_t(double nu, Matrix sigma_w) {
  if (!(nu > 4.0) || !std::isfinite(nu)) {
    std::ostringstream os;
    os << "student_t noise needs nu > 4 for a finite fourth moment, got nu = "
       << nu;
    throw Error(ErrorCode::kRiskMomentUnavailable, os.str());
  }
  return NoiseModel(NoiseKind::kStudentT, nu, std::move(sigma_w));
}

NoiseModel NoiseModel::empirical(const Matrix& samples, Matrix sigma_w) {
  NoiseModel model(NoiseKind::kEmpirical, 0.0, std::move(sigma_w));
  const Eigen::Index d = model.dim();
  if (samples.cols() != d || samples.rows() <= d) {
    std::ostringstream os;
    os << "empirical samples must be N x " << d << " with N > " << d
       << ", got " << samples.rows() << "x" << samples.cols();
    throw Error(ErrorCode::kShape, os.str());
  }
  require_finite(samples, "samples");
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Matrix centred = samples.rowwise() - mean;
  const Matrix cov =
      centred.transpose() * centred / static_cast<double>(samples.rows());
  if (!is_positive_definite(symmetrize(cov))) {
    throw Error(ErrorCode::kShape,
                "empirical samples have a singular covariance");
  }
  // w = S_target * C^{-1/2} * (s - mean) has covariance exactly Sigma_W under
  // uniform resampling.
  const Matrix whiten =
      model.scale_ * symmetric_sqrt(symmetrize(cov)).inverse();
  model.support_ = centred * whiten.transpose();
  return model;
}

double NoiseModel::marginal_kurtosis() const {
  switch (kind_) {
    case NoiseKind::kGaussian:
      return 3.0;
    case NoiseKind::kStudentT:
      return 3.0 * (nu_ - 2.0) / (nu_ - 4.0);
    case NoiseKind::kEmpirical: {
      double worst = 0.0;
      for (Eigen::Index i = 0; i < dim(); ++i) {
        const double m4 = support_.col(i).array().pow(4).mean();
        worst = std::max(worst, m4 / (sigma_w_(i, i) * sigma_w_(i, i)));
      }
      return worst;
    }
  }
  return 0.0;
}

Vector NoiseModel::sample(Rng& rng) const {
  const Eigen::Index d = dim();
  if (kind_ == NoiseKind::kEmpirical) {
    const auto row = static_cast<Eigen::Index>(
        rng.index(static_cast<std::size_t>(support_.rows())));
    return support_.row(row).transpose();
  }
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
  if (kind_ == NoiseKind::kStudentT) {
    const double chi2 = rng.chi_squared(nu_);
    z *= std::sqrt((nu_ - 2.0) / chi2);
  }
  return scale_ * z;
}

Matrix sample_noise(const NoiseModel& model, Rng& rng, int count) {
  if (count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sample count must be >= 1");
  }
  Matrix out(model.dim(), count);
  for (int k = 0; k < count; ++k) out.col(k) = model.sample(rng);
  return out;
}

}  // namespace ergorisk
