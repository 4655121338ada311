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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ergorisk/errors.hpp"
#include "ergorisk/system.hpp"
#include "fixtures.hpp"

namespace ergorisk {
namespace {

using testing::scalar;
using testing::scalar_system;

Matrix sample_covariance(const Matrix& samples) {
  const Vector mean = samples.rowwise().mean();
  const Matrix centred = samples.colwise() - mean;
  return centred * centred.transpose() / static_cast<double>(samples.cols());
}

TEST(Noise, GaussianCovarianceConverges) {
  Rng rng(100);
  const NoiseModel model = NoiseModel::gaussian(Matrix::Identity(2, 2));
  const Matrix s = sample_noise(model, rng, 1000000);
  EXPECT_LT((sample_covariance(s) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(),
            5e-3);
  EXPECT_LT(s.rowwise().mean().cwiseAbs().maxCoeff(), 5e-3);
}

TEST(Noise, StudentTFourthMoment) {
  Rng rng(101);
  const double nu = 5.0;
  const NoiseModel model = NoiseModel::student_t(nu, Matrix::Identity(1, 1));
  EXPECT_DOUBLE_EQ(model.marginal_kurtosis(), 9.0);
  const Matrix s = sample_noise(model, rng, 1000000);

  // W^4 has no variance at nu = 5, so the plain sample mean is skewed low.
  // Compare the truncated moment E[W^4; |W| <= c] instead, whose exact value
  // comes from integrating the t density.
  const double c = 8.0;
  const double unit = std::sqrt((nu - 2.0) / nu);
  const boost::math::students_t_distribution<double> t(nu);
  auto integrand = [&](double w) {
    return std::pow(w, 4) * boost::math::pdf(t, w / unit) / unit;
  };
  const double exact =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          integrand, -c, c, 15, 1e-12);
  double sum = 0.0, sum_sq = 0.0;
  for (Eigen::Index i = 0; i < s.cols(); ++i) {
    const double w = s(0, i);
    const double v = std::abs(w) <= c ? std::pow(w, 4) : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(s.cols());
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  EXPECT_NEAR(mean, exact, 3.0 * se);
  // Over the whole line the same density integrates to the full moment 9.
  const double full =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          integrand, -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), 15, 1e-12);
  EXPECT_NEAR(full, 9.0, 1e-6);
}

TEST(Noise, CorrelatedCovarianceWithinOnePercent) {
  Matrix sigma(2, 2);
  sigma << 2.0, 0.6, 0.6, 1.0;
  for (const NoiseModel& model :
       {NoiseModel::gaussian(sigma), NoiseModel::student_t(5.0, sigma)}) {
    Rng rng(102);
    const Matrix s = sample_noise(model, rng, 1000000);
    const Matrix err = sample_covariance(s) - sigma;
    EXPECT_LT(err.jacobiSvd().singularValues()(0),
              0.01 * sigma.jacobiSvd().singularValues()(0))
        << to_string(model.kind());
  }
}

TEST(Noise, SameSeedSameSample) {
  for (const NoiseModel& model :
       {NoiseModel::gaussian(Matrix::Identity(3, 3)),
        NoiseModel::student_t(6.0, Matrix::Identity(3, 3))}) {
    Rng a(7), b(7);
    EXPECT_EQ(sample_noise(model, a, 1), sample_noise(model, b, 1));
  }
}

TEST(Noise, HeavyTailsRefused) {
  for (double nu : {3.0, 4.0}) {
    try {
      NoiseModel::student_t(nu, Matrix::Identity(1, 1));
      FAIL() << "accepted nu = " << nu;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kRiskMomentUnavailable);
    }
  }
}

TEST(Noise, EmpiricalSupportHasTargetCovariance) {
  Rng rng(103);
  Matrix raw(500, 2);
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    raw(i, 0) = 3.0 + rng.uniform();
    raw(i, 1) = rng.normal() + raw(i, 0);
  }
  Matrix sigma(2, 2);
  sigma << 1.0, 0.3, 0.3, 0.5;
  const NoiseModel model = NoiseModel::empirical(raw, sigma);
  const Matrix& sup = model.support();
  EXPECT_LT(sup.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  const Matrix cov =
      sup.transpose() * sup / static_cast<double>(sup.rows());
  EXPECT_LT((cov - sigma).norm(), 1e-12);
}

TEST(Schedule, ValidatesAndNormalizes) {
  Vector dir(2);
  dir << 3.0, 4.0;
  const auto s = DisturbanceSchedule::every(5, 2.0, dir);
  EXPECT_NEAR(s.direction.norm(), 1.0, 1e-15);
  EXPECT_TRUE(s.fires(4));
  EXPECT_FALSE(s.fires(5));
  EXPECT_THROW(DisturbanceSchedule::every(0, 1.0, dir), Error);
  EXPECT_THROW(DisturbanceSchedule::every(2, 1.0, Vector::Zero(2)), Error);
  EXPECT_FALSE(DisturbanceSchedule::disabled().fires(0));
}

TEST(LinearSystemTest, RejectsBadShapesNamingTheField) {
  const NoiseModel noise = NoiseModel::gaussian(Matrix::Identity(1, 1));
  try {
    LinearSystem(Matrix::Identity(2, 2), Matrix::Zero(3, 1),
                 Matrix::Identity(2, 1), noise);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShape);
    EXPECT_NE(std::string(e.what()).find("B"), std::string::npos);
  }
  EXPECT_THROW(LinearSystem(Matrix::Identity(2, 2), Matrix::Zero(2, 1),
                            Matrix::Identity(2, 2), noise),
               Error);
}

TEST(LinearSystemTest, RejectsNonStabilizable) {
  Matrix a(2, 2);
  a << 1.5, 0.0, 0.0, 0.2;
  Matrix b(2, 1);
  b << 0.0, 1.0;
  try {
    LinearSystem(a, b, Matrix::Identity(2, 2),
                 NoiseModel::gaussian(Matrix::Identity(2, 2)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotStabilizable);
  }
}

TEST(Rollout, DeterministicContraction) {
  const LinearSystem sys = scalar_system(0.5);
  RolloutOptions opts;
  opts.inject_noise = false;
  const Trajectory tr =
      simulate_rollout(sys, scalar(0.0), Vector::Ones(1), 3, 9, opts);
  ASSERT_EQ(tr.states.cols(), 4);
  EXPECT_EQ(tr.states(0, 0), 1.0);
  EXPECT_EQ(tr.states(0, 1), 0.5);
  EXPECT_EQ(tr.states(0, 2), 0.25);
  EXPECT_EQ(tr.states(0, 3), 0.125);
}

TEST(Rollout, GustBookkeeping) {
  const LinearSystem sys(Matrix::Zero(2, 2), Matrix::Identity(2, 1),
                         Matrix::Identity(2, 2),
                         NoiseModel::gaussian(Matrix::Identity(2, 2)));
  RolloutOptions opts;
  opts.inject_noise = false;
  opts.schedule = DisturbanceSchedule::every(2, 1.0, Vector::Unit(2, 0));
  const Trajectory tr =
      simulate_rollout(sys, Matrix::Zero(1, 2), Vector::Zero(2), 8, 1, opts);
  for (long t = 0; t <= 8; ++t) {
    const Vector expected =
        (t > 0 && t % 2 == 0) ? Vector(Vector::Unit(2, 0)) : Vector::Zero(2);
    EXPECT_EQ(Vector(tr.states.col(t)), expected) << "t=" << t;
  }
}

TEST(Rollout, StationaryVarianceMatchesLyapunov) {
  const LinearSystem sys = scalar_system(0.5);
  const Trajectory tr =
      simulate_rollout(sys, scalar(0.0), Vector::Zero(1), 100000, 21);
  const double var = tr.states.row(0).array().square().mean();
  EXPECT_NEAR(var, 4.0 / 3.0, 0.05 * 4.0 / 3.0);
}

TEST(Rollout, ReplayIsExactAndSeedDeterministic) {
  Rng rng(5);
  const LinearSystem sys = random_stabilizable_system(3, 2, 3, rng, 0.9)
                               .with_noise(NoiseModel::student_t(
                                   5.0, Matrix::Identity(3, 3)));
  const Matrix k = lqr_solve(sys, CostSpec{Matrix::Identity(3, 3),
                                           Matrix::Identity(2, 2)});
  RolloutOptions opts;
  opts.schedule = DisturbanceSchedule::every(50, 20.0, Vector::Ones(3));
  const Trajectory a = simulate_rollout(sys, k, Vector::Zero(3), 2000, 77, opts);
  const Trajectory b = simulate_rollout(sys, k, Vector::Zero(3), 2000, 77, opts);
  EXPECT_EQ(replay_error(sys, a), 0.0);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.noises, b.noises);
  const Trajectory c = simulate_rollout(sys, k, Vector::Zero(3), 2000, 78, opts);
  EXPECT_NE(a.noises, c.noises);
}

TEST(Rollout, BatchIndependentOfWorkerCount) {
  const LinearSystem sys = scalar_system(0.9);
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7};
  const auto serial =
      simulate_batch(sys, scalar(-0.3), Vector::Zero(1), 500, seeds, {}, 1);
  const auto parallel =
      simulate_batch(sys, scalar(-0.3), Vector::Zero(1), 500, seeds, {}, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].seed, seeds[i]);
    EXPECT_EQ(serial[i].states, parallel[i].states);
  }
}

TEST(Rollout, DivergenceCarriesTruncationTime) {
  const LinearSystem sys = scalar_system(2.0);
  RolloutOptions opts;
  opts.inject_noise = false;
  try {
    simulate_rollout(sys, scalar(8.0), Vector::Constant(1, 2.0), 1000, 1,
                     opts);
    FAIL();
  } catch (const DivergedRollout& e) {
    // |x_t| = 2 * 10^t first exceeds 1e150 at t = 150.
    EXPECT_EQ(e.truncation_time(), 150);
  }
}

TEST(Rollout, BoundedInProbability) {
  Rng rng(8);
  const LinearSystem sys = random_stabilizable_system(3, 1, 3, rng, 0.9);
  const Matrix k = lqr_solve(sys, CostSpec{Matrix::Identity(3, 3),
                                           Matrix::Identity(1, 1)});
  const double band =
      10.0 * std::sqrt(stationary_covariance(sys, k).trace());
  const Trajectory tr = simulate_rollout(sys, k, Vector::Zero(3), 10000, 3);
  long outside = 0;
  for (long t = 1000; t <= 10000; ++t) outside += tr.states.col(t).norm() > band;
  EXPECT_LT(static_cast<double>(outside) / 9001.0, 0.05);
}

TEST(Generator, ScalarAndFourDimensionalInstances) {
  Rng rng(9);
  const LinearSystem s1 = random_stabilizable_system(1, 1, 1, rng, 0.5);
  EXPECT_TRUE(is_stabilizable(s1.a(), s1.b()));
  for (int trial = 0; trial < 10; ++trial) {
    const LinearSystem s = random_stabilizable_system(4, 2, 4, rng, 0.9);
    const Matrix k = lqr_solve(s, CostSpec{Matrix::Identity(4, 4),
                                           Matrix::Identity(2, 2)});
    EXPECT_TRUE(is_controllable(s.closed_loop(k), s.h()));
    EXPECT_TRUE(is_positive_definite(s.h() * s.h().transpose()));
    EXPECT_TRUE(is_positive_definite(s.sigma_w()));
  }
}

TEST(Export, CsvAndHeader) {
  const LinearSystem sys = scalar_system(0.5);
  const Trajectory tr = simulate_rollout(sys, scalar(0.0), Vector::Zero(1), 2, 4);
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x0,u0,w0");
  EXPECT_NE(trajectory_header_json(tr, "abc").find("\"abc\""),
            std::string::npos);
}

}  // namespace
}  // namespace ergorisk
