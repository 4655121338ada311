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

// Reference computations used by the tests. Nothing here calls into the
// library's solvers: Lyapunov and Riccati equations are solved by plain
// fixed-point iteration and gradients by central differences.

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace ergorisk::oracle {

using Mat = Eigen::MatrixXd;

// Sigma = sum_k A^k V (A^T)^k, truncated once a term is negligible.
inline Mat lyapunov_series(const Mat& a, const Mat& v, double rel_tol = 1e-18,
                           int max_terms = 200000) {
  Mat sum = v;
  Mat term = v;
  for (int k = 0; k < max_terms; ++k) {
    term = a * term * a.transpose();
    sum += term;
    if (term.norm() <= rel_tol * sum.norm()) return sum;
  }
  throw std::runtime_error("lyapunov_series did not converge");
}

// Riccati value iteration P <- Q + A'PA - A'PB (R + B'PB)^{-1} B'PA.
inline Mat riccati_value_iteration(const Mat& a, const Mat& b, const Mat& q,
                                   const Mat& r, int max_iterations = 1000000) {
  Mat p = q;
  for (int k = 0; k < max_iterations; ++k) {
    const Mat bpa = b.transpose() * p * a;
    const Mat next = q + a.transpose() * p * a -
                     bpa.transpose() *
                         (r + b.transpose() * p * b).ldlt().solve(bpa);
    const double change = (next - p).norm();
    p = 0.5 * (next + next.transpose());
    if (change <= 1e-14 * (1.0 + p.norm())) return p;
  }
  throw std::runtime_error("riccati_value_iteration did not converge");
}

// u = K x with K = -(R + B'PB)^{-1} B'PA.
inline Mat riccati_gain(const Mat& a, const Mat& b, const Mat& r,
                        const Mat& p) {
  return -(r + b.transpose() * p * b).ldlt().solve(b.transpose() * p * a);
}

inline double spectral_radius(const Mat& a) {
  return a.eigenvalues().cwiseAbs().maxCoeff();
}

// Central finite-difference gradient of f at K.
inline Mat central_difference(const std::function<double(const Mat&)>& f,
                              const Mat& k, double h) {
  Mat grad(k.rows(), k.cols());
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      Mat plus = k;
      Mat minus = k;
      plus(i, j) += h;
      minus(i, j) -= h;
      grad(i, j) = (f(plus) - f(minus)) / (2.0 * h);
    }
  }
  return grad;
}

// Problem data for the gaussian, Rc = 0 case, solved without the library.
struct Instance {
  Mat a, b, h, sigma_w, q, r, qc;

  Mat v() const { return h * sigma_w * h.transpose(); }

  Mat sigma(const Mat& k) const { return lyapunov_series(a + b * k, v()); }

  double cost(const Mat& k) const {
    return ((q + k.transpose() * r * k) * sigma(k)).trace();
  }

  // 4 tr(Qc V Qc (Sigma - V)) + 2 tr((H'QcH Sigma_W)^2)
  double gamma(const Mat& k) const {
    const Mat vv = v();
    const Mat mw = h.transpose() * qc * h * sigma_w;
    return 4.0 * (qc * vv * qc * (sigma(k) - vv)).trace() +
           2.0 * (mw * mw).trace();
  }

  // The Lagrangian is an LQR cost with state weight Q + 4 lambda Qc V Qc, so
  // its minimizer is a Riccati gain.
  Mat k_star(double lambda) const {
    const Mat shifted = q + 4.0 * lambda * qc * v() * qc;
    return riccati_gain(a, b, r,
                        riccati_value_iteration(a, b, shifted, r));
  }

  double dual(double lambda, double beta_bar) const {
    const Mat k = k_star(lambda);
    return cost(k) + lambda * (gamma(k) - beta_bar);
  }
};

struct DualOptimum {
  double lambda;
  Mat k;
  double gamma;
  double cost;
};

// Golden-section maximization of the concave dual over [0, lambda_hi], where
// lambda_hi is grown until the constraint is met.
inline DualOptimum golden_section_dual(const Instance& inst, double beta_bar,
                                       double tol = 1e-9) {
  double hi = 1.0;
  while (inst.gamma(inst.k_star(hi)) > beta_bar) {
    hi *= 2.0;
    if (hi > 1e8) throw std::runtime_error("constraint not attainable");
  }
  double lo = 0.0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = inst.dual(x1, beta_bar);
  double f2 = inst.dual(x2, beta_bar);
  while (hi - lo > tol * (1.0 + hi)) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = inst.dual(x2, beta_bar);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = inst.dual(x1, beta_bar);
    }
  }
  DualOptimum out;
  out.lambda = 0.5 * (lo + hi);
  out.k = inst.k_star(out.lambda);
  out.gamma = inst.gamma(out.k);
  out.cost = inst.cost(out.k);
  return out;
}

}  // namespace ergorisk::oracle
