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

#include "ergorisk/matops.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "ergorisk/errors.hpp"

namespace ergorisk {
namespace {

std::string dims(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

// Doubling iteration for large n.
Matrix lyapunov_doubling(const Matrix& a, const Matrix& v) {
  Matrix x = v;
  Matrix ak = a;
  for (int k = 0; k < 64; ++k) {
    const Matrix term = ak * x * ak.transpose();
    x += term;
    if (term.norm() <= 1e-17 * x.norm()) break;
    ak = ak * ak;
  }
  return x;
}

Matrix lyapunov_kronecker(const Matrix& a, const Matrix& v) {
  const Eigen::Index n = a.rows();
  const Eigen::Index nn = n * n;
  // Column-major vec: vec(A X A^T) = (A (x) A) vec(X).
  Matrix lhs = Matrix::Identity(nn, nn);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index row = i + n * j;
      for (Eigen::Index l = 0; l < n; ++l) {
        for (Eigen::Index k = 0; k < n; ++k) {
          lhs(row, k + n * l) -= a(i, k) * a(j, l);
        }
      }
    }
  }
  const Eigen::PartialPivLU<Matrix> lu(lhs);
  const Vector rhs = Eigen::Map<const Vector>(v.data(), nn);
  Vector sol = lu.solve(rhs);
  // One round of iterative refinement.
  const Vector residual = rhs - lhs * sol;
  sol += lu.solve(residual);
  return Eigen::Map<const Matrix>(sol.data(), n, n);
}

}  // namespace

void require_square(const Matrix& m, std::string_view name) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw Error(ErrorCode::kShape, std::string(name) +
                                       " must be square with dimension >= 1, "
                                       "got " + dims(m));
  }
}

void require_finite(const Matrix& m, std::string_view name) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kShape,
                std::string(name) + " has non-finite entries");
  }
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   std::string_view name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " must be " << rows << "x" << cols << ", got " << dims(m);
    throw Error(ErrorCode::kShape, os.str());
  }
}

double spectral_radius(const Matrix& a) {
  require_square(a, "A");
  require_finite(a, "A");
  if (a.rows() == 1) return std::abs(a(0, 0));
  Eigen::EigenSolver<Matrix> solver;
  solver.compute(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigenvalue iteration did not converge within "
       << solver.getMaxIterations() * a.rows() << " iterations";
    throw Error(ErrorCode::kEigenFailure, os.str());
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_schur_stable(const Matrix& a, double tol) {
  return spectral_radius(a) < 1.0 - tol;
}

Matrix solve_lyapunov_discrete(const Matrix& a, const Matrix& v) {
  require_square(a, "A");
  require_shape(v, a.rows(), a.cols(), "V");
  require_finite(v, "V");
  const double rho = spectral_radius(a);
  if (!(rho < 1.0 - kStabilityTol)) {
    std::ostringstream os;
    os.precision(17);
    os << "Lyapunov solve requires a Schur stable matrix, spectral radius is "
       << rho;
    throw Error(ErrorCode::kUnstableMatrix, os.str());
  }
  Matrix x = a.rows() <= kLyapunovKroneckerMaxDim ? lyapunov_kronecker(a, v)
                                                  : lyapunov_doubling(a, v);
  if (is_symmetric(v, 0.0)) x = symmetrize(x);
  return x;
}

Matrix riccati_gain(const Matrix& a, const Matrix& b, const Matrix& r,
                    const Matrix& p) {
  const Matrix s = r + b.transpose() * p * b;
  return -s.ldlt().solve(b.transpose() * p * a);
}

double dare_residual(const Matrix& a, const Matrix& b, const Matrix& q,
                     const Matrix& r, const Matrix& p) {
  const Matrix s = r + b.transpose() * p * b;
  const Matrix bpa = b.transpose() * p * a;
  const Matrix rhs = a.transpose() * p * a -
                     bpa.transpose() * s.ldlt().solve(bpa) + q;
  return (p - rhs).norm();
}

Matrix solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                  const Matrix& r, const DareOptions& options) {
  require_square(a, "A");
  const Eigen::Index n = a.rows();
  if (b.rows() != n || b.cols() < 1) {
    throw Error(ErrorCode::kShape, "B must have " + std::to_string(n) +
                                       " rows, got " + dims(b));
  }
  require_shape(q, n, n, "Q");
  require_shape(r, b.cols(), b.cols(), "R");
  require_finite(a, "A");
  require_finite(b, "B");
  require_finite(q, "Q");
  require_finite(r, "R");

  Matrix p = q;
  bool converged = false;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const Matrix s = r + b.transpose() * p * b;
    const Matrix bpa = b.transpose() * p * a;
    Matrix next = a.transpose() * p * a -
                  bpa.transpose() * s.ldlt().solve(bpa) + q;
    next = symmetrize(next);
    if (!next.allFinite() || next.norm() > 1e100) {
      throw Error(ErrorCode::kNotStabilizable,
                  "Riccati recursion diverged after " + std::to_string(it) +
                      " iterations");
    }
    const double change = (next - p).norm();
    p = std::move(next);
    if (change <= options.tol * (1.0 + p.norm())) {
      converged = true;
      break;
    }
  }

  Matrix k = riccati_gain(a, b, r, p);
  if (!is_schur_stable(a + b * k)) {
    throw Error(ErrorCode::kNotStabilizable,
                converged ? "DARE gain is not Schur stabilizing"
                          : "Riccati recursion did not converge in " +
                                std::to_string(it) + " iterations");
  }

  // Newton (policy-evaluation) polish when the recursion stalls short of the
  // residual target; slow linear convergence near rho(A_K) ~ 1 needs it.
  double residual = dare_residual(a, b, q, r, p);
  for (int polish = 0; polish < 5 && residual > 1e-10 * (1.0 + p.norm());
       ++polish) {
    const Matrix ak = a + b * k;
    const Matrix candidate = solve_lyapunov_discrete(
        ak.transpose(), q + k.transpose() * r * k);
    const double cand_residual = dare_residual(a, b, q, r, candidate);
    if (!(cand_residual < residual)) break;
    p = candidate;
    residual = cand_residual;
    k = riccati_gain(a, b, r, p);
  }
  return p;
}

Eigen::Index numerical_rank(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  const Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) return 0;
  return (sv.array() > tol * sv(0)).count();
}

bool is_controllable(const Matrix& a, const Matrix& h, double tol) {
  if (a.rows() != a.cols() || h.rows() != a.rows() || h.cols() < 1) {
    return false;
  }
  if (!a.allFinite() || !h.allFinite()) return false;
  const Eigen::Index n = a.rows();
  const Eigen::Index d = h.cols();
  Matrix ctrb(n, n * d);
  Matrix block = h;
  for (Eigen::Index k = 0; k < n; ++k) {
    ctrb.middleCols(k * d, d) = block;
    block = a * block;
  }
  return numerical_rank(ctrb, tol) == n;
}

bool is_stabilizable(const Matrix& a, const Matrix& b, double tol) {
  require_square(a, "A");
  if (b.rows() != a.rows()) return false;
  const Eigen::Index n = a.rows();
  Eigen::EigenSolver<Matrix> solver(a, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigenFailure,
                "eigenvalues for stabilizability test did not converge");
  }
  using Complex = std::complex<double>;
  using ComplexMatrix = Eigen::MatrixXcd;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lambda = solver.eigenvalues()(i);
    if (std::abs(lambda) < 1.0) continue;
    ComplexMatrix pbh(n, n + b.cols());
    pbh.leftCols(n) = lambda * ComplexMatrix::Identity(n, n) -
                      a.cast<Complex>();
    pbh.rightCols(b.cols()) = b.cast<Complex>();
    const Eigen::JacobiSVD<ComplexMatrix> svd(pbh);
    const Vector sv = svd.singularValues();
    if (!(sv(0) > 0.0) || (sv.array() > tol * sv(0)).count() < n) {
      return false;
    }
  }
  return true;
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).norm() <= tol * std::max(1.0, m.norm());
}

double min_eigenvalue_symmetric(const Matrix& m) {
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m),
                                                     Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

bool is_positive_definite(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1 || !m.allFinite()) return false;
  if (!is_symmetric(m)) return false;
  const Eigen::LLT<Matrix> llt(symmetrize(m));
  return llt.info() == Eigen::Success && min_eigenvalue_symmetric(m) > 0.0;
}

bool is_positive_semidefinite(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() < 1 || !m.allFinite()) return false;
  if (!is_symmetric(m)) return false;
  return min_eigenvalue_symmetric(m) >= -tol * std::max(1.0, m.norm());
}

Matrix symmetric_sqrt(const Matrix& s) {
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(s));
  const Vector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return symmetrize(solver.eigenvectors() * root.asDiagonal() *
                    solver.eigenvectors().transpose());
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace ergorisk
