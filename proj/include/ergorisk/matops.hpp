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

// Dense kernels shared by the rest of the library: spectral radius,
// discrete Lyapunov and Riccati solvers, and rank-based system tests.
//
// All routines are pure functions of their arguments.

#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace ergorisk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A matrix is accepted as Schur stable when rho(A) < 1 - kStabilityTol.
inline constexpr double kStabilityTol = 1e-9;

// Relative singular-value threshold for numerical rank.
inline constexpr double kRankTol = 1e-8;

// Above this dimension the Lyapunov solver switches from the Kronecker
// linear solve to the doubling iteration.
inline constexpr int kLyapunovKroneckerMaxDim = 32;

// Shape and finiteness guards. `name` appears in the ShapeError message.
void require_square(const Matrix& m, std::string_view name);
void require_finite(const Matrix& m, std::string_view name);
void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   std::string_view name);

// Largest eigenvalue modulus. Throws EigenFailure if the QR iteration does
// not converge.
double spectral_radius(const Matrix& a);

bool is_schur_stable(const Matrix& a, double tol = kStabilityTol);

// Solves  X = A X A^T + V  for Schur-stable A.
//
// Uses vec(X) = (I - A (x) A)^{-1} vec(V) up to kLyapunovKroneckerMaxDim and
// the doubling iteration X_{k+1} = X_k + A^{2^k} X_k (A^T)^{2^k} above. The
// returned matrix is exactly symmetric when V is symmetric.
Matrix solve_lyapunov_discrete(const Matrix& a, const Matrix& v);

struct DareOptions {
  double tol = 1e-12;       // successive-iterate change, relative to 1+|P|
  int max_iterations = 10000;
};

// Stabilizing solution of
//   P = A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A + Q
// by the Riccati recursion started at P = Q. Throws NotStabilizable when the
// recursion diverges or the induced gain is not Schur stabilizing.
Matrix solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                  const Matrix& r, const DareOptions& options = {});

// K = -(R + B^T P B)^{-1} B^T P A.
Matrix riccati_gain(const Matrix& a, const Matrix& b, const Matrix& r,
                    const Matrix& p);

// Frobenius norm of the DARE residual at P.
double dare_residual(const Matrix& a, const Matrix& b, const Matrix& q,
                     const Matrix& r, const Matrix& p);

// rank([H, AH, ..., A^{n-1} H]) == n, rank counted as singular values above
// tol * sigma_max.
bool is_controllable(const Matrix& a, const Matrix& h, double tol = kRankTol);

// PBH test: rank([lambda I - A, B]) == n for every eigenvalue |lambda| >= 1.
bool is_stabilizable(const Matrix& a, const Matrix& b, double tol = kRankTol);

// Numerical rank by SVD.
Eigen::Index numerical_rank(const Matrix& m, double tol = kRankTol);

bool is_symmetric(const Matrix& m, double tol = 1e-10);
// Smallest eigenvalue of the symmetric part.
double min_eigenvalue_symmetric(const Matrix& m);
bool is_positive_definite(const Matrix& m);
bool is_positive_semidefinite(const Matrix& m, double tol = 1e-12);

// Symmetric PSD square root via the eigendecomposition.
Matrix symmetric_sqrt(const Matrix& s);

// Forces exact symmetry: (M + M^T) / 2.
Matrix symmetrize(const Matrix& m);

}  // namespace ergorisk
