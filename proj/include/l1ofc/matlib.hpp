#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "l1ofc/errors.hpp"

// Dense real-matrix kernels shared by every other module. All functions are
// pure and thread-safe.
namespace l1ofc::matlib {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

struct Tolerances {
    double solve = 1e-9;
    double eig = 1e-7;
    double rank = 1e-8;
};

/// Throws NonFiniteState if any entry is NaN or Inf.
void require_finite(const Matrix& M, const char* what = "matrix");

/// Spectrum of a real square matrix.
ComplexVector eigenvalues(const Matrix& A);

/// True iff all eigenvalues have real part < -margin.
bool is_hurwitz(const Matrix& A, double margin = 0.0);

/// Largest real part over the spectrum of A.
double spectral_abscissa(const Matrix& A);

/// Numerical rank via singular values, threshold rel_tol * sigma_max.
Eigen::Index numerical_rank(const Matrix& M, double rel_tol = 1e-8);

/// Solves A'P + PA = -Q for symmetric positive-definite P via Kronecker
/// vectorization. A must be Hurwitz and Q symmetric positive-definite.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// Upper-triangular R with R'R = P. Input is symmetrized before factoring.
Matrix cholesky_upper(const Matrix& P);

/// Left pseudo-inverse (M'M)^{-1} M' of a full-column-rank matrix.
Matrix pinv_left(const Matrix& M);

/// Matrix exponential e^{A t}, scaling-and-squaring with Pade approximation.
Matrix expm(const Matrix& A, double t = 1.0);

/// Output-injection gain K such that A + K C is Hurwitz. Checks (A, C)
/// detectability by PBH first. The construction solves
/// (A + beta I)' Po + Po (A + beta I) = C'C + eps I with A + beta I
/// anti-stable and returns K = -Po^{-1} C', falling back to eigenvalue-checked
/// gain scaling when the margin is short.
Matrix place_output_injection(const Matrix& A, const Matrix& C, double desired_rate);

/// PBH detectability: rank [sI - A; C] = n at every eigenvalue with
/// nonnegative real part.
bool is_detectable(const Matrix& A, const Matrix& C, double rel_tol = 1e-8);

}  // namespace l1ofc::matlib
