#pragma once

#include <span>
#include <vector>

#include "lurelab/matrix.hpp"

namespace lurelab {

/// Eigenvalues sorted by descending real part, ties by descending imaginary part.
using Spectrum = std::vector<Complex>;

/// Solves a·x = b by LU with partial pivoting. Throws Singular when a pivot
/// falls below 1e-12 (relative to the largest entry of `a`).
Matrix solve_linear(const Matrix& a, const Matrix& b);
Vec solve_linear(const Matrix& a, std::span<const double> b);

/// Complex dense solve, `a` is n×n row-major.
std::vector<Complex> solve_linear(std::span<const Complex> a, std::span<const Complex> b);

Matrix inverse(const Matrix& a);
double determinant(const Matrix& a);

/// All eigenvalues of a square matrix (n ≤ 32): balancing, Householder
/// Hessenberg reduction, then Francis double-shift QR.
Spectrum eigenvalues(const Matrix& m);

double spectral_abscissa(const Spectrum& s);  // max real part
bool is_hurwitz(const Spectrum& s, double margin = 0.0);

/// X with aᵀX + Xa + q = 0 (a Hurwitz, q symmetric), via the Kronecker system.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

struct LqrProblem {
  Matrix A;  // n×n
  Matrix B;  // n×1
  Matrix Q;  // n×n, symmetric positive definite
  double R = 1.0;

  void validate() const;
};

struct CareSolution {
  Matrix X;         // stabilizing Riccati solution
  Matrix gain;      // 1×n, K = R⁻¹BᵀX
  Spectrum closed_loop_spectrum;  // eig(A − BK)
  int iterations = 0;
  double residual = 0.0;
};

/// Newton–Kleinman iteration for AᵀX + XA − XBR⁻¹BᵀX + Q = 0.
CareSolution solve_care(const LqrProblem& p);

/// ‖AᵀX + XA − XBR⁻¹BᵀX + Q‖∞
double care_residual(const LqrProblem& p, const Matrix& x);

}  // namespace lurelab
