#pragma once

#include <span>
#include <vector>

#include "lurelab/matrix.hpp"

namespace lurelab {

/// Real polynomial, coefficients in descending powers of s.
class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  explicit Polynomial(std::vector<double> descending);
  Polynomial(std::initializer_list<double> descending) : Polynomial(std::vector<double>(descending)) {}

  static Polynomial constant(double c) { return Polynomial({c}); }
  /// Product of (s - root) over `roots`, times `leading`. Complex roots must come in conjugate pairs.
  static Polynomial from_roots(std::span<const Complex> roots, double leading = 1.0);

  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  double leading() const noexcept { return coeffs_.front(); }
  /// Coefficient of s^k (0 if k > degree).
  double coeff(int k) const;
  bool is_zero() const noexcept { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

  Complex operator()(Complex s) const;
  double operator()(double s) const;

  Polynomial derivative() const;
  Polynomial scaled(double a) const;

  /// Roots by Durand–Kerner (200 iterations, tolerance 1e-12) followed by a
  /// Newton polish; exact zero roots are factored out first.
  std::vector<Complex> roots() const;

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);

 private:
  void trim();
  std::vector<double> coeffs_;
};

struct PolyDivision {
  Polynomial quotient;
  Polynomial remainder;
};

PolyDivision divide(const Polynomial& num, const Polynomial& den);

}  // namespace lurelab
