#pragma once

#include <vector>

#include "lurelab/matrix.hpp"
#include "lurelab/polynomial.hpp"

namespace lurelab {

/// Rational SISO transfer function num(s)/den(s). The denominator is kept monic.
class RationalTF {
 public:
  RationalTF() : RationalTF(Polynomial::constant(1.0), Polynomial::constant(1.0)) {}
  RationalTF(Polynomial num, Polynomial den);

  static RationalTF gain(double k) { return {Polynomial::constant(k), Polynomial::constant(1.0)}; }
  /// k·Π(s − z)/Π(s − p)
  static RationalTF from_zpk(std::span<const Complex> zeros, std::span<const Complex> poles, double k);

  const Polynomial& num() const noexcept { return num_; }
  const Polynomial& den() const noexcept { return den_; }
  bool proper() const noexcept { return num_.degree() <= den_.degree(); }
  bool strictly_proper() const noexcept { return num_.is_zero() || num_.degree() < den_.degree(); }

  std::vector<Complex> zeros() const;
  std::vector<Complex> poles() const;
  /// Ratio of leading coefficients (high-frequency gain of the zpk form).
  double zpk_gain() const { return num_.leading(); }

 private:
  Polynomial num_;
  Polynomial den_;
};

/// Throws PoleHit when |den(s)| < 1e-14·(Σ|den coeff|·max(1,|s|)^deg).
Complex tf_eval(const RationalTF& w, Complex s);

/// Series connection a·b with common-root cancellation (relative 1e-9). Each
/// cancelled root is reported through warn().
RationalTF tf_series(const RationalTF& a, const RationalTF& b);

/// (−τs + 2)/(τs + 2); constant 1 for τ = 0.
RationalTF pade11(double tau);

struct StateSpace {
  Matrix A;
  Vec b;
  Vec c;
  double d = 0.0;
};

/// Controllable companion form: first row of A is −(monic den coefficients),
/// unit subdiagonal, b = e1. Throws ImproperTF when deg num > deg den.
StateSpace tf_realize(const RationalTF& w);

/// c(sI − A)⁻¹b + d by a dense complex solve.
Complex ss_eval(const StateSpace& ss, Complex s);

/// Characteristic polynomial det(sI − a) and the adjugate coefficients
/// M_1..M_n with adj(sI − a) = Σ M_k s^{n−k} (Faddeev–LeVerrier).
struct CharPoly {
  Polynomial poly;
  std::vector<Matrix> adjugate;
};
CharPoly faddeev_leverrier(const Matrix& a);

}  // namespace lurelab
