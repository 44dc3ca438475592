#include "lurelab/transfer_function.hpp"

#include <cmath>
#include <sstream>

#include "lurelab/diagnostics.hpp"
#include "lurelab/error.hpp"
#include "lurelab/linalg.hpp"

namespace lurelab {

RationalTF::RationalTF(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw Error(ErrorKind::InvalidArgument, "transfer function with zero denominator");
  const double lead = den_.leading();
  if (lead != 1.0) {
    num_ = num_.scaled(1.0 / lead);
    den_ = den_.scaled(1.0 / lead);
  }
}

RationalTF RationalTF::from_zpk(std::span<const Complex> zeros, std::span<const Complex> poles, double k) {
  return {Polynomial::from_roots(zeros, k), Polynomial::from_roots(poles)};
}

std::vector<Complex> RationalTF::zeros() const {
  if (num_.is_zero()) return {};
  return num_.roots();
}

std::vector<Complex> RationalTF::poles() const { return den_.roots(); }

Complex tf_eval(const RationalTF& w, Complex s) {
  const Complex d = w.den()(s);
  double scale = 0.0;
  for (double c : w.den().coeffs()) scale += std::abs(c);
  scale *= std::pow(std::max(1.0, std::abs(s)), w.den().degree());
  if (std::abs(d) < 1e-14 * scale) {
    std::ostringstream msg;
    msg << "transfer function evaluated at a pole s = " << s;
    throw Error(ErrorKind::PoleHit, msg.str());
  }
  return w.num()(s) / d;
}

RationalTF tf_series(const RationalTF& a, const RationalTF& b) {
  Polynomial num = a.num() * b.num();
  Polynomial den = a.den() * b.den();
  if (num.is_zero() || num.degree() == 0 || den.degree() == 0) return {num, den};

  std::vector<Complex> zs = num.roots();
  std::vector<Complex> ps = den.roots();
  std::vector<bool> pole_used(ps.size(), false);
  std::vector<Complex> cancelled;
  for (const Complex& z : zs) {
    for (std::size_t j = 0; j < ps.size(); ++j) {
      if (pole_used[j]) continue;
      if (std::abs(z - ps[j]) <= 1e-9 * std::max(1.0, std::abs(ps[j]))) {
        pole_used[j] = true;
        cancelled.push_back(ps[j]);
        std::ostringstream msg;
        msg << "tf_series: cancelled common root " << ps[j];
        warn(msg.str());
        break;
      }
    }
  }
  if (cancelled.empty()) return {num, den};
  const Polynomial factor = Polynomial::from_roots(cancelled);
  return {divide(num, factor).quotient, divide(den, factor).quotient};
}

RationalTF pade11(double tau) {
  if (!(tau >= 0.0)) throw Error(ErrorKind::NegativeDelay, "Pade delay must be non-negative");
  if (tau == 0.0) return RationalTF::gain(1.0);
  return {Polynomial({-tau, 2.0}), Polynomial({tau, 2.0})};
}

StateSpace tf_realize(const RationalTF& w) {
  if (!w.proper()) throw Error(ErrorKind::ImproperTF, "cannot realize an improper transfer function");
  const int n = w.den().degree();
  const auto split = divide(w.num(), w.den());
  StateSpace ss{Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n)), Vec(static_cast<std::size_t>(n), 0.0),
                Vec(static_cast<std::size_t>(n), 0.0), split.quotient.coeff(0)};
  if (n == 0) return ss;
  const auto& den = w.den().coeffs();
  for (int j = 0; j < n; ++j) ss.A(0, static_cast<std::size_t>(j)) = -den[static_cast<std::size_t>(j + 1)];
  for (int i = 1; i < n; ++i) ss.A(static_cast<std::size_t>(i), static_cast<std::size_t>(i - 1)) = 1.0;
  ss.b[0] = 1.0;
  // State k carries s^{n-1-k}·u/den, so c_k is the coefficient of s^{n-1-k}.
  for (int k = 0; k < n; ++k) ss.c[static_cast<std::size_t>(k)] = split.remainder.coeff(n - 1 - k);
  return ss;
}

Complex ss_eval(const StateSpace& ss, Complex s) {
  const std::size_t n = ss.A.rows();
  if (n == 0) return ss.d;
  std::vector<Complex> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = (i == j ? s : Complex(0.0)) - ss.A(i, j);
  std::vector<Complex> rhs(ss.b.begin(), ss.b.end());
  const auto x = solve_linear(std::span<const Complex>(m), std::span<const Complex>(rhs));
  Complex y = ss.d;
  for (std::size_t i = 0; i < n; ++i) y += ss.c[i] * x[i];
  return y;
}

CharPoly faddeev_leverrier(const Matrix& a) {
  if (!a.square()) throw Error(ErrorKind::NonSquare, "characteristic polynomial of non-square matrix");
  const std::size_t n = a.rows();
  std::vector<double> c(n + 1, 0.0);
  c[0] = 1.0;
  CharPoly out;
  Matrix m = Matrix::identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    out.adjugate.push_back(m);
    const Matrix am = a * m;
    c[k] = -am.trace() / static_cast<double>(k);
    m = am;
    for (std::size_t i = 0; i < n; ++i) m(i, i) += c[k];
  }
  out.poly = Polynomial(std::move(c));
  return out;
}

}  // namespace lurelab
