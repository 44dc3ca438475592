#include "lurelab/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "lurelab/error.hpp"

namespace lurelab {

Polynomial::Polynomial(std::vector<double> descending) : coeffs_(std::move(descending)) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw Error(ErrorKind::NonFinite, "polynomial coefficient is not finite");
  trim();
}

void Polynomial::trim() {
  auto first = std::find_if(coeffs_.begin(), coeffs_.end(), [](double c) { return c != 0.0; });
  if (first == coeffs_.end()) {
    coeffs_.assign(1, 0.0);
    return;
  }
  coeffs_.erase(coeffs_.begin(), first);
}

Polynomial Polynomial::from_roots(std::span<const Complex> roots, double leading) {
  std::vector<Complex> c{Complex(leading, 0.0)};
  for (const Complex& r : roots) {
    std::vector<Complex> next(c.size() + 1, Complex(0.0));
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= c[i] * r;
    }
    c = std::move(next);
  }
  std::vector<double> re(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) re[i] = c[i].real();
  return Polynomial(std::move(re));
}

double Polynomial::coeff(int k) const {
  if (k < 0 || k > degree()) return 0.0;
  return coeffs_[static_cast<std::size_t>(degree() - k)];
}

Complex Polynomial::operator()(Complex s) const {
  Complex acc(0.0);
  for (double c : coeffs_) acc = acc * s + c;
  return acc;
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (double c : coeffs_) acc = acc * s + c;
  return acc;
}

Polynomial Polynomial::derivative() const {
  const int n = degree();
  if (n == 0) return Polynomial::constant(0.0);
  std::vector<double> d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = coeffs_[static_cast<std::size_t>(i)] * (n - i);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::scaled(double a) const {
  std::vector<double> c = coeffs_;
  for (double& v : c) v *= a;
  return Polynomial(std::move(c));
}

std::vector<Complex> Polynomial::roots() const {
  if (is_zero()) throw Error(ErrorKind::InvalidArgument, "roots of the zero polynomial");
  std::vector<double> c = coeffs_;
  std::vector<Complex> out;
  while (c.size() > 1 && c.back() == 0.0) {
    out.emplace_back(0.0, 0.0);
    c.pop_back();
  }
  const std::size_t n = c.size() - 1;
  if (n == 0) return out;
  if (n == 1) {
    out.emplace_back(-c[1] / c[0], 0.0);
    return out;
  }

  std::vector<Complex> monic(n + 1);
  for (std::size_t i = 0; i <= n; ++i) monic[i] = c[i] / c[0];
  auto eval = [&](Complex z) {
    Complex acc(0.0);
    for (const Complex& a : monic) acc = acc * z + a;
    return acc;
  };

  // Fujiwara bound on root moduli.
  double bound = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    double term = std::pow(std::abs(monic[i]), 1.0 / static_cast<double>(i));
    if (i == n) term = std::pow(std::abs(monic[i]) / 2.0, 1.0 / static_cast<double>(n));
    bound = std::max(bound, term);
  }
  bound = 2.0 * std::max(bound, 1e-3);

  std::vector<Complex> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n) + 0.4;
    z[k] = std::polar(0.5 * bound, angle);
  }

  for (int it = 0; it < 200; ++it) {
    double max_change = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      Complex denom(1.0);
      for (std::size_t j = 0; j < n; ++j)
        if (j != k) denom *= (z[k] - z[j]);
      if (std::abs(denom) == 0.0) denom = Complex(1e-300);
      const Complex delta = eval(z[k]) / denom;
      z[k] -= delta;
      max_change = std::max(max_change, std::abs(delta) / std::max(1.0, std::abs(z[k])));
    }
    if (max_change < 1e-12) break;
  }

  // Newton polish against the original coefficients.
  const Polynomial dp = derivative();
  for (Complex& r : z) {
    for (int it = 0; it < 3; ++it) {
      const Complex f = (*this)(r);
      const Complex df = dp(r);
      if (std::abs(df) == 0.0) break;
      const Complex step = f / df;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      if (std::abs(step) > 1e-6 * std::max(1.0, std::abs(r))) break;
      r -= step;
    }
  }

  for (Complex& r : z)
    if (std::abs(r.imag()) < 1e-10 * std::max(1.0, std::abs(r))) r = Complex(r.real(), 0.0);
  out.insert(out.end(), z.begin(), z.end());
  std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return out;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  const std::size_t n = std::max(a.coeffs_.size(), b.coeffs_.size());
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[n - a.coeffs_.size() + i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[n - b.coeffs_.size() + i] += b.coeffs_[i];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + b.scaled(-1.0); }

PolyDivision divide(const Polynomial& num, const Polynomial& den) {
  if (den.is_zero()) throw Error(ErrorKind::InvalidArgument, "polynomial division by zero");
  std::vector<double> rem = num.coeffs();
  const auto& d = den.coeffs();
  if (num.degree() < den.degree()) return {Polynomial::constant(0.0), num};
  const std::size_t qn = rem.size() - d.size() + 1;
  std::vector<double> q(qn, 0.0);
  for (std::size_t i = 0; i < qn; ++i) {
    const double f = rem[i] / d[0];
    q[i] = f;
    for (std::size_t j = 0; j < d.size(); ++j) rem[i + j] -= f * d[j];
    rem[i] = 0.0;
  }
  return {Polynomial(std::move(q)), Polynomial(std::move(rem))};
}

}  // namespace lurelab
