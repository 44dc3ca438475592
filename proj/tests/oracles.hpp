#pragma once

// Small independent reference routines used only by the tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "lurelab/matrix.hpp"

namespace oracle {

using lurelab::Complex;
using lurelab::Matrix;
using lurelab::Vec;

// Gaussian elimination with full pivoting on a complex copy; returns x with a·x = b.
inline std::vector<Complex> csolve(std::vector<std::vector<Complex>> a, std::vector<Complex> b) {
  const std::size_t n = b.size();
  std::vector<std::size_t> colperm(n);
  for (std::size_t i = 0; i < n; ++i) colperm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    double best = -1;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(a[i][j]) > best) {
          best = std::abs(a[i][j]);
          pr = i;
          pc = j;
        }
    std::swap(a[k], a[pr]);
    std::swap(b[k], b[pr]);
    for (auto& row : a) std::swap(row[k], row[pc]);
    std::swap(colperm[k], colperm[pc]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<Complex> y(n);
  for (std::size_t k = n; k-- > 0;) {
    Complex s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * y[j];
    y[k] = s / a[k][k];
  }
  std::vector<Complex> x(n);
  for (std::size_t k = 0; k < n; ++k) x[colperm[k]] = y[k];
  return x;
}

// Smallest full-pivoting pivot of (a − λI), relative to the largest entry of a.
// Vanishes (up to rounding) exactly when λ is an eigenvalue.
inline double min_singular_proxy(const Matrix& m, Complex lambda) {
  const std::size_t n = m.rows();
  std::vector<std::vector<Complex>> a(n, std::vector<Complex>(n));
  double scale = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] = m(i, j) - (i == j ? lambda : Complex(0));
      scale = std::max(scale, std::abs(m(i, j)));
    }
  double smallest = 1e300;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    double best = -1;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(a[i][j]) > best) {
          best = std::abs(a[i][j]);
          pr = i;
          pc = j;
        }
    std::swap(a[k], a[pr]);
    for (auto& row : a) std::swap(row[k], row[pc]);
    smallest = std::min(smallest, best);
    if (best == 0) break;
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
    }
  }
  return smallest / std::max(1.0, scale);
}

// rᵀ(P − sI)⁻¹q by direct solve.
inline Complex resolvent(const Matrix& p, const Vec& q, const Vec& r, Complex s) {
  const std::size_t n = q.size();
  std::vector<std::vector<Complex>> a(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = p(i, j) - (i == j ? s : Complex(0));
  auto x = csolve(a, std::vector<Complex>(q.begin(), q.end()));
  Complex y(0);
  for (std::size_t i = 0; i < n; ++i) y += r[i] * x[i];
  return y;
}

// Ratio of polynomials given by coefficients (descending), Horner.
inline Complex ratio(const std::vector<double>& num, const std::vector<double>& den, Complex s) {
  Complex a(0), b(0);
  for (double c : num) a = a * s + c;
  for (double c : den) b = b * s + c;
  return a / b;
}

// Classical fixed-step RK4.
inline Vec rk4(const std::function<void(const Vec&, Vec&)>& f, Vec x, double t_end, double h) {
  const std::size_t n = x.size();
  Vec k1(n), k2(n), k3(n), k4(n), tmp(n);
  const long steps = std::lround(t_end / h);
  for (long s = 0; s < steps; ++s) {
    f(x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    f(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    f(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    f(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return x;
}

// exp(a·t) by scaling and squaring with a Taylor core.
inline Matrix expm(const Matrix& a, double t) {
  const std::size_t n = a.rows();
  Matrix m = a * t;
  int sq = 0;
  while (m.norm_inf() > 0.5) {
    m *= 0.5;
    ++sq;
  }
  Matrix term = Matrix::identity(n), sum = Matrix::identity(n);
  for (int k = 1; k < 30; ++k) {
    term = term * m;
    term *= 1.0 / k;
    sum += term;
  }
  for (int i = 0; i < sq; ++i) sum = sum * sum;
  return sum;
}

// Characteristic polynomial det(sI − a), descending, by Faddeev–LeVerrier in long double.
inline std::vector<long double> charpoly(const Matrix& a) {
  const std::size_t n = a.rows();
  using Row = std::vector<long double>;
  std::vector<Row> m(n, Row(n, 0.0L)), am(n, Row(n, 0.0L));
  std::vector<long double> c(n + 1, 0.0L);
  c[0] = 1.0L;
  for (std::size_t k = 1; k <= n; ++k) {
    // M_k = A·M_{k−1} + c_{k−1} I, with M_0 = 0
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        long double s = 0.0L;
        for (std::size_t l = 0; l < n; ++l) s += static_cast<long double>(a(i, l)) * m[l][j];
        am[i][j] = s + (i == j ? c[k - 1] : 0.0L);
      }
    m = am;
    long double tr = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) tr += static_cast<long double>(a(i, l)) * m[l][i];
    c[k] = -tr / static_cast<long double>(k);
  }
  return c;
}

// Roots of a monic polynomial (descending) by Aberth iteration in long double.
inline std::vector<Complex> poly_roots(const std::vector<long double>& c) {
  using CL = std::complex<long double>;
  const std::size_t n = c.size() - 1;
  long double bound = 0.0L;
  for (std::size_t k = 1; k <= n; ++k) bound = std::max(bound, std::pow(std::abs(c[k]), 1.0L / k));
  std::vector<CL> z(n);
  for (std::size_t k = 0; k < n; ++k) z[k] = std::polar(bound + 0.5L, 2.0L * M_PIl * (k + 0.25L) / n);
  auto eval = [&](CL x, CL& d) {
    CL p = c[0];
    d = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      d = d * x + p;
      p = p * x + c[k];
    }
    return p;
  };
  for (int it = 0; it < 500; ++it) {
    long double moved = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      CL d;
      const CL p = eval(z[i], d);
      if (p == CL(0)) continue;
      const CL ratio = p / d;
      CL s = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) s += 1.0L / (z[i] - z[j]);
      const CL step = ratio / (1.0L - ratio * s);
      z[i] -= step;
      moved = std::max(moved, std::abs(step) / std::max(1.0L, std::abs(z[i])));
    }
    if (moved < 1e-17L) break;
  }
  std::vector<Complex> out;
  for (const CL& v : z) out.emplace_back(static_cast<double>(v.real()), static_cast<double>(v.imag()));
  return out;
}

// Largest distance in an optimal one-to-one matching (n ≤ 8, brute force).
inline double matched_error(std::vector<Complex> a, const std::vector<Complex>& b) {
  if (a.size() != b.size()) return 1e300;
  std::sort(a.begin(), a.end(), [](Complex x, Complex y) { return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag(); });
  std::vector<std::size_t> idx(a.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  double best = 1e300;
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i)
      worst = std::max(worst, std::abs(a[idx[i]] - b[i]) / std::max(1.0, std::abs(b[i])));
    best = std::min(best, worst);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

}  // namespace oracle
