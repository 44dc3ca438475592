#include "lurelab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lurelab/error.hpp"

namespace lurelab {

namespace {

constexpr double kPivotTol = 1e-12;

double magnitude(double x) { return std::abs(x); }
double magnitude(const Complex& x) { return std::abs(x); }

// In-place LU with partial pivoting on an n×n row-major buffer, then solves
// for `nrhs` right-hand sides stored row-major in `b` (n×nrhs).
template <typename T>
void lu_solve_in_place(std::vector<T>& a, std::vector<T>& b, std::size_t n, std::size_t nrhs) {
  double scale = 0.0;
  for (const T& v : a) scale = std::max(scale, magnitude(v));
  if (scale == 0.0) throw Error(ErrorKind::Singular, "zero matrix");
  const double tol = kPivotTol * scale;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = magnitude(a[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = magnitude(a[i * n + k]);
      if (m > best) {
        best = m;
        piv = i;
      }
    }
    if (best <= tol)
      throw Error(ErrorKind::Singular, "pivot " + std::to_string(best) + " below threshold at column " +
                                           std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      for (std::size_t j = 0; j < nrhs; ++j) std::swap(b[k * nrhs + j], b[piv * nrhs + j]);
    }
    const T inv = T(1) / a[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const T f = a[i * n + k] * inv;
      if (f == T(0)) continue;
      a[i * n + k] = f;
      for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      for (std::size_t j = 0; j < nrhs; ++j) b[i * nrhs + j] -= f * b[k * nrhs + j];
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    for (std::size_t j = 0; j < nrhs; ++j) {
      T s = b[kk * nrhs + j];
      for (std::size_t c = kk + 1; c < n; ++c) s -= a[kk * n + c] * b[c * nrhs + j];
      b[kk * nrhs + j] = s / a[kk * n + kk];
    }
  }
}

void require_square(const Matrix& m, const char* what) {
  if (!m.square()) throw Error(ErrorKind::NonSquare, what);
}

// Row/column scaling by powers of two so that row and column norms are
// comparable; returns the balanced copy.
void balance(std::vector<double>& a, std::size_t n) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a[j * n + i]);
        r += std::abs(a[i * n + j]);
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] *= g;
        for (std::size_t j = 0; j < n; ++j) a[j * n + i] *= f;
      }
    }
  }
}

void householder_hessenberg(std::vector<double>& a, std::size_t n) {
  if (n < 3) return;
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += a[i * n + k] * a[i * n + k];
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    const double x0 = a[(k + 1) * n + k];
    if (x0 > 0) alpha = -alpha;
    std::fill(v.begin(), v.end(), 0.0);
    v[k + 1] = x0 - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a[i * n + k];
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    // a <- (I - beta v vᵀ) a
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a[i * n + j];
      s *= beta;
      for (std::size_t i = k + 1; i < n; ++i) a[i * n + j] -= s * v[i];
    }
    // a <- a (I - beta v vᵀ)
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a[i * n + j] * v[j];
      s *= beta;
      for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= s * v[j];
    }
    for (std::size_t i = k + 2; i < n; ++i) a[i * n + k] = 0.0;
  }
}

double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr
// structure, 1-based indices internally).
Spectrum hessenberg_qr(std::vector<double>& h, std::size_t n) {
  auto A = [&](std::size_t i, std::size_t j) -> double& { return h[(i - 1) * n + (j - 1)]; };
  std::vector<double> wr(n + 1, 0.0), wi(n + 1, 0.0);

  double anorm = 0.0;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = std::max<std::size_t>(i - 1, 1); j <= n; ++j) anorm += std::abs(A(i, j));

  const int max_total = 30 * static_cast<int>(std::max<std::size_t>(n, 1));
  int total = 0;
  long nn = static_cast<long>(n);
  double t = 0.0;
  double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
  while (nn >= 1) {
    int its = 0;
    long l = 0;
    do {
      for (l = nn; l >= 2; --l) {
        s = std::abs(A(l - 1, l - 1)) + std::abs(A(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(A(l, l - 1)) + s == s) {
          A(l, l - 1) = 0.0;
          break;
        }
      }
      if (l < 1) l = 1;
      x = A(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn] = 0.0;
        --nn;
      } else {
        y = A(nn - 1, nn - 1);
        w = A(nn, nn - 1) * A(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -z;
            wi[nn] = z;
          }
          nn -= 2;
        } else {
          if (its == 30 || total >= max_total)
            throw Error(ErrorKind::QrFailure, "QR iteration did not converge");
          if (its == 10 || its == 20) {
            t += x;
            for (long i = 1; i <= nn; ++i) A(i, i) -= x;
            s = std::abs(A(nn, nn - 1)) + std::abs(A(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          ++total;
          long m = nn - 2;
          for (; m >= l; --m) {
            z = A(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / A(m + 1, m) + A(m, m + 1);
            q = A(m + 1, m + 1) - z - r - s;
            r = A(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(A(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(A(m - 1, m - 1)) + std::abs(z) + std::abs(A(m + 1, m + 1)));
            if (u + v == v) break;
          }
          for (long i = m + 2; i <= nn; ++i) {
            A(i, i - 2) = 0.0;
            if (i != m + 2) A(i, i - 3) = 0.0;
          }
          for (long k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = A(k, k - 1);
              q = A(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = A(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == m) {
                if (l != m) A(k, k - 1) = -A(k, k - 1);
              } else {
                A(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (long j = k; j <= nn; ++j) {
                p = A(k, j) + q * A(k + 1, j);
                if (k != nn - 1) {
                  p += r * A(k + 2, j);
                  A(k + 2, j) -= p * z;
                }
                A(k + 1, j) -= p * y;
                A(k, j) -= p * x;
              }
              const long mmin = nn < k + 3 ? nn : k + 3;
              for (long i = l; i <= mmin; ++i) {
                p = x * A(i, k) + y * A(i, k + 1);
                if (k != nn - 1) {
                  p += z * A(i, k + 2);
                  A(i, k + 2) -= p * r;
                }
                A(i, k + 1) -= p * q;
                A(i, k) -= p;
              }
            }
          }
        }
      }
    } while (nn >= 1 && l < nn - 1);
  }

  Spectrum out;
  out.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) out.emplace_back(wr[i], wi[i]);
  return out;
}

}  // namespace

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  require_square(a, "solve_linear needs a square matrix");
  if (b.rows() != a.rows()) throw Error(ErrorKind::DimensionMismatch, "solve_linear right-hand side rows");
  const std::size_t n = a.rows();
  std::vector<double> lu(a.entries().begin(), a.entries().end());
  std::vector<double> x(b.entries().begin(), b.entries().end());
  lu_solve_in_place(lu, x, n, b.cols());
  return Matrix(n, b.cols(), std::move(x));
}

Vec solve_linear(const Matrix& a, std::span<const double> b) {
  require_square(a, "solve_linear needs a square matrix");
  if (b.size() != a.rows()) throw Error(ErrorKind::DimensionMismatch, "solve_linear right-hand side length");
  std::vector<double> lu(a.entries().begin(), a.entries().end());
  Vec x(b.begin(), b.end());
  lu_solve_in_place(lu, x, a.rows(), 1);
  return x;
}

std::vector<Complex> solve_linear(std::span<const Complex> a, std::span<const Complex> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n) throw Error(ErrorKind::DimensionMismatch, "complex solve shapes");
  std::vector<Complex> lu(a.begin(), a.end());
  std::vector<Complex> x(b.begin(), b.end());
  lu_solve_in_place(lu, x, n, 1);
  return x;
}

Matrix inverse(const Matrix& a) {
  require_square(a, "inverse needs a square matrix");
  return solve_linear(a, Matrix::identity(a.rows()));
}

double determinant(const Matrix& a) {
  require_square(a, "determinant needs a square matrix");
  const std::size_t n = a.rows();
  std::vector<double> m(a.entries().begin(), a.entries().end());
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m[i * n + k]) > std::abs(m[piv * n + k])) piv = i;
    if (m[piv * n + k] == 0.0) return 0.0;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m[k * n + j], m[piv * n + j]);
      det = -det;
    }
    det *= m[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m[i * n + k] / m[k * n + k];
      for (std::size_t j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
    }
  }
  return det;
}

Spectrum eigenvalues(const Matrix& m) {
  require_square(m, "eigenvalues need a square matrix");
  const std::size_t n = m.rows();
  if (n > 32) throw Error(ErrorKind::InvalidArgument, "eigenvalues supports n <= 32");
  if (n == 0) return {};
  std::vector<double> h(m.entries().begin(), m.entries().end());
  balance(h, n);
  householder_hessenberg(h, n);
  Spectrum s = hessenberg_qr(h, n);
  for (Complex& z : s)
    if (std::abs(z.imag()) < 1e-10) z = {z.real(), 0.0};
  std::sort(s.begin(), s.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return s;
}

double spectral_abscissa(const Spectrum& s) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Complex& z : s) best = std::max(best, z.real());
  return best;
}

bool is_hurwitz(const Spectrum& s, double margin) { return s.empty() || spectral_abscissa(s) < -margin; }

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  require_square(a, "solve_lyapunov needs a square matrix");
  const std::size_t n = a.rows();
  if (q.rows() != n || q.cols() != n) throw Error(ErrorKind::DimensionMismatch, "lyapunov q shape");
  if (!is_hurwitz(eigenvalues(a))) throw Error(ErrorKind::NotHurwitz, "lyapunov operator not Hurwitz");

  const std::size_t nn = n * n;
  std::vector<double> k(nn * nn, 0.0);
  std::vector<double> rhs(nn);
  // Equation (i,j): Σ_k a(k,i) X(k,j) + Σ_k X(i,k) a(k,j) = -q(i,j)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t row = i * n + j;
      for (std::size_t kk = 0; kk < n; ++kk) {
        k[row * nn + kk * n + j] += a(kk, i);
        k[row * nn + i * n + kk] += a(kk, j);
      }
      rhs[row] = -q(i, j);
    }
  lu_solve_in_place(k, rhs, nn, 1);
  Matrix x(n, n, std::move(rhs));
  Matrix sym = x;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sym(i, j) = 0.5 * (x(i, j) + x(j, i));
  return sym;
}

void LqrProblem::validate() const {
  const std::size_t n = A.rows();
  if (!A.square()) throw Error(ErrorKind::NonSquare, "LQR A must be square");
  if (B.rows() != n || B.cols() != 1) throw Error(ErrorKind::DimensionMismatch, "LQR B must be n×1");
  if (Q.rows() != n || Q.cols() != n) throw Error(ErrorKind::DimensionMismatch, "LQR Q must be n×n");
  if (!(R > 0.0)) throw Error(ErrorKind::InvalidArgument, "LQR R must be positive");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(Q(i, j) - Q(j, i)) > 1e-12 * std::max(1.0, Q.max_abs()))
        throw Error(ErrorKind::InvalidArgument, "LQR Q must be symmetric");
}

double care_residual(const LqrProblem& p, const Matrix& x) {
  const Matrix at = p.A.transpose();
  const Matrix bt_x = p.B.transpose() * x;
  Matrix res = at * x + x * p.A - (bt_x.transpose() * bt_x) * (1.0 / p.R) + p.Q;
  return res.norm_inf();
}

CareSolution solve_care(const LqrProblem& p) {
  p.validate();
  const std::size_t n = p.A.rows();
  const Matrix bt = p.B.transpose();

  auto closed_loop = [&](const Matrix& k) { return p.A - p.B * k; };

  Matrix gain(1, n);
  if (!is_hurwitz(eigenvalues(p.A))) {
    // Bass-type pole pushing: with a = A + βI and -a Hurwitz, Z solves
    // aZ + Zaᵀ = 2BBᵀ and K₀ = c·BᵀZ⁻¹.
    double radius = 0.0;
    for (const Complex& z : eigenvalues(p.A)) radius = std::max(radius, std::abs(z.real()));
    const double shift = radius + 1.0;
    const Matrix shifted = p.A + Matrix::identity(n) * shift;
    const Matrix bbt = p.B * bt * 2.0;
    Matrix z0;
    try {
      z0 = solve_lyapunov((shifted * -1.0).transpose(), bbt);
    } catch (const Error&) {
      throw Error(ErrorKind::NoStabilizingInit, "shifted Lyapunov solve failed");
    }
    Matrix x0;
    try {
      x0 = inverse(z0);
    } catch (const Error&) {
      throw Error(ErrorKind::NoStabilizingInit, "(A,B) not controllable: Gramian-like solution singular");
    }
    bool found = false;
    for (double c : {1.0, 10.0, 100.0, 1000.0}) {
      Matrix k = bt * x0 * c;
      if (is_hurwitz(eigenvalues(closed_loop(k)))) {
        gain = k;
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorKind::NoStabilizingInit, "pole-pushing initialization did not stabilize (A,B)");
  }

  CareSolution sol;
  Matrix x(n, n);
  for (int it = 1; it <= 200; ++it) {
    const Matrix acl = closed_loop(gain);
    const Matrix rhs = p.Q + gain.transpose() * gain * p.R;
    x = solve_lyapunov(acl, rhs);
    gain = bt * x * (1.0 / p.R);
    const double res = care_residual(p, x);
    const double scale = std::max(1.0, p.Q.norm_inf());
    sol.iterations = it;
    sol.residual = res;
    if (res < 1e-9 * scale) break;
    if (it == 200) throw Error(ErrorKind::NotConverged, "Newton-Kleinman exceeded 200 iterations");
  }
  sol.X = x;
  sol.gain = gain;
  sol.closed_loop_spectrum = eigenvalues(closed_loop(gain));
  return sol;
}

}  // namespace lurelab
