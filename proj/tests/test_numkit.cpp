#include <doctest.h>

#include <cmath>
#include <random>

#include "lurelab/error.hpp"
#include "lurelab/linalg.hpp"
#include "oracles.hpp"

using namespace lurelab;

TEST_CASE("matrix basics") {
  Matrix a{{1, 2}, {3, 4}};
  Matrix b = a.transpose();
  CHECK(b(0, 1) == 3);
  CHECK(a.trace() == 5);
  CHECK((a * Matrix::identity(2))(1, 0) == 3);
  Vec v{1.0, 1.0};
  Vec y = a * std::span<const double>(v);
  CHECK(y[0] == 3);
  CHECK(y[1] == 7);
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, NAN, 0.0, 1.0}), Error);
  CHECK_THROWS_AS(a * Matrix(3, 3), Error);
}

TEST_CASE("linear solve, inverse, determinant") {
  Matrix a{{4, -2, 1}, {-2, 4, -2}, {1, -2, 4}};
  Vec b{11, -16, 17};
  Vec x = solve_linear(a, b);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(-2.0));
  CHECK(x[2] == doctest::Approx(3.0));
  CHECK(determinant(a) == doctest::Approx(36.0));
  Matrix ai = inverse(a) * a;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(ai(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));

  Matrix s{{1, 2}, {2, 4}};
  try {
    solve_linear(s, Vec{1.0, 1.0});
    FAIL("expected Singular");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Singular);
  }
}

TEST_CASE("eigenvalues of a companion matrix with known roots") {
  // (s+1)(s+2)(s^2+2s+5): roots -1, -2, -1±2i
  Matrix c{{-5, -13, -19, -10}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}};
  Spectrum s = eigenvalues(c);
  REQUIRE(s.size() == 4);
  CHECK(s[0].real() == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(s[0].imag() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(s[1].imag() == doctest::Approx(0.0));
  CHECK(s[1].real() == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(s[2].imag() == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(s[3].real() == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(spectral_abscissa(s) == doctest::Approx(-1.0));
  CHECK(is_hurwitz(s));
  CHECK_FALSE(is_hurwitz(s, 1.5));
}

TEST_CASE("eigenvalues of random matrices satisfy det(A - lambda I) = 0") {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  for (std::size_t n : {3u, 5u, 8u, 12u}) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = nd(rng);
    Spectrum s = eigenvalues(a);
    REQUIRE(s.size() == n);
    Complex sum(0.0);
    for (const Complex& l : s) {
      sum += l;
      CHECK(oracle::min_singular_proxy(a, l) < 1e-9);
    }
    CHECK(sum.real() == doctest::Approx(a.trace()).epsilon(1e-10));
    CHECK(std::abs(sum.imag()) < 1e-10);
  }
}

TEST_CASE("Lyapunov solution has small residual") {
  Matrix a{{-1, 2, 0}, {-3, -4, 1}, {0, 0, -0.5}};
  Matrix q = Matrix::identity(3);
  Matrix x = solve_lyapunov(a, q);
  Matrix res = a.transpose() * x + x * a + q;
  CHECK(res.max_abs() < 1e-12);
  CHECK_THROWS_AS(solve_lyapunov(Matrix{{1.0}}, Matrix{{1.0}}), Error);
}

TEST_CASE("CARE: scalar closed form and double integrator") {
  // a x·2 − x² b²/R + q = 0
  const double a = 2.0, b = 0.5, q = 3.0, r = 1.5;
  LqrProblem p{Matrix{{a}}, Matrix{{b}}, Matrix{{q}}, r};
  CareSolution sol = solve_care(p);
  const double x = (a + std::sqrt(a * a + b * b * q / r)) * r / (b * b);
  CHECK(sol.X(0, 0) == doctest::Approx(x).epsilon(1e-10));
  CHECK(sol.residual < 1e-9);

  LqrProblem di{Matrix{{0, 1}, {0, 0}}, Matrix{{0}, {1}}, Matrix::identity(2), 1.0};
  CareSolution s2 = solve_care(di);
  CHECK(s2.gain(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s2.gain(0, 1) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
  CHECK(is_hurwitz(s2.closed_loop_spectrum));
}

TEST_CASE("CARE on an unstable fourth-order plant") {
  Matrix a{{0, 0, 1, 0}, {0, 0, 0, 1}, {-200, 40, -1, 0.3}, {10, -90, 0.2, -0.4}};
  Matrix b{{0}, {0}, {-20}, {3}};
  a(2, 2) = 2.0;  // negative damping
  Spectrum open = eigenvalues(a);
  REQUIRE_FALSE(is_hurwitz(open));
  LqrProblem p{a, b, Matrix::identity(4), 1.0};
  CareSolution sol = solve_care(p);
  CHECK(care_residual(p, sol.X) < 1e-8);
  CHECK(is_hurwitz(sol.closed_loop_spectrum));
  // R = 1, so the gain is BᵀX.
  Matrix k = b.transpose() * sol.X;
  for (std::size_t j = 0; j < 4; ++j) CHECK(k(0, j) == doctest::Approx(sol.gain(0, j)).epsilon(1e-12));
}
