#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lurelab/error.hpp"
#include "lurelab/linalg.hpp"
#include "lurelab/sim.hpp"
#include "oracles.hpp"

using namespace lurelab;

namespace {

VectorField van_der_pol(double mu) {
  return [mu](double, std::span<const double> x, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = mu * (1 - x[0] * x[0]) * x[1] - x[0];
  };
}

// Stable origin, repelling circle r = 1, attracting circle r = 2.
VectorField nested_cycles() {
  return [](double, std::span<const double> x, std::span<double> dx) {
    const double r = std::hypot(x[0], x[1]);
    const double g = -(r - 1) * (r - 2);
    dx[0] = g * x[0] - x[1];
    dx[1] = g * x[1] + x[0];
  };
}

// Period from upward zero crossings of x1 on a fine fixed-step RK4 run.
double reference_vdp_period() {
  const double h = 1e-5;
  Vec x{2.0, 0.0};
  auto f = [](const Vec& s, Vec& d) {
    d[0] = s[1];
    d[1] = (1 - s[0] * s[0]) * s[1] - s[0];
  };
  std::vector<double> ups;
  double t = 0.0;
  while (t < 60.0) {
    Vec y = oracle::rk4(f, x, h, h);
    if (x[0] < 0.0 && y[0] >= 0.0) ups.push_back(t + h * (-x[0]) / (y[0] - x[0]));
    x = y;
    t += h;
  }
  return (ups.back() - ups[ups.size() - 4]) / 3.0;
}

}  // namespace

TEST_CASE("scalar decay and rotation") {
  Trajectory tr = integrate([](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; }, Vec{1.0}, 0.0,
                            1.0);
  CHECK(std::abs(tr.states.back()[0] - std::exp(-1.0)) < 1e-8);
  CHECK(tr.times.back() == 1.0);
  CHECK(std::abs(tr.at(0.5)[0] - std::exp(-0.5)) < 1e-8);

  Trajectory rot = integrate(
      [](double, std::span<const double> x, std::span<double> dx) {
        dx[0] = -x[1];
        dx[1] = x[0];
      },
      Vec{1.0, 0.0}, 0.0, 2 * M_PI);
  CHECK(std::abs(rot.states.back()[0] - 1.0) < 1e-7);
  CHECK(std::abs(rot.states.back()[1]) < 1e-7);
  for (std::size_t i = 1; i < rot.times.size(); ++i) CHECK(rot.times[i] > rot.times[i - 1]);
}

TEST_CASE("linear flow matches the matrix exponential") {
  std::mt19937 rng(17);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 3; ++trial) {
    Matrix a(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) a(i, j) = nd(rng);
    const double shift = spectral_abscissa(eigenvalues(a)) + 0.5;
    for (std::size_t i = 0; i < 4; ++i) a(i, i) -= shift;
    Vec x0{1.0, -0.5, 0.25, 2.0};
    Trajectory tr = integrate([&](double, std::span<const double> x, std::span<double> dx) {
      Vec y = a * x;
      std::copy(y.begin(), y.end(), dx.begin());
    }, x0, 0.0, 1.0);
    Vec ref = oracle::expm(a, 1.0) * std::span<const double>(x0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(tr.states.back()[i] - ref[i]) < 1e-7 * std::max(1.0, norm_inf(ref)));
  }
}

TEST_CASE("non-finite states are reported") {
  auto blow = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * x[0]; };
  try {
    integrate(blow, Vec{1.0}, 0.0, 2.0);
    FAIL("expected an integration failure");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::StepUnderflow || e.kind() == ErrorKind::NonFiniteState));
  }
}

TEST_CASE("step budget") {
  auto decay = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; };
  IntegratorOptions opt;
  opt.max_step = 1e-2;
  opt.max_steps = 50;
  try {
    integrate(decay, Vec{1.0}, 0.0, 10.0, opt);
    FAIL("expected the budget to run out");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotConverged);
  }
  opt.max_steps = 0;
  CHECK(integrate(decay, Vec{1.0}, 0.0, 10.0, opt).states.back()[0] == doctest::Approx(std::exp(-10.0)).epsilon(1e-6));
}

TEST_CASE("cycle detection verdicts") {
  CycleDetectOptions opt;
  opt.settle_time = 5.0;
  opt.max_time = 100.0;
  CycleDetection d = detect_limit_cycle([](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; },
                                        Vec{1.0}, opt);
  CHECK(d.verdict == CycleVerdict::ConvergedToEquilibrium);

  CycleDetection g = detect_limit_cycle([](double, std::span<const double> x, std::span<double> dx) { dx[0] = x[0]; },
                                        Vec{1.0}, opt);
  CHECK(g.verdict == CycleVerdict::Diverged);
}

TEST_CASE("Van der Pol cycle") {
  const double ref = reference_vdp_period();
  CycleDetectOptions opt;
  CycleDetection d = detect_limit_cycle(van_der_pol(1.0), Vec{2.0, 0.0}, opt);
  REQUIRE(d.verdict == CycleVerdict::CycleFound);
  const LimitCycle& lc = *d.cycle;
  CHECK(lc.period == doctest::Approx(ref).epsilon(0.005));
  CHECK(lc.orbit.size() >= 4097);
  CHECK(lc.amplitude[0] == doctest::Approx(4.0).epsilon(0.01));

  CHECK(orbit_membership(lc, lc.anchor) < 1e-6 * (1 + norm2(lc.anchor)));
  Trajectory third = integrate(van_der_pol(1.0), lc.anchor, 0.0, lc.period / 3);
  CHECK(orbit_membership(lc, third.states.back()) < 1e-6 * (1 + norm2(lc.anchor)));

  SUBCASE("a different section gives the same period") {
    CycleDetectOptions o2 = opt;
    o2.section = Section{{0.0, 1.0}, 0.5};
    CycleDetection d2 = detect_limit_cycle(van_der_pol(1.0), Vec{2.0, 0.0}, o2);
    REQUIRE(d2.verdict == CycleVerdict::CycleFound);
    CHECK(std::abs(d2.cycle->period - lc.period) < 1e-3 * lc.period);
  }
  SUBCASE("tighter tolerances barely move the period") {
    CycleDetectOptions o3 = opt;
    o3.integrator.atol *= 0.5;
    o3.integrator.rtol *= 0.5;
    CycleDetection d3 = detect_limit_cycle(van_der_pol(1.0), Vec{2.0, 0.0}, o3);
    REQUIRE(d3.verdict == CycleVerdict::CycleFound);
    CHECK(std::abs(d3.cycle->period - lc.period) < 5e-4 * lc.period);
  }
  SUBCASE("probe and classification") {
    StabilityProbe sp = probe_orbital_stability(lc, van_der_pol(1.0));
    CHECK(sp.verdict == OrbitalStability::Attracting);
    CHECK(sp.inner == ProbeOutcome::ReachesCycle);
    const std::vector<EquilibriumInfo> eqs{{Vec{0.0, 0.0}, false}};
    Classification c = classify_attractor(lc, van_der_pol(1.0), eqs);
    CHECK(c.kind == AttractorKind::SelfExcited);
  }
}

TEST_CASE("cycle around a stable equilibrium is hidden") {
  CycleDetectOptions opt;
  opt.settle_time = 10.0;
  CycleDetection d = detect_limit_cycle(nested_cycles(), Vec{2.5, 0.0}, opt);
  REQUIRE(d.verdict == CycleVerdict::CycleFound);
  CHECK(d.cycle->period == doctest::Approx(2 * M_PI).epsilon(1e-6));
  StabilityProbe sp = probe_orbital_stability(*d.cycle, nested_cycles());
  CHECK(sp.verdict == OrbitalStability::Attracting);
  CHECK(sp.inner == ProbeOutcome::ConvergesToEquilibrium);
  const Matrix j = numerical_jacobian(nested_cycles(), Vec{0.0, 0.0});
  const std::vector<EquilibriumInfo> eqs{{Vec{0.0, 0.0}, is_hurwitz(eigenvalues(j))}};
  CHECK(eqs[0].stable);
  CHECK(classify_attractor(*d.cycle, nested_cycles(), eqs).kind == AttractorKind::Hidden);
}

TEST_CASE("csv export") {
  Trajectory tr = integrate([](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; }, Vec{1.0}, 0.0,
                            0.05);
  std::ostringstream os;
  const std::vector<std::string> labels{"alpha"};
  write_csv(os, tr, labels);
  CHECK(os.str().rfind("t,alpha\n0,1\n", 0) == 0);
}
