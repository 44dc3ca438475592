#include <doctest.h>

#include <cmath>

#include "lurelab/actuator.hpp"
#include "lurelab/linalg.hpp"
#include "lurelab/sim.hpp"
#include "lurelab/transfer_function.hpp"

using namespace lurelab;

namespace {

// Fine-step reference for the exact limited integrator (ẏ depends on t only).
double reference_limited(const std::function<double(double)>& x, double ybar, double y0, double t_end, double h) {
  double y = y0, t = 0.0;
  const long steps = std::lround(t_end / h);
  for (long s = 0; s < steps; ++s, t += h) {
    if (std::abs(y) >= ybar && x(t) * y > 0.0) continue;
    y += h / 6.0 * (x(t) + 4.0 * x(t + 0.5 * h) + x(t + h));
    y = std::clamp(y, -ybar, ybar);
  }
  return y;
}

double max_smooth_error(double lambda) {
  auto x = [](double t) { return std::sin(t); };
  SampledSignal exact = limited_integrator_exact(x, 0.5, 0.0, 10.0, 1e-3);
  SampledSignal smooth = limited_integrator_smooth(x, 0.5, 0.0, lambda, 10.0, 1e-4);
  double worst = 0.0;
  for (std::size_t i = 0; i < smooth.t.size(); i += 10) worst = std::max(worst, std::abs(smooth.y[i] - exact.at(smooth.t[i])));
  return worst;
}

VectorField actuator_field(const ActuatorParams& p, double u) {
  return [p, u](double, std::span<const double> x, std::span<double> dx) {
    ActuatorState d = actuator_rhs({x[0], x[1]}, u, p);
    dx[0] = d.sigma1;
    dx[1] = d.sigma2;
  };
}

}  // namespace

TEST_CASE("sat") {
  CHECK(sat(0.3, 0.5) == 0.3);
  CHECK(sat(-2.0, 0.5) == -0.5);
  CHECK(sat(10 / 57.3 + 1e-6, 10 / 57.3) == 10 / 57.3);
  CHECK(sat(1e300, INFINITY) == 1e300);
}

TEST_CASE("exact limited integrator") {
  SampledSignal ramp = limited_integrator_exact([](double) { return 1.0; }, 0.5, 0.0, 2.0);
  for (double t : {0.1, 0.4, 0.5, 0.9, 2.0}) CHECK(ramp.at(t) == doctest::Approx(std::min(t, 0.5)).epsilon(1e-9));

  SampledSignal down = limited_integrator_exact([](double) { return -1.0; }, 0.5, 0.5, 0.3);
  CHECK(down.at(0.1) == doctest::Approx(0.4));
  CHECK(down.at(0.3) == doctest::Approx(0.2));

  auto x = [](double t) { return std::sin(t); };
  SampledSignal s = limited_integrator_exact(x, 0.5, 0.0, 10.0, 1e-3);
  for (double y : s.y) CHECK(std::abs(y) <= 0.5);
  for (double t : {1.0, 3.3, 7.1, 10.0}) CHECK(std::abs(s.at(t) - reference_limited(x, 0.5, 0.0, t, 1e-5)) < 1e-6);
}

TEST_CASE("smoothed limited integrator") {
  CHECK(limited_integrator_smooth_rhs(0.2, 0.7, 0.5, 100.0) == 0.7);
  const double x = 0.3, lambda = 50.0;
  CHECK(std::abs(limited_integrator_smooth_rhs(0.5 + x / lambda, x, 0.5, lambda)) < 1e-15);
  const double e10 = max_smooth_error(10.0), e100 = max_smooth_error(100.0), e1000 = max_smooth_error(1000.0);
  CHECK(e100 < e10);
  CHECK(e1000 < e100);
  CHECK(e100 <= 0.5 * e10);
  CHECK(e1000 <= 0.5 * e100);
}

TEST_CASE("actuator equilibrium and limits") {
  ActuatorParams p;
  p.rate_limit = 15 / 57.3;
  ActuatorState d = actuator_rhs({}, 0.0, p);
  CHECK(d.sigma1 == 0.0);
  CHECK(d.sigma2 == 0.0);

  p.omega_act = 50.0;
  p.lambda = 100.0;
  Trajectory tr = integrate(actuator_field(p, 1.0), Vec{0.0, 0.0}, 0.0, 5.0);
  double max_rate = 0.0;
  for (const Vec& x : tr.states) {
    ActuatorState s{x[0], x[1]};
    max_rate = std::max(max_rate, std::abs(actuator_rhs(s, 1.0, p).sigma2));
  }
  CHECK(max_rate <= 15 / 57.3 + 1e-9);
  CHECK(tr.states.back()[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("linear regime reproduces the second-order actuator") {
  ActuatorParams p;
  p.omega_act = 20.0;
  p.xi_act = 0.6;
  p.rate_limit = 10 / 57.3;
  const double u = 0.01;
  const double wd = p.omega_act * std::sqrt(1 - p.xi_act * p.xi_act);
  auto step = [&](double t) {
    return u * (1 - std::exp(-p.xi_act * p.omega_act * t) *
                        (std::cos(wd * t) + p.xi_act / std::sqrt(1 - p.xi_act * p.xi_act) * std::sin(wd * t)));
  };
  Trajectory tr = integrate(actuator_field(p, u), Vec{0.0, 0.0}, 0.0, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) worst = std::max(worst, std::abs(tr.states[i][1] - step(tr.times[i])));
  CHECK(worst / u < 1e-3);

  // The damping term without the ω factor does not give the same response.
  p.damping_includes_omega = false;
  Trajectory bad = integrate(actuator_field(p, u), Vec{0.0, 0.0}, 0.0, 1.0);
  double bad_worst = 0.0;
  for (std::size_t i = 0; i < bad.times.size(); ++i)
    bad_worst = std::max(bad_worst, std::abs(bad.states[i][1] - step(bad.times[i])));
  CHECK(bad_worst / u > 1e-2);
}

TEST_CASE("unlimited actuator frequency response") {
  ActuatorParams p;
  p.omega_act = 20.0;
  p.xi_act = 0.6;
  const Matrix a = numerical_jacobian(actuator_field(p, 0.0), Vec{0.0, 0.0});
  StateSpace ss{a, Vec{p.omega_act * p.omega_act, 0.0}, Vec{0.0, 1.0}, 0.0};
  const RationalTF ref(Polynomial({p.omega_act * p.omega_act}),
                       Polynomial({1.0, 2 * p.xi_act * p.omega_act, p.omega_act * p.omega_act}));
  for (double om : {1.0, 10.0, 50.0}) {
    const Complex s(0, om);
    CHECK(std::abs(ss_eval(ss, s) - tf_eval(ref, s)) < 1e-3 * std::abs(tf_eval(ref, s)));
  }
}
