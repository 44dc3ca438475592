#include <doctest.h>

#include <random>

#include "lurelab/localize.hpp"

using namespace lurelab;

namespace {

// ẍ + ẋ + x = 2·sat(ẋ): negative damping near rest, bounded by the saturation.
LureSystem rayleigh_like() {
  LureSystem sys{Matrix{{0, 1}, {-1, -1}}, {0, 2}, {0, 1}, Nonlinearity::saturation(1.0), {}};
  sys.validate();
  return sys;
}

// Rayleigh oscillator ẍ − ẋ + x + ẋ³ = 0 in Lur'e form.
LureSystem rayleigh() {
  LureSystem sys{Matrix{{0, 1}, {-1, 1}}, {0, -1}, {0, 1}, Nonlinearity::cubic(0.0, 1.0), {}};
  sys.validate();
  return sys;
}

}  // namespace

TEST_CASE("schedules") {
  ContinuationSchedule inc;
  inc.m = 4;
  CHECK(inc.epsilon(1) == 0.25);
  CHECK(inc.epsilon(4) == 1.0);
  ContinuationSchedule dec = inc;
  dec.direction = ScheduleDirection::Decreasing;
  CHECK(dec.epsilon(1) == 4.0);
  CHECK(dec.epsilon(4) == 1.0);
  inc.m = 0;
  CHECK_THROWS(inc.validate());
}

TEST_CASE("final step integrates the original system") {
  LureSystem sys = rayleigh_like();
  ContinuationSchedule sched;
  sched.k = 0.37;
  const VectorField f = continuation_field(sys, sched, sched.epsilon(sched.m));
  std::mt19937 rng(2);
  std::normal_distribution<double> nd(0.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vec x{nd(rng), nd(rng)}, a(2), b(2);
    f(0.0, x, a);
    sys.rhs(x, b);
    worst = std::max({worst, std::abs(a[0] - b[0]), std::abs(a[1] - b[1])});
  }
  CHECK(worst == 0.0);
}

TEST_CASE("linear Hurwitz system converges at every step") {
  LureSystem sys{Matrix{{0, 1}, {-2, -1}}, {0, 1}, {1, 0}, Nonlinearity::cubic(0.0, 0.0), {}};
  sys.validate();
  ContinuationSchedule sched;
  sched.mode = EpsilonMode::ScalePsi;
  ContinuationReport rep = continue_localization(sys, Vec{1.0, 0.0}, sched);
  CHECK(rep.outcome == ContinuationOutcome::AllConvergedToEquilibrium);
  CHECK(rep.failed_step == 1);
}

TEST_CASE("continuation localizes the Rayleigh cycle") {
  LureSystem sys = rayleigh();
  for (auto dir : {ScheduleDirection::Increasing, ScheduleDirection::Decreasing}) {
    ContinuationSchedule sched;
    sched.mode = EpsilonMode::ScalePsi;
    sched.direction = dir;
    sched.m = 5;
    ContinuationReport rep = continue_localization(sys, Vec{0.0, 0.5}, sched);
    REQUIRE(rep.outcome == ContinuationOutcome::Localized);
    REQUIRE(rep.steps.size() == 5);
    for (std::size_t j = 1; j < rep.steps.size(); ++j) CHECK(rep.steps[j].start == rep.steps[j - 1].end);
    CHECK(rep.cycle->period > 0.0);
  }
}
