#include <doctest.h>

#include <random>
#include <sstream>

#include "lurelab/error.hpp"
#include "lurelab/scenarios.hpp"

using namespace lurelab;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Vec eval(const VectorField& f, const Vec& x) {
  Vec dx(x.size());
  f(0.0, x, dx);
  return dx;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("angle-of-attack loop matrices") {
  const AoAParams p;
  CHECK(p.weathercock_unstable());
  const LureSystem sys = build_aoa(p);
  const Matrix ref{{-100, -400, 140, 0}, {0, 0, 0, 0}, {0, -0.16, -0.47, 1}, {0, -4.4, 0.82, -0.43}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(sys.P(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-14));
  CHECK(sys.q == Vec{76, 1, 0, 0});
  CHECK(sys.r == Vec{1, 0, 0, 0});
  CHECK(sys.psi.level() == doctest::Approx(10 / 57.3));

  AoAParams open = p;
  open.K_alpha = 0.0;
  CHECK(build_aoa(open).P(0, 2) == 0.0);

  AoAParams limited = p;
  limited.actuator.mag_limit = 0.3;
  CHECK(kind_of([&] { build_aoa(limited); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("pilot loop realization") {
  const LureSystem sys = build_pio(PioParams{});
  REQUIRE(sys.dim() == 8);
  CHECK(sys.q == Vec{40, 0, 0, 0, 0, 0, 0, 1});
  CHECK(sys.r == Vec{1, 0, 0, 0, 0, 0, 0, 0});
  const PioFixtureCheck chk = compare_with_pio_fixture(sys);
  CHECK(chk.max_entry_error < 5e-3);
  CHECK(chk.max_response_error < 2e-2);
  CHECK(is_hurwitz(eigenvalues(rank_one_update(sys.P, 1.0, sys.q, sys.r))));

  // The printed q8 = −1 makes the origin unstable, the corrected fixture does not.
  const LureSystem printed = pio_fixture(false), fixed = pio_fixture(true);
  CHECK_FALSE(is_hurwitz(eigenvalues(rank_one_update(printed.P, 1.0, printed.q, printed.r))));
  CHECK(is_hurwitz(eigenvalues(rank_one_update(fixed.P, 1.0, fixed.q, fixed.r))));

  PioParams no_delay;
  no_delay.tau_e = 0.0;
  CHECK(build_pio(no_delay).dim() == 7);

  PioParams unit;
  unit.K_p = 1.0;
  CHECK(pio_open_loop_tf(unit).zpk_gain() == doctest::Approx(-10.428).epsilon(5e-3));

  LureSystem off = sys;
  off.P(0, 3) *= 1.1;
  CHECK(compare_with_pio_fixture(off).max_entry_error > 5e-2);

  PioParams bad;
  bad.tau_e = -0.1;
  CHECK(kind_of([&] { build_pio(bad); }) == ErrorKind::NegativeDelay);
}

TEST_CASE("flutter coefficients") {
  const FlutterDerived d = flutter_derive(FlutterParams{});
  const std::pair<double, double> table[] = {
      {d.x_alpha, 0.5721},          {d.I_alpha, 0.0606},          {d.c1, 50.4130},           {d.c2, 9.6037},
      {d.c_m_alpha_eff, -1.1615},   {d.c_m_beta_eff, -1.9210},    {d.c_m_gamma_eff, -0.1741}, {d.c_alpha1, -211.39},
      {d.c_alpha_dot1, -0.7076},    {d.c_h1, 1345.4},             {d.c_h_dot1, 12.3153},     {d.c_beta1, -207.1799},
      {d.c_gamma1, -29.7643},       {d.c_alpha2, -9.3225},        {d.c_alpha_dot2, -0.1629}, {d.c_h2, -172.3376},
      {d.c_h_dot2, -2.4678},        {d.c_beta2, -1.5305},         {d.c_gamma2, 1.2691}};
  for (const auto& [got, want] : table) CHECK(rel(got, want) < 5e-3);
  // Cubic terms follow k2 = 1003: −m_t·k2 and m_w·x_α·b·k2.
  CHECK(d.c_alpha_nonl1 == doctest::Approx(-15.57 * 1003).epsilon(1e-12));
  CHECK(d.c_alpha_nonl2 == doctest::Approx(4.34 * 0.5721 * 0.1905 * 1003).epsilon(1e-12));

  FlutterParams centered;
  centered.a = -0.5;
  centered.c_m_alpha = 0.0;
  CHECK(flutter_derive(centered).c_m_alpha_eff == 0.0);

  FlutterParams norm;
  norm.determinant_normalized = true;
  const FlutterDerived dn = flutter_derive(norm);
  const double mxb = 4.34 * d.x_alpha * 0.1905;
  const double det = 15.57 * d.I_alpha - mxb * mxb;
  CHECK(dn.c_h2 == doctest::Approx(d.c_h2 / det).epsilon(1e-12));
  CHECK(dn.c_beta1 == doctest::Approx(d.c_beta1 / det).epsilon(1e-12));
}

TEST_CASE("flutter state equations") {
  FlutterDerived t;
  t.c_alpha1 = -211.39;
  t.c_alpha_nonl1 = -778.5;
  Vec dx(4);
  flutter_rhs(Vec{0.1, 0, 0, 0}, 0.0, 0.0, t, dx);
  CHECK(dx[1] == doctest::Approx(-21.9175).epsilon(1e-12));

  const FlutterDerived d = flutter_derive(FlutterParams{});
  flutter_rhs(Vec(4, 0.0), 0.0, 0.0, d, dx);
  CHECK(dx == Vec(4, 0.0));

  const Spectrum ev = eigenvalues(flutter_linearization(d).A);
  const Complex want[] = {{3.05, 15}, {3.05, -15}, {-4.63, 13.5}, {-4.63, -13.5}};
  for (const Complex& w : want) {
    bool hit = false;
    for (const Complex& e : ev) hit |= rel(e.real(), w.real()) < 0.02 && rel(e.imag(), w.imag()) < 0.02;
    CHECK(hit);
  }
}

TEST_CASE("flutter closed loop") {
  const FlutterParams p;
  const Vec zero(4, 0.0);
  const VectorField open = build_flutter_closed_loop(p, zero);
  const VectorField free = build_flutter_free(p);
  std::mt19937 rng(3);
  std::normal_distribution<double> nd(0.0, 0.1);
  for (int i = 0; i < 20; ++i) {
    Vec x{nd(rng), nd(rng), nd(rng), nd(rng), 0.0, 0.0};
    const Vec a = eval(open, x), b = eval(free, Vec(x.begin(), x.begin() + 4));
    for (std::size_t k = 0; k < 4; ++k) CHECK(a[k] == b[k]);
    CHECK(a[4] == 0.0);
    CHECK(a[5] == 0.0);
  }
  FlutterControl user;
  user.k1 = 1;
  user.k2 = 2;
  user.k3 = 3;
  user.k4 = 4;
  CHECK(flutter_gain(flutter_derive(p), user) == Vec{1, 2, 3, 4});
  CHECK(kind_of([&] { build_flutter_closed_loop(p, Vec{1, 2}); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("counterexample with an infinite linear sector") {
  const LureSystem sys = build_fitts();
  const RationalTF w = lure_to_tf(sys);
  for (const Complex& pole : w.poles()) CHECK(pole.real() == doctest::Approx(-0.03).epsilon(1e-9));
  CHECK(std::abs(tf_eval(w, Complex(0, 0))) < 1e-14);
  for (double k : {0.0, 1.0, 10.0, 100.0}) CHECK(is_hurwitz(eigenvalues(rank_one_update(sys.P, k, sys.q, sys.r))));
}

TEST_CASE("scenario fields are pure and vanish at the origin") {
  const ScenarioConfig cfg;
  std::mt19937 rng(9);
  std::normal_distribution<double> nd(0.0, 0.2);
  for (const std::string& name : kScenarioNames) {
    const Scenario a = make_scenario(name, cfg), b = make_scenario(name, cfg);
    CHECK(a.dim == a.labels.size());
    CHECK(a.default_start.size() == a.dim);
    const Vec at0 = eval(a.field, Vec(a.dim, 0.0));
    for (double v : at0) CHECK(v == 0.0);
    for (int i = 0; i < 5; ++i) {
      Vec x(a.dim);
      for (double& v : x) v = nd(rng);
      CHECK(eval(a.field, x) == eval(b.field, x));
    }
  }
  CHECK(make_scenario("flutter", cfg).equilibria.front().stable);
  CHECK_FALSE(make_scenario("flutter-free", cfg).equilibria.front().stable);
  CHECK(make_scenario("pio", cfg).equilibria.front().stable);
  CHECK(kind_of([&] { make_scenario("nope", cfg); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("parameter text") {
  std::istringstream in(
      "# comment\n"
      "[pio]\n"
      "K_p = 2.5   ; trailing\n"
      "\n"
      "[actuator]\n"
      "rate_limit = inf\n"
      "damping_includes_omega = false\n");
  const auto as = parse_param_text(in);
  REQUIRE(as.size() == 3);
  CHECK(as[0].key == "pio.K_p");
  CHECK(as[0].value == 2.5);
  CHECK(as[0].line == 3);
  CHECK(std::isinf(as[1].value));
  CHECK(as[2].value == 0.0);

  ScenarioConfig cfg;
  apply_params(cfg, "pio", as);
  CHECK(cfg.pio.K_p == 2.5);
  CHECK(std::isinf(cfg.pio.actuator.rate_limit));
  CHECK_FALSE(cfg.pio.actuator.damping_includes_omega);
  CHECK(cfg.aoa == AoAParams{});

  auto bad = [](const std::string& text) {
    std::istringstream s(text);
    return kind_of([&] { parse_param_text(s); });
  };
  CHECK(bad("[pio\n") == ErrorKind::ParseError);
  CHECK(bad("K_p 2\n") == ErrorKind::ParseError);
  CHECK(bad("K_p = 2x\n") == ErrorKind::ParseError);
  CHECK(bad("K_p = nan\n") == ErrorKind::ParseError);
  CHECK(bad("K_p =\n") == ErrorKind::ParseError);

  ScenarioConfig c2;
  CHECK(kind_of([&] { apply_params(c2, "pio", {{"pio.K_q", 1.0, 4}}); }) == ErrorKind::ParseError);
  CHECK(kind_of([&] { apply_params(c2, "aoa", {{"pio.K_p", 1.0, 0}}); }) == ErrorKind::ParseError);
  CHECK(kind_of([&] { apply_params(c2, "flutter", {parse_override("k1=3")}); }) == ErrorKind::ParseError);
  CHECK(kind_of([&] { apply_params(c2, "aoa", {{"actuator.damping_includes_omega", 0.5, 0}}); }) ==
        ErrorKind::ParseError);
  CHECK(kind_of([&] { parse_override("alpha0_deg"); }) == ErrorKind::ParseError);
}

TEST_CASE("overrides and parameter listing") {
  ScenarioConfig cfg;
  apply_params(cfg, "flutter", {parse_override("alpha0_deg=8"), parse_override("control.k1 = -1")});
  CHECK(cfg.alpha0_deg == 8.0);
  CHECK(cfg.control.k1 == -1.0);
  CHECK(make_scenario("flutter-free", cfg).default_start[0] == doctest::Approx(8 * M_PI / 180));

  for (const std::string& name : kScenarioNames) {
    ScenarioConfig base;
    base.aoa.M_q = -0.5;
    base.flutter.U = 18.0;
    std::vector<ParamAssignment> as;
    for (const ParamEntry& e : scenario_params(base, name)) as.push_back({e.key, e.value, 0});
    ScenarioConfig back;
    apply_params(back, name, as);
    const auto p1 = scenario_params(base, name), p2 = scenario_params(back, name);
    REQUIRE(p1.size() == p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
      CHECK(p1[i].key == p2[i].key);
      CHECK((p1[i].value == p2[i].value || (std::isnan(p1[i].value) && std::isnan(p2[i].value))));
    }
  }
}
