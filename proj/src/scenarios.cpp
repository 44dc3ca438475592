#include "lurelab/scenarios.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>

#include "lurelab/error.hpp"

namespace lurelab {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive");
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be finite");
}

double damping(const ActuatorParams& a) {
  return a.damping_includes_omega ? 2.0 * a.xi_act * a.omega_act : 2.0 * a.xi_act;
}

}  // namespace

// ---------------------------------------------------------------- AoA

void AoAParams::validate() const {
  for (double v : {Y_alpha, Y_delta, M_alpha, M_q, M_delta, K_alpha, K_cw}) require_finite(v, "aircraft derivative");
  actuator.validate();
  if (std::isfinite(actuator.mag_limit))
    throw Error(ErrorKind::InvalidArgument, "the angle-of-attack loop has no position limit");
}

LureSystem build_aoa(const AoAParams& p) {
  p.validate();
  const ActuatorParams& a = p.actuator;
  const double w2 = a.omega_act * a.omega_act;
  LureSystem sys;
  sys.P = Matrix{{-a.lambda, -w2, p.K_alpha * w2, 0.0},
                 {0.0, 0.0, 0.0, 0.0},
                 {0.0, -p.Y_delta, -p.Y_alpha, 1.0},
                 {0.0, p.M_delta, p.M_alpha, p.M_q}};
  sys.q = {a.lambda - damping(a), 1.0, 0.0, 0.0};
  sys.r = {1.0, 0.0, 0.0, 0.0};
  sys.psi = Nonlinearity::saturation(a.rate_limit);
  sys.labels = {"sigma", "delta_e", "alpha", "q"};
  sys.validate();
  return sys;
}

// ---------------------------------------------------------------- PIO

void PioParams::validate() const {
  require_positive(K_p, "K_p");
  require_positive(T_L, "T_L");
  require_positive(T_I, "T_I");
  if (!(tau_e >= 0.0) || !std::isfinite(tau_e)) throw Error(ErrorKind::NegativeDelay, "tau_e must be >= 0");
  for (double v : {aircraft_gain, aircraft_zero1, aircraft_zero2, aircraft_pole1, aircraft_pole2, aircraft_quad_b,
                   aircraft_quad_c})
    require_finite(v, "aircraft coefficient");
  actuator.validate();
  if (std::isfinite(actuator.mag_limit)) throw Error(ErrorKind::InvalidArgument, "the pilot loop has no position limit");
}

RationalTF pio_aircraft_tf(const PioParams& p) {
  const Polynomial num = Polynomial({p.aircraft_gain}) * Polynomial({1.0, -p.aircraft_zero1}) *
                         Polynomial({1.0, -p.aircraft_zero2});
  const Polynomial den = Polynomial({1.0, -p.aircraft_pole1}) * Polynomial({1.0, -p.aircraft_pole2}) *
                         Polynomial({1.0, p.aircraft_quad_b, p.aircraft_quad_c});
  return {num, den};
}

RationalTF pio_pilot_tf(const PioParams& p) {
  const RationalTF lead_lag(Polynomial({p.K_p * p.T_L, p.K_p}), Polynomial({p.T_I, 1.0}));
  return p.tau_e > 0.0 ? tf_series(lead_lag, pade11(p.tau_e)) : lead_lag;
}

RationalTF pio_open_loop_tf(const PioParams& p) { return tf_series(pio_pilot_tf(p), pio_aircraft_tf(p)); }

LureSystem pio_fixture(bool corrected) {
  LureSystem sys;
  sys.P = Matrix(8, 8);
  const double row0[8] = {-100, 0, 4.69e4, -3.48e5, -1.14e6, -7.24e5, -2.02e4, -2500};
  const double row1[8] = {0, -17.1, -86.8, -194, -327, -102, -2.65, 1};
  for (std::size_t j = 0; j < 8; ++j) {
    sys.P(0, j) = row0[j];
    sys.P(1, j) = row1[j];
  }
  for (std::size_t i = 2; i < 7; ++i) sys.P(i, i - 1) = 1.0;
  sys.q = {40, 0, 0, 0, 0, 0, 0, corrected ? 1.0 : -1.0};
  sys.r = {1, 0, 0, 0, 0, 0, 0, 0};
  sys.psi = Nonlinearity::saturation(15.0 / 57.3);
  sys.validate();
  return sys;
}

PioFixtureCheck compare_with_pio_fixture(const LureSystem& sys) {
  const LureSystem fx = pio_fixture(true);
  if (sys.dim() != fx.dim()) throw Error(ErrorKind::RealizationMismatch, "dimension differs from the 8-state fixture");
  PioFixtureCheck out;
  const double scale = sys.P.norm_inf();
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      const double f = fx.P(i, j), v = sys.P(i, j);
      out.max_entry_error =
          std::max(out.max_entry_error, f != 0.0 ? std::abs(v - f) / std::abs(f) : std::abs(v) / scale);
    }
    const double f = fx.q[i], v = sys.q[i];
    out.max_entry_error = std::max(out.max_entry_error, f != 0.0 ? std::abs(v - f) / std::abs(f) : std::abs(v));
    out.max_entry_error = std::max(out.max_entry_error, std::abs(sys.r[i] - fx.r[i]));
  }
  const RationalTF w = lure_to_tf(sys), wf = lure_to_tf(fx);
  for (int k = 0; k < 16; ++k) {
    const Complex s(0.0, std::pow(10.0, -2.0 + 4.0 * k / 15.0));
    const Complex ref = tf_eval(wf, s);
    out.max_response_error = std::max(out.max_response_error, std::abs(tf_eval(w, s) - ref) / std::abs(ref));
  }
  return out;
}

LureSystem build_pio(const PioParams& p) {
  p.validate();
  const StateSpace ss = tf_realize(pio_open_loop_tf(p));
  if (ss.d != 0.0) throw Error(ErrorKind::ImproperTF, "pilot-aircraft path must be strictly proper");
  const ActuatorParams& a = p.actuator;
  const double w2 = a.omega_act * a.omega_act;
  const std::size_t m = ss.A.rows(), n = m + 2;

  LureSystem sys;
  sys.P = Matrix(n, n);
  sys.P(0, 0) = -a.lambda;
  // u = −θ-path output: σ' carries ω²(u − δ).
  for (std::size_t j = 0; j < m; ++j) sys.P(0, 1 + j) = -w2 * ss.c[j] + 0.0;
  sys.P(0, n - 1) = -w2;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) sys.P(1 + i, 1 + j) = ss.A(i, j);
    sys.P(1 + i, n - 1) = ss.b[i];
  }
  sys.q = Vec(n, 0.0);
  sys.q[0] = a.lambda - damping(a);
  sys.q[n - 1] = 1.0;
  sys.r = Vec(n, 0.0);
  sys.r[0] = 1.0;
  sys.psi = Nonlinearity::saturation(a.rate_limit);
  sys.labels.push_back("sigma");
  for (std::size_t j = 0; j < m; ++j) sys.labels.push_back("z" + std::to_string(j + 1));
  sys.labels.push_back("delta_e");
  sys.validate();

  if (p == PioParams{}) {
    const PioFixtureCheck chk = compare_with_pio_fixture(sys);
    if (chk.max_response_error > 2e-2 || chk.max_entry_error > 5e-3) {
      std::ostringstream os;
      os << "response error " << chk.max_response_error << ", entry error " << chk.max_entry_error;
      throw Error(ErrorKind::RealizationMismatch, os.str());
    }
  }
  return sys;
}

// ---------------------------------------------------------------- flutter

void FlutterParams::validate() const {
  for (double v : {a, c_l_alpha, c_l_beta, c_l_gamma, c_m_alpha, c_m_beta, c_m_gamma, k1, k2}) require_finite(v, "coefficient");
  require_positive(b, "b");
  require_positive(m_t, "m_t");
  require_positive(m_w, "m_w");
  require_positive(s_p, "s_p");
  require_positive(rho, "rho");
  require_positive(U, "U");
  require_positive(k_h, "k_h");
  if (!(c_alpha >= 0.0) || !(c_h >= 0.0)) throw Error(ErrorKind::InvalidArgument, "damping must be non-negative");
  actuator.validate();
}

FlutterDerived flutter_derive(const FlutterParams& p) {
  p.validate();
  FlutterDerived d;
  d.x_alpha = p.x_alpha();
  d.I_alpha = p.I_alpha();
  const double q = p.rho * p.U * p.U;
  d.c1 = q * p.b * p.s_p;
  d.c2 = q * p.b * p.b * p.s_p;
  d.c_m_alpha_eff = (0.5 + p.a) * p.c_l_alpha + 2.0 * p.c_m_alpha;
  d.c_m_beta_eff = (0.5 + p.a) * p.c_l_beta + 2.0 * p.c_m_beta;
  d.c_m_gamma_eff = (0.5 + p.a) * p.c_l_gamma + 2.0 * p.c_m_gamma;

  const double mxb = p.m_w * d.x_alpha * p.b;  // static imbalance
  const double arm = (0.5 - p.a) * p.b / p.U;
  const double Ia = d.I_alpha;

  d.c_alpha1 = d.c2 * p.m_t * d.c_m_alpha_eff + d.c1 * mxb * p.c_l_alpha - p.m_t * p.k1;
  d.c_alpha_nonl1 = -p.m_t * p.k2;
  d.c_alpha_dot1 = d.c2 * p.m_t * d.c_m_alpha_eff * arm + d.c1 * mxb * p.c_l_alpha * arm - p.c_alpha * p.m_t;
  d.c_h1 = p.k_h * mxb;
  d.c_h_dot1 = d.c2 * p.m_t * d.c_m_alpha_eff / p.U + d.c1 * mxb * p.c_l_alpha / p.U + p.c_h * mxb;
  d.c_beta1 = d.c2 * p.m_t * d.c_m_beta_eff + d.c1 * mxb * p.c_l_beta;
  d.c_gamma1 = d.c2 * p.m_t * d.c_m_gamma_eff + d.c1 * mxb * p.c_l_gamma;

  d.c_alpha2 = -d.c2 * mxb * d.c_m_alpha_eff - d.c1 * Ia * p.c_l_alpha + mxb * p.k1;
  d.c_alpha_nonl2 = mxb * p.k2;
  d.c_alpha_dot2 = -d.c2 * mxb * d.c_m_alpha_eff * arm - d.c1 * Ia * p.c_l_alpha * arm + p.c_alpha * mxb;
  d.c_h2 = -p.k_h * Ia;
  d.c_h_dot2 = -d.c2 * mxb * d.c_m_alpha_eff / p.U - d.c1 * Ia * p.c_l_alpha / p.U - p.c_h * Ia;
  d.c_beta2 = -d.c2 * mxb * d.c_m_beta_eff - d.c1 * Ia * p.c_l_beta;
  d.c_gamma2 = -d.c2 * mxb * d.c_m_gamma_eff - d.c1 * Ia * p.c_l_gamma;

  if (p.determinant_normalized) {
    const double det = p.m_t * Ia - mxb * mxb;
    if (!(det > 0.0)) throw Error(ErrorKind::Singular, "mass matrix is not positive definite");
    for (double* c : {&d.c_alpha1, &d.c_alpha_nonl1, &d.c_alpha_dot1, &d.c_h1, &d.c_h_dot1, &d.c_beta1, &d.c_gamma1,
                      &d.c_alpha2, &d.c_alpha_nonl2, &d.c_alpha_dot2, &d.c_h2, &d.c_h_dot2, &d.c_beta2, &d.c_gamma2})
      *c /= det;
  }
  return d;
}

void flutter_rhs(std::span<const double> x, double beta, double gamma, const FlutterDerived& d, std::span<double> dx) {
  const double a = x[0], a3 = a * a * a;
  dx[0] = x[1];
  dx[1] = d.c_alpha1 * a + d.c_alpha_nonl1 * a3 + d.c_alpha_dot1 * x[1] + d.c_h1 * x[2] + d.c_h_dot1 * x[3] +
          d.c_beta1 * beta + d.c_gamma1 * gamma;
  dx[2] = x[3];
  dx[3] = d.c_alpha2 * a + d.c_alpha_nonl2 * a3 + d.c_alpha_dot2 * x[1] + d.c_h2 * x[2] + d.c_h_dot2 * x[3] +
          d.c_beta2 * beta + d.c_gamma2 * gamma;
}

FlutterLinear flutter_linearization(const FlutterDerived& d) {
  FlutterLinear lin;
  lin.A = Matrix{{0, 1, 0, 0},
                 {d.c_alpha1, d.c_alpha_dot1, d.c_h1, d.c_h_dot1},
                 {0, 0, 0, 1},
                 {d.c_alpha2, d.c_alpha_dot2, d.c_h2, d.c_h_dot2}};
  lin.B = Matrix{{0}, {d.c_beta1}, {0}, {d.c_beta2}};
  return lin;
}

CareSolution flutter_lqr(const FlutterDerived& d, const FlutterControl& c) {
  const FlutterLinear lin = flutter_linearization(d);
  LqrProblem prob{lin.A, lin.B, Matrix(4, 4), c.R};
  prob.Q(0, 0) = c.q1;
  prob.Q(1, 1) = c.q2;
  prob.Q(2, 2) = c.q3;
  prob.Q(3, 3) = c.q4;
  return solve_care(prob);
}

Vec flutter_gain(const FlutterDerived& d, const FlutterControl& c) {
  if (c.user_gain()) {
    const Vec k{c.k1, c.k2, c.k3, c.k4};
    for (double v : k) require_finite(v, "feedback gain");
    return k;
  }
  const CareSolution sol = flutter_lqr(d, c);
  const auto g = sol.gain.row_span(0);
  return Vec(g.begin(), g.end());
}

VectorField build_flutter_free(const FlutterParams& p) {
  const FlutterDerived d = flutter_derive(p);
  return [d](double, std::span<const double> x, std::span<double> dx) { flutter_rhs(x, 0.0, 0.0, d, dx); };
}

VectorField build_flutter_closed_loop(const FlutterParams& p, std::span<const double> gain) {
  if (gain.size() != 4) throw Error(ErrorKind::DimensionMismatch, "flutter gain must have 4 entries");
  const FlutterDerived d = flutter_derive(p);
  const ActuatorParams act = p.actuator;
  const std::array<double, 4> k{gain[0], gain[1], gain[2], gain[3]};
  return [d, act, k](double, std::span<const double> x, std::span<double> dx) {
    const double u = -(k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + k[3] * x[3]);
    const ActuatorState s{x[5], x[4]};
    const ActuatorState ds = actuator_rhs(s, u, act);
    flutter_rhs(x.first(4), s.delta(act), 0.0, d, dx.first(4));
    dx[4] = ds.sigma2;
    dx[5] = ds.sigma1;
  };
}

// ---------------------------------------------------------------- Fitts

LureSystem build_fitts(const Nonlinearity& psi) {
  const Polynomial d1{1.0, 0.06, 0.03 * 0.03 + 0.09 * 0.09};
  const Polynomial d2{1.0, 0.06, 0.03 * 0.03 + 1.1 * 1.1};
  LureSystem sys = lure_from_tf(RationalTF(Polynomial({1.0, 0.0, 0.0}), d1 * d2), psi);
  sys.validate();
  return sys;
}

// ------------------------------------------------------ parameter files

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_value(const std::string& text, int line) {
  auto fail = [&](const std::string& why) -> double {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + why);
  };
  if (text.empty()) return fail("missing value");
  if (text == "true") return 1.0;
  if (text == "false") return 0.0;
  if (text == "inf" || text == "+inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double v = 0.0;
  const char* first = text.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return fail("not a number: '" + text + "'");
  if (std::isnan(v)) return fail("NaN is not a parameter value");
  return v;
}

bool valid_key(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; });
}

}  // namespace

std::vector<ParamAssignment> parse_param_text(std::istream& in) {
  std::vector<ParamAssignment> out;
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto cut = raw.find_first_of("#;");
    const std::string s = trim(std::string_view(raw).substr(0, cut));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": unterminated section");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!valid_key(section)) throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": bad section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    if (!valid_key(key)) throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": bad key '" + key + "'");
    out.push_back({section.empty() ? key : section + "." + key, parse_value(trim(std::string_view(s).substr(eq + 1)), line), line});
  }
  return out;
}

ParamAssignment parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "override '" + text + "' is not key=value");
  const std::string key = trim(std::string_view(text).substr(0, eq));
  const auto dot = key.find('.');
  const bool ok = dot == std::string::npos ? valid_key(key)
                                           : valid_key(key.substr(0, dot)) && valid_key(key.substr(dot + 1));
  if (!ok) throw Error(ErrorKind::ParseError, "bad override key '" + key + "'");
  return {key, parse_value(trim(std::string_view(text).substr(eq + 1)), 0), 0};
}

// ---------------------------------------------------------- scenarios

namespace {

struct Binding {
  std::string key;
  double* number = nullptr;
  bool* flag = nullptr;
};

void bind_actuator(std::vector<Binding>& out, ActuatorParams& a, bool with_magnitude) {
  out.push_back({"actuator.omega_act", &a.omega_act});
  out.push_back({"actuator.xi_act", &a.xi_act});
  out.push_back({"actuator.rate_limit", &a.rate_limit});
  if (with_magnitude) out.push_back({"actuator.mag_limit", &a.mag_limit});
  out.push_back({"actuator.lambda", &a.lambda});
  out.push_back({"actuator.damping_includes_omega", nullptr, &a.damping_includes_omega});
}

void bind_flutter(std::vector<Binding>& out, FlutterParams& f) {
  const std::pair<const char*, double*> table[] = {
      {"a", &f.a},           {"b", &f.b},           {"c_alpha", &f.c_alpha},     {"c_h", &f.c_h},
      {"c_l_alpha", &f.c_l_alpha}, {"c_l_beta", &f.c_l_beta}, {"c_l_gamma", &f.c_l_gamma}, {"c_m_alpha", &f.c_m_alpha},
      {"c_m_beta", &f.c_m_beta},   {"c_m_gamma", &f.c_m_gamma}, {"m_t", &f.m_t},        {"m_w", &f.m_w},
      {"s_p", &f.s_p},       {"rho", &f.rho},       {"k1", &f.k1},               {"k2", &f.k2},
      {"k_h", &f.k_h},       {"U", &f.U}};
  for (const auto& [k, v] : table) out.push_back({std::string("flutter.") + k, v});
  out.push_back({"flutter.determinant_normalized", nullptr, &f.determinant_normalized});
}

std::vector<Binding> bindings(ScenarioConfig& c, const std::string& scenario) {
  std::vector<Binding> out;
  if (scenario == "aoa") {
    AoAParams& p = c.aoa;
    out = {{"aoa.Y_alpha", &p.Y_alpha}, {"aoa.Y_delta", &p.Y_delta}, {"aoa.M_alpha", &p.M_alpha},
           {"aoa.M_q", &p.M_q},         {"aoa.M_delta", &p.M_delta}, {"aoa.K_alpha", &p.K_alpha},
           {"aoa.K_cw", &p.K_cw}};
    bind_actuator(out, p.actuator, false);
  } else if (scenario == "pio") {
    PioParams& p = c.pio;
    out = {{"pio.K_p", &p.K_p},
           {"pio.T_L", &p.T_L},
           {"pio.T_I", &p.T_I},
           {"pio.tau_e", &p.tau_e},
           {"aircraft.gain", &p.aircraft_gain},
           {"aircraft.zero1", &p.aircraft_zero1},
           {"aircraft.zero2", &p.aircraft_zero2},
           {"aircraft.pole1", &p.aircraft_pole1},
           {"aircraft.pole2", &p.aircraft_pole2},
           {"aircraft.quad_b", &p.aircraft_quad_b},
           {"aircraft.quad_c", &p.aircraft_quad_c}};
    bind_actuator(out, p.actuator, false);
  } else if (scenario == "flutter") {
    bind_flutter(out, c.flutter);
    bind_actuator(out, c.flutter.actuator, true);
    FlutterControl& k = c.control;
    for (auto [name, v] : std::initializer_list<std::pair<const char*, double*>>{
             {"q1", &k.q1}, {"q2", &k.q2}, {"q3", &k.q3}, {"q4", &k.q4}, {"R", &k.R},
             {"k1", &k.k1}, {"k2", &k.k2}, {"k3", &k.k3}, {"k4", &k.k4}})
      out.push_back({std::string("control.") + name, v});
    out.push_back({"run.alpha0_deg", &c.alpha0_deg});
  } else if (scenario == "flutter-free") {
    bind_flutter(out, c.flutter);
    out.push_back({"run.alpha0_deg", &c.alpha0_deg});
  } else if (scenario != "fitts") {
    throw Error(ErrorKind::InvalidArgument, "unknown scenario '" + scenario + "'");
  }
  return out;
}

}  // namespace

std::vector<ParamEntry> scenario_params(const ScenarioConfig& cfg, const std::string& scenario) {
  ScenarioConfig copy = cfg;
  std::vector<ParamEntry> out;
  for (const Binding& b : bindings(copy, scenario)) out.push_back({b.key, b.number ? *b.number : (*b.flag ? 1.0 : 0.0)});
  return out;
}

void apply_params(ScenarioConfig& cfg, const std::string& scenario, const std::vector<ParamAssignment>& assignments) {
  std::vector<Binding> bs = bindings(cfg, scenario);
  for (const ParamAssignment& a : assignments) {
    const std::string where = a.line > 0 ? " (line " + std::to_string(a.line) + ")" : "";
    std::vector<Binding*> hits;
    for (Binding& b : bs)
      if (b.key == a.key) hits.push_back(&b);
    if (hits.empty() && a.key.find('.') == std::string::npos)
      for (Binding& b : bs)
        if (b.key.substr(b.key.find('.') + 1) == a.key) hits.push_back(&b);
    if (hits.empty()) throw Error(ErrorKind::ParseError, "unknown key '" + a.key + "' for scenario " + scenario + where);
    if (hits.size() > 1) throw Error(ErrorKind::ParseError, "ambiguous key '" + a.key + "'" + where);
    Binding& b = *hits.front();
    if (b.flag) {
      if (a.value != 0.0 && a.value != 1.0) throw Error(ErrorKind::ParseError, "'" + a.key + "' expects true or false" + where);
      *b.flag = a.value != 0.0;
    } else {
      *b.number = a.value;
    }
  }
}

namespace {

std::vector<EquilibriumInfo> lure_equilibria(const LureSystem& sys) {
  std::vector<EquilibriumInfo> out;
  for (const Equilibrium& e : equilibria(sys)) out.push_back({e.x, e.stability == Stability::Stable});
  return out;
}

Scenario from_lure(const std::string& name, LureSystem sys) {
  Scenario sc;
  sc.name = name;
  sc.dim = sys.dim();
  sc.labels = sys.labels;
  sc.equilibria = lure_equilibria(sys);
  const double slope = sys.psi.derivative(0.0);
  if (std::isfinite(slope)) sc.jacobian_at_origin = rank_one_update(sys.P, slope, sys.q, sys.r);
  auto ptr = std::make_shared<const LureSystem>(std::move(sys));
  sc.field = [ptr](double, std::span<const double> x, std::span<double> dx) { ptr->rhs(x, dx); };
  sc.lure = ptr;
  sc.default_start = Vec(sc.dim, 0.0);
  return sc;
}

}  // namespace

Scenario make_scenario(const std::string& name, const ScenarioConfig& cfg) {
  constexpr double deg = M_PI / 180.0;
  if (name == "aoa") {
    Scenario sc = from_lure(name, build_aoa(cfg.aoa));
    sc.default_start = {-0.1745201, 0.009257612, 0.5652268, 0.9543608};
    return sc;
  }
  if (name == "pio") {
    Scenario sc = from_lure(name, build_pio(cfg.pio));
    sc.default_start.back() = 0.1;
    return sc;
  }
  if (name == "fitts") {
    Scenario sc = from_lure(name, build_fitts());
    sc.default_start[0] = 1.0;
    return sc;
  }
  require_finite(cfg.alpha0_deg, "alpha0_deg");
  if (name == "flutter-free") {
    Scenario sc;
    sc.name = name;
    sc.dim = 4;
    sc.labels = {"alpha", "alpha_dot", "h", "h_dot"};
    sc.field = build_flutter_free(cfg.flutter);
    sc.default_start = {cfg.alpha0_deg * deg, 0.0, 0.0, 0.0};
    sc.jacobian_at_origin = flutter_linearization(flutter_derive(cfg.flutter)).A;
    sc.equilibria.push_back({Vec(4, 0.0), is_hurwitz(eigenvalues(sc.jacobian_at_origin))});
    return sc;
  }
  if (name == "flutter") {
    Scenario sc;
    sc.name = name;
    sc.dim = 6;
    sc.labels = {"alpha", "alpha_dot", "h", "h_dot", "beta", "beta_rate"};
    const FlutterDerived d = flutter_derive(cfg.flutter);
    sc.gain = flutter_gain(d, cfg.control);
    sc.field = build_flutter_closed_loop(cfg.flutter, sc.gain);
    sc.default_start = {cfg.alpha0_deg * deg, 0.0, 0.0, 0.0, 0.0, 0.0};
    sc.jacobian_at_origin = numerical_jacobian(sc.field, Vec(6, 0.0));
    sc.equilibria.push_back({Vec(6, 0.0), is_hurwitz(eigenvalues(sc.jacobian_at_origin))});
    return sc;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown scenario '" + name + "'");
}

}  // namespace lurelab
