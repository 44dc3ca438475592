#pragma once

#include <cmath>
#include <istream>
#include <memory>
#include <string>
#include <vector>

#include "lurelab/actuator.hpp"
#include "lurelab/linalg.hpp"
#include "lurelab/lure_system.hpp"
#include "lurelab/sim.hpp"
#include "lurelab/transfer_function.hpp"

namespace lurelab {

// ---------------------------------------------------------------- AoA loop

struct AoAParams {
  double Y_alpha = 0.47;
  double Y_delta = 0.16;
  double M_alpha = 0.82;
  double M_q = -0.43;
  double M_delta = -4.4;
  double K_alpha = 0.35;
  double K_cw = 1.0;  // multiplies a wheel input that is held at zero
  ActuatorParams actuator{20.0, 0.6, 10.0 / 57.3};

  bool weathercock_unstable() const { return M_alpha > 0.0; }
  void validate() const;
  bool operator==(const AoAParams&) const = default;
};

/// x = (σ, δ_e, α, q); ψ is the rate saturation of the actuator.
LureSystem build_aoa(const AoAParams& p);

// ------------------------------------------------------------ pilot loop

struct PioParams {
  double K_p = 1.8;
  double T_L = 0.6;
  double T_I = 0.2;
  double tau_e = 0.2;
  // Aircraft pitch response: gain·(s − z1)(s − z2) / ((s − p1)(s − p2)(s² + quad_b·s + quad_c)).
  double aircraft_gain = 3.48;
  double aircraft_zero1 = -0.883;
  double aircraft_zero2 = -0.0292;
  double aircraft_pole1 = -0.3516;
  double aircraft_pole2 = -0.02845;
  double aircraft_quad_b = 1.68;
  double aircraft_quad_c = 5.29;
  ActuatorParams actuator{50.0, 0.6, 15.0 / 57.3};

  void validate() const;
  bool operator==(const PioParams&) const = default;
};

RationalTF pio_aircraft_tf(const PioParams& p);
/// K_p(T_L s + 1)/(T_I s + 1) with the (1,1) Padé delay.
RationalTF pio_pilot_tf(const PioParams& p);
/// Pilot × aircraft, from elevator deflection to pilot command (before the Δθ = −θ sign).
RationalTF pio_open_loop_tf(const PioParams& p);

/// x = (σ, z1..z_m, δ_e) with z the companion state of the open loop. For the
/// default parameters the result is cross-checked against the published
/// 8×8 matrices (RealizationMismatch on failure).
LureSystem build_pio(const PioParams& p);

/// Published 8×8 fixture. `corrected` flips q8 from −1 to +1: with δ_e' = ψ(σ)
/// the printed sign destabilizes the origin.
LureSystem pio_fixture(bool corrected = true);

struct PioFixtureCheck {
  double max_response_error = 0.0;  // relative, over 16 log-spaced frequencies
  double max_entry_error = 0.0;     // relative, over entries the fixture prints
};
PioFixtureCheck compare_with_pio_fixture(const LureSystem& sys);

// ---------------------------------------------------------------- flutter

struct FlutterParams {
  double a = -0.6719;
  double b = 0.1905;
  double c_alpha = 0.036;
  double c_h = 27.43;
  double c_l_alpha = 6.757;
  double c_l_beta = 3.358;
  double c_l_gamma = -0.1566;
  double c_m_alpha = 0.0;
  double c_m_beta = -0.6719;
  double c_m_gamma = -0.1005;
  double m_t = 15.57;
  double m_w = 4.34;
  double s_p = 0.5945;
  double rho = 1.225;
  double k1 = 12.77;
  double k2 = 1003.0;
  double k_h = 2844.4;
  double U = 19.0625;
  /// Divide the state-equation coefficients by m_t·I_α − (m_w x_α b)².
  bool determinant_normalized = false;
  ActuatorParams actuator{50.0, 0.6, 8.73, 0.0873};

  double x_alpha() const { return -(0.0998 + a); }
  double I_alpha() const { return m_w * x_alpha() * x_alpha() * b * b + 0.009039; }
  void validate() const;
  bool operator==(const FlutterParams&) const = default;
};

struct FlutterDerived {
  double x_alpha = 0, I_alpha = 0;
  double c1 = 0, c2 = 0;
  double c_m_alpha_eff = 0, c_m_beta_eff = 0, c_m_gamma_eff = 0;
  double c_alpha1 = 0, c_alpha_nonl1 = 0, c_alpha_dot1 = 0, c_h1 = 0, c_h_dot1 = 0, c_beta1 = 0, c_gamma1 = 0;
  double c_alpha2 = 0, c_alpha_nonl2 = 0, c_alpha_dot2 = 0, c_h2 = 0, c_h_dot2 = 0, c_beta2 = 0, c_gamma2 = 0;
};

FlutterDerived flutter_derive(const FlutterParams& p);

/// State (α, α̇, h, ḣ); cubic stiffness included.
void flutter_rhs(std::span<const double> x, double beta, double gamma, const FlutterDerived& d, std::span<double> dx);

/// Linearization at the origin: ẋ = A x + b β.
struct FlutterLinear {
  Matrix A;
  Matrix B;  // 4×1
};
FlutterLinear flutter_linearization(const FlutterDerived& d);

struct FlutterControl {
  double q1 = 1.0, q2 = 0.01, q3 = 1.0, q4 = 2e-3;
  double R = 0.5;
  /// User gain; NaN entries mean "use the LQR gain".
  double k1 = NAN, k2 = NAN, k3 = NAN, k4 = NAN;
  bool operator==(const FlutterControl&) const = default;

  bool user_gain() const { return !std::isnan(k1); }
};

CareSolution flutter_lqr(const FlutterDerived& d, const FlutterControl& c);
/// User gain when given, LQR otherwise.
Vec flutter_gain(const FlutterDerived& d, const FlutterControl& c);

VectorField build_flutter_free(const FlutterParams& p);
/// State (α, α̇, h, ḣ, β, r): β is the actuator position state and r its
/// rate state; u = −K·(α, α̇, h, ḣ) drives the limited actuator.
VectorField build_flutter_closed_loop(const FlutterParams& p, std::span<const double> gain);

// ---------------------------------------------------------------- Fitts

/// s²/(((s + 0.03)² + 0.09²)((s + 0.03)² + 1.1²)) closed through ψ.
LureSystem build_fitts(const Nonlinearity& psi = Nonlinearity::sign());

// ------------------------------------------------------ parameter files

struct ParamAssignment {
  std::string key;  // "section.name"
  double value = 0.0;
  int line = 0;
};

/// `[section]` headers, `key = value` lines, `#` or `;` comments. Values are
/// numbers, `inf`, `true` or `false`. Throws ParseError.
std::vector<ParamAssignment> parse_param_text(std::istream& in);
/// One `key=value` override; the key may omit the section when it is unambiguous.
ParamAssignment parse_override(const std::string& text);

// ---------------------------------------------------------- scenarios

inline const std::vector<std::string> kScenarioNames{"aoa", "pio", "flutter", "flutter-free", "fitts"};

/// Every tunable of every scenario; sections are aoa, pio, aircraft, flutter,
/// control, run and one actuator section per scenario.
struct ScenarioConfig {
  AoAParams aoa;
  PioParams pio;
  FlutterParams flutter;
  FlutterControl control;
  double alpha0_deg = 0.1;  // flutter initial pitch

  bool operator==(const ScenarioConfig&) const = default;
};

struct ParamEntry {
  std::string key;
  double value;
};

/// Resolved parameters relevant to `scenario`, in a fixed order.
std::vector<ParamEntry> scenario_params(const ScenarioConfig& cfg, const std::string& scenario);
/// Applies assignments; unknown keys (for this scenario) are ParseError.
void apply_params(ScenarioConfig& cfg, const std::string& scenario, const std::vector<ParamAssignment>& assignments);

struct Scenario {
  std::string name;
  std::size_t dim = 0;
  std::vector<std::string> labels;
  VectorField field;
  Vec default_start;
  std::shared_ptr<const LureSystem> lure;  // null for the flutter fields
  std::vector<EquilibriumInfo> equilibria;
  Matrix jacobian_at_origin;
  Vec gain;  // flutter closed loop only
};

Scenario make_scenario(const std::string& name, const ScenarioConfig& cfg);

}  // namespace lurelab
