#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lurelab/lure_system.hpp"

namespace lurelab {

struct HarmonicOptions {
  double omega_min = 1e-3;
  double omega_max = 1e4;
  int omega_points = 2000;
  int amplitude_points = 2000;
  double amplitude_max_factor = 1e3;  // a_max = factor · (saturation level or 1)
};

struct FrequencyCrossing {
  double omega0 = 0.0;
  double k = 0.0;
};

struct CrossingSearch {
  std::vector<FrequencyCrossing> crossings;  // increasing omega0
  std::vector<std::string> rejected;          // pole crossings and roots with Re W ≈ 0
};

/// Positive roots of Im W(iω) = 0 with k = −1/Re W(iω0).
CrossingSearch find_omega0_k(const RationalTF& w, const HarmonicOptions& opt = {});

/// Φ(a) = ∫₀^{2π/ω0} φ(a cos ω0t) cos ω0t dt with φ(σ) = ψ(σ) − kσ, in closed form
/// for saturation, sign and cubic (quadrature otherwise).
double describing_fn(const Nonlinearity& nl, double k, double omega0, double a);

/// Same integral by composite Gauss–Legendre quadrature over the full period,
/// with panels split where a·cosθ crosses a kink of φ.
double describing_fn_quadrature(const std::function<double(double)>& phi, std::span<const double> kinks, double omega0,
                                double a);
double describing_fn_quadrature(const Nonlinearity& nl, double k, double omega0, double a);

struct AmplitudeRoot {
  double a0 = 0.0;
  double phi_slope = 0.0;  // Φ'(a0)
};

/// Positive roots of Φ. Throws DegenerateFlat when Φ vanishes on the whole grid
/// and NoRoot when it never changes sign.
std::vector<AmplitudeRoot> solve_amplitude(const Nonlinearity& nl, double k, double omega0,
                                           const HarmonicOptions& opt = {});

struct CanonicalForm {
  Matrix S;
  double b1 = 0.0;
  double b2 = 0.0;
  Vec b3;
  Vec c3;
  Matrix A3;
  double omega0 = 0.0;
  double k = 0.0;

  /// ‖S⁻¹P0S − blkdiag([[0,−ω0],[ω0,0]], A3)‖∞
  double block_residual(const LureSystem& sys) const;
};

/// Real basis x = S y bringing P0 = P + k q rᵀ to blkdiag([[0,−ω0],[ω0,0]], A3)
/// with rᵀS = (1, 0, c3ᵀ). Throws WrongSpectrum or NormalizationFailure.
CanonicalForm canonical_transform(const LureSystem& sys, double k, double omega0);

struct StartPoint {
  Vec x0;
  bool stability_condition = false;  // b1·Φ'(a0) < 0
};

/// x(0) = S·(a0, 0, …, 0)ᵀ. A failed stability condition is reported through
/// warn() and the flag, and the point is still returned.
StartPoint theorem1_start(const CanonicalForm& cf, const AmplitudeRoot& amp);

/// Everything the harmonic-balance stage knows about one (ω0, k) candidate.
struct HarmonicCandidate {
  FrequencyCrossing crossing;
  std::vector<AmplitudeRoot> amplitudes;
  std::optional<CanonicalForm> canonical;
  std::vector<StartPoint> starts;  // one per amplitude root when canonical is set
  std::string note;                // why the candidate is incomplete, if it is
};

/// Runs the whole chain for every crossing, in order of increasing ω0.
std::vector<HarmonicCandidate> harmonic_candidates(const LureSystem& sys, const HarmonicOptions& opt = {});

}  // namespace lurelab
