#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace lurelab {

/// Clamp of x to [−level, level]; level may be +∞.
double sat(double x, double level);

struct ActuatorParams {
  double omega_act = 20.0;
  double xi_act = 0.6;
  double rate_limit = std::numeric_limits<double>::infinity();
  double mag_limit = std::numeric_limits<double>::infinity();
  double lambda = 100.0;
  /// Damping term −2ξω·ν (true) or −2ξ·ν (false).
  bool damping_includes_omega = true;

  void validate() const;
  bool operator==(const ActuatorParams&) const = default;
};

struct ActuatorState {
  double sigma1 = 0.0;  // pre-saturation rate state
  double sigma2 = 0.0;  // pre-saturation position state

  double nu(const ActuatorParams& p) const { return sat(sigma1, p.rate_limit); }
  double delta(const ActuatorParams& p) const { return sat(sigma2, p.mag_limit); }
};

/// Second-order actuator with rate and magnitude limits, smoothed with gain λ:
///   σ1' = ω²(u − δ) − 2ξω·ν − λ(σ1 − ν),  σ2' = ν − λ(σ2 − δ).
ActuatorState actuator_rhs(const ActuatorState& s, double u, const ActuatorParams& p);

/// x − λ(σ − sat(σ, ybar)); the unit's output is sat(σ, ybar).
double limited_integrator_smooth_rhs(double sigma, double x, double ybar, double lambda);

struct SampledSignal {
  std::vector<double> t;
  std::vector<double> y;

  /// Linear interpolation; clamps outside the sampled range.
  double at(double time) const;
};

/// ẏ = 0 while |y| ≥ ybar and x·y > 0, ẏ = x otherwise. Fixed-step RK4; rail
/// hits and releases are located by bisection to 1e-12 s and the state is
/// clamped onto the rail.
SampledSignal limited_integrator_exact(const std::function<double(double)>& x, double ybar, double y0, double t_end,
                                       double h = 1e-3);

/// Same unit in smoothed form, integrated with fixed-step RK4; returns sat(σ).
SampledSignal limited_integrator_smooth(const std::function<double(double)>& x, double ybar, double y0, double lambda,
                                        double t_end, double h = 1e-4);

}  // namespace lurelab
