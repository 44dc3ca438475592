#include "lurelab/actuator.hpp"

#include <algorithm>
#include <cmath>

#include "lurelab/error.hpp"

namespace lurelab {

double sat(double x, double level) {
  if (x > level) return level;
  if (x < -level) return -level;
  return x;
}

void ActuatorParams::validate() const {
  auto positive = [](double v) { return v > 0.0 && !std::isnan(v); };
  if (!positive(omega_act) || !std::isfinite(omega_act)) throw Error(ErrorKind::InvalidArgument, "omega_act must be positive");
  if (!positive(xi_act) || !std::isfinite(xi_act)) throw Error(ErrorKind::InvalidArgument, "xi_act must be positive");
  if (!positive(lambda) || !std::isfinite(lambda)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  if (!positive(rate_limit) || !positive(mag_limit)) throw Error(ErrorKind::InvalidArgument, "limits must be positive");
}

ActuatorState actuator_rhs(const ActuatorState& s, double u, const ActuatorParams& p) {
  const double nu = s.nu(p);
  const double delta = s.delta(p);
  const double damping = 2.0 * p.xi_act * (p.damping_includes_omega ? p.omega_act : 1.0);
  return {p.omega_act * p.omega_act * (u - delta) - damping * nu - p.lambda * (s.sigma1 - nu),
          nu - p.lambda * (s.sigma2 - delta)};
}

double limited_integrator_smooth_rhs(double sigma, double x, double ybar, double lambda) {
  return x - lambda * (sigma - sat(sigma, ybar));
}

double SampledSignal::at(double time) const {
  if (t.empty()) throw Error(ErrorKind::InvalidArgument, "empty signal");
  if (time <= t.front()) return y.front();
  if (time >= t.back()) return y.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const std::size_t j = static_cast<std::size_t>(it - t.begin());
  const double dt = t[j] - t[j - 1];
  if (dt <= 0.0) return y[j];
  const double a = (time - t[j - 1]) / dt;
  return y[j - 1] + a * (y[j] - y[j - 1]);
}

namespace {

// RK4 for ẏ = x(t): the update does not depend on y.
double rk4_increment(const std::function<double(double)>& x, double t, double h) {
  return h / 6.0 * (x(t) + 4.0 * x(t + 0.5 * h) + x(t + h));
}

}  // namespace

SampledSignal limited_integrator_exact(const std::function<double(double)>& x, double ybar, double y0, double t_end,
                                       double h) {
  if (!(ybar > 0.0)) throw Error(ErrorKind::InvalidArgument, "ybar must be positive");
  if (std::abs(y0) > ybar) throw Error(ErrorKind::InvalidArgument, "|y0| must not exceed ybar");
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  SampledSignal out;
  double t = 0.0, y = y0;
  auto pushing_out = [&](double time) { return std::abs(y) >= ybar && x(time) * y > 0.0; };
  bool held = pushing_out(t);
  out.t.push_back(t);
  out.y.push_back(y);
  while (t < t_end) {
    const double dt = std::min(h, t_end - t);
    if (held) {
      if (x(t + dt) * y > 0.0) {
        t += dt;
      } else {
        double lo = t, hi = t + dt;
        while (hi - lo > 1e-12) {
          const double mid = 0.5 * (lo + hi);
          if (x(mid) * y > 0.0)
            lo = mid;
          else
            hi = mid;
        }
        t = hi;
        held = false;
      }
    } else {
      const double y_new = y + rk4_increment(x, t, dt);
      if (std::abs(y_new) <= ybar) {
        y = y_new;
        t += dt;
      } else {
        double lo = 0.0, hi = dt;
        while (hi - lo > 1e-12) {
          const double mid = 0.5 * (lo + hi);
          if (std::abs(y + rk4_increment(x, t, mid)) <= ybar)
            lo = mid;
          else
            hi = mid;
        }
        t += hi;
        y = y_new > 0.0 ? ybar : -ybar;
        held = pushing_out(t);
      }
    }
    out.t.push_back(t);
    out.y.push_back(y);
  }
  return out;
}

SampledSignal limited_integrator_smooth(const std::function<double(double)>& x, double ybar, double y0, double lambda,
                                        double t_end, double h) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  SampledSignal out;
  double t = 0.0, s = y0;
  out.t.push_back(t);
  out.y.push_back(sat(s, ybar));
  auto f = [&](double time, double sig) { return limited_integrator_smooth_rhs(sig, x(time), ybar, lambda); };
  while (t < t_end) {
    const double dt = std::min(h, t_end - t);
    const double k1 = f(t, s);
    const double k2 = f(t + 0.5 * dt, s + 0.5 * dt * k1);
    const double k3 = f(t + 0.5 * dt, s + 0.5 * dt * k2);
    const double k4 = f(t + dt, s + dt * k3);
    s += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;
    out.t.push_back(t);
    out.y.push_back(sat(s, ybar));
  }
  return out;
}

}  // namespace lurelab
