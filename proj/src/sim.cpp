#include "lurelab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <sstream>

#include "lurelab/error.hpp"

namespace lurelab {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Locates the upward section crossing inside the stepper's last step.
std::pair<double, Vec> locate_crossing(const Dopri5& st, const Section& sec, double tol) {
  double lo = st.t_prev(), hi = st.t();
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (sec.value(st.dense(mid)) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return {hi, st.dense(hi)};
}

bool near_any(std::span<const double> x, const std::vector<Vec>& eqs, double tol) {
  if (eqs.empty()) return norm2(x) < tol;
  for (const Vec& e : eqs)
    if (distance(x, e) < tol) return true;
  return false;
}

}  // namespace

Dopri5::Dopri5(VectorField f, std::span<const double> x0, double t0, IntegratorOptions opt)
    : f_(std::move(f)), opt_(opt), t_(t0), t_prev_(t0), x_(x0.begin(), x0.end()) {
  if (!all_finite(x_)) throw Error(ErrorKind::NonFiniteState, "initial state is not finite");
  if (!(opt_.atol > 0.0) || !(opt_.rtol >= 0.0) || !(opt_.max_step > 0.0))
    throw Error(ErrorKind::InvalidArgument, "integrator tolerances must be positive");
  const std::size_t n = x_.size();
  k_.assign(7, Vec(n, 0.0));
  tmp_.assign(n, 0.0);
  k1_.assign(n, 0.0);
  f_(t_, x_, k1_);
  if (!all_finite(k1_)) throw Error(ErrorKind::NonFiniteState, "vector field is not finite at the initial state");
  rcont_.assign(5 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) rcont_[i] = x_[i];
  if (opt_.initial_step > 0.0)
    h_ = std::min(opt_.initial_step, opt_.max_step);
  else
    initial_step_size();
}

void Dopri5::initial_step_size() {
  const std::size_t n = x_.size();
  double d0 = 0.0, d1n = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = opt_.atol + opt_.rtol * std::abs(x_[i]);
    d0 += (x_[i] / sc) * (x_[i] / sc);
    d1n += (k1_[i] / sc) * (k1_[i] / sc);
  }
  d0 = std::sqrt(d0 / n);
  d1n = std::sqrt(d1n / n);
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  h0 = std::min(h0, opt_.max_step);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = x_[i] + h0 * k1_[i];
  Vec f1(n);
  f_(t_ + h0, tmp_, f1);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = opt_.atol + opt_.rtol * std::abs(x_[i]);
    d2 += ((f1[i] - k1_[i]) / sc) * ((f1[i] - k1_[i]) / sc);
  }
  d2 = std::sqrt(d2 / n) / h0;
  const double dm = std::max(d1n, d2);
  const double h1 = dm <= 1e-15 || !std::isfinite(dm) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  h_ = std::min({100.0 * h0, h1, opt_.max_step});
}

void Dopri5::step(double t_limit) {
  const std::size_t n = x_.size();
  if (!(t_limit > t_)) throw Error(ErrorKind::InvalidArgument, "step limit must lie ahead of the current time");
  auto& k2 = k_[1];
  auto& k3 = k_[2];
  auto& k4 = k_[3];
  auto& k5 = k_[4];
  auto& k6 = k_[5];
  auto& k7 = k_[6];
  const Vec& k1 = k1_;
  Vec y7(n);
  while (true) {
    double h = std::min(h_, opt_.max_step);
    bool last = false;
    if (t_limit - t_ <= h * (1.0 + 1e-12)) {
      h = t_limit - t_;
      last = true;
    }
    if (h < opt_.min_step && !last) {
      std::ostringstream msg;
      msg << "step size " << h << " at t = " << t_;
      throw Error(ErrorKind::StepUnderflow, msg.str());
    }
    if (opt_.max_steps > 0 && ++attempts_ > opt_.max_steps) {
      std::ostringstream msg;
      msg << "step budget of " << opt_.max_steps << " exhausted at t = " << t_;
      throw Error(ErrorKind::NotConverged, msg.str());
    }
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x_[i] + h * a21 * k1[i];
    f_(t_ + c2 * h, tmp_, k2);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x_[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f_(t_ + c3 * h, tmp_, k3);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x_[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f_(t_ + c4 * h, tmp_, k4);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = x_[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f_(t_ + c5 * h, tmp_, k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = x_[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f_(t_ + h, tmp_, k6);
    for (std::size_t i = 0; i < n; ++i)
      y7[i] = x_[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f_(t_ + h, y7, k7);

    double err = 0.0;
    bool finite = all_finite(y7) && all_finite(k7);
    if (finite) {
      for (std::size_t i = 0; i < n; ++i) {
        const double sc = opt_.atol + opt_.rtol * std::max(std::abs(x_[i]), std::abs(y7[i]));
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        err += (e / sc) * (e / sc);
      }
      err = std::sqrt(err / n);
      finite = std::isfinite(err);
    }
    if (!finite) {
      if (h < 1e-10) {
        std::ostringstream msg;
        msg << "state became non-finite near t = " << t_;
        throw Error(ErrorKind::NonFiniteState, msg.str());
      }
      h_ = 0.1 * h;
      ++rejected_;
      continue;
    }
    if (err <= 1.0) {
      for (std::size_t i = 0; i < n; ++i) {
        const double dy = y7[i] - x_[i];
        const double bspl = h * k1[i] - dy;
        rcont_[i] = x_[i];
        rcont_[n + i] = dy;
        rcont_[2 * n + i] = bspl;
        rcont_[3 * n + i] = dy - h * k7[i] - bspl;
        rcont_[4 * n + i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      t_prev_ = t_;
      t_ = last ? t_limit : t_ + h;
      x_ = y7;
      k1_ = k7;
      ++accepted_;
      const double fac = err == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 10.0);
      // Keep the proposal from the last full step when this one was truncated.
      if (!last || h * fac > h_) h_ = h * fac;
      return;
    }
    ++rejected_;
    h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
    if (h_ < opt_.min_step) {
      std::ostringstream msg;
      msg << "step size " << h_ << " at t = " << t_;
      throw Error(ErrorKind::StepUnderflow, msg.str());
    }
  }
}

Vec Dopri5::eval_dense(std::span<const double> rc, double t0, double h, double s) {
  const std::size_t n = rc.size() / 5;
  const double th = h > 0.0 ? (s - t0) / h : 0.0;
  const double th1 = 1.0 - th;
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = rc[i] + th * (rc[n + i] + th1 * (rc[2 * n + i] + th * (rc[3 * n + i] + th1 * rc[4 * n + i])));
  return y;
}

Vec Dopri5::dense(double s) const {
  if (s == t_) return x_;
  return eval_dense(rcont_, t_prev_, t_ - t_prev_, s);
}

Vec Trajectory::at(double t) const {
  if (times.empty() || t < times.front() || t > times.back())
    throw Error(ErrorKind::InvalidArgument, "time outside the trajectory");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.end()) return states.back();
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  if (t == times[j - 1]) return states[j - 1];
  return Dopri5::eval_dense(dense[j - 1], times[j - 1], times[j] - times[j - 1], t);
}

Trajectory integrate(const VectorField& f, std::span<const double> x0, double t0, double t1,
                     const IntegratorOptions& opt) {
  if (!(t1 > t0) || !std::isfinite(t1)) throw Error(ErrorKind::InvalidArgument, "time span must be finite and increasing");
  Dopri5 st(f, x0, t0, opt);
  Trajectory tr;
  tr.times.push_back(t0);
  tr.states.push_back(st.x());
  while (st.t() < t1) {
    st.step(t1);
    tr.times.push_back(st.t());
    tr.states.push_back(st.x());
    tr.dense.push_back(st.dense_coefficients());
  }
  return tr;
}

std::string_view to_string(OrbitalStability s) {
  switch (s) {
    case OrbitalStability::Attracting:
      return "attracting";
    case OrbitalStability::Repelling:
      return "repelling";
    case OrbitalStability::Undetermined:
      return "undetermined";
  }
  return "?";
}

std::string_view to_string(CycleVerdict v) {
  switch (v) {
    case CycleVerdict::CycleFound:
      return "cycle_found";
    case CycleVerdict::ConvergedToEquilibrium:
      return "converged_to_equilibrium";
    case CycleVerdict::Diverged:
      return "diverged";
    case CycleVerdict::NoCycleFound:
      return "no_cycle_found";
  }
  return "?";
}

std::string_view to_string(ProbeOutcome p) {
  switch (p) {
    case ProbeOutcome::ReachesCycle:
      return "reaches_cycle";
    case ProbeOutcome::ConvergesToEquilibrium:
      return "converges_to_equilibrium";
    case ProbeOutcome::Diverges:
      return "diverges";
    case ProbeOutcome::Other:
      return "other";
  }
  return "?";
}

std::string_view to_string(AttractorKind k) { return k == AttractorKind::Hidden ? "hidden" : "self_excited"; }

namespace {

LimitCycle build_cycle(const VectorField& f, const Vec& anchor, double period, const Section& sec,
                       const CycleDetectOptions& opt) {
  LimitCycle lc;
  lc.anchor = anchor;
  lc.period = period;
  lc.section = sec;
  const std::size_t n = anchor.size();
  const int m = std::max(opt.orbit_samples, 2);
  Dopri5 st(f, anchor, 0.0, opt.integrator);
  lc.orbit_times.push_back(0.0);
  lc.orbit.push_back(anchor);
  int next = 1;
  while (st.t() < period) {
    st.step(period);
    while (next <= m) {
      const double s = period * next / m;
      if (s > st.t()) break;
      lc.orbit_times.push_back(s);
      lc.orbit.push_back(next == m ? st.x() : st.dense(s));
      ++next;
    }
  }
  Vec lo(anchor), hi(anchor);
  for (const Vec& x : lc.orbit)
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], x[i]);
      hi[i] = std::max(hi[i], x[i]);
    }
  lc.amplitude.resize(n);
  for (std::size_t i = 0; i < n; ++i) lc.amplitude[i] = hi[i] - lo[i];
  return lc;
}

}  // namespace

CycleDetection detect_limit_cycle(const VectorField& f, std::span<const double> x0, const CycleDetectOptions& opt) {
  if (opt.confirmations < 2) throw Error(ErrorKind::InvalidArgument, "need at least two confirming crossings");
  if (!(opt.max_time > opt.settle_time)) throw Error(ErrorKind::InvalidArgument, "max_time must exceed settle_time");
  const std::size_t n = x0.size();
  Dopri5 st(f, x0, 0.0, opt.integrator);
  CycleDetection out;
  auto finish = [&](CycleVerdict v) {
    out.verdict = v;
    out.final_state = st.x();
    out.final_time = st.t();
    return out;
  };
  auto check_state = [&]() -> std::optional<CycleVerdict> {
    if (norm_inf(st.x()) > opt.divergence_norm) return CycleVerdict::Diverged;
    if (near_any(st.x(), opt.equilibria, opt.equilibrium_tol)) return CycleVerdict::ConvergedToEquilibrium;
    return std::nullopt;
  };

  while (st.t() < opt.settle_time) {
    st.step(opt.settle_time);
    if (auto v = check_state()) return finish(*v);
  }

  Section sec;
  if (opt.section) {
    sec = *opt.section;
    if (sec.normal.size() != n) throw Error(ErrorKind::DimensionMismatch, "section normal dimension");
  } else {
    const double window = opt.section_window > 0.0 ? opt.section_window : std::max(1.0, opt.settle_time / 2.0);
    const double t_end = std::min(opt.max_time, st.t() + window);
    Vec lo(st.x()), hi(st.x()), integral(n, 0.0);
    const double t_start = st.t();
    Vec prev = st.x();
    while (st.t() < t_end) {
      st.step(t_end);
      if (auto v = check_state()) return finish(*v);
      const double h = st.t() - st.t_prev();
      for (std::size_t i = 0; i < n; ++i) {
        lo[i] = std::min(lo[i], st.x()[i]);
        hi[i] = std::max(hi[i], st.x()[i]);
        integral[i] += 0.5 * h * (prev[i] + st.x()[i]);
      }
      prev = st.x();
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (hi[i] - lo[i] > hi[best] - lo[best]) best = i;
    sec.normal.assign(n, 0.0);
    sec.normal[best] = 1.0;
    sec.offset = integral[best] / std::max(st.t() - t_start, 1e-300);
  }

  std::vector<std::pair<double, Vec>> recent;
  while (st.t() < opt.max_time) {
    const Vec before = st.x();
    st.step(opt.max_time);
    if (auto v = check_state()) return finish(*v);
    if (!(sec.value(before) < 0.0 && sec.value(st.x()) >= 0.0)) continue;
    recent.push_back(locate_crossing(st, sec, opt.crossing_time_tol));
    ++out.crossings;
    if (recent.size() > static_cast<std::size_t>(opt.confirmations)) recent.erase(recent.begin());
    if (recent.size() < static_cast<std::size_t>(opt.confirmations)) continue;
    const Vec& last = recent.back().second;
    const double tol = opt.cycle_tol * (1.0 + norm2(last));
    bool agree = true;
    for (std::size_t i = 0; i < recent.size() && agree; ++i)
      for (std::size_t j = i + 1; j < recent.size() && agree; ++j)
        agree = distance(recent[i].second, recent[j].second) <= tol;
    if (!agree) continue;
    const double period = (recent.back().first - recent.front().first) / (recent.size() - 1);
    out.cycle = build_cycle(f, last, period, sec, opt);
    return finish(CycleVerdict::CycleFound);
  }
  return finish(CycleVerdict::NoCycleFound);
}

double orbit_membership(const LimitCycle& cycle, std::span<const double> point) {
  if (cycle.orbit.empty()) return distance(cycle.anchor, point);
  double best = distance(cycle.orbit.front(), point);
  const std::size_t n = point.size();
  for (std::size_t k = 0; k + 1 < cycle.orbit.size(); ++k) {
    const Vec& a = cycle.orbit[k];
    const Vec& b = cycle.orbit[k + 1];
    double ab2 = 0.0, apab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ab2 += (b[i] - a[i]) * (b[i] - a[i]);
      apab += (point[i] - a[i]) * (b[i] - a[i]);
    }
    const double s = ab2 > 0.0 ? std::clamp(apab / ab2, 0.0, 1.0) : 0.0;
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = a[i] + s * (b[i] - a[i]) - point[i];
      d2 += c * c;
    }
    best = std::min(best, std::sqrt(d2));
  }
  return best;
}

namespace {

struct ProbeRun {
  ProbeOutcome outcome = ProbeOutcome::Other;
  std::vector<double> distances;
};

ProbeRun run_probe(const LimitCycle& cycle, const VectorField& f, const Vec& x0, const ProbeOptions& opt) {
  ProbeRun pr;
  const double horizon = opt.periods * cycle.period;
  const double reach = opt.reach_tol * cycle.amplitude_norm();
  Dopri5 st(f, x0, 0.0, opt.detect.integrator);
  while (st.t() < horizon) {
    const Vec before = st.x();
    st.step(horizon);
    if (norm_inf(st.x()) > opt.detect.divergence_norm) {
      pr.outcome = ProbeOutcome::Diverges;
      return pr;
    }
    if (near_any(st.x(), opt.detect.equilibria, opt.detect.equilibrium_tol)) {
      pr.outcome = ProbeOutcome::ConvergesToEquilibrium;
      return pr;
    }
    if (cycle.section.value(before) < 0.0 && cycle.section.value(st.x()) >= 0.0) {
      const auto c = locate_crossing(st, cycle.section, opt.detect.crossing_time_tol);
      pr.distances.push_back(distance(c.second, cycle.anchor));
    }
  }
  if (orbit_membership(cycle, st.x()) < reach) pr.outcome = ProbeOutcome::ReachesCycle;
  return pr;
}

}  // namespace

StabilityProbe probe_orbital_stability(const LimitCycle& cycle, const VectorField& f, const ProbeOptions& opt) {
  auto outer = std::async(std::launch::async,
                          [&] { return run_probe(cycle, f, scaled(opt.outer_factor, cycle.anchor), opt); });
  ProbeRun inner = run_probe(cycle, f, scaled(opt.inner_factor, cycle.anchor), opt);
  ProbeRun out = outer.get();

  StabilityProbe sp;
  sp.outer = out.outcome;
  sp.inner = inner.outcome;
  sp.outer_distances = out.distances;
  const auto& d = out.distances;
  const bool shrinking = d.size() >= 3 && d[d.size() - 1] < d[d.size() - 2] && d[d.size() - 2] < d[d.size() - 3];
  const bool growing = d.size() >= 3 && d[d.size() - 1] > d[d.size() - 2] && d[d.size() - 2] > d[d.size() - 3];
  if (out.outcome == ProbeOutcome::ReachesCycle || (shrinking && out.outcome == ProbeOutcome::Other))
    sp.verdict = OrbitalStability::Attracting;
  else if (out.outcome == ProbeOutcome::Diverges || out.outcome == ProbeOutcome::ConvergesToEquilibrium || growing)
    sp.verdict = OrbitalStability::Repelling;
  return sp;
}

Classification classify_attractor(const LimitCycle& cycle, const VectorField& f, std::span<const EquilibriumInfo> eqs,
                                  const ClassifyOptions& opt) {
  const double reach = opt.reach_tol * cycle.amplitude_norm();
  struct Job {
    std::size_t eq;
    Vec x0;
  };
  std::vector<Job> jobs;
  for (std::size_t e = 0; e < eqs.size(); ++e) {
    if (eqs[e].stable) continue;
    for (std::size_t i = 0; i < eqs[e].x.size(); ++i)
      for (double sgn : {1.0, -1.0}) {
        Vec x = eqs[e].x;
        x[i] += sgn * opt.perturbation;
        jobs.push_back({e, std::move(x)});
      }
  }
  if (jobs.empty()) return {AttractorKind::Hidden, "every equilibrium is locally stable"};

  auto run = [&](const Job& job) {
    Dopri5 st(f, job.x0, 0.0, opt.integrator);
    while (st.t() < opt.max_time) {
      const Vec before = st.x();
      st.step(opt.max_time);
      if (norm_inf(st.x()) > 1e6) return false;
      if (cycle.section.value(before) < 0.0 && cycle.section.value(st.x()) >= 0.0) {
        const auto c = locate_crossing(st, cycle.section, 1e-10);
        if (orbit_membership(cycle, c.second) < reach) return true;
      }
    }
    return false;
  };
  std::vector<std::future<bool>> results;
  for (const Job& j : jobs) results.push_back(std::async(std::launch::async, run, std::cref(j)));
  std::optional<std::size_t> hit;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const bool reached = results[k].get();
    if (reached && !hit) hit = k;
  }
  if (hit) {
    std::ostringstream msg;
    msg << "a perturbation of unstable equilibrium #" << jobs[*hit].eq << " flows onto the cycle";
    return {AttractorKind::SelfExcited, msg.str()};
  }
  return {AttractorKind::Hidden, "no perturbation of an unstable equilibrium reaches the cycle"};
}

Matrix numerical_jacobian(const VectorField& f, std::span<const double> x, double h) {
  const std::size_t n = x.size();
  Vec f0(n), f1(n), xp(x.begin(), x.end());
  f(0.0, x, f0);
  Matrix j(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const double step = h * std::max(1.0, std::abs(x[c]));
    xp[c] = x[c] + step;
    f(0.0, xp, f1);
    xp[c] = x[c];
    for (std::size_t r = 0; r < n; ++r) j(r, c) = (f1[r] - f0[r]) / step;
  }
  return j;
}

void write_csv(std::ostream& os, const Trajectory& tr, std::span<const std::string> labels, std::size_t stride) {
  os << "t";
  for (const auto& l : labels) os << ',' << l;
  os << '\n';
  const auto old = os.precision(9);
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (i % stride != 0 && i + 1 != tr.times.size()) continue;
    os << tr.times[i];
    for (double v : tr.states[i]) os << ',' << v;
    os << '\n';
  }
  os.precision(old);
}

}  // namespace lurelab
