#include "lurelab/harmonic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "lurelab/diagnostics.hpp"
#include "lurelab/error.hpp"

namespace lurelab {

namespace {

constexpr int kGaussNodes = 20;
constexpr int kPanelsPerPiece = 8;

struct GaussRule {
  std::array<double, kGaussNodes> x{};
  std::array<double, kGaussNodes> w{};
};

// Legendre nodes on [-1, 1] by Newton on P_n.
const GaussRule& gauss_rule() {
  static const GaussRule rule = [] {
    GaussRule g;
    const int n = kGaussNodes;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      g.x[static_cast<std::size_t>(i)] = x;
      g.w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return g;
  }();
  return rule;
}

double integrate_smooth(const std::function<double(double)>& f, double lo, double hi) {
  const GaussRule& g = gauss_rule();
  const double h = (hi - lo) / kPanelsPerPiece;
  double sum = 0.0;
  for (int p = 0; p < kPanelsPerPiece; ++p) {
    const double a = lo + p * h;
    const double mid = a + 0.5 * h;
    for (int i = 0; i < kGaussNodes; ++i)
      sum += g.w[static_cast<std::size_t>(i)] * f(mid + 0.5 * h * g.x[static_cast<std::size_t>(i)]);
  }
  return 0.5 * h * sum;
}

std::vector<double> kinks_of(const Nonlinearity& nl) {
  std::vector<double> out;
  for (double b : nl.breakpoints()) {
    out.push_back(b);
    if (b != 0.0) out.push_back(-b);
  }
  return out;
}

Complex w_at(const RationalTF& w, double om) { return tf_eval(w, Complex(0.0, om)); }

// Null vector of a numerically singular complex matrix via full-pivot elimination.
std::vector<Complex> null_vector(std::vector<Complex> a, std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  auto at = [&](std::size_t i, std::size_t j) -> Complex& { return a[i * n + j]; };
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::size_t pr = k, pc = k;
    double best = -1.0;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(at(i, j)) > best) {
          best = std::abs(at(i, j));
          pr = i;
          pc = j;
        }
    if (best == 0.0) throw Error(ErrorKind::WrongSpectrum, "eigenvector is not unique");
    for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(pr, j));
    for (std::size_t i = 0; i < n; ++i) std::swap(at(i, k), at(i, pc));
    std::swap(perm[k], perm[pc]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = at(i, k) / at(k, k);
      for (std::size_t j = k; j < n; ++j) at(i, j) -= f * at(k, j);
    }
  }
  std::vector<Complex> y(n);
  y[n - 1] = 1.0;
  for (std::size_t k = n - 1; k-- > 0;) {
    Complex s(0.0);
    for (std::size_t j = k + 1; j < n; ++j) s -= at(k, j) * y[j];
    y[k] = s / at(k, k);
  }
  std::vector<Complex> v(n);
  for (std::size_t k = 0; k < n; ++k) v[perm[k]] = y[k];
  return v;
}

std::vector<Complex> shifted(const Matrix& m, Complex lambda, bool transpose) {
  const std::size_t n = m.rows();
  std::vector<Complex> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = (transpose ? m(j, i) : m(i, j)) - (i == j ? lambda : Complex(0.0));
  return a;
}

// Orthonormal basis of the complement of span{u1, u2} in Rⁿ.
std::vector<Vec> complement_basis(const Vec& u1, const Vec& u2) {
  const std::size_t n = u1.size();
  std::vector<Vec> basis;
  auto orth = [&](Vec v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& b : basis) v = axpy(-dot(b, v), b, v);
    return v;
  };
  for (const Vec* u : {&u1, &u2}) {
    Vec v = orth(*u);
    const double nv = norm2(v);
    if (nv < 1e-12 * std::max(1.0, norm2(*u))) throw Error(ErrorKind::WrongSpectrum, "left eigenvector is degenerate");
    basis.push_back(scaled(1.0 / nv, v));
  }
  std::vector<bool> used(n, false);
  std::vector<Vec> out;
  while (out.size() + 2 < n) {
    double best = -1.0;
    std::size_t pick = 0;
    Vec best_v;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      Vec e(n, 0.0);
      e[i] = 1.0;
      Vec v = orth(e);
      const double nv = norm2(v);
      if (nv > best) {
        best = nv;
        pick = i;
        best_v = std::move(v);
      }
    }
    used[pick] = true;
    Vec v = scaled(1.0 / best, best_v);
    basis.push_back(v);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

CrossingSearch find_omega0_k(const RationalTF& w, const HarmonicOptions& opt) {
  if (!w.proper()) throw Error(ErrorKind::ImproperTF, "harmonic balance needs a proper W");
  if (opt.omega_points < 2 || !(opt.omega_min > 0.0) || !(opt.omega_max > opt.omega_min))
    throw Error(ErrorKind::InvalidArgument, "bad frequency grid");
  CrossingSearch out;
  const int m = opt.omega_points;
  const double lmin = std::log(opt.omega_min), lmax = std::log(opt.omega_max);
  std::vector<double> om(static_cast<std::size_t>(m)), im(static_cast<std::size_t>(m));
  std::vector<bool> ok(static_cast<std::size_t>(m), true);
  for (int i = 0; i < m; ++i) {
    const auto u = static_cast<std::size_t>(i);
    om[u] = std::exp(lmin + (lmax - lmin) * i / (m - 1));
    try {
      im[u] = w_at(w, om[u]).imag();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PoleHit) throw;
      ok[u] = false;
    }
  }

  auto accept = [&](double root) {
    Complex val;
    try {
      val = w_at(w, root);
    } catch (const Error&) {
      out.rejected.push_back("pole on the imaginary axis at omega = " + std::to_string(root));
      return;
    }
    if (std::abs(val.imag()) > 1e-9 * std::max(1.0, std::abs(val))) {
      out.rejected.push_back("pole crossing at omega = " + std::to_string(root));
      return;
    }
    if (std::abs(val.real()) < 1e-12) {
      out.rejected.push_back("Re W vanishes at omega = " + std::to_string(root));
      return;
    }
    out.crossings.push_back({root, -1.0 / val.real()});
  };

  for (int i = 0; i + 1 < m; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (!ok[u] || !ok[u + 1]) continue;
    if (im[u] == 0.0) {
      accept(om[u]);
      continue;
    }
    if (im[u] * im[u + 1] >= 0.0) continue;
    double lo = om[u], hi = om[u + 1], flo = im[u];
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = w_at(w, mid).imag();
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    accept(0.5 * (lo + hi));
  }
  for (const auto& r : out.rejected) warn("find_omega0_k: " + r);
  return out;
}

double describing_fn(const Nonlinearity& nl, double k, double omega0, double a) {
  if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "amplitude must be positive");
  if (!(omega0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "omega0 must be positive");
  double psi_part = 0.0;
  switch (nl.kind()) {
    case Nonlinearity::Kind::Saturation: {
      const double l = nl.level();
      if (a <= l) {
        psi_part = M_PI * a;
      } else {
        const double r = l / a;
        psi_part = 2.0 * a * (std::asin(r) + r * std::sqrt(1.0 - r * r));
      }
      break;
    }
    case Nonlinearity::Kind::Sign:
      psi_part = 4.0;
      break;
    case Nonlinearity::Kind::Cubic:
      psi_part = nl.c1() * M_PI * a + nl.c3() * 0.75 * M_PI * a * a * a;
      break;
    case Nonlinearity::Kind::Custom:
      return describing_fn_quadrature(nl, k, omega0, a);
  }
  return (psi_part - k * M_PI * a) / omega0;
}

double describing_fn_quadrature(const std::function<double(double)>& phi, std::span<const double> kinks, double omega0,
                                double a) {
  std::vector<double> cuts{0.0, 2.0 * M_PI};
  for (double b : kinks) {
    if (std::abs(b) >= a) continue;
    const double th = std::acos(b / a);
    cuts.push_back(th);
    cuts.push_back(2.0 * M_PI - th);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const auto f = [&](double th) {
    const double c = std::cos(th);
    return phi(a * c) * c;
  };
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += integrate_smooth(f, cuts[i], cuts[i + 1]);
  return sum / omega0;
}

double describing_fn_quadrature(const Nonlinearity& nl, double k, double omega0, double a) {
  const auto kinks = kinks_of(nl);
  return describing_fn_quadrature([&](double s) { return nl(s) - k * s; }, kinks, omega0, a);
}

std::vector<AmplitudeRoot> solve_amplitude(const Nonlinearity& nl, double k, double omega0, const HarmonicOptions& opt) {
  const double scale = nl.kind() == Nonlinearity::Kind::Saturation ? nl.level() : 1.0;
  const double a_max = opt.amplitude_max_factor * scale;
  const double a_min = a_max * 1e-6;
  const int m = opt.amplitude_points;
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "amplitude grid needs at least 2 points");
  auto phi = [&](double a) { return describing_fn(nl, k, omega0, a); };

  std::vector<double> as(static_cast<std::size_t>(m)), fs(static_cast<std::size_t>(m));
  bool flat = true;
  for (int i = 0; i < m; ++i) {
    const auto u = static_cast<std::size_t>(i);
    as[u] = a_min * std::pow(a_max / a_min, static_cast<double>(i) / (m - 1));
    fs[u] = phi(as[u]);
    const double ref = std::abs(describing_fn(nl, 0.0, omega0, as[u])) + std::abs(k) * M_PI * as[u] / omega0;
    if (std::abs(fs[u]) > 1e-10 * ref) flat = false;
  }
  if (flat) throw Error(ErrorKind::DegenerateFlat, "Phi vanishes identically; the nonlinearity is linear with slope k");

  std::vector<AmplitudeRoot> roots;
  for (int i = 0; i + 1 < m; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (fs[u] * fs[u + 1] >= 0.0) continue;
    double lo = as[u], hi = as[u + 1], flo = fs[u];
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = phi(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const double a0 = 0.5 * (lo + hi);
    const double h = 1e-6 * a0;
    roots.push_back({a0, (phi(a0 + h) - phi(a0 - h)) / (2.0 * h)});
  }
  if (roots.empty()) throw Error(ErrorKind::NoRoot, "Phi has no sign change on the amplitude grid");
  return roots;
}

double CanonicalForm::block_residual(const LureSystem& sys) const {
  const Matrix p0 = rank_one_update(sys.P, k, sys.q, sys.r);
  Matrix t = solve_linear(S, p0 * S);
  const std::size_t n = S.rows();
  t(0, 1) += omega0;
  t(1, 0) -= omega0;
  for (std::size_t i = 2; i < n; ++i)
    for (std::size_t j = 2; j < n; ++j) t(i, j) -= A3(i - 2, j - 2);
  return t.norm_inf();
}

CanonicalForm canonical_transform(const LureSystem& sys, double k, double omega0) {
  const std::size_t n = sys.P.rows();
  if (n < 2) throw Error(ErrorKind::WrongSpectrum, "need at least two states for an oscillating pair");
  const Matrix p0 = rank_one_update(sys.P, k, sys.q, sys.r);
  const Spectrum spec = eigenvalues(p0);
  const double re_tol = std::max(1e-8, 1e-10 * p0.norm_inf());
  const Complex target(0.0, omega0);
  std::size_t pair = spec.size();
  for (std::size_t i = 0; i < spec.size(); ++i)
    if (pair == spec.size() || std::abs(spec[i] - target) < std::abs(spec[pair] - target)) pair = i;
  if (std::abs(spec[pair].real()) > re_tol || std::abs(spec[pair].imag() - omega0) > 1e-6 * std::max(1.0, omega0)) {
    std::ostringstream msg;
    msg << "P0 has no eigenvalue i*" << omega0 << " (closest " << spec[pair] << ")";
    throw Error(ErrorKind::WrongSpectrum, msg.str());
  }
  int others = 0;
  for (const Complex& l : spec) {
    if (std::abs(l - spec[pair]) <= 1e-6 * std::max(1.0, omega0) ||
        std::abs(l - std::conj(spec[pair])) <= 1e-6 * std::max(1.0, omega0))
      continue;
    ++others;
    if (!(l.real() < -re_tol)) {
      std::ostringstream msg;
      msg << "P0 has a non-decaying eigenvalue " << l << " besides the oscillating pair";
      throw Error(ErrorKind::WrongSpectrum, msg.str());
    }
  }
  if (others != static_cast<int>(n) - 2) throw Error(ErrorKind::WrongSpectrum, "the oscillating pair is not simple");

  std::vector<Complex> v = null_vector(shifted(p0, target, false), n);
  Complex rv(0.0);
  double vnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rv += sys.r[i] * v[i];
    vnorm = std::max(vnorm, std::abs(v[i]));
  }
  if (std::abs(rv) < 1e-10 * vnorm)
    throw Error(ErrorKind::NormalizationFailure, "the output does not see the oscillating mode");
  const Complex c = 1.0 / rv;
  for (auto& x : v) x *= c;

  std::vector<Complex> u = null_vector(shifted(p0, target, true), n);
  Vec ure(n), uim(n);
  for (std::size_t i = 0; i < n; ++i) {
    ure[i] = u[i].real();
    uim[i] = u[i].imag();
  }
  const std::vector<Vec> rest = complement_basis(ure, uim);

  CanonicalForm cf;
  cf.omega0 = omega0;
  cf.k = k;
  cf.S = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    cf.S(i, 0) = v[i].real();
    cf.S(i, 1) = -v[i].imag();
    for (std::size_t j = 0; j + 2 < n; ++j) cf.S(i, j + 2) = rest[j][i];
  }
  const Vec b = solve_linear(cf.S, sys.q);
  cf.b1 = b[0];
  cf.b2 = b[1];
  cf.b3.assign(b.begin() + 2, b.end());
  for (const Vec& col : rest) cf.c3.push_back(dot(sys.r, col));
  const Matrix t = solve_linear(cf.S, p0 * cf.S);
  cf.A3 = Matrix(n - 2, n - 2);
  for (std::size_t i = 2; i < n; ++i)
    for (std::size_t j = 2; j < n; ++j) cf.A3(i - 2, j - 2) = t(i, j);
  return cf;
}

StartPoint theorem1_start(const CanonicalForm& cf, const AmplitudeRoot& amp) {
  StartPoint sp;
  sp.x0 = scaled(amp.a0, cf.S.col_vec(0));
  sp.stability_condition = cf.b1 * amp.phi_slope < 0.0;
  if (!sp.stability_condition) {
    std::ostringstream msg;
    msg << "theorem1_start: b1*Phi'(a0) = " << cf.b1 * amp.phi_slope << " >= 0 at a0 = " << amp.a0
        << ", the predicted cycle is not stable";
    warn(msg.str());
  }
  return sp;
}

std::vector<HarmonicCandidate> harmonic_candidates(const LureSystem& sys, const HarmonicOptions& opt) {
  const CrossingSearch search = find_omega0_k(lure_to_tf(sys), opt);
  std::vector<HarmonicCandidate> out;
  for (const FrequencyCrossing& fc : search.crossings) {
    HarmonicCandidate hc;
    hc.crossing = fc;
    try {
      hc.amplitudes = solve_amplitude(sys.psi, fc.k, fc.omega0, opt);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoRoot && e.kind() != ErrorKind::DegenerateFlat) throw;
      hc.note = e.what();
    }
    try {
      hc.canonical = canonical_transform(sys, fc.k, fc.omega0);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::WrongSpectrum && e.kind() != ErrorKind::NormalizationFailure) throw;
      hc.note += (hc.note.empty() ? "" : "; ") + std::string(e.what());
    }
    if (hc.canonical)
      for (const AmplitudeRoot& a : hc.amplitudes) hc.starts.push_back(theorem1_start(*hc.canonical, a));
    out.push_back(std::move(hc));
  }
  return out;
}

}  // namespace lurelab
