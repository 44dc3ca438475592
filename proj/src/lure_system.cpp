#include "lurelab/lure_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lurelab/diagnostics.hpp"
#include "lurelab/error.hpp"

namespace lurelab {

Nonlinearity Nonlinearity::saturation(double level) {
  if (!(level > 0.0) || !std::isfinite(level)) throw Error(ErrorKind::InvalidArgument, "saturation level must be positive");
  Nonlinearity n;
  n.kind_ = Kind::Saturation;
  n.p1_ = level;
  return n;
}

Nonlinearity Nonlinearity::sign() {
  Nonlinearity n;
  n.kind_ = Kind::Sign;
  return n;
}

Nonlinearity Nonlinearity::cubic(double c1, double c3) {
  if (!std::isfinite(c1) || !std::isfinite(c3)) throw Error(ErrorKind::NonFinite, "cubic coefficients");
  Nonlinearity n;
  n.kind_ = Kind::Cubic;
  n.p1_ = c1;
  n.p2_ = c3;
  return n;
}

Nonlinearity Nonlinearity::custom(std::vector<double> sigma, std::vector<double> psi) {
  if (sigma.size() != psi.size() || sigma.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "custom table needs at least two matching nodes");
  if (sigma[0] != 0.0 || psi[0] != 0.0) throw Error(ErrorKind::InvalidArgument, "custom table must start at (0, 0)");
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!std::isfinite(sigma[i]) || !std::isfinite(psi[i])) throw Error(ErrorKind::NonFinite, "custom table entry");
    if (i > 0 && !(sigma[i] > sigma[i - 1])) throw Error(ErrorKind::InvalidArgument, "custom table nodes must increase");
  }
  Nonlinearity n;
  n.kind_ = Kind::Custom;
  n.tab_s_ = std::move(sigma);
  n.tab_p_ = std::move(psi);
  return n;
}

double Nonlinearity::operator()(double s) const {
  switch (kind_) {
    case Kind::Saturation:
      return std::clamp(s, -p1_, p1_);
    case Kind::Sign:
      return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
    case Kind::Cubic:
      return p1_ * s + p2_ * s * s * s;
    case Kind::Custom: {
      const double a = std::abs(s);
      const double sg = s < 0.0 ? -1.0 : 1.0;
      if (a >= tab_s_.back()) return sg * tab_p_.back();
      const auto it = std::upper_bound(tab_s_.begin(), tab_s_.end(), a);
      const std::size_t j = static_cast<std::size_t>(it - tab_s_.begin());
      const double t = (a - tab_s_[j - 1]) / (tab_s_[j] - tab_s_[j - 1]);
      return sg * (tab_p_[j - 1] + t * (tab_p_[j] - tab_p_[j - 1]));
    }
  }
  return 0.0;
}

double Nonlinearity::derivative(double s) const {
  switch (kind_) {
    case Kind::Saturation:
      return std::abs(s) < p1_ ? 1.0 : 0.0;
    case Kind::Sign:
      return s == 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    case Kind::Cubic:
      return p1_ + 3.0 * p2_ * s * s;
    case Kind::Custom: {
      const double a = std::abs(s);
      if (a >= tab_s_.back()) return 0.0;
      const auto it = std::upper_bound(tab_s_.begin(), tab_s_.end(), a);
      const std::size_t j = static_cast<std::size_t>(it - tab_s_.begin());
      return (tab_p_[j] - tab_p_[j - 1]) / (tab_s_[j] - tab_s_[j - 1]);
    }
  }
  return 0.0;
}

std::vector<double> Nonlinearity::breakpoints() const {
  switch (kind_) {
    case Kind::Saturation:
      return {p1_};
    case Kind::Sign:
      return {0.0};
    case Kind::Cubic:
      return {};
    case Kind::Custom:
      return {tab_s_.begin() + 1, tab_s_.end()};
  }
  return {};
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Saturation:
      os << "saturation(" << p1_ << ")";
      break;
    case Kind::Sign:
      os << "sign";
      break;
    case Kind::Cubic:
      os << "cubic(" << p1_ << ", " << p2_ << ")";
      break;
    case Kind::Custom:
      os << "custom(" << tab_s_.size() << " nodes)";
      break;
  }
  return os.str();
}

void LureSystem::rhs(std::span<const double> x, std::span<double> dx) const {
  const std::size_t n = q.size();
  const double u = psi(dot(r, x));
  for (std::size_t i = 0; i < n; ++i) dx[i] = dot(P.row_span(i), x) + q[i] * u;
}

void LureSystem::validate() {
  if (!P.square()) throw Error(ErrorKind::NonSquare, "P must be square");
  const std::size_t n = P.rows();
  if (n == 0) throw Error(ErrorKind::DimensionMismatch, "empty system");
  if (q.size() != n || r.size() != n) throw Error(ErrorKind::DimensionMismatch, "q and r must have P's dimension");
  for (double v : q)
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "q entry");
  for (double v : r)
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "r entry");
  if (psi(0.0) != 0.0) throw Error(ErrorKind::InvalidArgument, "nonlinearity must vanish at 0");
  if (labels.empty())
    for (std::size_t i = 0; i < n; ++i) labels.push_back("x" + std::to_string(i + 1));
  if (labels.size() != n) throw Error(ErrorKind::DimensionMismatch, "one label per state");
}

RationalTF lure_to_tf(const LureSystem& sys) {
  const std::size_t n = sys.P.rows();
  if (!sys.P.square() || sys.q.size() != n || sys.r.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "Lur'e system dimensions");
  CharPoly cp = faddeev_leverrier(sys.P);
  std::vector<double> num(n);
  for (std::size_t k = 0; k < n; ++k) num[k] = -dot(sys.r, cp.adjugate[k] * sys.q);
  return {Polynomial(std::move(num)), std::move(cp.poly)};
}

LureSystem lure_from_tf(const RationalTF& w, const Nonlinearity& psi) {
  if (!w.strictly_proper())
    throw Error(ErrorKind::ImproperTF, "Lur'e form needs a strictly proper linear part");
  StateSpace ss = tf_realize(w);
  LureSystem sys{ss.A, scaled(-1.0, ss.b), ss.c, psi, {}};
  sys.validate();
  return sys;
}

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Stable:
      return "stable";
    case Stability::Unstable:
      return "unstable";
    case Stability::Undetermined:
      return "undetermined";
  }
  return "?";
}

namespace {

struct Sector {
  double slope;
  double offset;  // ψ = slope·σ + offset on [lo, hi]
  double lo;
  double hi;
};

std::vector<Sector> sectors_of(const Nonlinearity& psi) {
  std::vector<Sector> out;
  const double inf = std::numeric_limits<double>::infinity();
  auto add_mirrored = [&](double m, double b, double lo, double hi) {
    out.push_back({m, b, lo, hi});
    out.push_back({m, -b, -hi, -lo});
  };
  switch (psi.kind()) {
    case Nonlinearity::Kind::Saturation:
      out.push_back({1.0, 0.0, -psi.level(), psi.level()});
      add_mirrored(0.0, psi.level(), psi.level(), inf);
      break;
    case Nonlinearity::Kind::Sign:
      add_mirrored(0.0, 1.0, 0.0, inf);
      break;
    case Nonlinearity::Kind::Custom: {
      const auto& s = psi.table_sigma();
      const auto& p = psi.table_psi();
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double m = (p[i + 1] - p[i]) / (s[i + 1] - s[i]);
        add_mirrored(m, p[i] - m * s[i], s[i], s[i + 1]);
      }
      add_mirrored(0.0, p.back(), s.back(), inf);
      break;
    }
    case Nonlinearity::Kind::Cubic:
      break;
  }
  return out;
}

void push_unique(std::vector<Equilibrium>& eqs, const LureSystem& sys, Vec x) {
  for (const auto& e : eqs) {
    Vec d = axpy(-1.0, e.x, x);
    if (norm_inf(d) <= 1e-9 * (1.0 + norm_inf(x))) return;
  }
  Equilibrium e;
  e.sigma = sys.sigma(x);
  e.x = std::move(x);
  e.slope = sys.psi.derivative(e.sigma);
  if (std::isfinite(e.slope)) {
    e.spectrum = eigenvalues(rank_one_update(sys.P, e.slope, sys.q, sys.r));
    const double a = spectral_abscissa(e.spectrum);
    e.stability = a < -1e-12 ? Stability::Stable : (a > 1e-12 ? Stability::Unstable : Stability::Undetermined);
  }
  eqs.push_back(std::move(e));
}

}  // namespace

std::vector<Equilibrium> equilibria(const LureSystem& sys) {
  const std::size_t n = sys.P.rows();
  std::vector<Equilibrium> eqs;
  push_unique(eqs, sys, Vec(n, 0.0));

  if (sys.psi.kind() == Nonlinearity::Kind::Cubic) {
    const double c3 = sys.psi.c3();
    if (c3 == 0.0) return eqs;
    const Matrix m = rank_one_update(sys.P, sys.psi.c1(), sys.q, sys.r);
    Vec y;
    try {
      y = solve_linear(m, sys.q);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Singular) throw;
      warn("equilibria: linearized sector is singular, nonzero cubic roots skipped");
      return eqs;
    }
    const double g = dot(sys.r, y);
    if (g == 0.0) return eqs;
    const double s2 = -1.0 / (g * c3);
    if (s2 > 0.0) {
      for (double sg : {1.0, -1.0}) {
        const double s = sg * std::sqrt(s2);
        push_unique(eqs, sys, scaled(-c3 * s * s * s, y));
      }
    }
    return eqs;
  }

  for (const Sector& sec : sectors_of(sys.psi)) {
    if (sec.offset == 0.0) continue;  // only the origin lives here
    const Matrix m = rank_one_update(sys.P, sec.slope, sys.q, sys.r);
    Vec y;
    try {
      y = solve_linear(m, sys.q);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Singular) throw;
      std::ostringstream msg;
      msg << "equilibria: sector [" << sec.lo << ", " << sec.hi << "] is singular, skipped";
      warn(msg.str());
      continue;
    }
    Vec x = scaled(-sec.offset, y);
    const double s = sys.sigma(x);
    const double tol = 1e-12 * (1.0 + std::abs(s));
    if (s >= sec.lo - tol && s <= sec.hi + tol && (sec.lo != 0.0 || s > 0.0) && (sec.hi != 0.0 || s < 0.0))
      push_unique(eqs, sys, std::move(x));
  }
  return eqs;
}

}  // namespace lurelab
