#pragma once

#include <string>
#include <vector>

#include "lurelab/linalg.hpp"
#include "lurelab/matrix.hpp"
#include "lurelab/transfer_function.hpp"

namespace lurelab {

/// Odd scalar nonlinearity ψ(σ).
class Nonlinearity {
 public:
  enum class Kind { Saturation, Sign, Cubic, Custom };

  static Nonlinearity saturation(double level = 1.0);
  static Nonlinearity sign();
  static Nonlinearity cubic(double c1, double c3);
  /// Piecewise-linear table on σ ≥ 0, extended oddly to σ < 0 and held
  /// constant beyond the last node. `sigma` must start at 0, strictly increase,
  /// and `psi` must start at 0.
  static Nonlinearity custom(std::vector<double> sigma, std::vector<double> psi);

  Kind kind() const noexcept { return kind_; }
  double level() const noexcept { return p1_; }  // saturation level
  double c1() const noexcept { return p1_; }
  double c3() const noexcept { return p2_; }
  const std::vector<double>& table_sigma() const noexcept { return tab_s_; }
  const std::vector<double>& table_psi() const noexcept { return tab_p_; }

  double operator()(double sigma) const;
  /// dψ/dσ; at kinks the value of the outer piece. Infinite for sign at 0.
  double derivative(double sigma) const;
  /// Kinks on σ ≥ 0 (excluding 0 for smooth kinds).
  std::vector<double> breakpoints() const;
  /// Piecewise linear (saturation, sign, custom)?
  bool piecewise_linear() const noexcept { return kind_ != Kind::Cubic; }
  std::string describe() const;

 private:
  Nonlinearity() = default;
  Kind kind_ = Kind::Saturation;
  double p1_ = 1.0;
  double p2_ = 0.0;
  std::vector<double> tab_s_;
  std::vector<double> tab_p_;
};

/// ẋ = P x + q ψ(rᵀx)
struct LureSystem {
  Matrix P;
  Vec q;
  Vec r;
  Nonlinearity psi = Nonlinearity::saturation(1.0);
  std::vector<std::string> labels;

  std::size_t dim() const noexcept { return q.size(); }
  double sigma(std::span<const double> x) const { return dot(r, x); }
  void rhs(std::span<const double> x, std::span<double> dx) const;
  /// Throws DimensionMismatch or InvalidArgument; fills default labels x1..xn.
  void validate();
};

/// W(s) = rᵀ(P − sI)⁻¹q. Denominator is the characteristic polynomial of P.
RationalTF lure_to_tf(const LureSystem& sys);

/// Lur'e system whose W(s) equals `w`: with (A, b, c) the companion
/// realization, P = A, r = c and q = −b, since rᵀ(P − sI)⁻¹q = −c(sI − A)⁻¹q.
LureSystem lure_from_tf(const RationalTF& w, const Nonlinearity& psi);

enum class Stability { Stable, Unstable, Undetermined };
std::string_view to_string(Stability s);

struct Equilibrium {
  Vec x;
  double sigma = 0.0;
  double slope = 0.0;  // ψ'(σ*)
  Spectrum spectrum;   // eig(P + slope·q rᵀ), empty when slope is infinite
  Stability stability = Stability::Undetermined;
};

/// All equilibria found sector by sector. Sectors whose linear system is
/// singular are skipped with a warning.
std::vector<Equilibrium> equilibria(const LureSystem& sys);

}  // namespace lurelab
