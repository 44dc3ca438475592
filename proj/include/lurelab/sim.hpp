#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lurelab/matrix.hpp"

namespace lurelab {

using VectorField = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

struct IntegratorOptions {
  double atol = 1e-9;
  double rtol = 1e-7;
  double max_step = 1e-2;
  double min_step = 1e-14;
  double initial_step = 0.0;  // 0: automatic
  /// Attempted steps per integrator before NotConverged; 0 disables the budget.
  std::size_t max_steps = 20'000'000;
};

/// Dormand–Prince 5(4) with FSAL and the standard fourth-order dense output.
class Dopri5 {
 public:
  Dopri5(VectorField f, std::span<const double> x0, double t0, IntegratorOptions opt = {});

  /// One accepted step, never past t_limit. Throws StepUnderflow or NonFiniteState.
  void step(double t_limit);

  double t() const noexcept { return t_; }
  const Vec& x() const noexcept { return x_; }
  double t_prev() const noexcept { return t_prev_; }
  /// State at s ∈ [t_prev, t] from the last step's interpolant.
  Vec dense(double s) const;
  /// Dense coefficients of the last step (5·n values).
  const Vec& dense_coefficients() const noexcept { return rcont_; }
  std::size_t dim() const noexcept { return x_.size(); }
  long accepted_steps() const noexcept { return accepted_; }
  long rejected_steps() const noexcept { return rejected_; }

  static Vec eval_dense(std::span<const double> rcont, double t0, double h, double s);

 private:
  void initial_step_size();

  VectorField f_;
  IntegratorOptions opt_;
  double t_ = 0.0;
  double t_prev_ = 0.0;
  double h_ = 0.0;
  std::size_t attempts_ = 0;
  Vec x_;
  Vec k1_;
  Vec rcont_;
  long accepted_ = 0;
  long rejected_ = 0;
  std::vector<Vec> k_;
  Vec tmp_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> dense;  // dense[i] interpolates (times[i], times[i+1])

  std::size_t dim() const { return states.empty() ? 0 : states.front().size(); }
  /// Interpolated state; throws InvalidArgument outside [times.front(), times.back()].
  Vec at(double t) const;
};

Trajectory integrate(const VectorField& f, std::span<const double> x0, double t0, double t1,
                     const IntegratorOptions& opt = {});

/// Hyperplane normal·x = offset; crossings are counted in the direction of `normal`.
struct Section {
  Vec normal;
  double offset = 0.0;

  double value(std::span<const double> x) const { return dot(normal, x) - offset; }
};

enum class OrbitalStability { Attracting, Repelling, Undetermined };
std::string_view to_string(OrbitalStability s);

struct LimitCycle {
  Vec anchor;  // state at a section crossing
  double period = 0.0;
  Vec amplitude;  // max − min per state over one period
  OrbitalStability orbital_stability = OrbitalStability::Undetermined;
  Section section;
  std::vector<double> orbit_times;  // one period from the anchor, ≥ 4096 samples
  std::vector<Vec> orbit;

  double amplitude_norm() const { return norm2(amplitude); }
};

enum class CycleVerdict { CycleFound, ConvergedToEquilibrium, Diverged, NoCycleFound };
std::string_view to_string(CycleVerdict v);

struct CycleDetectOptions {
  double settle_time = 30.0;
  double max_time = 300.0;
  int confirmations = 5;
  double cycle_tol = 1e-6;        // relative: tol = cycle_tol·(1 + ‖anchor‖)
  double equilibrium_tol = 1e-6;
  double divergence_norm = 1e6;
  double crossing_time_tol = 1e-10;
  int orbit_samples = 4096;
  /// Length of the window after settling that fixes the default section.
  /// 0: settle_time / 2 (at least 1 s).
  double section_window = 0.0;
  std::optional<Section> section;
  std::vector<Vec> equilibria;  // empty: the origin only
  IntegratorOptions integrator;
};

struct CycleDetection {
  CycleVerdict verdict = CycleVerdict::NoCycleFound;
  std::optional<LimitCycle> cycle;
  Vec final_state;
  double final_time = 0.0;
  int crossings = 0;
};

CycleDetection detect_limit_cycle(const VectorField& f, std::span<const double> x0, const CycleDetectOptions& opt = {});

/// Min distance from `point` to the sampled orbit (point-to-segment).
double orbit_membership(const LimitCycle& cycle, std::span<const double> point);

enum class ProbeOutcome { ReachesCycle, ConvergesToEquilibrium, Diverges, Other };
std::string_view to_string(ProbeOutcome p);

struct StabilityProbe {
  OrbitalStability verdict = OrbitalStability::Undetermined;
  ProbeOutcome outer = ProbeOutcome::Other;  // 1.2·anchor
  ProbeOutcome inner = ProbeOutcome::Other;  // 0.4·anchor
  std::vector<double> outer_distances;       // section-crossing distance to the anchor
};

struct ProbeOptions {
  double outer_factor = 1.2;
  double inner_factor = 0.4;
  double periods = 40.0;      // probe horizon in cycle periods
  double reach_tol = 1e-3;    // relative to the cycle's amplitude norm
  CycleDetectOptions detect;  // equilibria, tolerances and integrator settings
};

StabilityProbe probe_orbital_stability(const LimitCycle& cycle, const VectorField& f, const ProbeOptions& opt = {});

struct EquilibriumInfo {
  Vec x;
  bool stable = false;
};

enum class AttractorKind { Hidden, SelfExcited };
std::string_view to_string(AttractorKind k);

struct Classification {
  AttractorKind kind = AttractorKind::Hidden;
  std::string reason;
};

struct ClassifyOptions {
  double perturbation = 1e-4;
  double max_time = 300.0;
  double reach_tol = 1e-3;  // relative to the cycle's amplitude norm
  IntegratorOptions integrator;
};

/// SelfExcited when a 1e-4 perturbation of some unstable equilibrium (±e_i for
/// every axis) flows onto the cycle, Hidden otherwise.
Classification classify_attractor(const LimitCycle& cycle, const VectorField& f, std::span<const EquilibriumInfo> eqs,
                                  const ClassifyOptions& opt = {});

/// Forward-difference Jacobian of f at (0, x).
Matrix numerical_jacobian(const VectorField& f, std::span<const double> x, double h = 1e-7);

/// CSV with header "t,<labels>".
void write_csv(std::ostream& os, const Trajectory& tr, std::span<const std::string> labels, std::size_t stride = 1);

}  // namespace lurelab
