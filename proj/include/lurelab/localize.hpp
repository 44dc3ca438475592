#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lurelab/lure_system.hpp"
#include "lurelab/sim.hpp"

namespace lurelab {

enum class ScheduleDirection { Increasing, Decreasing };

/// How ε enters step j: ẋ = P0x + q·ε·φ(σ) with P0 = P + kqrᵀ and φ = ψ − kσ
/// (ScaleDeviation), or ẋ = Px + q·ε·ψ(σ) (ScalePsi).
enum class EpsilonMode { ScaleDeviation, ScalePsi };

struct ContinuationSchedule {
  int m = 10;
  ScheduleDirection direction = ScheduleDirection::Increasing;
  double step_budget = 60.0;  // simulated seconds per step
  EpsilonMode mode = EpsilonMode::ScaleDeviation;
  double k = 0.0;  // harmonic linearization coefficient for ScaleDeviation
  double final_confirm_factor = 5.0;  // re-confirmation horizon, in budgets
  CycleDetectOptions detect;          // settle/max times are overridden per step

  void validate() const;
  /// ε_j for j = 1..m; ε_m = 1 for the increasing schedule.
  double epsilon(int j) const;
};

/// Right-hand side of the intermediate system for a given ε. For ε = 1 this is
/// exactly sys.rhs.
VectorField continuation_field(const LureSystem& sys, const ContinuationSchedule& sched, double eps);

enum class ContinuationOutcome { Localized, LostAtStep, AllConvergedToEquilibrium, DivergedAtStep, Unresolved };
std::string_view to_string(ContinuationOutcome o);

struct ContinuationStep {
  int j = 0;
  double epsilon = 0.0;
  Vec start;
  Vec end;
  CycleVerdict verdict = CycleVerdict::NoCycleFound;
  double period = 0.0;  // when a cycle was found
  double end_time = 0.0;
};

struct ContinuationReport {
  std::vector<ContinuationStep> steps;
  ContinuationOutcome outcome = ContinuationOutcome::Unresolved;
  int failed_step = 0;  // for LostAtStep / DivergedAtStep
  std::optional<LimitCycle> cycle;  // confirmed on the original system
};

ContinuationReport continue_localization(const LureSystem& sys, std::span<const double> start,
                                         const ContinuationSchedule& sched);

}  // namespace lurelab
