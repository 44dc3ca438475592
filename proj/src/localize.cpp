#include "lurelab/localize.hpp"

#include <cmath>

#include "lurelab/error.hpp"

namespace lurelab {

void ContinuationSchedule::validate() const {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "continuation needs m >= 1");
  if (!(step_budget > 0.0)) throw Error(ErrorKind::InvalidArgument, "step budget must be positive");
  if (!(final_confirm_factor >= 1.0)) throw Error(ErrorKind::InvalidArgument, "final confirmation factor must be >= 1");
}

double ContinuationSchedule::epsilon(int j) const {
  if (j < 1 || j > m) throw Error(ErrorKind::InvalidArgument, "continuation step out of range");
  return direction == ScheduleDirection::Increasing ? static_cast<double>(j) / m : static_cast<double>(m) / j;
}

VectorField continuation_field(const LureSystem& sys, const ContinuationSchedule& sched, double eps) {
  if (eps == 1.0)
    return [&sys](double, std::span<const double> x, std::span<double> dx) { sys.rhs(x, dx); };
  if (sched.mode == EpsilonMode::ScalePsi)
    return [&sys, eps](double, std::span<const double> x, std::span<double> dx) {
      const double u = eps * sys.psi(dot(sys.r, x));
      for (std::size_t i = 0; i < sys.q.size(); ++i) dx[i] = dot(sys.P.row_span(i), x) + sys.q[i] * u;
    };
  const double k = sched.k;
  return [&sys, eps, k, p0 = rank_one_update(sys.P, k, sys.q, sys.r)](double, std::span<const double> x,
                                                                       std::span<double> dx) {
    const double s = dot(sys.r, x);
    const double u = eps * (sys.psi(s) - k * s);
    for (std::size_t i = 0; i < sys.q.size(); ++i) dx[i] = dot(p0.row_span(i), x) + sys.q[i] * u;
  };
}

std::string_view to_string(ContinuationOutcome o) {
  switch (o) {
    case ContinuationOutcome::Localized:
      return "localized";
    case ContinuationOutcome::LostAtStep:
      return "lost_at_step";
    case ContinuationOutcome::AllConvergedToEquilibrium:
      return "all_converged_to_equilibrium";
    case ContinuationOutcome::DivergedAtStep:
      return "diverged_at_step";
    case ContinuationOutcome::Unresolved:
      return "unresolved";
  }
  return "?";
}

ContinuationReport continue_localization(const LureSystem& sys, std::span<const double> start,
                                         const ContinuationSchedule& sched) {
  sched.validate();
  if (start.size() != sys.dim()) throw Error(ErrorKind::DimensionMismatch, "start state dimension");
  ContinuationReport rep;
  CycleDetectOptions det = sched.detect;
  det.settle_time = sched.step_budget / 3.0;
  det.max_time = sched.step_budget;

  Vec x(start.begin(), start.end());
  bool any_cycle = false;
  for (int j = 1; j <= sched.m; ++j) {
    ContinuationStep step;
    step.j = j;
    step.epsilon = sched.epsilon(j);
    step.start = x;
    const VectorField f = continuation_field(sys, sched, step.epsilon);
    const CycleDetection d = detect_limit_cycle(f, x, det);
    step.verdict = d.verdict;
    step.end = d.final_state;
    step.end_time = d.final_time;
    if (d.cycle) step.period = d.cycle->period;
    rep.steps.push_back(step);
    x = d.final_state;

    if (d.verdict == CycleVerdict::CycleFound) any_cycle = true;
    if (d.verdict == CycleVerdict::Diverged) {
      rep.outcome = ContinuationOutcome::DivergedAtStep;
      rep.failed_step = j;
      return rep;
    }
    if (d.verdict == CycleVerdict::ConvergedToEquilibrium) {
      rep.outcome = any_cycle ? ContinuationOutcome::LostAtStep : ContinuationOutcome::AllConvergedToEquilibrium;
      rep.failed_step = j;
      return rep;
    }
  }

  // Re-confirm on the original system from the last end state.
  CycleDetectOptions fin = sched.detect;
  fin.settle_time = sched.step_budget / 3.0;
  fin.max_time = sched.step_budget * sched.final_confirm_factor;
  const VectorField orig = [&sys](double, std::span<const double> y, std::span<double> dy) { sys.rhs(y, dy); };
  const CycleDetection d = detect_limit_cycle(orig, x, fin);
  switch (d.verdict) {
    case CycleVerdict::CycleFound:
      rep.outcome = ContinuationOutcome::Localized;
      rep.cycle = d.cycle;
      break;
    case CycleVerdict::ConvergedToEquilibrium:
      rep.outcome = ContinuationOutcome::LostAtStep;
      rep.failed_step = sched.m;
      break;
    case CycleVerdict::Diverged:
      rep.outcome = ContinuationOutcome::DivergedAtStep;
      rep.failed_step = sched.m;
      break;
    case CycleVerdict::NoCycleFound:
      rep.outcome = ContinuationOutcome::Unresolved;
      break;
  }
  return rep;
}

}  // namespace lurelab
