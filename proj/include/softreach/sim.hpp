#pragma once

#include <string>
#include <vector>

#include "softreach/dynamics.hpp"
#include "softreach/grid.hpp"
#include "softreach/solver.hpp"

namespace softreach {

struct Verdict {
  bool reached = false;
  double reached_at = 0.0;  // time of the first stamp in target and soft set
  std::size_t reached_index = 0;
  bool hard_ok = true;
  double violation_time = 0.0;
  bool within_budget = false;
  bool truncated = false;  // the state left the grid
  std::string diagnostic;

  bool satisfied() const { return reached && hard_ok && within_budget && !truncated; }
  std::string to_json() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<double> budget;  // remaining violation time z
  std::vector<std::vector<double>> controls;      // one per interval
  std::vector<std::vector<double>> disturbances;  // one per interval
  double assigned_budget = 0.0;
  Verdict verdict;

  /// Header `t,<state names>,z,<control names>,<disturbance names>`; the
  /// final stamp leaves the input columns empty.
  std::string to_csv(const SystemModel& model) const;
};

/// Gradient of W at (x, z) by central differences of interpolated values with
/// half-spacing steps. A field without a budget axis ignores z.
std::vector<double> value_gradient(const ScalarField& W, double t, std::span<const double> x, double z);

/// Feedback inputs from the value gradient: the minimizing control and the
/// worst disturbance against it, ties toward the smallest magnitude.
InputPair optimal_inputs(const ScalarField& W, const SystemModel& model, double t, std::span<const double> x,
                         double z);

struct RolloutConfig {
  double dt = 1e-3;
  double t0 = 0.0;
  double horizon = 1.0;  // duration of the rollout
  double tolerance = 0.0;
  double budget_tolerance = 0.0;
};

/// Sampled-data rollout of the exact augmented dynamics (indicator budget
/// rate) with four-stage Runge-Kutta and inputs held over each interval.
/// Stops when max(c2, -z, g) <= 0, at the horizon, or when the state leaves
/// the field's grid. The verdict is filled in by verify().
Trajectory rollout(const ReachProblem& problem, const ScalarField& W, std::span<const double> x0, double Q0,
                   const RolloutConfig& cfg);

/// Reach, hard-constraint and budget clauses along a trajectory. Membership
/// uses `tolerance`; the violation integral counts an interval when its
/// midpoint lies outside the soft set.
Verdict verify(const Trajectory& traj, const ReachProblem& problem, double tolerance = 0.0,
               double budget_tolerance = 0.0);

}  // namespace softreach
