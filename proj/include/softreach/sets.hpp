#pragma once

#include <string>
#include <vector>

#include "softreach/geometry.hpp"
#include "softreach/grid.hpp"
#include "softreach/solver.hpp"

namespace softreach {

/// Budget axis over [-m * dz, T] with z = 0 landing exactly on a node. The
/// m planes below zero keep the boundary stencil away from the zero-budget
/// plane; m is the smallest integer with m * dz >= 0.1 * T.
AxisSpec budget_axis(double horizon, std::size_t count);

struct BudgetSliceRequest {
  double Q = 0.0;
  double eta = 1e-3;
  double t = 0.0;
};

/// Proxy margin used for a membership query at budget Q. At Q = 0 the soft
/// value is never negative, so the exact zero sublevel set (eta = 0) is used.
double proxy_eta(double Q, double eta);

/// Value at budget z = Q by linear interpolation between budget planes, plus
/// eta. Returns a field on the state grid.
ScalarField slice_budget(const ScalarField& W, const BudgetSliceRequest& req);

struct QminField {
  Grid grid;
  std::vector<double> values;  // minimum budget, or sentinel when infeasible
  double horizon = 0.0;
  double sentinel = 0.0;  // horizon + 1
  double eta = 0.0;
  double t = 0.0;

  bool infeasible(std::size_t node) const { return values[node] > horizon; }
};

/// Smallest budget Q in [0, T] with slice_budget(W, {Q, eta, t}) <= 0 for
/// every budget at or above Q; sentinel where even Q = T fails.
QminField qmin(const ScalarField& W, double horizon, double t = 0.0, double eta = 1e-3);

void write_qmin(const std::string& path, const QminField& q);
QminField read_qmin(const std::string& path);

struct BandResult {
  SetMask mask;
  std::size_t disagreements = 0;  // nodes where the set-algebra form differs
};

/// Nodes with Q_min in (t1, t2], cross-checked against
/// complement(slice(t1)) intersected with slice(t2).
BandResult band_set(const ScalarField& W, const QminField& q, double t1, double t2);

struct StudyRow {
  double epsilon_hi = 0.0;
  double epsilon_lo = 0.0;
  double Q = 0.0;
  double sym_diff_measure = 0.0;
  double set_measure_lo = 0.0;
};

struct EpsilonStudy {
  std::vector<StudyRow> rows;
  std::vector<std::vector<double>> set_measures;  // [eps index][Q index]
  double cell_volume = 0.0;

  std::string to_csv() const;
};

/// Solves the soft problem for each epsilon (strictly descending) and
/// compares eta-proxy masks of consecutive iterates for every Q.
EpsilonStudy epsilon_convergence_study(const ReachProblem& problem, const Grid& grid, const SolveConfig& base,
                                       const std::vector<double>& eps_list, const std::vector<double>& q_list,
                                       double eta);

}  // namespace softreach
