#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "softreach/dynamics.hpp"
#include "softreach/geometry.hpp"
#include "softreach/grid.hpp"

namespace softreach {

/// Reach-avoid game data: target, hard constraint (c1), soft constraint (c2).
struct ReachProblem {
  std::shared_ptr<const SystemModel> model;
  ImplicitSet target;
  ImplicitSet hard;
  ImplicitSet soft;
  double horizon = 1.0;
};

/// classical: V on the state grid, constraint max(c1, c2).
/// soft: W_eps on the state grid augmented with a trailing budget axis z.
enum class SolveMode { classical, soft };

struct SolveConfig {
  double cfl = 0.5;
  std::size_t store_stride = 1;  // keep every k-th accepted step
  double fixed_point_tol = 0.0;  // sup-norm change per step; 0 disables early stop
  double epsilon = 1e-3;         // width of the regularized violation rate
  GhostRule state_ghost = GhostRule::constant;  // state-axis faces; the budget axis is always linear
};

struct SolveReport {
  std::size_t steps = 0;
  double final_time = 0.0;  // earliest time integrated to
  bool converged = false;   // stopped early at a fixed point
  double dt = 0.0;
  std::vector<double> speed_bounds;
  std::vector<double> residuals;  // sup-norm change of every step
  double wall_time_s = 0.0;

  std::string to_json() const;
};

struct SolveResult {
  ScalarField value;
  SolveReport report;
};

/// max{c1, c2, g} (classical) or max{c1, c2, -z, g} (soft) at t = T.
ScalarField terminal_condition(const ReachProblem& problem, const Grid& grid, SolveMode mode);

/// Lax-Friedrichs numerical Hamiltonian for phi_s + H(grad phi) = 0:
/// H((D- + D+)/2) - sum_i alpha_i (D+_i - D-_i) / 2.
double lf_numerical_hamiltonian(std::span<const double> d_minus, std::span<const double> d_plus,
                                const std::function<double(std::span<const double>)>& hamiltonian,
                                std::span<const double> alphas);

/// Explicit backward-in-time integrator of the reach-avoid variational
/// inequalities. Set evaluations are cached per state node when every set is
/// time-invariant.
class HjiSolver {
 public:
  HjiSolver(ReachProblem problem, Grid grid, SolveMode mode, SolveConfig config = {});

  const Grid& grid() const noexcept { return grid_; }
  SolveMode mode() const noexcept { return mode_; }
  const std::vector<double>& speed_bounds() const noexcept { return alphas_; }

  /// Largest dt allowed by the CFL fraction.
  double max_stable_dt() const;

  ScalarField terminal() const;

  /// One step from t to t - dt: Lax-Friedrichs Euler update, then the target
  /// freeze min(U, freeze), then the obstacle clamp max(U, c1). Throws
  /// Error(numerical) on a CFL violation or a non-finite result.
  std::vector<double> step_backward(std::span<const double> values, double t, double dt,
                                    double* residual = nullptr) const;

  SolveResult solve() const;

  /// Freeze (target) and obstacle (hard constraint) values at node n, time t.
  double freeze_at(std::size_t node, double t) const;
  double obstacle_at(std::size_t node, double t) const;

 private:
  struct NodeSets {
    double c1, c2, g;
  };
  NodeSets sets_at(std::size_t state_node, double t) const;
  void state_point(std::size_t state_node, std::span<double> x) const;

  ReachProblem problem_;
  Grid grid_;
  SolveMode mode_;
  SolveConfig config_;
  int state_dim_ = 0;
  std::size_t line_len_ = 1;  // budget-axis node count (soft) or 1
  std::vector<double> alphas_;
  bool static_sets_ = true;
  std::vector<NodeSets> cache_;  // per state node when static_sets_
};

ScalarField vi_step_backward(const HjiSolver& solver, const ScalarField& field, double dt);

SolveResult solve(const ReachProblem& problem, const Grid& grid, SolveMode mode, const SolveConfig& config = {});

}  // namespace softreach
