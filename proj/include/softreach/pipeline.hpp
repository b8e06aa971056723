#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "softreach/solver.hpp"

namespace softreach {

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct SolveCommand {
  std::string scenario;
  SolveMode mode = SolveMode::soft;
  double grid_scale = 1.0;
  std::string out_dir;  // empty: the scenario's output.dir
};

struct ExtractCommand {
  std::string field;
  std::string scenario;         // empty: scenario.resolved next to the field, if present
  std::vector<double> budgets;  // empty: the scenario's budget list
  double eta = kUnset;          // NaN: scenario eta
  bool contours = true;
  bool svg = true;
  std::string out_dir;  // empty: the field's directory
};

struct QminCommand {
  std::string field;
  std::string scenario;
  double t = 0.0;
  double eta = kUnset;
  std::vector<std::pair<double, double>> bands;  // half-open (t1, t2]
  std::string out_dir;
};

struct SimulateCommand {
  std::string scenario;
  std::string field;
  std::vector<double> x0;
  double Q0 = 0.0;
  double dt = kUnset;  // NaN: scenario sim.dt
  double budget_tolerance = 0.0;
  bool svg = true;
  std::string out_dir;  // empty: the field's directory
};

struct StudyCommand {
  std::string scenario;
  std::string kind;                 // boundary-error | eps-convergence
  std::vector<std::size_t> sizes;   // boundary-error node counts per state axis
  std::vector<double> epsilons;     // eps-convergence, strictly descending
  std::vector<double> budgets;      // eps-convergence; empty: scenario budgets
  double eta = kUnset;
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  double grid_scale = 1.0;
  std::string out_dir;
};

/// Each command writes its artifacts and returns a JSON summary of what it
/// produced. Errors surface as softreach::Error.
std::string run_solve(const SolveCommand& cmd);
std::string run_extract(const ExtractCommand& cmd);
std::string run_qmin(const QminCommand& cmd);
std::string run_simulate(const SimulateCommand& cmd);
std::string run_study(const StudyCommand& cmd);

/// Normalized spacing sqrt(sum_i (spacing_i / extent_i)^2) of a 2-D grid.
double normalized_spacing(const Grid& grid2d);

}  // namespace softreach
