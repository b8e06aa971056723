#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "softreach/dynamics.hpp"
#include "softreach/grid.hpp"
#include "softreach/solver.hpp"

namespace softreach {

struct ScenarioAxis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  bool operator==(const ScenarioAxis&) const = default;
};

struct ScenarioBox {
  std::vector<double> lo;
  std::vector<double> hi;

  bool operator==(const ScenarioBox&) const = default;
};

/// Complete problem statement read from a scenario file. Angles are stored in
/// radians; the `deg` suffix is resolved while parsing.
struct Scenario {
  std::string model_id;
  std::map<std::string, double> model_params;  // model.<name> numeric entries
  std::string aero_table;  // as written in the file; resolved against base_dir
  std::vector<ControlSpec::Channel> controls;
  std::vector<ControlSpec::Channel> disturbances;
  ScenarioBox target;
  ScenarioBox hard;
  ScenarioBox soft;
  double horizon = 0.0;
  double epsilon = 1e-3;
  double eta = 1e-3;
  std::vector<double> budgets;
  std::vector<ScenarioAxis> axes;
  std::size_t budget_count = 0;  // 0: no budget axis
  SolveConfig solver;
  double sim_dt = 0.0;  // 0: 1e-3 * horizon
  std::string output_dir = "out";

  std::string base_dir = ".";  // directory of the source file; not serialized

  /// Throws Error(validation) with a `line N:` prefix where a line applies.
  static Scenario parse(const std::string& text, const std::string& base_dir = ".");
  static Scenario load(const std::string& path);
  std::string serialize() const;

  /// Semantic checks (also run by parse).
  void validate() const;
  bool has_budget_axis() const { return budget_count > 0; }
  void require_budget_axis() const;

  /// Multiplies every axis count (budget axis included) by `factor`.
  Scenario scaled(double factor) const;

  std::shared_ptr<const SystemModel> build_model() const;
  ReachProblem problem() const;
  Grid state_grid() const;
  Grid grid(SolveMode mode) const;
  SolveConfig solve_config() const;
  double simulation_dt() const { return sim_dt > 0.0 ? sim_dt : 1e-3 * horizon; }

  bool operator==(const Scenario& o) const;

 private:
  std::map<std::string, int> lines_;  // key -> source line, for diagnostics
};

}  // namespace softreach
