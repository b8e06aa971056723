#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "softreach/dynamics.hpp"
#include "softreach/sets.hpp"
#include "softreach/solver.hpp"

namespace fixtures {

using namespace softreach;

/// The bundled point-mass game: thrust in [-60, 60], disturbance in [-10, 10].
inline ReachProblem point_mass_problem(double horizon = 1.0) {
  auto model = std::make_shared<PointMass>(ControlSpec({ControlSpec::interval("u", -60, 60)}),
                                           ControlSpec({ControlSpec::interval("d", -10, 10)}));
  return {model, ImplicitSet::box({-1, 0}, {0, 0.7}), ImplicitSet::box({-15, 0}, {15, 18}),
          ImplicitSet::box({-10, 0}, {10, 18}), horizon};
}

inline Grid point_mass_grid(std::size_t n, std::size_t nz = 0, double horizon = 1.0) {
  std::vector<AxisSpec> axes{{-20, 20, n}, {-5, 20, n}};
  if (nz) axes.push_back(budget_axis(horizon, nz));
  return Grid::build(axes);
}

/// Pure translation x' = speed along axis 0; axis 1 is inert.
class Drift final : public SystemModel {
 public:
  explicit Drift(double speed)
      : SystemModel(ControlSpec({ControlSpec::interval("u", 0, 0)}), ControlSpec({ControlSpec::interval("d", 0, 0)})),
        speed_(speed) {}
  std::string id() const override { return "drift"; }
  int state_dim() const override { return 2; }
  std::vector<std::string> state_names() const override { return {"x", "y"}; }
  std::vector<std::string> state_units() const override { return {"", ""}; }
  void flow(double, std::span<const double>, std::span<const double>, std::span<const double>,
            std::span<double> out) const override {
    out[0] = speed_;
    out[1] = 0.0;
  }

 private:
  double speed_;
};

}  // namespace fixtures
