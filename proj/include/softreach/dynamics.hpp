#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "softreach/geometry.hpp"
#include "softreach/grid.hpp"

namespace softreach {

/// Admissible input set: a box of independent channels, each a closed
/// interval or an explicit list of values.
class ControlSpec {
 public:
  enum class Kind { interval, samples };

  struct Channel {
    std::string name;
    Kind kind = Kind::interval;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> samples;

    bool operator==(const Channel&) const = default;
  };

  ControlSpec() = default;
  explicit ControlSpec(std::vector<Channel> channels);

  static Channel interval(std::string name, double lo, double hi);
  static Channel sample_list(std::string name, std::vector<double> values);
  static Channel uniform_samples(std::string name, double lo, double hi, std::size_t count);

  std::size_t size() const noexcept { return channels_.size(); }
  const std::vector<Channel>& channels() const noexcept { return channels_; }

  /// Candidate values per channel for extremal searches: interval endpoints
  /// plus the smallest-magnitude admissible value; every listed sample.
  std::vector<std::vector<double>> candidates() const;

  /// Every combination of per-channel candidates.
  std::vector<std::vector<double>> candidate_grid() const;

  bool admissible(std::span<const double> u, double tol = 1e-12) const;

  bool operator==(const ControlSpec&) const = default;

 private:
  std::vector<Channel> channels_;
};

/// Extremum of coef * u over one channel.
double channel_min(const ControlSpec::Channel& c, double coef);
double channel_max(const ControlSpec::Channel& c, double coef);

struct InputPair {
  std::vector<double> control;
  std::vector<double> disturbance;
};

/// Continuous-time system x' = f(t, x, a, b) with a bounded control a
/// (minimizing player) and disturbance b (maximizing player).
class SystemModel {
 public:
  SystemModel(ControlSpec control, ControlSpec disturbance)
      : control_(std::move(control)), disturbance_(std::move(disturbance)) {}
  virtual ~SystemModel() = default;

  virtual std::string id() const = 0;
  virtual int state_dim() const = 0;
  virtual std::vector<std::string> state_names() const = 0;
  virtual std::vector<std::string> state_units() const = 0;

  const ControlSpec& control() const noexcept { return control_; }
  const ControlSpec& disturbance() const noexcept { return disturbance_; }

  virtual void flow(double t, std::span<const double> x, std::span<const double> a, std::span<const double> b,
                    std::span<double> out) const = 0;

  /// True when the flow is affine in each input channel, so that the
  /// candidate enumeration yields the exact extremum.
  virtual bool input_affine() const { return true; }

  /// min over controls of max over disturbances of p . f(t, x, a, b).
  /// The default enumerates ControlSpec candidates through flow().
  virtual double hamiltonian(double t, std::span<const double> x, std::span<const double> p) const;

  /// Hamiltonian for `rows` costates sharing one state. Row r of the costate
  /// matrix starts at p[r * p_stride]; only the first state_dim() entries are read.
  virtual void hamiltonian_batch(double t, std::span<const double> x, std::span<const double> p,
                                 std::size_t p_stride, std::size_t rows, std::span<double> out) const;

  /// Minimizing control and the worst disturbance against it. Ties go to the
  /// input of smallest magnitude.
  InputPair optimal_inputs(double t, std::span<const double> x, std::span<const double> p) const;

 private:
  ControlSpec control_;
  ControlSpec disturbance_;
};

/// Vertical point mass: state (vy [m/s], y [m]), vy' = u - g + d, y' = vy.
class PointMass final : public SystemModel {
 public:
  PointMass(ControlSpec control, ControlSpec disturbance, double gravity = 9.8);

  std::string id() const override { return "point-mass"; }
  int state_dim() const override { return 2; }
  std::vector<std::string> state_names() const override { return {"vy", "y"}; }
  std::vector<std::string> state_units() const override { return {"m/s", "m"}; }
  double gravity() const noexcept { return gravity_; }

  void flow(double t, std::span<const double> x, std::span<const double> a, std::span<const double> b,
            std::span<double> out) const override;
  double hamiltonian(double t, std::span<const double> x, std::span<const double> p) const override;

 private:
  double gravity_;
};

/// Lift and drag coefficients tabulated over angle of attack, linearly interpolated.
struct AeroTable {
  std::vector<double> alpha;  // rad, ascending
  std::vector<double> cl;
  std::vector<double> cd;

  void validate() const;
  double lift_coefficient(double a) const;
  double drag_coefficient(double a) const;

  /// C_L = cl0 + cl_alpha * a, C_D = cd0 + k * C_L^2 sampled at `alphas`.
  static AeroTable surrogate(std::span<const double> alphas, double cl0 = 0.2, double cl_alpha = 5.5,
                             double cd0 = 0.02, double k = 0.06);

  /// CSV with header `alpha_deg,C_L,C_D`.
  static AeroTable load_csv(const std::string& path);
  void save_csv(const std::string& path) const;
};

struct FixedWingParams {
  double mass = 60000.0;       // kg
  double air_density = 1.225;  // kg/m^3
  double wing_area = 112.0;    // m^2
  double gravity = 9.8;        // m/s^2
};

/// Unpowered longitudinal glide: state (h [m], V [m/s], gamma [rad]),
/// control angle of attack, disturbance wind force along the flight path.
class FixedWing final : public SystemModel {
 public:
  FixedWing(ControlSpec control, ControlSpec disturbance, AeroTable aero, FixedWingParams params = {});

  std::string id() const override { return "fixed-wing"; }
  int state_dim() const override { return 3; }
  std::vector<std::string> state_names() const override { return {"h", "V", "gamma"}; }
  std::vector<std::string> state_units() const override { return {"m", "m/s", "rad"}; }
  bool input_affine() const override { return false; }
  const AeroTable& aero() const noexcept { return aero_; }
  const FixedWingParams& params() const noexcept { return params_; }

  /// Throws Error(numerical) when V <= 0.
  void flow(double t, std::span<const double> x, std::span<const double> a, std::span<const double> b,
            std::span<double> out) const override;
  double hamiltonian(double t, std::span<const double> x, std::span<const double> p) const override;
  void hamiltonian_batch(double t, std::span<const double> x, std::span<const double> p, std::size_t p_stride,
                         std::size_t rows, std::span<double> out) const override;

 private:
  AeroTable aero_;
  FixedWingParams params_;
  std::vector<double> cl_samples_;
  std::vector<double> cd_samples_;
};

/// Regularized violation rate: clamp(c2 / epsilon, 0, 1).
double h_epsilon(double c2_value, double epsilon);

enum class BudgetRate { exact, regularized };

/// Flow of the state augmented with the remaining budget z: the last
/// component is -h_epsilon(c2) (regularized) or -1{c2 > 0} (exact).
std::vector<double> augmented_flow(const SystemModel& model, const ImplicitSet& soft_set, double epsilon,
                                   double t, std::span<const double> x, double z, std::span<const double> a,
                                   std::span<const double> b, BudgetRate mode = BudgetRate::regularized);

/// Isaacs Hamiltonian of the (optionally augmented) dynamics. When `p` has
/// state_dim()+1 entries the last one is the budget costate.
double extremal_hamiltonian(const SystemModel& model, const ImplicitSet& soft_set, double epsilon, double t,
                            std::span<const double> x, double z, std::span<const double> p);

/// Upper bound of |f_i| per grid axis, evaluated over a 3-point lattice per
/// state axis (corners and midpoints) and all input candidates. Axes beyond
/// the state dimension are budget axes with bound 1.
std::vector<double> speed_bounds(const SystemModel& model, const Grid& grid);

}  // namespace softreach
