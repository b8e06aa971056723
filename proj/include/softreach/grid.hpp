#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace softreach {

inline constexpr int kMaxDim = 4;

struct AxisSpec {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  bool operator==(const AxisSpec&) const = default;
};

/// Uniform Cartesian grid in 2 to 4 dimensions. Row-major node layout with
/// axis 0 slowest; node k on axis i sits at min_i + k * spacing_i.
class Grid {
 public:
  Grid() = default;

  /// Throws Error(validation) on non-finite bounds, max <= min, count < 3 or a
  /// dimension outside 2..4.
  static Grid build(std::span<const AxisSpec> axes);

  int dim() const noexcept { return dim_; }
  double min(int axis) const { return mins_[axis]; }
  double max(int axis) const { return maxs_[axis]; }
  std::size_t count(int axis) const { return counts_[axis]; }
  double spacing(int axis) const { return spacings_[axis]; }
  std::size_t stride(int axis) const { return strides_[axis]; }
  AxisSpec axis(int a) const { return {mins_[a], maxs_[a], counts_[a]}; }
  std::vector<AxisSpec> axes() const;

  std::size_t node_count() const noexcept { return node_count_; }
  double cell_volume() const;

  /// Coordinate of node k along an axis. Nodes within rounding of the origin
  /// snap to exactly zero so that sign tests on coordinates are stable.
  double coordinate(int axis, std::size_t k) const;

  std::size_t flat_index(std::span<const std::size_t> multi) const;
  void multi_index(std::size_t flat, std::span<std::size_t> out) const;
  void node_point(std::size_t flat, std::span<double> out) const;

  /// Nearest node index along an axis (clamped into range).
  std::size_t nearest_index(int axis, double x) const;

  bool operator==(const Grid& other) const;

 private:
  int dim_ = 0;
  std::size_t node_count_ = 0;
  std::array<double, kMaxDim> mins_{};
  std::array<double, kMaxDim> maxs_{};
  std::array<double, kMaxDim> spacings_{};
  std::array<std::size_t, kMaxDim> counts_{};
  std::array<std::size_t, kMaxDim> strides_{};
};

/// One value per grid node for each of an ascending list of time stamps.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(Grid grid, std::vector<double> times, std::vector<std::vector<double>> slices);

  /// Single-stamp field filled from f(point).
  template <class F>
  static ScalarField sample(const Grid& grid, double t, F&& f) {
    std::vector<double> values(grid.node_count());
    std::array<double, kMaxDim> p{};
    for (std::size_t n = 0; n < values.size(); ++n) {
      grid.node_point(n, p);
      values[n] = f(std::span<const double>(p.data(), static_cast<std::size_t>(grid.dim())));
    }
    return ScalarField(grid, {t}, {std::move(values)});
  }

  const Grid& grid() const noexcept { return grid_; }
  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t stamp_count() const noexcept { return times_.size(); }
  std::span<const double> slice(std::size_t stamp) const { return slices_.at(stamp); }
  std::span<double> slice_mut(std::size_t stamp) { return slices_.at(stamp); }

  /// Index of the stamp equal to t, or throws Error(domain).
  std::size_t stamp_index(double t) const;

  /// Multilinear in space, linear in time. Points up to one spacing outside the
  /// grid are clamped onto the boundary face; farther points throw Error(domain).
  double interpolate(double t, std::span<const double> p) const;
  double interpolate_stamp(std::size_t stamp, std::span<const double> p) const;

  /// Values at time t (linear between bracketing stamps).
  std::vector<double> values_at(double t) const;

  /// Field holding only the stamp(s) selected.
  ScalarField single_stamp(std::size_t stamp) const;

 private:
  Grid grid_;
  std::vector<double> times_;
  std::vector<std::vector<double>> slices_;
};

/// Multilinear interpolation of one node array (no time axis).
double interpolate_values(const Grid& grid, std::span<const double> values, std::span<const double> p);

struct OneSided {
  double minus = 0.0;
  double plus = 0.0;
};

/// Ghost-node rule on a boundary face.
enum class GhostRule {
  linear,    // ghost = 2 * edge - inner
  constant,  // ghost = edge (zero normal slope)
};

/// First-order one-sided differences at a node. Missing boundary neighbours
/// come from the ghost rule, linear extrapolation by default.
inline OneSided one_sided_difference(const Grid& grid, std::span<const double> values,
                                     std::size_t flat, std::size_t k, int axis,
                                     GhostRule rule = GhostRule::linear) {
  const std::size_t s = grid.stride(axis);
  const std::size_t n = grid.count(axis);
  const double f0 = values[flat];
  const bool lin = rule == GhostRule::linear;
  const double left = k > 0 ? values[flat - s] : (lin ? 2.0 * f0 - values[flat + s] : f0);
  const double right = k + 1 < n ? values[flat + s] : (lin ? 2.0 * f0 - values[flat - s] : f0);
  const double h = grid.spacing(axis);
  return {(f0 - left) / h, (right - f0) / h};
}

struct UpwindGradients {
  std::array<std::vector<double>, kMaxDim> minus;
  std::array<std::vector<double>, kMaxDim> plus;
};

UpwindGradients upwind_gradients(const ScalarField& field, std::size_t stamp);

/// SRFIELD v1 dump: one ASCII header line followed by little-endian float64
/// values, one time slice after another, row-major. `extra` keys are appended
/// to the header (e.g. a sentinel annotation) and returned by read_field_header.
void write_field(const std::string& path, const ScalarField& field,
                 const std::map<std::string, std::string>& extra = {});
ScalarField read_field(const std::string& path, std::map<std::string, std::string>* extra = nullptr);

std::string format_double(double v);

}  // namespace softreach
