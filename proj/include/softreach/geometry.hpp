#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "softreach/grid.hpp"

namespace softreach {

/// Signed-distance evaluator for a closed set: negative inside, zero on the
/// boundary, positive outside. Boxes use the max-norm distance, which composes
/// exactly under min/max.
class ImplicitSet {
 public:
  enum class Kind { axis_box, intersection, set_union, complement, sampled };

  /// Per-axis closed intervals; infinite bounds leave an axis unconstrained.
  /// Points may carry more coordinates than the box has axes (e.g. a budget
  /// coordinate); the extra ones are ignored.
  static ImplicitSet box(std::vector<double> lo, std::vector<double> hi);
  static ImplicitSet intersection(const ImplicitSet& a, const ImplicitSet& b);
  static ImplicitSet set_union(const ImplicitSet& a, const ImplicitSet& b);
  static ImplicitSet complement(const ImplicitSet& a);
  static ImplicitSet sampled(ScalarField field);

  Kind kind() const;
  double eval(double t, std::span<const double> p) const;

  /// False when any operand is a sampled field with more than one time stamp.
  bool time_invariant() const;

  /// Box bounds (only meaningful for axis_box).
  const std::vector<double>& lo() const;
  const std::vector<double>& hi() const;

 private:
  struct Node;
  explicit ImplicitSet(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// One membership bit per grid node.
struct SetMask {
  Grid grid;
  std::vector<std::uint8_t> bits;

  static SetMask filled(const Grid& g, bool value);
  std::size_t count() const;
  bool operator==(const SetMask&) const = default;
};

SetMask sublevel_mask(const ScalarField& field, std::size_t stamp, double level);
SetMask mask_complement(const SetMask& a);
SetMask mask_intersection(const SetMask& a, const SetMask& b);
SetMask mask_union(const SetMask& a, const SetMask& b);
bool mask_subset(const SetMask& a, const SetMask& b, std::size_t* violations = nullptr);

/// Node count times cell volume.
double measure(const SetMask& mask);
double symmetric_difference_measure(const SetMask& a, const SetMask& b);

/// Hausdorff distance between the boundary nodes of two masks, in the
/// max-norm. Throws on empty operands or mismatched grids.
double hausdorff_distance(const SetMask& a, const SetMask& b);

/// Field to JSON-friendly mask dump: 0/1 values on the mask grid.
ScalarField mask_field(const SetMask& mask, double t = 0.0);

using Vertex = std::array<double, 2>;

struct Polyline {
  std::vector<Vertex> points;
  bool closed = false;
};

/// Selects a 2-D plane of a field: the two free axes plus fixed values for
/// every other axis (interpolated).
struct SliceSpec {
  int axis_x = 0;
  int axis_y = 1;
  std::map<int, double> fixed;
};

ScalarField slice_plane(const ScalarField& field, std::size_t stamp, const SliceSpec& spec);

/// Marching squares on a 2-D node array. Nodes with value <= level are inside.
/// Saddle cells are resolved by the sign of the cell-centre average.
std::vector<Polyline> marching_squares(const Grid& grid2d, std::span<const double> values, double level);

std::vector<Polyline> extract_contour(const ScalarField& field, std::size_t stamp, double level,
                                      const SliceSpec& spec = {});

/// Signed distance to the `level` contour of a 2-D field, measured in the
/// metric where axis i is multiplied by scales[i]; negative where value <= level.
ScalarField signed_distance_field(const ScalarField& field2d, std::size_t stamp, double level,
                                  std::array<double, 2> scales = {1.0, 1.0});

struct BoundaryError {
  double mean = 0.0;
  double max = 0.0;
  std::size_t samples = 0;
};

/// Samples points uniformly by (scaled) arc length on the zero contour of
/// `reference` and reports the mean and maximum of |candidate| there.
/// Deterministic for a given seed. Throws if the reference contour is empty.
BoundaryError boundary_error(const ScalarField& reference, const ScalarField& candidate,
                             std::size_t sample_count, std::array<double, 2> scales = {1.0, 1.0},
                             std::uint64_t seed = 0);

struct ContourSlice {
  std::map<std::string, double> fixed;
  std::vector<Polyline> polylines;
};

std::string contours_json(double level, const std::vector<ContourSlice>& slices);

}  // namespace softreach
