#pragma once

#include <array>
#include <string>
#include <vector>

#include "softreach/geometry.hpp"

namespace softreach {

/// Minimal 2-D plot: filled boxes, polylines, markers, notes and a legend.
/// Output is deterministic for identical input.
class SvgPlot {
 public:
  SvgPlot(std::array<double, 2> x_range, std::array<double, 2> y_range, std::string x_label, std::string y_label,
          std::string title = "");

  void add_box(std::array<double, 2> lo, std::array<double, 2> hi, const std::string& fill, const std::string& stroke,
               const std::string& label, double opacity = 0.35);
  void add_polylines(const std::vector<Polyline>& lines, const std::string& color, const std::string& label,
                     double width = 1.5);
  void add_marker(Vertex at, const std::string& color, const std::string& label);
  void add_note(const std::string& text);

  std::string render() const;
  void save(const std::string& path) const;

  /// Distinct stroke colour for the i-th series.
  static std::string palette(std::size_t i);

 private:
  struct Legend {
    std::string color;
    std::string label;
    bool filled;
  };
  std::array<double, 2> xr_, yr_;
  std::string xl_, yl_, title_;
  std::vector<std::string> body_;
  std::vector<Legend> legend_;
  std::vector<std::string> notes_;

  double px(double x) const;
  double py(double y) const;
};

}  // namespace softreach
