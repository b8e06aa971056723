#include "softreach/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "softreach/error.hpp"

namespace softreach {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 190, kTop = 40, kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

SvgPlot::SvgPlot(std::array<double, 2> x_range, std::array<double, 2> y_range, std::string x_label,
                 std::string y_label, std::string title)
    : xr_(x_range), yr_(y_range), xl_(std::move(x_label)), yl_(std::move(y_label)), title_(std::move(title)) {
  require(xr_[0] < xr_[1] && yr_[0] < yr_[1], "svg: empty plot range");
}

double SvgPlot::px(double x) const { return kLeft + (x - xr_[0]) / (xr_[1] - xr_[0]) * (kWidth - kLeft - kRight); }
double SvgPlot::py(double y) const {
  return kHeight - kBottom - (y - yr_[0]) / (yr_[1] - yr_[0]) * (kHeight - kTop - kBottom);
}

void SvgPlot::add_box(std::array<double, 2> lo, std::array<double, 2> hi, const std::string& fill,
                      const std::string& stroke, const std::string& label, double opacity) {
  const double x0 = px(std::max(lo[0], xr_[0])), x1 = px(std::min(hi[0], xr_[1]));
  const double y0 = py(std::min(hi[1], yr_[1])), y1 = py(std::max(lo[1], yr_[0]));
  std::ostringstream os;
  os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0) << "\" height=\""
     << num(y1 - y0) << "\" fill=\"" << fill << "\" fill-opacity=\"" << num(opacity) << "\" stroke=\"" << stroke
     << "\"/>";
  body_.push_back(os.str());
  legend_.push_back({fill, label, true});
}

void SvgPlot::add_polylines(const std::vector<Polyline>& lines, const std::string& color, const std::string& label,
                            double width) {
  for (const auto& l : lines) {
    if (l.points.size() < 2) continue;
    std::ostringstream os;
    os << (l.closed ? "<polygon" : "<polyline") << " points=\"";
    for (std::size_t i = 0; i < l.points.size(); ++i) {
      os << (i ? " " : "") << num(px(l.points[i][0])) << ',' << num(py(l.points[i][1]));
    }
    os << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(width) << "\"/>";
    body_.push_back(os.str());
  }
  legend_.push_back({color, label, false});
}

void SvgPlot::add_marker(Vertex at, const std::string& color, const std::string& label) {
  std::ostringstream os;
  os << "<circle cx=\"" << num(px(at[0])) << "\" cy=\"" << num(py(at[1])) << "\" r=\"4\" fill=\"" << color << "\"/>";
  body_.push_back(os.str());
  legend_.push_back({color, label, true});
}

void SvgPlot::add_note(const std::string& text) { notes_.push_back(text); }

std::string SvgPlot::render() const {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double x0 = px(xr_[0]), x1 = px(xr_[1]), y0 = py(yr_[1]), y1 = py(yr_[0]);
  os << "<defs><clipPath id=\"plot\"><rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0)
     << "\" height=\"" << num(y1 - y0) << "\"/></clipPath></defs>\n";
  os << "<g clip-path=\"url(#plot)\">\n";
  for (const auto& b : body_) os << b << '\n';
  os << "</g>\n";
  os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0) << "\" height=\""
     << num(y1 - y0) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xr_[0] + (xr_[1] - xr_[0]) * i / 4.0;
    const double yv = yr_[0] + (yr_[1] - yr_[0]) * i / 4.0;
    os << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(y1 + 16) << "\" text-anchor=\"middle\">" << tick(xv)
       << "</text>\n";
    os << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << num(0.5 * (x0 + x1)) << "\" y=\"" << num(y1 + 36) << "\" text-anchor=\"middle\">"
     << escape(xl_) << "</text>\n";
  os << "<text transform=\"translate(18," << num(0.5 * (y0 + y1)) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(yl_) << "</text>\n";
  if (!title_.empty())
    os << "<text x=\"" << num(0.5 * (x0 + x1)) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
       << escape(title_) << "</text>\n";
  double ly = y0 + 8;
  for (const auto& l : legend_) {
    if (l.filled) {
      os << "<rect x=\"" << num(x1 + 14) << "\" y=\"" << num(ly - 8) << "\" width=\"14\" height=\"10\" fill=\""
         << l.color << "\" fill-opacity=\"0.6\"/>";
    } else {
      os << "<line x1=\"" << num(x1 + 14) << "\" y1=\"" << num(ly - 3) << "\" x2=\"" << num(x1 + 28) << "\" y2=\""
         << num(ly - 3) << "\" stroke=\"" << l.color << "\" stroke-width=\"2\"/>";
    }
    os << "<text x=\"" << num(x1 + 34) << "\" y=\"" << num(ly + 1) << "\">" << escape(l.label) << "</text>\n";
    ly += 18;
  }
  for (const auto& n : notes_) {
    os << "<text x=\"" << num(x1 + 14) << "\" y=\"" << num(ly + 1) << "\" font-style=\"italic\">" << escape(n)
       << "</text>\n";
    ly += 18;
  }
  os << "</svg>\n";
  return os.str();
}

void SvgPlot::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
  out << render();
}

std::string SvgPlot::palette(std::size_t i) {
  static const char* colors[] = {"#1b9e77", "#7570b3", "#d95f02", "#e7298a", "#66a61e", "#e6ab02", "#a6761d"};
  return colors[i % 7];
}

}  // namespace softreach
