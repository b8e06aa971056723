#include "softreach/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "softreach/error.hpp"

namespace softreach {

Grid Grid::build(std::span<const AxisSpec> axes) {
  require(axes.size() >= 2 && axes.size() <= static_cast<std::size_t>(kMaxDim),
          "grid dimension must be between 2 and 4, got " + std::to_string(axes.size()));
  Grid g;
  g.dim_ = static_cast<int>(axes.size());
  for (int i = 0; i < g.dim_; ++i) {
    const AxisSpec& a = axes[i];
    require(std::isfinite(a.min) && std::isfinite(a.max),
            "axis " + std::to_string(i) + ": bounds must be finite");
    require(a.max > a.min, "axis " + std::to_string(i) + ": max must exceed min");
    require(a.count >= 3, "axis " + std::to_string(i) + ": at least 3 nodes required");
    g.mins_[i] = a.min;
    g.maxs_[i] = a.max;
    g.counts_[i] = a.count;
    g.spacings_[i] = (a.max - a.min) / static_cast<double>(a.count - 1);
  }
  std::size_t stride = 1;
  for (int i = g.dim_ - 1; i >= 0; --i) {
    g.strides_[i] = stride;
    stride *= g.counts_[i];
  }
  g.node_count_ = stride;
  return g;
}

std::vector<AxisSpec> Grid::axes() const {
  std::vector<AxisSpec> out;
  for (int i = 0; i < dim_; ++i) out.push_back(axis(i));
  return out;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int i = 0; i < dim_; ++i) v *= spacings_[i];
  return v;
}

double Grid::coordinate(int axis, std::size_t k) const {
  const double x = mins_[axis] + static_cast<double>(k) * spacings_[axis];
  if (std::abs(x) < 1e-9 * spacings_[axis]) return 0.0;
  return x;
}

std::size_t Grid::flat_index(std::span<const std::size_t> multi) const {
  std::size_t flat = 0;
  for (int i = 0; i < dim_; ++i) flat += multi[i] * strides_[i];
  return flat;
}

void Grid::multi_index(std::size_t flat, std::span<std::size_t> out) const {
  for (int i = 0; i < dim_; ++i) {
    out[i] = flat / strides_[i];
    flat -= out[i] * strides_[i];
  }
}

void Grid::node_point(std::size_t flat, std::span<double> out) const {
  for (int i = 0; i < dim_; ++i) {
    const std::size_t k = flat / strides_[i];
    flat -= k * strides_[i];
    out[i] = coordinate(i, k);
  }
}

std::size_t Grid::nearest_index(int axis, double x) const {
  const double u = std::round((x - mins_[axis]) / spacings_[axis]);
  if (u <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(u), counts_[axis] - 1);
}

bool Grid::operator==(const Grid& other) const {
  if (dim_ != other.dim_) return false;
  for (int i = 0; i < dim_; ++i) {
    if (mins_[i] != other.mins_[i] || maxs_[i] != other.maxs_[i] || counts_[i] != other.counts_[i])
      return false;
  }
  return true;
}

ScalarField::ScalarField(Grid grid, std::vector<double> times, std::vector<std::vector<double>> slices)
    : grid_(std::move(grid)), times_(std::move(times)), slices_(std::move(slices)) {
  require(!times_.empty(), "field needs at least one time stamp");
  require(times_.size() == slices_.size(), "field: one value array per time stamp required");
  for (std::size_t i = 1; i < times_.size(); ++i)
    require(times_[i] > times_[i - 1], "field: time stamps must be strictly ascending");
  for (const auto& s : slices_)
    require(s.size() == grid_.node_count(), "field: value array size does not match grid");
}

std::size_t ScalarField::stamp_index(double t) const {
  for (std::size_t i = 0; i < times_.size(); ++i)
    if (times_[i] == t) return i;
  fail(ErrorKind::domain, "no stored time stamp at t=" + format_double(t));
}

namespace {

struct Bracket {
  std::size_t lo = 0;
  double w = 0.0;  // weight of lo + 1
};

// Cell and fractional offset along one axis after clamping.
Bracket axis_bracket(const Grid& grid, int axis, double x) {
  const double h = grid.spacing(axis);
  const double lo = grid.min(axis);
  const double hi = grid.max(axis);
  const double slack = h * (1.0 + 1e-9);
  if (!(x >= lo - slack && x <= hi + slack)) {
    fail(ErrorKind::domain, "point coordinate " + format_double(x) + " on axis " + std::to_string(axis) +
                                " lies outside [" + format_double(lo) + ", " + format_double(hi) + "]");
  }
  double u = (std::clamp(x, lo, hi) - lo) / h;
  const double r = std::round(u);
  if (std::abs(u - r) < 1e-10) u = r;
  const std::size_t n = grid.count(axis);
  std::size_t k = static_cast<std::size_t>(std::floor(u));
  if (k >= n - 1) k = n - 2;
  return {k, u - static_cast<double>(k)};
}

}  // namespace

double interpolate_values(const Grid& grid, std::span<const double> values, std::span<const double> p) {
  const int d = grid.dim();
  require(static_cast<int>(p.size()) >= d, "interpolation point has too few coordinates");
  std::array<Bracket, kMaxDim> br{};
  std::size_t base = 0;
  for (int i = 0; i < d; ++i) {
    br[i] = axis_bracket(grid, i, p[i]);
    base += br[i].lo * grid.stride(i);
  }
  double acc = 0.0;
  const unsigned corners = 1u << d;
  for (unsigned c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = base;
    for (int i = 0; i < d; ++i) {
      if (c & (1u << i)) {
        w *= br[i].w;
        idx += grid.stride(i);
      } else {
        w *= 1.0 - br[i].w;
      }
    }
    if (w != 0.0) acc += w * values[idx];
  }
  return acc;
}

double ScalarField::interpolate_stamp(std::size_t stamp, std::span<const double> p) const {
  return interpolate_values(grid_, slices_.at(stamp), p);
}

double ScalarField::interpolate(double t, std::span<const double> p) const {
  const double t0 = times_.front();
  const double t1 = times_.back();
  if (!(t >= t0 - 1e-12 && t <= t1 + 1e-12))
    fail(ErrorKind::domain, "time " + format_double(t) + " outside stored range");
  t = std::clamp(t, t0, t1);
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return interpolate_stamp(0, p);
  const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  const std::size_t lo = hi - 1;
  if (times_[lo] == t || hi == times_.size()) return interpolate_stamp(lo, p);
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return (1.0 - w) * interpolate_stamp(lo, p) + w * interpolate_stamp(hi, p);
}

std::vector<double> ScalarField::values_at(double t) const {
  const double t0 = times_.front();
  const double t1 = times_.back();
  if (!(t >= t0 - 1e-12 && t <= t1 + 1e-12))
    fail(ErrorKind::domain, "time " + format_double(t) + " outside stored range");
  t = std::clamp(t, t0, t1);
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return slices_.front();
  const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  const std::size_t lo = hi - 1;
  if (times_[lo] == t || hi == times_.size()) return slices_[lo];
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  std::vector<double> out(grid_.node_count());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = (1.0 - w) * slices_[lo][n] + w * slices_[hi][n];
  return out;
}

ScalarField ScalarField::single_stamp(std::size_t stamp) const {
  return ScalarField(grid_, {times_.at(stamp)}, {slices_.at(stamp)});
}

UpwindGradients upwind_gradients(const ScalarField& field, std::size_t stamp) {
  const Grid& g = field.grid();
  const auto values = field.slice(stamp);
  UpwindGradients out;
  for (int a = 0; a < g.dim(); ++a) {
    out.minus[a].resize(g.node_count());
    out.plus[a].resize(g.node_count());
  }
  std::array<std::size_t, kMaxDim> multi{};
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    g.multi_index(n, multi);
    for (int a = 0; a < g.dim(); ++a) {
      const OneSided d = one_sided_difference(g, values, n, multi[a], a);
      out.minus[a][n] = d.minus;
      out.plus[a][n] = d.plus;
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& fmt) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += fmt(xs[i]);
  }
  return s;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') fail(ErrorKind::io, "SRFIELD: bad number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

void write_field(const std::string& path, const ScalarField& field,
                 const std::map<std::string, std::string>& extra) {
  const Grid& g = field.grid();
  std::vector<std::size_t> counts;
  std::vector<double> mins, maxs;
  for (int i = 0; i < g.dim(); ++i) {
    counts.push_back(g.count(i));
    mins.push_back(g.min(i));
    maxs.push_back(g.max(i));
  }
  std::string header = "SRFIELD v1 dim=" + std::to_string(g.dim());
  header += " counts=" + join(counts, [](std::size_t c) { return std::to_string(c); });
  header += " mins=" + join(mins, format_double);
  header += " maxs=" + join(maxs, format_double);
  header += " times=" + join(field.times(), format_double);
  for (const auto& [k, v] : extra) header += " " + k + "=" + v;
  header += '\n';

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::vector<unsigned char> buf;
  for (std::size_t s = 0; s < field.stamp_count(); ++s) {
    const auto values = field.slice(s);
    buf.resize(values.size() * 8);
    for (std::size_t n = 0; n < values.size(); ++n) {
      const auto bits = std::bit_cast<std::uint64_t>(values[n]);
      for (int b = 0; b < 8; ++b) buf[n * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) fail(ErrorKind::io, "write to '" + path + "' failed");
}

ScalarField read_field(const std::string& path, std::map<std::string, std::string>* extra) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  std::stringstream ss(header);
  std::string magic, version;
  ss >> magic >> version;
  if (magic != "SRFIELD" || version != "v1") fail(ErrorKind::io, "'" + path + "' is not an SRFIELD v1 file");
  std::map<std::string, std::string> kv;
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) fail(ErrorKind::io, "SRFIELD: malformed header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"dim", "counts", "mins", "maxs", "times"})
    if (!kv.count(key)) fail(ErrorKind::io, std::string("SRFIELD: header lacks '") + key + "'");
  const int dim = std::stoi(kv["dim"]);
  const auto counts = parse_doubles(kv["counts"]);
  const auto mins = parse_doubles(kv["mins"]);
  const auto maxs = parse_doubles(kv["maxs"]);
  auto times = parse_doubles(kv["times"]);
  if (static_cast<int>(counts.size()) != dim || static_cast<int>(mins.size()) != dim ||
      static_cast<int>(maxs.size()) != dim)
    fail(ErrorKind::io, "SRFIELD: axis lists disagree with dim");
  std::vector<AxisSpec> axes;
  for (int i = 0; i < dim; ++i) axes.push_back({mins[i], maxs[i], static_cast<std::size_t>(counts[i])});
  Grid grid = Grid::build(axes);

  std::vector<std::vector<double>> slices(times.size(), std::vector<double>(grid.node_count()));
  std::vector<unsigned char> buf(grid.node_count() * 8);
  for (auto& s : slices) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      fail(ErrorKind::io, "SRFIELD: '" + path + "' is truncated");
    for (std::size_t n = 0; n < s.size(); ++n) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[n * 8 + b]) << (8 * b);
      s[n] = std::bit_cast<double>(bits);
    }
  }
  if (extra) {
    extra->clear();
    for (const auto& [k, v] : kv)
      if (k != "dim" && k != "counts" && k != "mins" && k != "maxs" && k != "times") (*extra)[k] = v;
  }
  return ScalarField(std::move(grid), std::move(times), std::move(slices));
}

}  // namespace softreach
