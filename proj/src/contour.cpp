#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>

#include "json.hpp"

#include "softreach/error.hpp"
#include "softreach/geometry.hpp"

namespace softreach {

ScalarField slice_plane(const ScalarField& field, std::size_t stamp, const SliceSpec& spec) {
  const Grid& g = field.grid();
  const int d = g.dim();
  require(spec.axis_x != spec.axis_y && spec.axis_x >= 0 && spec.axis_y >= 0 && spec.axis_x < d &&
              spec.axis_y < d,
          "slice: invalid plane axes");
  if (d == 2 && spec.axis_x == 0 && spec.axis_y == 1) return field.single_stamp(stamp);
  for (int a = 0; a < d; ++a) {
    if (a == spec.axis_x || a == spec.axis_y) continue;
    require(spec.fixed.count(a) == 1, "slice: no fixed value for axis " + std::to_string(a));
  }
  const std::array<AxisSpec, 2> axes{g.axis(spec.axis_x), g.axis(spec.axis_y)};
  Grid plane = Grid::build(axes);
  std::vector<double> values(plane.node_count());
  std::array<double, kMaxDim> p{};
  for (const auto& [a, v] : spec.fixed) p[a] = v;
  const auto src = field.slice(stamp);
  for (std::size_t i = 0; i < plane.count(0); ++i) {
    for (std::size_t j = 0; j < plane.count(1); ++j) {
      p[spec.axis_x] = plane.coordinate(0, i);
      p[spec.axis_y] = plane.coordinate(1, j);
      values[i * plane.count(1) + j] = interpolate_values(g, src, std::span<const double>(p.data(), d));
    }
  }
  return ScalarField(plane, {field.times()[stamp]}, {std::move(values)});
}

std::vector<Polyline> marching_squares(const Grid& grid, std::span<const double> values, double level) {
  require(grid.dim() == 2, "marching_squares needs a 2-D grid");
  const std::size_t nx = grid.count(0);
  const std::size_t ny = grid.count(1);
  auto node = [&](std::size_t i, std::size_t j) { return i * ny + j; };
  auto inside = [&](std::size_t i, std::size_t j) { return values[node(i, j)] <= level; };
  // Edge ids: 2*node for the edge towards +x, 2*node+1 for the edge towards +y.
  std::unordered_map<std::size_t, Vertex> vertex;
  auto edge_vertex = [&](std::size_t id) -> Vertex {
    auto it = vertex.find(id);
    if (it != vertex.end()) return it->second;
    const std::size_t n = id / 2;
    const std::size_t i = n / ny, j = n % ny;
    const std::size_t i2 = (id % 2 == 0) ? i + 1 : i;
    const std::size_t j2 = (id % 2 == 0) ? j : j + 1;
    const double va = values[node(i, j)], vb = values[node(i2, j2)];
    const double t = (level - va) / (vb - va);
    const Vertex pa{grid.coordinate(0, i), grid.coordinate(1, j)};
    const Vertex pb{grid.coordinate(0, i2), grid.coordinate(1, j2)};
    Vertex v{pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])};
    vertex.emplace(id, v);
    return v;
  };

  std::vector<std::array<std::size_t, 2>> segments;
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const bool b0 = inside(i, j), b1 = inside(i + 1, j), b2 = inside(i + 1, j + 1), b3 = inside(i, j + 1);
      const std::array<std::size_t, 4> e{2 * node(i, j), 2 * node(i + 1, j) + 1, 2 * node(i, j + 1),
                                         2 * node(i, j) + 1};
      const std::array<bool, 4> crossed{b0 != b1, b1 != b2, b3 != b2, b0 != b3};
      const int n = crossed[0] + crossed[1] + crossed[2] + crossed[3];
      if (n == 2) {
        std::array<std::size_t, 2> s{};
        int k = 0;
        for (int q = 0; q < 4; ++q)
          if (crossed[q]) s[k++] = e[q];
        segments.push_back(s);
      } else if (n == 4) {
        const double centre = 0.25 * (values[node(i, j)] + values[node(i + 1, j)] + values[node(i + 1, j + 1)] +
                                      values[node(i, j + 1)]);
        if ((centre <= level) == b0) {
          segments.push_back({e[0], e[1]});
          segments.push_back({e[2], e[3]});
        } else {
          segments.push_back({e[3], e[0]});
          segments.push_back({e[1], e[2]});
        }
      }
    }
  }

  std::unordered_map<std::size_t, std::vector<std::size_t>> by_edge;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    by_edge[segments[s][0]].push_back(s);
    by_edge[segments[s][1]].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  std::vector<Polyline> out;

  auto walk = [&](std::size_t start_seg, std::size_t start_edge) {
    std::vector<std::size_t> edges{start_edge};
    std::size_t seg = start_seg;
    std::size_t cur = start_edge;
    while (true) {
      used[seg] = true;
      const std::size_t next = segments[seg][0] == cur ? segments[seg][1] : segments[seg][0];
      edges.push_back(next);
      cur = next;
      std::size_t follow = segments.size();
      for (std::size_t cand : by_edge[cur])
        if (!used[cand]) follow = cand;
      if (follow == segments.size()) break;
      seg = follow;
    }
    Polyline pl;
    pl.closed = edges.size() > 2 && edges.front() == edges.back();
    if (pl.closed) edges.pop_back();
    for (std::size_t id : edges) pl.points.push_back(edge_vertex(id));
    if (pl.closed) pl.points.push_back(pl.points.front());
    out.push_back(std::move(pl));
  };

  // Open chains start at edges owned by one segment (grid boundary); the rest are loops.
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    for (std::size_t end : segments[s]) {
      if (by_edge[end].size() == 1 && !used[s]) walk(s, end);
    }
  }
  for (std::size_t s = 0; s < segments.size(); ++s)
    if (!used[s]) walk(s, segments[s][0]);
  return out;
}

std::vector<Polyline> extract_contour(const ScalarField& field, std::size_t stamp, double level,
                                      const SliceSpec& spec) {
  const ScalarField plane = slice_plane(field, stamp, spec);
  return marching_squares(plane.grid(), plane.slice(0), level);
}

namespace {

struct Segment {
  Vertex a, b;
};

std::vector<Segment> scaled_segments(const std::vector<Polyline>& lines, std::array<double, 2> s) {
  std::vector<Segment> segs;
  for (const auto& pl : lines) {
    for (std::size_t k = 0; k + 1 < pl.points.size(); ++k) {
      const Vertex a{pl.points[k][0] * s[0], pl.points[k][1] * s[1]};
      const Vertex b{pl.points[k + 1][0] * s[0], pl.points[k + 1][1] * s[1]};
      segs.push_back({a, b});
    }
  }
  return segs;
}

double point_segment_distance(const Vertex& p, const Segment& s) {
  const double dx = s.b[0] - s.a[0], dy = s.b[1] - s.a[1];
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p[0] - s.a[0]) * dx + (p[1] - s.a[1]) * dy) / len2, 0.0, 1.0);
  const double ex = s.a[0] + t * dx - p[0], ey = s.a[1] + t * dy - p[1];
  return std::sqrt(ex * ex + ey * ey);
}

}  // namespace

ScalarField signed_distance_field(const ScalarField& field2d, std::size_t stamp, double level,
                                  std::array<double, 2> scales) {
  const Grid& g = field2d.grid();
  require(g.dim() == 2, "signed_distance_field needs a 2-D field");
  const auto src = field2d.slice(stamp);
  const auto segs = scaled_segments(marching_squares(g, src, level), scales);
  const double diag = std::hypot((g.max(0) - g.min(0)) * scales[0], (g.max(1) - g.min(1)) * scales[1]);
  std::vector<double> out(g.node_count());
  for (std::size_t i = 0; i < g.count(0); ++i) {
    for (std::size_t j = 0; j < g.count(1); ++j) {
      const std::size_t n = i * g.count(1) + j;
      const Vertex p{g.coordinate(0, i) * scales[0], g.coordinate(1, j) * scales[1]};
      double d = segs.empty() ? diag : std::numeric_limits<double>::infinity();
      for (const auto& s : segs) d = std::min(d, point_segment_distance(p, s));
      out[n] = src[n] <= level ? -d : d;
    }
  }
  return ScalarField(g, {field2d.times()[stamp]}, {std::move(out)});
}

BoundaryError boundary_error(const ScalarField& reference, const ScalarField& candidate, std::size_t sample_count,
                             std::array<double, 2> scales, std::uint64_t seed) {
  require(reference.grid().dim() == 2 && candidate.grid().dim() == 2, "boundary_error compares 2-D fields");
  require(sample_count > 0, "boundary_error: sample_count must be positive");
  const auto lines = marching_squares(reference.grid(), reference.slice(0), 0.0);
  std::vector<Segment> segs;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& pl : lines) {
    for (std::size_t k = 0; k + 1 < pl.points.size(); ++k) {
      const Segment s{pl.points[k], pl.points[k + 1]};
      const double len = std::hypot((s.b[0] - s.a[0]) * scales[0], (s.b[1] - s.a[1]) * scales[1]);
      if (len <= 0.0) continue;
      total += len;
      segs.push_back(s);
      cumulative.push_back(total);
    }
  }
  if (segs.empty()) fail(ErrorKind::validation, "boundary_error: reference zero contour is empty");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, total);
  BoundaryError err;
  double sum = 0.0;
  for (std::size_t k = 0; k < sample_count; ++k) {
    const double u = uni(rng);
    std::size_t idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                               cumulative.begin());
    idx = std::min(idx, segs.size() - 1);
    const double start = idx == 0 ? 0.0 : cumulative[idx - 1];
    const double len = cumulative[idx] - start;
    const double w = std::clamp((u - start) / len, 0.0, 1.0);
    const Segment& s = segs[idx];
    const std::array<double, 2> p{s.a[0] + w * (s.b[0] - s.a[0]), s.a[1] + w * (s.b[1] - s.a[1])};
    const double e = std::abs(candidate.interpolate_stamp(0, p));
    sum += e;
    err.max = std::max(err.max, e);
  }
  err.samples = sample_count;
  err.mean = sum / static_cast<double>(sample_count);
  return err;
}

std::string contours_json(double level, const std::vector<ContourSlice>& slices) {
  nlohmann::ordered_json doc;
  doc["level"] = level;
  doc["slices"] = nlohmann::ordered_json::array();
  for (const auto& s : slices) {
    nlohmann::ordered_json js;
    js["fixed"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.fixed) js["fixed"][k] = v;
    js["polylines"] = nlohmann::ordered_json::array();
    for (const auto& pl : s.polylines) {
      nlohmann::ordered_json pts = nlohmann::ordered_json::array();
      for (const auto& p : pl.points) pts.push_back({p[0], p[1]});
      js["polylines"].push_back(std::move(pts));
    }
    doc["slices"].push_back(std::move(js));
  }
  return doc.dump();
}

}  // namespace softreach
