#include "softreach/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "softreach/error.hpp"

namespace softreach {

struct ImplicitSet::Node {
  Kind kind = Kind::axis_box;
  std::vector<double> lo, hi;
  std::shared_ptr<const Node> a, b;
  ScalarField field;
};

ImplicitSet ImplicitSet::box(std::vector<double> lo, std::vector<double> hi) {
  require(lo.size() == hi.size(), "box: lower and upper bound lists differ in length");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    require(!std::isnan(lo[i]) && !std::isnan(hi[i]), "box: NaN bound");
    require(lo[i] <= hi[i], "box: lower bound exceeds upper bound on axis " + std::to_string(i));
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::axis_box;
  n->lo = std::move(lo);
  n->hi = std::move(hi);
  return ImplicitSet(std::move(n));
}

ImplicitSet ImplicitSet::intersection(const ImplicitSet& a, const ImplicitSet& b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::intersection;
  n->a = a.node_;
  n->b = b.node_;
  return ImplicitSet(std::move(n));
}

ImplicitSet ImplicitSet::set_union(const ImplicitSet& a, const ImplicitSet& b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::set_union;
  n->a = a.node_;
  n->b = b.node_;
  return ImplicitSet(std::move(n));
}

ImplicitSet ImplicitSet::complement(const ImplicitSet& a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::complement;
  n->a = a.node_;
  return ImplicitSet(std::move(n));
}

ImplicitSet ImplicitSet::sampled(ScalarField field) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::sampled;
  n->field = std::move(field);
  return ImplicitSet(std::move(n));
}

ImplicitSet::Kind ImplicitSet::kind() const { return node_->kind; }
const std::vector<double>& ImplicitSet::lo() const { return node_->lo; }
const std::vector<double>& ImplicitSet::hi() const { return node_->hi; }

double ImplicitSet::eval(double t, std::span<const double> p) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::axis_box: {
      require(p.size() >= n.lo.size(), "sdf_eval: point has fewer coordinates than the box");
      double d = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n.lo.size(); ++i) d = std::max(d, std::max(n.lo[i] - p[i], p[i] - n.hi[i]));
      return d;
    }
    case Kind::intersection:
      return std::max(ImplicitSet(n.a).eval(t, p), ImplicitSet(n.b).eval(t, p));
    case Kind::set_union:
      return std::min(ImplicitSet(n.a).eval(t, p), ImplicitSet(n.b).eval(t, p));
    case Kind::complement:
      return -ImplicitSet(n.a).eval(t, p);
    case Kind::sampled: {
      const ScalarField& f = n.field;
      const double tq = std::clamp(t, f.times().front(), f.times().back());
      return f.interpolate(tq, p.first(static_cast<std::size_t>(f.grid().dim())));
    }
  }
  return 0.0;
}

bool ImplicitSet::time_invariant() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::axis_box:
      return true;
    case Kind::intersection:
    case Kind::set_union:
      return ImplicitSet(n.a).time_invariant() && ImplicitSet(n.b).time_invariant();
    case Kind::complement:
      return ImplicitSet(n.a).time_invariant();
    case Kind::sampled:
      return n.field.stamp_count() == 1;
  }
  return true;
}

SetMask SetMask::filled(const Grid& g, bool value) {
  return {g, std::vector<std::uint8_t>(g.node_count(), value ? 1 : 0)};
}

std::size_t SetMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

SetMask sublevel_mask(const ScalarField& field, std::size_t stamp, double level) {
  const auto v = field.slice(stamp);
  SetMask m{field.grid(), std::vector<std::uint8_t>(v.size())};
  for (std::size_t n = 0; n < v.size(); ++n) m.bits[n] = v[n] <= level ? 1 : 0;
  return m;
}

namespace {

void require_same_grid(const SetMask& a, const SetMask& b) {
  require(a.grid == b.grid && a.bits.size() == b.bits.size(), "masks live on different grids");
}

}  // namespace

SetMask mask_complement(const SetMask& a) {
  SetMask out = a;
  for (auto& b : out.bits) b = b ? 0 : 1;
  return out;
}

SetMask mask_intersection(const SetMask& a, const SetMask& b) {
  require_same_grid(a, b);
  SetMask out = a;
  for (std::size_t n = 0; n < out.bits.size(); ++n) out.bits[n] = a.bits[n] & b.bits[n];
  return out;
}

SetMask mask_union(const SetMask& a, const SetMask& b) {
  require_same_grid(a, b);
  SetMask out = a;
  for (std::size_t n = 0; n < out.bits.size(); ++n) out.bits[n] = a.bits[n] | b.bits[n];
  return out;
}

bool mask_subset(const SetMask& a, const SetMask& b, std::size_t* violations) {
  require_same_grid(a, b);
  std::size_t bad = 0;
  for (std::size_t n = 0; n < a.bits.size(); ++n)
    if (a.bits[n] && !b.bits[n]) ++bad;
  if (violations) *violations = bad;
  return bad == 0;
}

double measure(const SetMask& mask) { return static_cast<double>(mask.count()) * mask.grid.cell_volume(); }

double symmetric_difference_measure(const SetMask& a, const SetMask& b) {
  require_same_grid(a, b);
  std::size_t diff = 0;
  for (std::size_t n = 0; n < a.bits.size(); ++n) diff += (a.bits[n] != b.bits[n]) ? 1 : 0;
  return static_cast<double>(diff) * a.grid.cell_volume();
}

namespace {

// Member nodes with a non-member axis neighbour or lying on the grid edge.
std::vector<std::array<double, kMaxDim>> boundary_points(const SetMask& m) {
  const Grid& g = m.grid;
  std::vector<std::array<double, kMaxDim>> pts;
  std::array<std::size_t, kMaxDim> idx{};
  for (std::size_t n = 0; n < m.bits.size(); ++n) {
    if (!m.bits[n]) continue;
    g.multi_index(n, idx);
    bool edge = false;
    for (int a = 0; a < g.dim() && !edge; ++a) {
      const std::size_t s = g.stride(a);
      if (idx[a] == 0 || idx[a] + 1 == g.count(a)) edge = true;
      else if (!m.bits[n - s] || !m.bits[n + s]) edge = true;
    }
    if (edge) {
      std::array<double, kMaxDim> p{};
      g.node_point(n, p);
      pts.push_back(p);
    }
  }
  return pts;
}

double directed(const std::vector<std::array<double, kMaxDim>>& from,
                const std::vector<std::array<double, kMaxDim>>& to, int dim) {
  double worst = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) {
      double d = 0.0;
      for (int i = 0; i < dim; ++i) d = std::max(d, std::abs(p[i] - q[i]));
      best = std::min(best, d);
      if (best <= worst) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const SetMask& a, const SetMask& b) {
  require_same_grid(a, b);
  const auto pa = boundary_points(a);
  const auto pb = boundary_points(b);
  require(!pa.empty() && !pb.empty(), "hausdorff_distance: empty mask");
  const int d = a.grid.dim();
  return std::max(directed(pa, pb, d), directed(pb, pa, d));
}

ScalarField mask_field(const SetMask& mask, double t) {
  std::vector<double> v(mask.bits.size());
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = mask.bits[n] ? 1.0 : 0.0;
  return ScalarField(mask.grid, {t}, {std::move(v)});
}

}  // namespace softreach
