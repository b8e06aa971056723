#include "softreach/sets.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "softreach/error.hpp"

namespace softreach {

AxisSpec budget_axis(double horizon, std::size_t count) {
  require(horizon > 0.0 && std::isfinite(horizon), "budget axis: horizon must be positive");
  for (std::size_t m = 1; m + 3 <= count; ++m) {
    const double dz = horizon / static_cast<double>(count - 1 - m);
    if (static_cast<double>(m) * dz >= 0.1 * horizon * (1.0 - 1e-12)) {
      return {-static_cast<double>(m) * dz, horizon, count};
    }
  }
  fail(ErrorKind::validation, "budget axis: count " + std::to_string(count) + " is too small");
}

double proxy_eta(double Q, double eta) { return Q == 0.0 ? 0.0 : eta; }

namespace {

struct Plane {
  std::size_t k = 0;
  double w = 0.0;  // weight of plane k + 1; zero means plane k exactly
};

int budget_dim(const ScalarField& W) {
  require(W.grid().dim() >= 3, "field has no budget axis (needs at least two state axes plus z)");
  return W.grid().dim() - 1;
}

Plane budget_plane(const Grid& g, double Q) {
  const int a = g.dim() - 1;
  if (!(Q >= 0.0 && Q <= g.max(a) * (1.0 + 1e-12))) {
    fail(ErrorKind::domain, "budget " + format_double(Q) + " outside the budget axis [0, " + format_double(g.max(a)) + "]");
  }
  double u = (std::min(Q, g.max(a)) - g.min(a)) / g.spacing(a);
  const double r = std::round(u);
  if (std::abs(u - r) < 1e-9) u = r;
  const std::size_t n = g.count(a);
  auto k = static_cast<std::size_t>(std::floor(u));
  if (k >= n - 1) return {n - 1, 0.0};
  return {k, u - static_cast<double>(k)};
}

// The one interpolation rule shared by slicing and Q_min, monotone in w.
double blend(std::span<const double> line, Plane p) {
  const double a = line[p.k];
  if (p.w == 0.0) return a;
  return a + p.w * (line[p.k + 1] - a);
}

Grid state_grid(const Grid& g) {
  std::vector<AxisSpec> axes;
  for (int i = 0; i + 1 < g.dim(); ++i) axes.push_back(g.axis(i));
  return Grid::build(axes);
}

std::size_t zero_plane(const Grid& g) {
  const int a = g.dim() - 1;
  require(g.min(a) <= 0.0 && g.max(a) > 0.0, "budget axis must contain z = 0");
  const std::size_t k = g.nearest_index(a, 0.0);
  if (g.coordinate(a, k) != 0.0) fail(ErrorKind::validation, "budget axis has no node at z = 0");
  return k;
}

}  // namespace

ScalarField slice_budget(const ScalarField& W, const BudgetSliceRequest& req) {
  budget_dim(W);
  require(req.eta >= 0.0, "slice_budget: eta must be non-negative");
  const Grid& g = W.grid();
  const Plane plane = budget_plane(g, req.Q);
  const std::vector<double> values = W.values_at(req.t);
  const std::size_t nz = g.count(g.dim() - 1);
  const std::size_t states = g.node_count() / nz;
  std::vector<double> out(states);
  for (std::size_t s = 0; s < states; ++s) {
    out[s] = blend(std::span<const double>(values).subspan(s * nz, nz), plane) + req.eta;
  }
  return ScalarField(state_grid(g), {req.t}, {std::move(out)});
}

QminField qmin(const ScalarField& W, double horizon, double t, double eta) {
  budget_dim(W);
  require(eta >= 0.0, "qmin: eta must be non-negative");
  const Grid& g = W.grid();
  const int a = g.dim() - 1;
  require(std::abs(g.max(a) - horizon) <= 1e-9 * horizon, "qmin: budget axis must end at the horizon");
  const std::size_t k0 = zero_plane(g);
  const std::size_t nz = g.count(a);
  const std::vector<double> values = W.values_at(t);

  QminField q;
  q.grid = state_grid(g);
  q.horizon = horizon;
  q.sentinel = horizon + 1.0;
  q.eta = eta;
  q.t = t;
  q.values.resize(g.node_count() / nz);

  for (std::size_t s = 0; s < q.values.size(); ++s) {
    const auto line = std::span<const double>(values).subspan(s * nz, nz);
    const auto slice_at = [&](double Q) { return blend(line, budget_plane(g, Q)) + eta; };
    // Highest budget plane that still fails; every plane above it passes.
    std::size_t fail_k = nz;
    for (std::size_t k = nz; k-- > k0;) {
      if (line[k] + eta > 0.0) {
        fail_k = k;
        break;
      }
    }
    if (fail_k == nz) {
      q.values[s] = 0.0;
      continue;
    }
    if (fail_k == nz - 1) {
      q.values[s] = q.sentinel;
      continue;
    }
    // Root of the linear interpolant between the bracketing planes, located
    // by bisection on the very interpolation slice_budget uses so both agree
    // to the last bit: slice_at(lo) > 0 >= slice_at(hi).
    double lo = g.coordinate(a, fail_k);
    double hi = g.coordinate(a, fail_k + 1);
    for (;;) {
      const double mid = lo + 0.5 * (hi - lo);
      if (mid <= lo || mid >= hi) break;
      (slice_at(mid) > 0.0 ? lo : hi) = mid;
    }
    q.values[s] = hi;
  }
  return q;
}

void write_qmin(const std::string& path, const QminField& q) {
  std::map<std::string, std::string> extra{{"kind", "qmin"},
                                           {"sentinel", format_double(q.sentinel)},
                                           {"horizon", format_double(q.horizon)},
                                           {"eta", format_double(q.eta)}};
  write_field(path, ScalarField(q.grid, {q.t}, {q.values}), extra);
}

QminField read_qmin(const std::string& path) {
  std::map<std::string, std::string> extra;
  ScalarField f = read_field(path, &extra);
  if (extra["kind"] != "qmin" || !extra.count("sentinel") || !extra.count("horizon"))
    fail(ErrorKind::io, "'" + path + "' is not a Q_min dump");
  QminField q;
  q.grid = f.grid();
  q.values.assign(f.slice(0).begin(), f.slice(0).end());
  q.sentinel = std::stod(extra["sentinel"]);
  q.horizon = std::stod(extra["horizon"]);
  q.eta = extra.count("eta") ? std::stod(extra["eta"]) : 0.0;
  q.t = f.times().front();
  return q;
}

BandResult band_set(const ScalarField& W, const QminField& q, double t1, double t2) {
  require(t1 < t2, "band_set: need t1 < t2, got (" + format_double(t1) + ", " + format_double(t2) + "]");
  require(t1 >= 0.0 && t2 <= q.horizon, "band_set: band must lie within [0, T]");
  BandResult r;
  r.mask = SetMask::filled(q.grid, false);
  for (std::size_t n = 0; n < q.values.size(); ++n) {
    r.mask.bits[n] = (q.values[n] > t1 && q.values[n] <= t2) ? 1 : 0;
  }
  const SetMask below = sublevel_mask(slice_budget(W, {t1, q.eta, q.t}), 0, 0.0);
  const SetMask upto = sublevel_mask(slice_budget(W, {t2, q.eta, q.t}), 0, 0.0);
  const SetMask algebra = mask_intersection(mask_complement(below), upto);
  require(algebra.grid == r.mask.grid, "band_set: Q_min grid does not match the value field");
  for (std::size_t n = 0; n < q.values.size(); ++n) r.disagreements += r.mask.bits[n] != algebra.bits[n];
  return r;
}

std::string EpsilonStudy::to_csv() const {
  std::ostringstream os;
  os << "epsilon_hi,epsilon_lo,Q,sym_diff_measure,set_measure_lo\n";
  for (const auto& r : rows) {
    os << format_double(r.epsilon_hi) << ',' << format_double(r.epsilon_lo) << ',' << format_double(r.Q) << ','
       << format_double(r.sym_diff_measure) << ',' << format_double(r.set_measure_lo) << '\n';
  }
  return os.str();
}

EpsilonStudy epsilon_convergence_study(const ReachProblem& problem, const Grid& grid, const SolveConfig& base,
                                       const std::vector<double>& eps_list, const std::vector<double>& q_list,
                                       double eta) {
  require(eps_list.size() >= 2, "epsilon study: need at least two epsilon values");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    require(eps_list[i] < eps_list[i - 1], "epsilon study: epsilon list must be strictly descending");
  require(!q_list.empty(), "epsilon study: empty budget list");

  EpsilonStudy study;
  std::vector<std::vector<SetMask>> masks;
  for (double eps : eps_list) {
    SolveConfig cfg = base;
    cfg.epsilon = eps;
    const SolveResult res = solve(problem, grid, SolveMode::soft, cfg);
    std::vector<SetMask> row;
    std::vector<double> m;
    for (double Q : q_list) {
      const ScalarField s = slice_budget(res.value, {Q, proxy_eta(Q, eta), 0.0});
      row.push_back(sublevel_mask(s, 0, 0.0));
      m.push_back(measure(row.back()));
    }
    masks.push_back(std::move(row));
    study.set_measures.push_back(std::move(m));
  }
  study.cell_volume = masks.front().front().grid.cell_volume();
  for (std::size_t k = 0; k + 1 < eps_list.size(); ++k) {
    for (std::size_t j = 0; j < q_list.size(); ++j) {
      study.rows.push_back({eps_list[k], eps_list[k + 1], q_list[j],
                            symmetric_difference_measure(masks[k][j], masks[k + 1][j]),
                            study.set_measures[k + 1][j]});
    }
  }
  return study;
}

}  // namespace softreach
