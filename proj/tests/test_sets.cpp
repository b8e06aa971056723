#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "softreach/error.hpp"
#include "softreach/sets.hpp"

using namespace softreach;
using fixtures::point_mass_grid;
using fixtures::point_mass_problem;

namespace {

// Field on a 2-D state grid plus budget axis, filled from f(x, y, z).
template <class F>
ScalarField budget_field(std::size_t n, std::size_t nz, double T, F&& f) {
  const std::vector<AxisSpec> axes{{-1, 1, n}, {-1, 1, n}, budget_axis(T, nz)};
  return ScalarField::sample(Grid::build(axes), 0.0, [&](std::span<const double> p) { return f(p[0], p[1], p[2]); });
}

const SolveResult& small_soft_solve() {
  static const SolveResult r = [] {
    SolveConfig cfg;
    cfg.store_stride = 1000000;
    return solve(point_mass_problem(), point_mass_grid(81, 21), SolveMode::soft, cfg);
  }();
  return r;
}

}  // namespace

TEST_CASE("budget axis places zero on a node") {
  const AxisSpec a = budget_axis(1.0, 51);
  CHECK(a.count == 51);
  CHECK(a.max == 1.0);
  CHECK(a.min == doctest::Approx(-5.0 / 45.0));
  const AxisSpec b = budget_axis(10.0, 31);
  const double dz = (b.max - b.min) / 30;
  CHECK(std::abs(b.min / dz - std::round(b.min / dz)) < 1e-9);
  CHECK(-b.min >= 1.0 - 1e-9);
  CHECK_THROWS_AS(budget_axis(1.0, 3), Error);
  CHECK_THROWS_AS(budget_axis(0.0, 51), Error);
}

TEST_CASE("proxy eta") {
  CHECK(proxy_eta(0.0, 1e-3) == 0.0);
  CHECK(proxy_eta(0.3, 1e-3) == 1e-3);
}

TEST_CASE("budget slices") {
  const auto W = budget_field(11, 21, 1.0, [](double x, double y, double z) { return x + 0.1 * y - z; });
  const Grid& g = W.grid();
  const std::size_t k = 10;
  const double zk = g.coordinate(2, k);
  const auto s = slice_budget(W, {zk, 0.25, 0.0});
  const std::size_t nz = g.count(2);
  for (std::size_t n = 0; n < s.grid().node_count(); ++n) CHECK(s.slice(0)[n] == W.slice(0)[n * nz + k] + 0.25);

  const auto mid = slice_budget(W, {0.37, 0.0, 0.0});
  const double p[2] = {0.2, -0.4};
  CHECK(mid.interpolate(0.0, p) == doctest::Approx(0.2 - 0.04 - 0.37));

  CHECK_THROWS_AS(slice_budget(W, {1.5, 0.0, 0.0}), Error);
  CHECK_THROWS_AS(slice_budget(W, {-0.05, 0.0, 0.0}), Error);
  const std::vector<AxisSpec> flat{{0, 1, 3}, {0, 1, 3}};
  CHECK_THROWS_AS(slice_budget(ScalarField::sample(Grid::build(flat), 0, [](auto) { return 0.0; }), {}), Error);
}

TEST_CASE("eta shifts a unit-slope boundary by at most eta") {
  const auto W = budget_field(201, 11, 1.0, [](double x, double, double) { return x; });
  const auto a = slice_budget(W, {0.5, 0.0, 0.0});
  const auto b = slice_budget(W, {0.5, 1e-3, 0.0});
  const auto la = extract_contour(a, 0, 0.0), lb = extract_contour(b, 0, 0.0);
  REQUIRE(!la.empty());
  REQUIRE(!lb.empty());
  CHECK(std::abs(la[0].points[0][0] - lb[0].points[0][0]) <= 1e-3 + 1e-12);
  std::size_t v = 0;
  CHECK(mask_subset(sublevel_mask(b, 0, 0.0), sublevel_mask(a, 0, 0.0), &v));
}

TEST_CASE("qmin on synthetic fields") {
  const auto lin = budget_field(5, 23, 1.0, [](double, double, double z) { return 0.5 - z; });
  const auto q = qmin(lin, 1.0, 0.0, 0.0);
  for (double v : q.values) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));

  const auto zero = budget_field(5, 23, 1.0, [](double, double, double) { return -0.01; });
  const auto qz = qmin(zero, 1.0, 0.0, 1e-3);
  for (double v : qz.values) CHECK(v == 0.0);

  const auto never = budget_field(5, 23, 1.0, [](double, double, double) { return -0.5e-3; });
  const auto qn = qmin(never, 1.0, 0.0, 1e-3);
  CHECK(qn.sentinel == 2.0);
  for (std::size_t n = 0; n < qn.values.size(); ++n) {
    CHECK(qn.values[n] == qn.sentinel);
    CHECK(qn.infeasible(n));
  }

  const auto path = (std::filesystem::temp_directory_path() / "softreach_qmin.srfield").string();
  write_qmin(path, q);
  const auto back = read_qmin(path);
  std::filesystem::remove(path);
  CHECK(back.values == q.values);
  CHECK(back.horizon == 1.0);
  CHECK(back.sentinel == 2.0);
}

TEST_CASE("band sets on synthetic fields") {
  const auto zero = budget_field(5, 23, 1.0, [](double, double, double) { return -0.01; });
  const auto qz = qmin(zero, 1.0, 0.0, 1e-3);
  const auto b = band_set(zero, qz, 0.2, 0.9);
  CHECK(b.mask.count() == 0);
  CHECK(b.disagreements == 0);
  CHECK_THROWS_AS(band_set(zero, qz, 0.5, 0.5), Error);
  CHECK_THROWS_AS(band_set(zero, qz, 0.6, 0.3), Error);

  // Q_min varies across the state: (x + 1) / 2 over [0, 1].
  const auto ramp = budget_field(21, 41, 1.0, [](double x, double, double z) { return (x + 1) / 2 - z; });
  const auto qr = qmin(ramp, 1.0, 0.0, 0.0);
  const auto br = band_set(ramp, qr, 0.3, 0.6);
  CHECK(br.disagreements == 0);
  for (std::size_t n = 0; n < qr.values.size(); ++n)
    CHECK(static_cast<bool>(br.mask.bits[n]) == (qr.values[n] > 0.3 && qr.values[n] <= 0.6));
}

TEST_CASE("point-mass budget properties") {
  const auto& r = small_soft_solve();
  const ScalarField& W = r.value;
  for (double eta : {0.0, 1e-3}) {
    std::vector<SetMask> masks;
    for (double Q : {0.0, 0.06, 0.3, 0.6, 1.0}) masks.push_back(sublevel_mask(slice_budget(W, {Q, eta, 0.0}), 0, 0.0));
    for (std::size_t i = 1; i < masks.size(); ++i) {
      std::size_t v = 1;
      CHECK(mask_subset(masks[i - 1], masks[i], &v));
      CHECK(v == 0);
    }
    CHECK(masks.back().count() > masks.front().count());
  }

  for (double Q : {0.3, 0.6}) {
    const auto strict = sublevel_mask(slice_budget(W, {Q, 1e-3, 0.0}), 0, 0.0);
    const auto loose = sublevel_mask(slice_budget(W, {Q, 0.0, 0.0}), 0, 0.0);
    CHECK(mask_subset(strict, loose));
  }

  const auto q = qmin(W, 1.0, 0.0, 1e-3);
  const auto band = band_set(W, q, 0.3, 0.6);
  CHECK(band.disagreements == 0);

  // band(0, T], the Q = 0 set and the infeasible nodes partition the grid.
  const auto all = band_set(W, q, 0.0, 1.0);
  const auto zero_set = sublevel_mask(slice_budget(W, {0.0, 1e-3, 0.0}), 0, 0.0);
  for (std::size_t n = 0; n < q.values.size(); ++n) {
    const int classes = all.mask.bits[n] + zero_set.bits[n] + (q.infeasible(n) ? 1 : 0);
    CHECK(classes == 1);
  }

  double prev = INFINITY;
  for (double d : {0.4, 0.2, 0.1, 0.05, 0.01}) {
    const double m = measure(band_set(W, q, 0.6 - d, 0.6).mask);
    CHECK(m <= prev);
    prev = m;
  }
}

TEST_CASE("epsilon study bookkeeping") {
  auto p = point_mass_problem();
  // With an unbounded soft set the violation rate is zero for every epsilon.
  p.soft = ImplicitSet::box({-INFINITY, -INFINITY}, {INFINITY, INFINITY});
  SolveConfig cfg;
  cfg.store_stride = 1000000;
  const Grid g = point_mass_grid(21, 11);
  const auto st = epsilon_convergence_study(p, g, cfg, {2.0, 1.0, 0.5}, {0.3, 0.6}, 1e-3);
  CHECK(st.rows.size() == 4);
  for (const auto& row : st.rows) CHECK(row.sym_diff_measure == 0.0);
  CHECK(st.set_measures.size() == 3);
  CHECK(st.cell_volume == doctest::Approx(g.spacing(0) * g.spacing(1)));
  CHECK(st.to_csv().rfind("epsilon_hi,epsilon_lo,Q,sym_diff_measure,set_measure_lo\n", 0) == 0);

  CHECK_THROWS_AS(epsilon_convergence_study(p, g, cfg, {1.0}, {0.3}, 1e-3), Error);
  CHECK_THROWS_AS(epsilon_convergence_study(p, g, cfg, {1.0, 1.0}, {0.3}, 1e-3), Error);
}
