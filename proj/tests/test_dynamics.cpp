#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "softreach/dynamics.hpp"
#include "softreach/error.hpp"

using namespace softreach;

namespace {

constexpr double kDeg = M_PI / 180.0;

PointMass point_mass() {
  return PointMass(ControlSpec({ControlSpec::interval("u", -60, 60)}),
                   ControlSpec({ControlSpec::interval("d", -10, 10)}));
}

FixedWing fixed_wing() {
  std::vector<double> alphas;
  for (int i = 0; i <= 26; ++i) alphas.push_back(i * 0.5 * kDeg);
  return FixedWing(ControlSpec({ControlSpec::uniform_samples("alpha", 0, 13 * kDeg, 27)}),
                   ControlSpec({ControlSpec::interval("F_wind", -1e4, 1e4)}), AeroTable::surrogate(alphas));
}

// Brute-force min over controls, max over disturbances, of p . f.
double enumerated_hamiltonian(const SystemModel& m, std::span<const double> x, std::span<const double> p,
                              const std::vector<double>& us, const std::vector<double>& ds) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> f(m.state_dim());
  for (double u : us) {
    double worst = -std::numeric_limits<double>::infinity();
    for (double d : ds) {
      m.flow(0, x, std::span<const double>(&u, 1), std::span<const double>(&d, 1), f);
      double v = 0;
      for (std::size_t i = 0; i < f.size(); ++i) v += p[i] * f[i];
      worst = std::max(worst, v);
    }
    best = std::min(best, worst);
  }
  return best;
}

}  // namespace

TEST_CASE("point-mass flow") {
  const auto m = point_mass();
  double f[2];
  const double x0[2] = {0, 5}, a0 = 9.8, b0 = 0;
  m.flow(0, x0, {&a0, 1}, {&b0, 1}, f);
  CHECK(f[0] == doctest::Approx(0.0));
  CHECK(f[1] == 0.0);
  const double x1[2] = {-2, 5}, a1 = 60, b1 = 10;
  m.flow(0, x1, {&a1, 1}, {&b1, 1}, f);
  CHECK(f[0] == doctest::Approx(60.2));
  CHECK(f[1] == -2.0);
}

TEST_CASE("point-mass hamiltonian") {
  const auto m = point_mass();
  const double x[2] = {0, 3};
  const double p1[2] = {1, 0};
  CHECK(m.hamiltonian(0, x, p1) == doctest::Approx(-59.8));
  const double xs[2] = {-3, 1}, p2[2] = {0, 2};
  CHECK(m.hamiltonian(0, xs, p2) == doctest::Approx(-6.0));
  const double p0[2] = {0, 0};
  CHECK(m.hamiltonian(0, xs, p0) == 0.0);

  // The closed form agrees with the generic enumeration.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const double x3[2] = {u(rng), u(rng)}, p3[2] = {u(rng), u(rng)};
    CHECK(m.hamiltonian(0, x3, p3) == doctest::Approx(m.SystemModel::hamiltonian(0, x3, p3)));
  }
}

TEST_CASE("optimal inputs and tie rule") {
  const auto m = point_mass();
  const double x[2] = {1, 1};
  const double p[2] = {0.5, 0.2};
  const auto io = m.optimal_inputs(0, x, p);
  CHECK(io.control[0] == -60.0);
  CHECK(io.disturbance[0] == 10.0);
  const double pn[2] = {-0.5, 0.2};
  const auto ion = m.optimal_inputs(0, x, pn);
  CHECK(ion.control[0] == 60.0);
  CHECK(ion.disturbance[0] == -10.0);
  const double pz[2] = {0.0, 1.0};
  const auto iz = m.optimal_inputs(0, x, pz);
  CHECK(iz.control[0] == 0.0);
  CHECK(iz.disturbance[0] == 0.0);
}

TEST_CASE("control specs") {
  const ControlSpec s({ControlSpec::interval("u", -60, 60), ControlSpec::sample_list("k", {3, -1, 2})});
  const auto c = s.candidates();
  REQUIRE(c.size() == 2);
  CHECK(c[0].size() == 3);
  CHECK(std::find(c[0].begin(), c[0].end(), 0.0) != c[0].end());
  CHECK(c[1].size() == 3);
  CHECK(s.candidate_grid().size() == 9);
  const double ok[2] = {12.5, -1}, bad[2] = {12.5, 0.5}, far[2] = {61, 2};
  CHECK(s.admissible(ok));
  CHECK_FALSE(s.admissible(bad));
  CHECK_FALSE(s.admissible(far));

  const auto pos = ControlSpec::interval("a", 2, 5);
  CHECK(channel_min(pos, 1.0) == 2.0);
  CHECK(channel_max(pos, -1.0) == -2.0);

  const auto uni = ControlSpec::uniform_samples("alpha", 0, 13 * kDeg, 27);
  REQUIRE(uni.samples.size() == 27);
  CHECK(uni.samples.back() == doctest::Approx(13 * kDeg));
  CHECK(uni.samples[1] == doctest::Approx(0.5 * kDeg));

  CHECK_THROWS_AS(ControlSpec({ControlSpec::sample_list("e", {})}), Error);
  CHECK_THROWS_AS(ControlSpec({ControlSpec::interval("r", 1, -1)}), Error);
}

TEST_CASE("fixed-wing lift balance") {
  const auto m = fixed_wing();
  const auto& pr = m.params();
  const double V = 78.0;
  const double cl = 2 * pr.mass * pr.gravity / (pr.air_density * pr.wing_area * V * V);
  const double alpha = (cl - 0.2) / 5.5;
  REQUIRE(alpha > 0);
  REQUIRE(alpha < 13 * kDeg);
  const double x[3] = {10, V, 0}, wind = 0;
  double f[3];
  m.flow(0, x, {&alpha, 1}, {&wind, 1}, f);
  CHECK(std::abs(f[2]) < 1e-12);
  CHECK(f[0] == 0.0);
  CHECK(f[1] < 0);  // drag decelerates an unpowered glider in level flight

  const double stalled[3] = {10, 0, 0};
  try {
    m.flow(0, stalled, {&alpha, 1}, {&wind, 1}, f);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numerical);
  }
}

TEST_CASE("fixed-wing hamiltonian matches enumeration") {
  const auto m = fixed_wing();
  CHECK_FALSE(m.input_affine());
  const auto us = m.control().channels()[0].samples;
  const std::vector<double> ds{-1e4, 0, 1e4};
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> h(0, 40), v(58, 86), g(-6 * kDeg, 3 * kDeg), p(-2, 2);
  std::vector<double> rows(3 * 4), batch(4);
  for (int i = 0; i < 100; ++i) {
    const double x[3] = {h(rng), v(rng), g(rng)};
    for (auto& r : rows) r = p(rng);
    m.hamiltonian_batch(0, x, rows, 3, 4, batch);
    for (int r = 0; r < 4; ++r) {
      const std::span<const double> pr(rows.data() + 3 * r, 3);
      const double oracle = enumerated_hamiltonian(m, x, pr, us, ds);
      CHECK(m.hamiltonian(0, x, pr) == doctest::Approx(oracle).epsilon(1e-12));
      CHECK(batch[r] == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("aero table") {
  const auto m = fixed_wing();
  const auto& t = m.aero();
  CHECK(t.lift_coefficient(2 * kDeg) == doctest::Approx(0.2 + 5.5 * 2 * kDeg));
  const double cl = 0.2 + 5.5 * 0.1;
  CHECK(t.drag_coefficient(0.1) == doctest::Approx(0.02 + 0.06 * cl * cl).epsilon(1e-3));

  const auto path = (std::filesystem::temp_directory_path() / "softreach_aero.csv").string();
  t.save_csv(path);
  const auto r = AeroTable::load_csv(path);
  std::filesystem::remove(path);
  REQUIRE(r.alpha.size() == t.alpha.size());
  for (std::size_t i = 0; i < r.alpha.size(); ++i) {
    CHECK(r.alpha[i] == doctest::Approx(t.alpha[i]).epsilon(1e-14));
    CHECK(r.cl[i] == doctest::Approx(t.cl[i]).epsilon(1e-14));
  }

  AeroTable bad{{0.1, 0.0}, {1, 1}, {1, 1}};
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(AeroTable::load_csv("/nonexistent.csv"), Error);
}

TEST_CASE("regularized violation rate") {
  CHECK(h_epsilon(-0.5, 0.1) == 0.0);
  CHECK(h_epsilon(0.05, 0.1) == doctest::Approx(0.5));
  CHECK(h_epsilon(0.2, 0.1) == 1.0);
  CHECK_THROWS_AS(h_epsilon(0.1, 0.0), Error);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> c(-1, 2), e(1e-3, 5);
  for (int i = 0; i < 1000; ++i) {
    double e1 = e(rng), e2 = e(rng);
    if (e1 > e2) std::swap(e1, e2);
    const double c2 = std::abs(c(rng)) + 1e-6;
    CHECK(h_epsilon(c2, e1) >= h_epsilon(c2, e2));
    const double a = c(rng), b = c(rng);
    CHECK(std::abs(h_epsilon(a, e1) - h_epsilon(b, e1)) <= std::abs(a - b) / e1 + 1e-12);
  }
}

TEST_CASE("augmented flow budget rate") {
  const auto m = point_mass();
  const auto soft = ImplicitSet::box({-INFINITY, 0}, {INFINITY, 10});
  const double eps = 0.1, a = 0, b = 0;
  const double inside[2] = {1, 5};
  CHECK(augmented_flow(m, soft, eps, 0, inside, 1, {&a, 1}, {&b, 1}).back() == 0.0);
  CHECK(augmented_flow(m, soft, eps, 0, inside, 1, {&a, 1}, {&b, 1}, BudgetRate::exact).back() == 0.0);
  const double band[2] = {1, 10 + eps / 2};
  CHECK(augmented_flow(m, soft, eps, 0, band, 1, {&a, 1}, {&b, 1}).back() == doctest::Approx(-0.5));
  CHECK(augmented_flow(m, soft, eps, 0, band, 1, {&a, 1}, {&b, 1}, BudgetRate::exact).back() == -1.0);
  const double out[2] = {1, 10 + 2 * eps};
  CHECK(augmented_flow(m, soft, eps, 0, out, 1, {&a, 1}, {&b, 1}).back() == -1.0);
  const auto f = augmented_flow(m, soft, eps, 0, out, 1, {&a, 1}, {&b, 1});
  CHECK(f.size() == 3);
  CHECK(f[1] == 1.0);
}

TEST_CASE("extremal hamiltonian with budget costate") {
  const auto m = point_mass();
  const auto soft = ImplicitSet::box({-INFINITY, 0}, {INFINITY, 10});
  const double x[2] = {0, 10.05};
  const double p[3] = {1, 0, 2};
  CHECK(extremal_hamiltonian(m, soft, 0.1, 0, x, 0.5, p) == doctest::Approx(-59.8 - 2 * 0.5));
  const double ps[2] = {1, 0};
  CHECK(extremal_hamiltonian(m, soft, 0.1, 0, x, 0.5, ps) == doctest::Approx(-59.8));
}

TEST_CASE("speed bounds") {
  const auto m = point_mass();
  const std::vector<AxisSpec> axes{{-20, 20, 11}, {-5, 20, 11}, {-0.2, 1, 7}};
  const auto a = speed_bounds(m, Grid::build(axes));
  REQUIRE(a.size() == 3);
  CHECK(a[0] == doctest::Approx(79.8));
  CHECK(a[1] == doctest::Approx(20.0));
  CHECK(a[2] == 1.0);
}
