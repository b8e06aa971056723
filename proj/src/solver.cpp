#include "softreach/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"
#include "softreach/error.hpp"

namespace softreach {

std::string SolveReport::to_json() const {
  nlohmann::ordered_json j;
  j["steps"] = steps;
  j["residuals"] = residuals;
  j["wall_time_s"] = wall_time_s;
  j["final_time"] = final_time;
  j["converged"] = converged;
  j["dt"] = dt;
  j["speed_bounds"] = speed_bounds;
  return j.dump();
}

ScalarField terminal_condition(const ReachProblem& problem, const Grid& grid, SolveMode mode) {
  require(problem.model != nullptr, "terminal_condition: problem has no model");
  const int n = problem.model->state_dim();
  if (mode == SolveMode::soft) {
    require(grid.dim() == n + 1, "soft mode needs a budget axis after the " + std::to_string(n) + " state axes");
  } else {
    require(grid.dim() == n, "classical mode needs exactly the " + std::to_string(n) + " state axes");
  }
  const double T = problem.horizon;
  return ScalarField::sample(grid, T, [&](std::span<const double> p) {
    const auto x = p.first(static_cast<std::size_t>(n));
    double v = std::max({problem.hard.eval(T, x), problem.soft.eval(T, x), problem.target.eval(T, x)});
    if (mode == SolveMode::soft) v = std::max(v, -p[static_cast<std::size_t>(n)]);
    return v;
  });
}

double lf_numerical_hamiltonian(std::span<const double> d_minus, std::span<const double> d_plus,
                                const std::function<double(std::span<const double>)>& hamiltonian,
                                std::span<const double> alphas) {
  require(d_minus.size() == d_plus.size() && alphas.size() == d_minus.size(),
          "lf_numerical_hamiltonian: size mismatch");
  std::vector<double> avg(d_minus.size());
  double diss = 0.0;
  for (std::size_t i = 0; i < avg.size(); ++i) {
    avg[i] = 0.5 * (d_minus[i] + d_plus[i]);
    diss += alphas[i] * 0.5 * (d_plus[i] - d_minus[i]);
  }
  return hamiltonian(avg) - diss;
}

HjiSolver::HjiSolver(ReachProblem problem, Grid grid, SolveMode mode, SolveConfig config)
    : problem_(std::move(problem)), grid_(std::move(grid)), mode_(mode), config_(config) {
  require(problem_.model != nullptr, "solver: problem has no model");
  require(problem_.horizon > 0.0 && std::isfinite(problem_.horizon), "solver: horizon must be positive");
  require(config_.cfl > 0.0 && config_.cfl <= 1.0, "solver: cfl must lie in (0, 1]");
  require(config_.store_stride >= 1, "solver: store stride must be at least 1");
  require(config_.fixed_point_tol >= 0.0, "solver: fixed-point tolerance must be non-negative");
  state_dim_ = problem_.model->state_dim();
  if (mode_ == SolveMode::soft) {
    require(config_.epsilon > 0.0, "solver: epsilon must be positive for soft solves");
    require(grid_.dim() == state_dim_ + 1, "soft mode needs a budget axis after the state axes");
    line_len_ = grid_.count(state_dim_);
  } else {
    require(grid_.dim() == state_dim_, "classical mode needs exactly the state axes");
    line_len_ = 1;
  }
  alphas_ = softreach::speed_bounds(*problem_.model, grid_);
  static_sets_ = problem_.target.time_invariant() && problem_.hard.time_invariant() &&
                 problem_.soft.time_invariant();
  if (static_sets_) {
    const std::size_t states = grid_.node_count() / line_len_;
    cache_.resize(states);
    std::array<double, kMaxDim> x{};
    for (std::size_t s = 0; s < states; ++s) {
      state_point(s, x);
      const auto xs = std::span<const double>(x.data(), static_cast<std::size_t>(state_dim_));
      cache_[s] = {problem_.hard.eval(0.0, xs), problem_.soft.eval(0.0, xs), problem_.target.eval(0.0, xs)};
    }
  }
}

void HjiSolver::state_point(std::size_t s, std::span<double> x) const {
  for (int i = 0; i < state_dim_; ++i) {
    const std::size_t stride = grid_.stride(i) / line_len_;
    const std::size_t k = s / stride;
    s -= k * stride;
    x[i] = grid_.coordinate(i, k);
  }
}

HjiSolver::NodeSets HjiSolver::sets_at(std::size_t s, double t) const {
  if (static_sets_) return cache_[s];
  std::array<double, kMaxDim> x{};
  state_point(s, x);
  const auto xs = std::span<const double>(x.data(), static_cast<std::size_t>(state_dim_));
  return {problem_.hard.eval(t, xs), problem_.soft.eval(t, xs), problem_.target.eval(t, xs)};
}

double HjiSolver::freeze_at(std::size_t node, double t) const {
  const NodeSets s = sets_at(node / line_len_, t);
  if (mode_ == SolveMode::classical) return s.g;
  const double z = grid_.coordinate(state_dim_, node % line_len_);
  return std::max({s.c2, -z, s.g});
}

double HjiSolver::obstacle_at(std::size_t node, double t) const {
  const NodeSets s = sets_at(node / line_len_, t);
  return mode_ == SolveMode::classical ? std::max(s.c1, s.c2) : s.c1;
}

double HjiSolver::max_stable_dt() const {
  double rate = 0.0;
  for (int a = 0; a < grid_.dim(); ++a) rate += alphas_[a] / grid_.spacing(a);
  if (rate <= 0.0) return problem_.horizon;
  return config_.cfl / rate;
}

ScalarField HjiSolver::terminal() const { return terminal_condition(problem_, grid_, mode_); }

std::vector<double> HjiSolver::step_backward(std::span<const double> values, double t, double dt,
                                             double* residual) const {
  require(values.size() == grid_.node_count(), "step_backward: value array does not match grid");
  require(dt > 0.0, "step_backward: dt must be positive");
  if (dt > max_stable_dt() * (1.0 + 1e-9)) {
    fail(ErrorKind::numerical, "CFL violation: dt=" + format_double(dt) + " exceeds " + format_double(max_stable_dt()));
  }
  const int dim = grid_.dim();
  const std::size_t udim = static_cast<std::size_t>(dim);
  const std::size_t lines = grid_.node_count() / line_len_;
  const double t_new = t - dt;
  std::vector<double> out(values.size());
  std::vector<double> costate(line_len_ * udim);
  std::vector<double> diss(line_len_);
  std::vector<double> ham(line_len_);
  std::array<std::size_t, kMaxDim> idx{};
  std::array<double, kMaxDim> x{};
  double res = 0.0;

  for (std::size_t line = 0; line < lines; ++line) {
    const std::size_t base = line * line_len_;
    grid_.multi_index(base, idx);
    state_point(line, x);
    const NodeSets sets_now = sets_at(line, t);
    const NodeSets sets_new = static_sets_ ? sets_now : sets_at(line, t_new);
    double rate = 0.0;
    if (mode_ == SolveMode::soft) rate = h_epsilon(sets_now.c2, config_.epsilon);
    // The budget-axis Hamiltonian is linear with slope -rate, constant along
    // the z-line, so its dissipation uses that exact slope (pure upwinding).
    std::array<double, kMaxDim> alpha{};
    for (int a = 0; a < dim; ++a) alpha[a] = (mode_ == SolveMode::soft && a == state_dim_) ? rate : alphas_[a];
    for (std::size_t j = 0; j < line_len_; ++j) {
      const std::size_t n = base + j;
      if (mode_ == SolveMode::soft) idx[state_dim_] = j;
      double d = 0.0;
      for (int a = 0; a < dim; ++a) {
        const OneSided os = one_sided_difference(grid_, values, n, idx[a], a, a < state_dim_ ? config_.state_ghost : GhostRule::linear);
        costate[j * udim + a] = 0.5 * (os.minus + os.plus);
        d += alpha[a] * 0.5 * (os.plus - os.minus);
      }
      diss[j] = d;
    }
    const auto xs = std::span<const double>(x.data(), static_cast<std::size_t>(state_dim_));
    problem_.model->hamiltonian_batch(t, xs, costate, udim, line_len_, ham);

    for (std::size_t j = 0; j < line_len_; ++j) {
      const std::size_t n = base + j;
      double h = ham[j];
      if (mode_ == SolveMode::soft) h -= costate[j * udim + static_cast<std::size_t>(state_dim_)] * rate;
      // Backward in time: the forward-time scheme applied to -H.
      double u = values[n] + dt * (h + diss[j]);
      if (mode_ == SolveMode::soft) {
        const double z = grid_.coordinate(state_dim_, j);
        u = std::min(u, std::max({sets_new.c2, -z, sets_new.g}));
        u = std::max(u, sets_new.c1);
      } else {
        u = std::min(u, sets_new.g);
        u = std::max(u, std::max(sets_new.c1, sets_new.c2));
      }
      if (!std::isfinite(u)) {
        std::array<double, kMaxDim> p{};
        grid_.node_point(n, p);
        std::string where;
        for (int a = 0; a < dim; ++a) where += (a ? "," : "") + format_double(p[a]);
        fail(ErrorKind::numerical, "non-finite value at node " + std::to_string(n) + " (" + where +
                                       ") at t=" + format_double(t_new));
      }
      res = std::max(res, std::abs(u - values[n]));
      out[n] = u;
    }
  }
  if (residual) *residual = res;
  return out;
}

SolveResult HjiSolver::solve() const {
  const auto start = std::chrono::steady_clock::now();
  const double T = problem_.horizon;
  const double dt_max = max_stable_dt();
  SolveReport report;
  report.dt = std::min(dt_max, T);
  report.speed_bounds = alphas_;

  std::vector<double> w;
  {
    const ScalarField term = terminal();
    w.assign(term.slice(0).begin(), term.slice(0).end());
  }
  std::vector<double> times{T};
  std::vector<std::vector<double>> slices{w};
  double t = T;
  while (t > 0.0) {
    // A last step within rounding of dt_max absorbs the remainder.
    const double dt = t <= dt_max * (1.0 + 1e-9) ? t : dt_max;
    double res = 0.0;
    std::vector<double> next = step_backward(w, t, dt, &res);
    t = (dt == t) ? 0.0 : t - dt;
    w = std::move(next);
    ++report.steps;
    report.residuals.push_back(res);
    if (config_.fixed_point_tol > 0.0 && res < config_.fixed_point_tol) {
      report.converged = true;
      times.push_back(t);
      slices.push_back(w);
      if (t > 0.0) {
        // Stationary from here on: the earlier stamps repeat the fixed point.
        times.push_back(0.0);
        slices.push_back(w);
      }
      break;
    }
    if (report.steps % config_.store_stride == 0 || t == 0.0) {
      times.push_back(t);
      slices.push_back(w);
    }
  }
  report.final_time = t;
  std::reverse(times.begin(), times.end());
  std::reverse(slices.begin(), slices.end());
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {ScalarField(grid_, std::move(times), std::move(slices)), std::move(report)};
}

ScalarField vi_step_backward(const HjiSolver& solver, const ScalarField& field, double dt) {
  const std::size_t first = 0;
  const double t = field.times()[first];
  auto next = solver.step_backward(field.slice(first), t, dt);
  return ScalarField(field.grid(), {t - dt}, {std::move(next)});
}

SolveResult solve(const ReachProblem& problem, const Grid& grid, SolveMode mode, const SolveConfig& config) {
  return HjiSolver(problem, grid, mode, config).solve();
}

}  // namespace softreach
