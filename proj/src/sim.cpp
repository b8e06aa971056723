#include "softreach/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "softreach/error.hpp"

namespace softreach {

std::string Verdict::to_json() const {
  nlohmann::ordered_json j;
  j["reached"] = reached;
  if (reached) {
    j["reached_at"] = reached_at;
  } else {
    j["reached_at"] = nullptr;
  }
  j["hard_ok"] = hard_ok;
  j["violation_time"] = violation_time;
  j["within_budget"] = within_budget;
  j["truncated"] = truncated;
  j["satisfied"] = satisfied();
  j["diagnostic"] = diagnostic;
  return j.dump(2);
}

std::string Trajectory::to_csv(const SystemModel& model) const {
  std::ostringstream os;
  os << 't';
  for (const auto& s : model.state_names()) os << ',' << s;
  os << ",z";
  for (const auto& c : model.control().channels()) os << ',' << c.name;
  for (const auto& c : model.disturbance().channels()) os << ',' << c.name;
  os << '\n';
  const std::size_t na = model.control().size();
  const std::size_t nb = model.disturbance().size();
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << format_double(times[i]);
    for (double v : states[i]) os << ',' << format_double(v);
    os << ',' << format_double(budget[i]);
    if (i < controls.size()) {
      for (double v : controls[i]) os << ',' << format_double(v);
      for (double v : disturbances[i]) os << ',' << format_double(v);
    } else {
      os << std::string(na + nb, ',');
    }
    os << '\n';
  }
  return os.str();
}

namespace {

bool has_budget_axis(const ScalarField& W, std::size_t n) { return W.grid().dim() == static_cast<int>(n) + 1; }

std::vector<double> query_point(const ScalarField& W, std::span<const double> x, double z) {
  std::vector<double> p(x.begin(), x.end());
  if (W.grid().dim() == static_cast<int>(x.size()) + 1) p.push_back(z);
  return p;
}

bool inside_grid(const Grid& g, std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int a = static_cast<int>(i);
    if (!std::isfinite(x[i]) || x[i] < g.min(a) || x[i] > g.max(a)) return false;
  }
  return true;
}

}  // namespace

std::vector<double> value_gradient(const ScalarField& W, double t, std::span<const double> x, double z) {
  const Grid& g = W.grid();
  require(g.dim() == static_cast<int>(x.size()) || g.dim() == static_cast<int>(x.size()) + 1,
          "value_gradient: state size does not match the field");
  std::vector<double> p = query_point(W, x, z);
  std::vector<double> grad(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = g.spacing(static_cast<int>(i));
    std::vector<double> lo = p, hi = p;
    lo[i] -= 0.5 * h;
    hi[i] += 0.5 * h;
    grad[i] = (W.interpolate(t, hi) - W.interpolate(t, lo)) / h;
  }
  return grad;
}

InputPair optimal_inputs(const ScalarField& W, const SystemModel& model, double t, std::span<const double> x,
                         double z) {
  const auto n = static_cast<std::size_t>(model.state_dim());
  require(x.size() == n, "optimal_inputs: state size does not match the model");
  const std::vector<double> grad = value_gradient(W, t, x, z);
  // The budget rate does not depend on the inputs, so only the state
  // components of the gradient steer the choice.
  return model.optimal_inputs(t, x, std::span<const double>(grad.data(), n));
}

Trajectory rollout(const ReachProblem& problem, const ScalarField& W, std::span<const double> x0, double Q0,
                   const RolloutConfig& cfg) {
  const SystemModel& model = *problem.model;
  const auto n = static_cast<std::size_t>(model.state_dim());
  require(cfg.dt > 0.0 && std::isfinite(cfg.dt), "rollout: dt must be positive");
  require(cfg.horizon > 0.0, "rollout: horizon must be positive");
  require(x0.size() == n, "rollout: initial state has " + std::to_string(x0.size()) + " entries, model needs " +
                              std::to_string(n));
  require(Q0 >= 0.0 && Q0 <= problem.horizon * (1.0 + 1e-12), "rollout: budget must lie in [0, T]");
  require(W.grid().dim() == static_cast<int>(n) || has_budget_axis(W, n), "rollout: field does not match the model");
  require(inside_grid(W.grid(), x0), "rollout: initial state lies outside the grid");

  Trajectory tr;
  tr.assigned_budget = Q0;
  std::vector<double> x(x0.begin(), x0.end());
  double z = Q0;
  double t = cfg.t0;
  const double t_end = cfg.t0 + cfg.horizon;
  tr.times.push_back(t);
  tr.states.push_back(x);
  tr.budget.push_back(z);

  const auto aug = [&](double ts, const std::vector<double>& xs, double zs, const InputPair& u) {
    return augmented_flow(model, problem.soft, 1.0, ts, xs, zs, u.control, u.disturbance, BudgetRate::exact);
  };
  const auto freeze = [&](double ts, const std::vector<double>& xs, double zs) {
    return std::max({problem.soft.eval(ts, xs), -zs, problem.target.eval(ts, xs)});
  };

  std::string diagnostic;
  bool truncated = false;
  while (freeze(t, x, z) > 0.0 && t < t_end - 1e-12 * cfg.horizon) {
    const double h = std::min(cfg.dt, t_end - t);
    const double tq = std::clamp(t, W.times().front(), W.times().back());
    const InputPair u = optimal_inputs(W, model, tq, x, z);

    std::array<std::vector<double>, 4> k;
    std::vector<double> xs(n);
    k[0] = aug(t, x, z, u);
    for (int stage = 1; stage < 4; ++stage) {
      const double c = stage == 3 ? 1.0 : 0.5;
      for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] + c * h * k[stage - 1][i];
      k[stage] = aug(t + c * h, xs, z + c * h * k[stage - 1][n], u);
    }
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    z += h / 6.0 * (k[0][n] + 2.0 * k[1][n] + 2.0 * k[2][n] + k[3][n]);
    t = (h == t_end - t) ? t_end : t + h;

    tr.controls.push_back(u.control);
    tr.disturbances.push_back(u.disturbance);
    tr.times.push_back(t);
    tr.states.push_back(x);
    tr.budget.push_back(z);
    if (!inside_grid(W.grid(), x)) {
      truncated = true;
      std::ostringstream os;
      os << "state left the grid at t=" << format_double(t);
      diagnostic = os.str();
      break;
    }
  }
  tr.verdict = verify(tr, problem, cfg.tolerance, cfg.budget_tolerance);
  tr.verdict.truncated = truncated;
  if (truncated) tr.verdict.diagnostic = diagnostic;
  return tr;
}

Verdict verify(const Trajectory& traj, const ReachProblem& problem, double tolerance, double budget_tolerance) {
  Verdict v;
  const std::size_t m = traj.times.size();
  if (m == 0) {
    v.diagnostic = "empty trajectory";
    return v;
  }
  std::size_t last = m - 1;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = traj.times[i];
    if (problem.target.eval(t, traj.states[i]) <= tolerance && problem.soft.eval(t, traj.states[i]) <= tolerance) {
      v.reached = true;
      v.reached_at = t;
      v.reached_index = i;
      last = i;
      break;
    }
  }
  for (std::size_t i = 0; i <= last; ++i) {
    if (problem.hard.eval(traj.times[i], traj.states[i]) > tolerance) {
      v.hard_ok = false;
      break;
    }
  }
  std::vector<double> mid;
  for (std::size_t i = 0; i < last; ++i) {
    const auto& a = traj.states[i];
    const auto& b = traj.states[i + 1];
    mid.resize(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) mid[k] = 0.5 * (a[k] + b[k]);
    const double tm = 0.5 * (traj.times[i] + traj.times[i + 1]);
    if (problem.soft.eval(tm, mid) > 0.0) v.violation_time += traj.times[i + 1] - traj.times[i];
  }
  v.within_budget = v.violation_time <= traj.assigned_budget + budget_tolerance;
  if (!v.reached) v.diagnostic = "target not reached within the horizon";
  return v;
}

}  // namespace softreach
