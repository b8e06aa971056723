#include "softreach/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "softreach/error.hpp"
#include "softreach/sets.hpp"

namespace softreach {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

[[noreturn]] void line_error(int line, const std::string& what) {
  fail(ErrorKind::validation, line > 0 ? "line " + std::to_string(line) + ": " + what : what);
}

double number(const std::string& tok, int line) {
  std::string body = tok;
  double scale = 1.0;
  if (body.size() > 3 && body.compare(body.size() - 3, 3, "deg") == 0) {
    body.resize(body.size() - 3);
    scale = kDeg;
  }
  const char* begin = body.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (body.empty() || end != begin + body.size() || std::isnan(v)) line_error(line, "malformed number '" + tok + "'");
  return v * scale;
}

std::size_t count_value(const std::string& tok, int line) {
  const double v = number(tok, line);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) line_error(line, "expected a non-negative integer, got '" + tok + "'");
  return static_cast<std::size_t>(v);
}

std::vector<double> numbers(const std::string& value, int line) {
  std::vector<double> out;
  for (const auto& t : tokens(value)) out.push_back(number(t, line));
  return out;
}

double single(const std::string& value, int line) {
  const auto t = tokens(value);
  if (t.size() != 1) line_error(line, "expected one number, got '" + value + "'");
  return number(t[0], line);
}

ControlSpec::Channel channel(const std::string& name, const std::string& value, int line) {
  const auto t = tokens(value);
  if (t.empty()) line_error(line, "empty input specification for '" + name + "'");
  if (t[0] == "interval") {
    if (t.size() != 3) line_error(line, "expected 'interval lo hi'");
    const double lo = number(t[1], line), hi = number(t[2], line);
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi)) line_error(line, "interval needs finite lo <= hi");
    return ControlSpec::interval(name, lo, hi);
  }
  if (t[0] == "samples-uniform") {
    if (t.size() != 4) line_error(line, "expected 'samples-uniform lo hi count'");
    const double lo = number(t[1], line), hi = number(t[2], line);
    const std::size_t n = count_value(t[3], line);
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi && n >= 2))
      line_error(line, "samples-uniform needs finite lo < hi and count >= 2");
    return ControlSpec::uniform_samples(name, lo, hi, n);
  }
  if (t[0] == "samples") {
    if (t.size() < 2) line_error(line, "expected 'samples v1 v2 ...'");
    std::vector<double> v;
    for (std::size_t i = 1; i < t.size(); ++i) {
      v.push_back(number(t[i], line));
      if (!std::isfinite(v.back())) line_error(line, "samples must be finite");
    }
    return ControlSpec::sample_list(name, std::move(v));
  }
  line_error(line, "unknown input kind '" + t[0] + "' (interval, samples, samples-uniform)");
}

std::string channel_text(const ControlSpec::Channel& c) {
  std::string s;
  if (c.kind == ControlSpec::Kind::interval) return "interval " + format_double(c.lo) + " " + format_double(c.hi);
  s = "samples";
  for (double v : c.samples) s += " " + format_double(v);
  return s;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

const std::set<std::string>& allowed_params(const std::string& id) {
  static const std::set<std::string> pm{"gravity"};
  static const std::set<std::string> fw{"mass", "air_density", "wing_area", "gravity"};
  static const std::set<std::string> none;
  if (id == "point-mass") return pm;
  if (id == "fixed-wing") return fw;
  return none;
}

std::vector<std::string> model_state_names(const std::string& id) {
  if (id == "point-mass") return {"vy", "y"};
  return {"h", "V", "gamma"};
}

}  // namespace

Scenario Scenario::parse(const std::string& text, const std::string& base_dir) {
  Scenario sc;
  sc.base_dir = base_dir;
  bool has_horizon = false;
  std::map<std::size_t, std::pair<ScenarioAxis, int>> axes;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) line_error(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) line_error(lineno, "missing key");
    if (value.empty()) line_error(lineno, "missing value for '" + key + "'");
    if (sc.lines_.count(key)) {
      line_error(lineno, "duplicate key '" + key + "' (first set on line " + std::to_string(sc.lines_[key]) + ")");
    }
    sc.lines_[key] = lineno;

    const auto dot = key.find('.');
    const std::string head = key.substr(0, dot);
    const std::string rest = dot == std::string::npos ? "" : key.substr(dot + 1);

    if (key == "model.id") {
      sc.model_id = value;
    } else if (key == "model.aero_table") {
      sc.aero_table = value;
    } else if (head == "model" && !rest.empty()) {
      sc.model_params[rest] = single(value, lineno);
    } else if ((head == "control" || head == "disturbance") && !rest.empty()) {
      (head == "control" ? sc.controls : sc.disturbances).push_back(channel(rest, value, lineno));
    } else if (key == "horizon") {
      sc.horizon = single(value, lineno);
      has_horizon = true;
    } else if (key == "epsilon") {
      sc.epsilon = single(value, lineno);
    } else if (key == "eta") {
      sc.eta = single(value, lineno);
    } else if (key == "budgets") {
      sc.budgets = numbers(value, lineno);
    } else if (key.rfind("grid.axis.", 0) == 0) {
      const std::size_t k = count_value(key.substr(10), lineno);
      const auto t = tokens(value);
      if (t.size() != 4) line_error(lineno, "expected 'name min max count'");
      axes[k] = {{t[0], number(t[1], lineno), number(t[2], lineno), count_value(t[3], lineno)}, lineno};
    } else if (key == "grid.budget.count") {
      sc.budget_count = count_value(value, lineno);
    } else if ((head == "target" || head == "hard" || head == "soft") && (rest == "lo" || rest == "hi")) {
      ScenarioBox& box = head == "target" ? sc.target : head == "hard" ? sc.hard : sc.soft;
      (rest == "lo" ? box.lo : box.hi) = numbers(value, lineno);
    } else if (key == "solver.cfl") {
      sc.solver.cfl = single(value, lineno);
    } else if (key == "solver.store_stride") {
      sc.solver.store_stride = count_value(value, lineno);
    } else if (key == "solver.fixed_point_tol") {
      sc.solver.fixed_point_tol = single(value, lineno);
    } else if (key == "solver.state_ghost") {
      if (value == "constant") sc.solver.state_ghost = GhostRule::constant;
      else if (value == "linear") sc.solver.state_ghost = GhostRule::linear;
      else line_error(lineno, "solver.state_ghost must be 'constant' or 'linear'");
    } else if (key == "sim.dt") {
      sc.sim_dt = single(value, lineno);
    } else if (key == "output.dir") {
      sc.output_dir = value;
    } else {
      line_error(lineno, "unknown key '" + key + "'");
    }
  }
  if (sc.model_id.empty()) line_error(0, "missing key 'model.id'");
  if (!has_horizon) line_error(0, "missing key 'horizon'");
  std::size_t expect = 0;
  for (auto& [k, entry] : axes) {
    if (k != expect) line_error(entry.second, "grid axes must be numbered 0, 1, ... without gaps");
    sc.axes.push_back(entry.first);
    ++expect;
  }
  sc.solver.epsilon = sc.epsilon;
  sc.validate();
  return sc;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open scenario '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string dir = std::filesystem::path(path).parent_path().string();
  if (dir.empty()) dir = ".";
  try {
    return parse(ss.str(), dir);
  } catch (const Error& e) {
    fail(e.kind(), path + ": " + e.what());
  }
}

void Scenario::validate() const {
  const auto at = [&](const std::string& key) {
    const auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
  };
  if (model_id != "point-mass" && model_id != "fixed-wing")
    line_error(at("model.id"), "unknown model '" + model_id + "' (point-mass, fixed-wing)");
  for (const auto& [k, v] : model_params) {
    if (!allowed_params(model_id).count(k)) line_error(at("model." + k), "unknown parameter 'model." + k + "' for " + model_id);
    if (!(std::isfinite(v) && v > 0.0)) line_error(at("model." + k), "model." + k + " must be positive");
  }
  if (!aero_table.empty() && model_id != "fixed-wing") line_error(at("model.aero_table"), "aero table only applies to fixed-wing");
  if (controls.size() != 1) line_error(0, model_id + " needs exactly one control.<name> entry");
  if (disturbances.size() != 1) line_error(0, model_id + " needs exactly one disturbance.<name> entry");
  if (!(std::isfinite(horizon) && horizon > 0.0)) line_error(at("horizon"), "horizon must be positive");
  if (!(std::isfinite(epsilon) && epsilon > 0.0)) line_error(at("epsilon"), "epsilon must be positive");
  if (!(std::isfinite(eta) && eta >= 0.0)) line_error(at("eta"), "eta must be non-negative");
  for (double q : budgets) {
    if (!(q >= 0.0 && q <= horizon)) line_error(at("budgets"), "budget " + format_double(q) + " outside [0, horizon]");
  }

  const auto names = model_state_names(model_id);
  if (axes.size() != names.size()) {
    line_error(0, model_id + " needs " + std::to_string(names.size()) + " grid axes, got " + std::to_string(axes.size()));
  }
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const int ln = at("grid.axis." + std::to_string(i));
    const auto& a = axes[i];
    if (a.name != names[i]) line_error(ln, "axis " + std::to_string(i) + " must be '" + names[i] + "', got '" + a.name + "'");
    if (!(std::isfinite(a.min) && std::isfinite(a.max) && a.min < a.max)) line_error(ln, "axis needs finite min < max");
    if (a.count < 3) line_error(ln, "axis needs at least 3 nodes");
  }
  if (model_id == "fixed-wing" && !(axes[1].min > 0.0))
    line_error(at("grid.axis.1"), "fixed-wing airspeed axis must exclude V <= 0");
  if (budget_count > 0) {
    try {
      budget_axis(horizon, budget_count);
    } catch (const Error& e) {
      line_error(at("grid.budget.count"), e.what());
    }
  }

  const auto check_box = [&](const ScenarioBox& b, const std::string& name) {
    const int ln = std::max(at(name + ".lo"), at(name + ".hi"));
    if (b.lo.empty() && b.hi.empty()) line_error(0, "missing box '" + name + "'");
    if (b.lo.size() != names.size() || b.hi.size() != names.size())
      line_error(ln, "box '" + name + "' needs " + std::to_string(names.size()) + " bounds per side");
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!(b.lo[i] <= b.hi[i])) line_error(ln, "box '" + name + "' has lo > hi on axis " + names[i]);
      const double slack = 1e-9 * (axes[i].max - axes[i].min);
      for (double v : {b.lo[i], b.hi[i]}) {
        if (std::isfinite(v) && (v < axes[i].min - slack || v > axes[i].max + slack))
          line_error(ln, "box '" + name + "' bound " + format_double(v) + " on axis " + names[i] + " lies outside the grid");
      }
    }
  };
  check_box(target, "target");
  check_box(hard, "hard");
  check_box(soft, "soft");

  if (!(solver.cfl > 0.0 && solver.cfl <= 1.0)) line_error(at("solver.cfl"), "solver.cfl must lie in (0, 1]");
  if (solver.store_stride < 1) line_error(at("solver.store_stride"), "solver.store_stride must be at least 1");
  if (!(solver.fixed_point_tol >= 0.0)) line_error(at("solver.fixed_point_tol"), "solver.fixed_point_tol must be non-negative");
  if (!(sim_dt >= 0.0 && std::isfinite(sim_dt))) line_error(at("sim.dt"), "sim.dt must be non-negative");
  if (output_dir.empty()) line_error(at("output.dir"), "output.dir must not be empty");
}

void Scenario::require_budget_axis() const {
  if (!has_budget_axis()) fail(ErrorKind::validation, "soft operations need a budget axis (grid.budget.count)");
}

std::string Scenario::serialize() const {
  std::ostringstream os;
  os << "model.id = " << model_id << '\n';
  for (const auto& [k, v] : model_params) os << "model." << k << " = " << format_double(v) << '\n';
  if (!aero_table.empty()) os << "model.aero_table = " << aero_table << '\n';
  for (const auto& c : controls) os << "control." << c.name << " = " << channel_text(c) << '\n';
  for (const auto& c : disturbances) os << "disturbance." << c.name << " = " << channel_text(c) << '\n';
  os << "horizon = " << format_double(horizon) << '\n';
  os << "epsilon = " << format_double(epsilon) << '\n';
  os << "eta = " << format_double(eta) << '\n';
  if (!budgets.empty()) os << "budgets = " << join(budgets) << '\n';
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto& a = axes[i];
    os << "grid.axis." << i << " = " << a.name << ' ' << format_double(a.min) << ' ' << format_double(a.max) << ' '
       << a.count << '\n';
  }
  if (budget_count > 0) os << "grid.budget.count = " << budget_count << '\n';
  for (const auto& [name, box] : {std::pair{"target", &target}, {"hard", &hard}, {"soft", &soft}}) {
    os << name << ".lo = " << join(box->lo) << '\n';
    os << name << ".hi = " << join(box->hi) << '\n';
  }
  os << "solver.cfl = " << format_double(solver.cfl) << '\n';
  os << "solver.store_stride = " << solver.store_stride << '\n';
  os << "solver.fixed_point_tol = " << format_double(solver.fixed_point_tol) << '\n';
  os << "solver.state_ghost = " << (solver.state_ghost == GhostRule::constant ? "constant" : "linear") << '\n';
  if (sim_dt > 0.0) os << "sim.dt = " << format_double(sim_dt) << '\n';
  os << "output.dir = " << output_dir << '\n';
  return os.str();
}

Scenario Scenario::scaled(double factor) const {
  require(std::isfinite(factor) && factor > 0.0, "grid scale must be positive");
  Scenario s = *this;
  const auto scale = [&](std::size_t n) {
    return static_cast<std::size_t>(std::max(3.0, std::round(static_cast<double>(n) * factor)));
  };
  for (auto& a : s.axes) a.count = scale(a.count);
  if (s.budget_count > 0) s.budget_count = std::max<std::size_t>(5, scale(s.budget_count));
  return s;
}

std::shared_ptr<const SystemModel> Scenario::build_model() const {
  const auto param = [&](const std::string& k, double dflt) {
    const auto it = model_params.find(k);
    return it == model_params.end() ? dflt : it->second;
  };
  ControlSpec control(controls);
  ControlSpec disturbance(disturbances);
  if (model_id == "point-mass") return std::make_shared<PointMass>(control, disturbance, param("gravity", 9.8));
  FixedWingParams p;
  p.mass = param("mass", p.mass);
  p.air_density = param("air_density", p.air_density);
  p.wing_area = param("wing_area", p.wing_area);
  p.gravity = param("gravity", p.gravity);
  AeroTable aero;
  if (aero_table.empty()) {
    const auto& ch = controls.front();
    const auto alphas = ch.kind == ControlSpec::Kind::samples
                            ? ch.samples
                            : ControlSpec::uniform_samples(ch.name, ch.lo, ch.hi, 27).samples;
    aero = AeroTable::surrogate(alphas);
  } else {
    std::filesystem::path path(aero_table);
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    aero = AeroTable::load_csv(path.string());
  }
  return std::make_shared<FixedWing>(control, disturbance, std::move(aero), p);
}

ReachProblem Scenario::problem() const {
  return {build_model(), ImplicitSet::box(target.lo, target.hi), ImplicitSet::box(hard.lo, hard.hi),
          ImplicitSet::box(soft.lo, soft.hi), horizon};
}

Grid Scenario::state_grid() const {
  std::vector<AxisSpec> specs;
  for (const auto& a : axes) specs.push_back({a.min, a.max, a.count});
  return Grid::build(specs);
}

Grid Scenario::grid(SolveMode mode) const {
  if (mode == SolveMode::classical) return state_grid();
  require_budget_axis();
  std::vector<AxisSpec> specs;
  for (const auto& a : axes) specs.push_back({a.min, a.max, a.count});
  specs.push_back(budget_axis(horizon, budget_count));
  return Grid::build(specs);
}

SolveConfig Scenario::solve_config() const {
  SolveConfig c = solver;
  c.epsilon = epsilon;
  return c;
}

bool Scenario::operator==(const Scenario& o) const {
  return model_id == o.model_id && model_params == o.model_params && aero_table == o.aero_table &&
         controls == o.controls && disturbances == o.disturbances && target == o.target && hard == o.hard &&
         soft == o.soft && horizon == o.horizon && epsilon == o.epsilon && eta == o.eta && budgets == o.budgets &&
         axes == o.axes && budget_count == o.budget_count && solver.cfl == o.solver.cfl &&
         solver.store_stride == o.solver.store_stride && solver.fixed_point_tol == o.solver.fixed_point_tol &&
         solver.state_ghost == o.solver.state_ghost && sim_dt == o.sim_dt && output_dir == o.output_dir;
}

}  // namespace softreach
