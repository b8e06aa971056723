#include "softreach/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "softreach/error.hpp"
#include "softreach/geometry.hpp"
#include "softreach/scenario.hpp"
#include "softreach/sets.hpp"
#include "softreach/sim.hpp"
#include "softreach/svg.hpp"

namespace softreach {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

fs::path prepare_dir(const std::string& dir) {
  const fs::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(ErrorKind::io, "cannot create directory '" + p.string() + "': " + ec.message());
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
}

fs::path field_dir(const std::string& field) {
  const fs::path d = fs::path(field).parent_path();
  return d.empty() ? fs::path(".") : d;
}

double contour_length(const std::vector<Polyline>& lines) {
  double total = 0.0;
  for (const auto& pl : lines)
    for (std::size_t k = 0; k + 1 < pl.points.size(); ++k)
      total += std::hypot(pl.points[k + 1][0] - pl.points[k][0], pl.points[k + 1][1] - pl.points[k][1]);
  return total;
}

struct LoadedField {
  ScalarField W;
  std::map<std::string, std::string> meta;
  std::vector<std::string> names;  // state axis names
  int state_dim = 0;
  bool soft = false;
  double horizon = 0.0;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

LoadedField load_field(const std::string& path) {
  LoadedField f;
  f.W = read_field(path, &f.meta);
  const int dim = f.W.grid().dim();
  if (f.meta.count("mode")) {
    f.soft = f.meta["mode"] == "soft";
  } else {
    f.soft = false;
  }
  f.state_dim = f.soft ? dim - 1 : dim;
  if (f.meta.count("axes")) f.names = split(f.meta["axes"], ',');
  f.names.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    if (f.names[static_cast<std::size_t>(i)].empty()) f.names[static_cast<std::size_t>(i)] = "x" + std::to_string(i);
  }
  f.names.resize(static_cast<std::size_t>(f.state_dim));
  f.horizon = f.meta.count("horizon") ? std::stod(f.meta["horizon"]) : f.W.grid().max(dim - 1);
  return f;
}

// Scenario given explicitly, else the resolved copy written next to the field.
bool find_scenario(const std::string& given, const std::string& field, Scenario& out) {
  if (!given.empty()) {
    out = Scenario::load(given);
    return true;
  }
  const fs::path p = field_dir(field) / "scenario.resolved";
  if (!fs::exists(p)) return false;
  out = Scenario::load(p.string());
  return true;
}

double pick_eta(double given, const Scenario* sc) {
  if (!std::isnan(given)) {
    require(given >= 0.0 && std::isfinite(given), "eta must be non-negative");
    return given;
  }
  return sc ? sc->eta : 1e-3;
}

// Membership field on the (h, V)-style plane of axes 0 and 1: -1 where some
// node along the remaining axes is inside, +1 elsewhere.
ScalarField projection(const ScalarField& f, const SetMask& m) {
  const Grid& g = f.grid();
  if (g.dim() == 2) return f;
  const Grid g2 = Grid::build(std::vector<AxisSpec>{g.axis(0), g.axis(1)});
  std::vector<double> v(g2.node_count(), 1.0);
  const std::size_t inner = g.node_count() / g2.node_count();
  for (std::size_t n = 0; n < m.bits.size(); ++n) {
    if (m.bits[n]) v[n / inner] = -1.0;
  }
  return ScalarField(g2, {f.times().front()}, {std::move(v)});
}

void add_scenario_boxes(SvgPlot& plot, const Scenario& sc) {
  const auto box = [&](const ScenarioBox& b, const char* fill, const char* stroke, const char* label) {
    plot.add_box({b.lo[0], b.lo[1]}, {b.hi[0], b.hi[1]}, fill, stroke, label);
  };
  box(sc.hard, "#f4a6a6", "#c0392b", "hard constraint");
  box(sc.soft, "#fbd38d", "#d68910", "soft constraint");
  box(sc.target, "#9e9e9e", "#424242", "target");
}

ordered_json parse_json(const std::string& s) { return ordered_json::parse(s); }

}  // namespace

double normalized_spacing(const Grid& g) {
  require(g.dim() == 2, "normalized spacing needs a 2-D grid");
  double s = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double r = g.spacing(i) / (g.max(i) - g.min(i));
    s += r * r;
  }
  return std::sqrt(s);
}

std::string run_solve(const SolveCommand& cmd) {
  Scenario sc = Scenario::load(cmd.scenario);
  if (cmd.grid_scale != 1.0) sc = sc.scaled(cmd.grid_scale);
  if (cmd.mode == SolveMode::soft) sc.require_budget_axis();
  const ReachProblem problem = sc.problem();
  const Grid grid = sc.grid(cmd.mode);
  const SolveResult res = solve(problem, grid, cmd.mode, sc.solve_config());

  const fs::path dir = prepare_dir(cmd.out_dir.empty() ? sc.output_dir : cmd.out_dir);
  const std::string mode = cmd.mode == SolveMode::soft ? "soft" : "classical";
  std::string axes;
  for (const auto& a : sc.axes) axes += (axes.empty() ? "" : ",") + a.name;
  if (cmd.mode == SolveMode::soft) axes += ",z";
  const fs::path field_path = dir / ("value_" + mode + ".srfield");
  write_field(field_path.string(), res.value,
              {{"mode", mode}, {"model", sc.model_id}, {"horizon", format_double(sc.horizon)}, {"axes", axes}});

  // The copy must resolve its aero table from any directory.
  Scenario copy = sc;
  if (!copy.aero_table.empty() && fs::path(copy.aero_table).is_relative())
    copy.aero_table = fs::absolute(fs::path(sc.base_dir) / sc.aero_table).lexically_normal().string();
  write_text(dir / "scenario.resolved", copy.serialize());

  ordered_json report = parse_json(res.report.to_json());
  report.erase("wall_time_s");  // keeps the report byte-identical across runs
  ordered_json out;
  out["mode"] = mode;
  out["model"] = sc.model_id;
  out["grid"] = ordered_json::array();
  for (const auto& a : grid.axes()) out["grid"].push_back({{"min", a.min}, {"max", a.max}, {"count", a.count}});
  out["epsilon"] = cmd.mode == SolveMode::soft ? sc.epsilon : 0.0;
  out["report"] = report;
  write_text(dir / ("report_" + mode + ".json"), out.dump(2) + "\n");

  ordered_json summary;
  summary["field"] = field_path.string();
  summary["report"] = (dir / ("report_" + mode + ".json")).string();
  summary["steps"] = res.report.steps;
  summary["nodes"] = grid.node_count();
  summary["wall_time_s"] = res.report.wall_time_s;
  return summary.dump(2);
}

std::string run_extract(const ExtractCommand& cmd) {
  LoadedField f = load_field(cmd.field);
  Scenario sc;
  const bool have_sc = find_scenario(cmd.scenario, cmd.field, sc);
  const double eta = pick_eta(cmd.eta, have_sc ? &sc : nullptr);
  const fs::path dir = prepare_dir(cmd.out_dir.empty() ? field_dir(cmd.field).string() : cmd.out_dir);
  const double t = f.W.times().front();

  struct Entry {
    std::string label;
    std::string file_tag;
    double Q;
    double eta;
    ScalarField state;
  };
  std::vector<Entry> sets;
  if (f.soft) {
    std::vector<double> budgets = cmd.budgets;
    if (budgets.empty() && have_sc) budgets = sc.budgets;
    require(!budgets.empty(), "extract: no budgets given and no scenario budget list available");
    for (double Q : budgets) {
      const double e = proxy_eta(Q, eta);
      sets.push_back({"Q=" + tag(Q), "Q" + tag(Q), Q, e, slice_budget(f.W, {Q, e, t})});
    }
  } else {
    require(cmd.budgets.empty(), "extract: budgets need a field with a budget axis (solve with --mode soft)");
    sets.push_back({"classical", "classical", 0.0, 0.0, f.W.single_stamp(0)});
  }

  ordered_json summary;
  summary["sets"] = ordered_json::array();
  std::vector<ContourSlice> contours;
  const Grid& sg = sets.front().state.grid();
  std::optional<SvgPlot> plot;
  if (cmd.svg) {
    plot.emplace(std::array{sg.min(0), sg.max(0)}, std::array{sg.min(1), sg.max(1)}, f.names[0], f.names[1],
                 f.soft ? "soft-constrained reach-avoid sets" : "reach-avoid set");
    if (have_sc) add_scenario_boxes(*plot, sc);
    if (f.state_dim > 2) plot->add_note("projection onto " + f.names[0] + ", " + f.names[1]);
  }
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const Entry& e = sets[i];
    const SetMask mask = sublevel_mask(e.state, 0, 0.0);
    const fs::path mpath = dir / ("mask_" + e.file_tag + ".srfield");
    write_field(mpath.string(), mask_field(mask, t), {{"kind", "mask"}, {"eta", format_double(e.eta)}});
    ordered_json s;
    s["label"] = e.label;
    if (f.soft) s["Q"] = e.Q;
    s["eta"] = e.eta;
    s["nodes"] = mask.count();
    s["measure"] = measure(mask);
    s["empty"] = mask.count() == 0;
    s["mask"] = mpath.string();
    summary["sets"].push_back(s);

    const ScalarField plane = projection(e.state, mask);
    const std::vector<Polyline> lines = mask.count() ? extract_contour(plane, 0, 0.0) : std::vector<Polyline>{};
    if (cmd.contours) {
      ContourSlice c;
      if (f.soft) c.fixed["z"] = e.Q;
      c.polylines = lines;
      contours.push_back(std::move(c));
    }
    if (plot) {
      if (mask.count() == 0) {
        plot->add_note(e.label + ": empty");
      } else {
        plot->add_polylines(lines, SvgPlot::palette(i), e.label);
      }
    }
  }
  if (cmd.contours) {
    write_text(dir / "contours.json", contours_json(0.0, contours) + "\n");
    summary["contours"] = (dir / "contours.json").string();
  }
  if (plot) {
    plot->save((dir / "sets.svg").string());
    summary["svg"] = (dir / "sets.svg").string();
  }
  return summary.dump(2);
}

std::string run_qmin(const QminCommand& cmd) {
  LoadedField f = load_field(cmd.field);
  require(f.soft, "qmin needs a field with a budget axis (solve with --mode soft)");
  Scenario sc;
  const bool have_sc = find_scenario(cmd.scenario, cmd.field, sc);
  const double eta = pick_eta(cmd.eta, have_sc ? &sc : nullptr);
  for (const auto& [t1, t2] : cmd.bands) {
    require(t1 < t2, "band (" + format_double(t1) + ", " + format_double(t2) + "] needs t1 < t2");
  }
  const fs::path dir = prepare_dir(cmd.out_dir.empty() ? field_dir(cmd.field).string() : cmd.out_dir);
  const QminField q = qmin(f.W, f.horizon, cmd.t, eta);
  write_qmin((dir / "qmin.srfield").string(), q);

  std::ostringstream csv;
  for (const auto& n : f.names) csv << n << ',';
  csv << "qmin,feasible\n";
  std::array<double, kMaxDim> p{};
  std::size_t feasible = 0;
  for (std::size_t n = 0; n < q.values.size(); ++n) {
    q.grid.node_point(n, p);
    for (int i = 0; i < q.grid.dim(); ++i) csv << format_double(p[static_cast<std::size_t>(i)]) << ',';
    const bool ok = !q.infeasible(n);
    feasible += ok;
    csv << format_double(q.values[n]) << ',' << (ok ? 1 : 0) << '\n';
  }
  write_text(dir / "qmin.csv", csv.str());

  ordered_json summary;
  summary["qmin"] = (dir / "qmin.srfield").string();
  summary["heatmap"] = (dir / "qmin.csv").string();
  summary["eta"] = eta;
  summary["sentinel"] = q.sentinel;
  summary["feasible_nodes"] = feasible;
  summary["bands"] = ordered_json::array();
  for (const auto& [t1, t2] : cmd.bands) {
    const BandResult b = band_set(f.W, q, t1, t2);
    const fs::path path = dir / ("band_" + tag(t1) + "_" + tag(t2) + ".srfield");
    write_field(path.string(), mask_field(b.mask, cmd.t), {{"kind", "mask"}});
    summary["bands"].push_back(
        {{"t1", t1}, {"t2", t2}, {"nodes", b.mask.count()}, {"disagreements", b.disagreements}, {"mask", path.string()}});
  }
  write_text(dir / "bands.json", summary["bands"].dump(2) + "\n");
  return summary.dump(2);
}

std::string run_simulate(const SimulateCommand& cmd) {
  const Scenario sc = Scenario::load(cmd.scenario);
  const LoadedField f = load_field(cmd.field);
  require(f.state_dim == sc.build_model()->state_dim(), "simulate: field does not match the scenario's model");
  const double dt = std::isnan(cmd.dt) ? sc.simulation_dt() : cmd.dt;
  require(dt > 0.0 && std::isfinite(dt), "simulate: dt must be positive, got " + format_double(dt));
  require(cmd.budget_tolerance >= 0.0, "simulate: budget tolerance must be non-negative");
  const ReachProblem problem = sc.problem();
  RolloutConfig rc;
  rc.dt = dt;
  rc.t0 = f.W.times().front();
  rc.horizon = sc.horizon - rc.t0;
  rc.budget_tolerance = cmd.budget_tolerance;
  const Trajectory tr = rollout(problem, f.W, cmd.x0, cmd.Q0, rc);

  const fs::path dir = prepare_dir(cmd.out_dir.empty() ? field_dir(cmd.field).string() : cmd.out_dir);
  write_text(dir / "trajectory.csv", tr.to_csv(*problem.model));
  write_text(dir / "verdict.json", tr.verdict.to_json() + "\n");
  ordered_json summary;
  summary["trajectory"] = (dir / "trajectory.csv").string();
  summary["verdict"] = parse_json(tr.verdict.to_json());
  summary["final_budget"] = tr.budget.back();
  if (cmd.svg) {
    const Grid& g = f.W.grid();
    SvgPlot plot({g.min(0), g.max(0)}, {g.min(1), g.max(1)}, f.names[0], f.names[1], "feedback rollout");
    add_scenario_boxes(plot, sc);
    Polyline path;
    for (const auto& x : tr.states) path.points.push_back({x[0], x[1]});
    plot.add_polylines({path}, "#1f4e9c", "trajectory (Q0=" + tag(cmd.Q0) + ")", 2.0);
    plot.add_marker({tr.states.front()[0], tr.states.front()[1]}, "#1f4e9c", "initial state");
    plot.add_note(tr.verdict.satisfied() ? "verdict: pass" : "verdict: fail");
    plot.save((dir / "trajectory.svg").string());
    summary["svg"] = (dir / "trajectory.svg").string();
  }
  return summary.dump(2);
}

std::string run_study(const StudyCommand& cmd) {
  Scenario sc = Scenario::load(cmd.scenario);
  if (cmd.grid_scale != 1.0) sc = sc.scaled(cmd.grid_scale);
  sc.require_budget_axis();
  const double eta = pick_eta(cmd.eta, &sc);
  const fs::path dir = prepare_dir(cmd.out_dir.empty() ? sc.output_dir : cmd.out_dir);
  const ReachProblem problem = sc.problem();
  ordered_json summary;

  if (cmd.kind == "boundary-error") {
    require(sc.axes.size() == 2, "boundary-error study needs a two-dimensional state space");
    require(cmd.samples > 0, "boundary-error study needs a positive sample count");
    std::vector<std::size_t> sizes = cmd.sizes;
    if (sizes.empty()) sizes.push_back(sc.axes[0].count);
    std::ostringstream csv;
    csv << "N,h,mean,max\n";
    summary["rows"] = ordered_json::array();
    for (std::size_t N : sizes) {
      require(N >= 3, "boundary-error study: N must be at least 3");
      Scenario s = sc;
      for (auto& a : s.axes) a.count = N;
      const double ratio = static_cast<double>(N) / static_cast<double>(sc.axes[0].count);
      s.budget_count = std::max<std::size_t>(5, static_cast<std::size_t>(std::lround(sc.budget_count * ratio)));
      const SolveConfig cfg = s.solve_config();
      const SolveResult classical = solve(problem, s.grid(SolveMode::classical), SolveMode::classical, cfg);
      const SolveResult soft = solve(problem, s.grid(SolveMode::soft), SolveMode::soft, cfg);
      const ScalarField reference = classical.value.single_stamp(0);
      const ScalarField zero = slice_budget(soft.value, {0.0, 0.0, soft.value.times().front()});
      const Grid& g = reference.grid();
      const double h = normalized_spacing(g);
      if (contour_length(extract_contour(reference, 0, 0.0)) == 0.0) {
        // Too coarse to resolve the classical set; keep the row so the table stays aligned with --N.
        csv << N << ',' << format_double(h) << ",nan,nan\n";
        summary["rows"].push_back({{"N", N}, {"h", h}, {"mean", nullptr}, {"max", nullptr}, {"note", "empty classical set"}});
        continue;
      }
      const std::array<double, 2> scales{1.0 / (g.max(0) - g.min(0)), 1.0 / (g.max(1) - g.min(1))};
      const ScalarField sdf = signed_distance_field(zero, 0, 0.0, scales);
      const BoundaryError err = boundary_error(reference, sdf, cmd.samples, scales, cmd.seed);
      csv << N << ',' << format_double(h) << ',' << format_double(err.mean) << ',' << format_double(err.max) << '\n';
      summary["rows"].push_back({{"N", N}, {"h", h}, {"mean", err.mean}, {"max", err.max}});
    }
    write_text(dir / "boundary_error.csv", csv.str());
    summary["csv"] = (dir / "boundary_error.csv").string();
  } else if (cmd.kind == "eps-convergence") {
    std::vector<double> eps = cmd.epsilons;
    if (eps.empty()) eps = {10.0, 5.0, 1.0, 0.5};
    std::vector<double> budgets = cmd.budgets.empty() ? sc.budgets : cmd.budgets;
    const EpsilonStudy st =
        epsilon_convergence_study(problem, sc.grid(SolveMode::soft), sc.solve_config(), eps, budgets, eta);
    write_text(dir / "eps_convergence.csv", st.to_csv());
    summary["csv"] = (dir / "eps_convergence.csv").string();
    summary["cell_volume"] = st.cell_volume;
    summary["rows"] = st.rows.size();
  } else {
    fail(ErrorKind::validation, "unknown study '" + cmd.kind + "' (boundary-error, eps-convergence)");
  }
  return summary.dump(2);
}

}  // namespace softreach
