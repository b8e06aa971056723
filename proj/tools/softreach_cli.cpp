// Command-line front end. Talks to the library only through softreach.h.
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "softreach/softreach.h"

namespace {

int exit_code(sr_status s) {
  switch (s) {
    case SR_OK: return 0;
    case SR_ERR_VALIDATION:
    case SR_ERR_DOMAIN: return 2;
    case SR_ERR_NUMERICAL: return 3;
    case SR_ERR_IO: return 4;
    default: return 1;
  }
}

int finish(sr_status s, char* summary) {
  if (s == SR_OK) {
    if (summary) std::printf("%s\n", summary);
  } else {
    std::fprintf(stderr, "error: %s\n", sr_last_error());
  }
  sr_string_free(summary);
  return exit_code(s);
}

const char* opt_str(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft-constrained reach-avoid sets from regularized HJI variational inequalities"};
  app.require_subcommand(1);
  double grid_scale = 1.0;
  app.add_option("--grid-scale", grid_scale, "Multiply every axis node count")->check(CLI::PositiveNumber);

  // solve
  auto* solve = app.add_subcommand("solve", "Solve the value function of a scenario");
  std::string sc_path, mode = "soft", out_dir;
  solve->add_option("scenario", sc_path, "Scenario file")->required();
  solve->add_option("--mode", mode, "classical or soft")->check(CLI::IsMember({"classical", "soft"}));
  solve->add_option("-o,--out", out_dir, "Output directory (default: output.dir)");

  // extract
  auto* extract = app.add_subcommand("extract", "Budget slices, masks, contours and SVG");
  std::string field_path, ex_scenario;
  std::vector<double> budgets;
  double eta = NAN;
  bool no_contours = false, no_svg = false;
  extract->add_option("field", field_path, "SRFIELD value dump")->required();
  extract->add_option("--Q", budgets, "Budgets (default: scenario list)")->delimiter(',');
  extract->add_option("--eta", eta, "Proxy margin (default: scenario eta)");
  extract->add_option("--scenario", ex_scenario, "Scenario for the overlay boxes");
  extract->add_flag("--no-contours", no_contours, "Skip contours.json");
  extract->add_flag("--no-svg", no_svg, "Skip sets.svg");
  extract->add_option("-o,--out", out_dir, "Output directory (default: the field's directory)");

  // qmin
  auto* qmin = app.add_subcommand("qmin", "Minimum-budget field and band sets");
  double t = 0.0;
  std::vector<std::string> bands;
  qmin->add_option("field", field_path, "SRFIELD soft value dump")->required();
  qmin->add_option("--t", t, "Time stamp");
  qmin->add_option("--eta", eta, "Proxy margin (default: scenario eta)");
  qmin->add_option("--band", bands, "Band t1,t2 meaning (t1, t2]; repeatable");
  qmin->add_option("--scenario", ex_scenario, "Scenario file");
  qmin->add_option("-o,--out", out_dir, "Output directory");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Worst-case feedback rollout");
  std::vector<double> x0;
  double Q0 = 0.0, dt = NAN, budget_tol = 0.0;
  sim->add_option("scenario", sc_path, "Scenario file")->required();
  sim->add_option("field", field_path, "SRFIELD value dump")->required();
  sim->add_option("--x0", x0, "Initial state, comma separated")->delimiter(',')->required();
  sim->add_option("--Q0", Q0, "Assigned violation-time budget");
  sim->add_option("--dt", dt, "Sampling step (default: sim.dt)");
  sim->add_option("--budget-tol", budget_tol, "Slack on the budget clause");
  sim->add_flag("--no-svg", no_svg, "Skip trajectory.svg");
  sim->add_option("-o,--out", out_dir, "Output directory");

  // study
  auto* study = app.add_subcommand("study", "Boundary-error and epsilon-convergence tables");
  std::string kind;
  std::vector<std::size_t> sizes;
  std::vector<double> eps;
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  study->add_option("scenario", sc_path, "Scenario file")->required();
  study->add_option("--study", kind, "boundary-error or eps-convergence")
      ->required()
      ->check(CLI::IsMember({"boundary-error", "eps-convergence"}));
  study->add_option("--N", sizes, "Nodes per state axis")->delimiter(',');
  study->add_option("--eps", eps, "Descending epsilon list")->delimiter(',');
  study->add_option("--Q", budgets, "Budgets")->delimiter(',');
  study->add_option("--eta", eta, "Proxy margin");
  study->add_option("--samples", samples, "Contour samples");
  study->add_option("--seed", seed, "Sampling seed");
  study->add_option("-o,--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  char* summary = nullptr;
  if (*solve) {
    sr_solve_options o{sc_path.c_str(), mode == "soft" ? SR_MODE_SOFT : SR_MODE_CLASSICAL, grid_scale,
                       opt_str(out_dir)};
    const sr_status st = sr_cmd_solve(&o, &summary);
    return finish(st, summary);
  }
  if (*extract) {
    sr_extract_options o{field_path.c_str(), opt_str(ex_scenario), budgets.data(), budgets.size(), eta,
                         no_contours ? 0 : 1, no_svg ? 0 : 1, opt_str(out_dir)};
    const sr_status st = sr_cmd_extract(&o, &summary);
    return finish(st, summary);
  }
  if (*qmin) {
    std::vector<double> flat;
    for (const auto& b : bands) {
      const auto comma = b.find(',');
      try {
        if (comma == std::string::npos) throw std::invalid_argument(b);
        flat.push_back(std::stod(b.substr(0, comma)));
        flat.push_back(std::stod(b.substr(comma + 1)));
      } catch (const std::exception&) {
        std::fprintf(stderr, "error: --band expects t1,t2, got '%s'\n", b.c_str());
        return 2;
      }
    }
    sr_qmin_options o{field_path.c_str(), opt_str(ex_scenario), t, eta, flat.data(), flat.size() / 2,
                      opt_str(out_dir)};
    const sr_status st = sr_cmd_qmin(&o, &summary);
    return finish(st, summary);
  }
  if (*sim) {
    sr_simulate_options o{sc_path.c_str(), field_path.c_str(), x0.data(), x0.size(), Q0, dt, budget_tol,
                          no_svg ? 0 : 1, opt_str(out_dir)};
    const sr_status st = sr_cmd_simulate(&o, &summary);
    return finish(st, summary);
  }
  sr_study_options o{sc_path.c_str(), kind.c_str(), sizes.data(), sizes.size(), eps.data(), eps.size(),
                     budgets.data(), budgets.size(), eta, samples, seed, grid_scale, opt_str(out_dir)};
  const sr_status st = sr_cmd_study(&o, &summary);
  return finish(st, summary);
}
