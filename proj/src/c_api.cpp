#include "softreach/softreach.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "softreach/error.hpp"
#include "softreach/pipeline.hpp"
#include "softreach/scenario.hpp"
#include "softreach/sets.hpp"
#include "softreach/sim.hpp"

using namespace softreach;

struct sr_scenario {
  Scenario sc;
};
struct sr_field {
  ScalarField W;
};
struct sr_trajectory {
  Trajectory tr;
  std::shared_ptr<const SystemModel> model;
};

namespace {

thread_local std::string g_last_error;

sr_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return SR_ERR_VALIDATION;
    case ErrorKind::numerical: return SR_ERR_NUMERICAL;
    case ErrorKind::domain: return SR_ERR_DOMAIN;
    case ErrorKind::io: return SR_ERR_IO;
  }
  return SR_ERR_INTERNAL;
}

template <class F>
sr_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SR_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SR_ERR_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorKind::validation, std::string(what) + " must not be NULL");
}

std::string str(const char* s) { return s ? s : ""; }

void emit(char** summary, const std::string& s) {
  if (summary) *summary = dup(s);
}

}  // namespace

extern "C" {

const char* sr_last_error(void) { return g_last_error.c_str(); }
const char* sr_version(void) { return "1.0.0"; }
void sr_string_free(char* s) { std::free(s); }

sr_status sr_scenario_load(const char* path, sr_scenario** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new sr_scenario{Scenario::load(path)};
  });
}

sr_status sr_scenario_parse(const char* text, const char* base_dir, sr_scenario** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new sr_scenario{Scenario::parse(text, base_dir ? base_dir : ".")};
  });
}

sr_status sr_scenario_serialize(const sr_scenario* sc, char** out_text) {
  return guard([&] {
    need(sc, "scenario");
    need(out_text, "out_text");
    *out_text = dup(sc->sc.serialize());
  });
}

sr_status sr_scenario_scale_grid(sr_scenario* sc, double factor) {
  return guard([&] {
    need(sc, "scenario");
    sc->sc = sc->sc.scaled(factor);
  });
}

sr_status sr_scenario_state_dim(const sr_scenario* sc, int* out) {
  return guard([&] {
    need(sc, "scenario");
    need(out, "out");
    *out = static_cast<int>(sc->sc.axes.size());
  });
}

sr_status sr_scenario_horizon(const sr_scenario* sc, double* out) {
  return guard([&] {
    need(sc, "scenario");
    need(out, "out");
    *out = sc->sc.horizon;
  });
}

void sr_scenario_destroy(sr_scenario* sc) { delete sc; }

sr_status sr_solve(const sr_scenario* sc, sr_mode mode, sr_field** out, char** report_json) {
  return guard([&] {
    need(sc, "scenario");
    need(out, "out");
    if (mode != SR_MODE_CLASSICAL && mode != SR_MODE_SOFT) fail(ErrorKind::validation, "unknown solve mode");
    const SolveMode m = mode == SR_MODE_SOFT ? SolveMode::soft : SolveMode::classical;
    SolveResult r = solve(sc->sc.problem(), sc->sc.grid(m), m, sc->sc.solve_config());
    if (report_json) *report_json = dup(r.report.to_json());
    *out = new sr_field{std::move(r.value)};
  });
}

sr_status sr_field_load(const char* path, sr_field** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new sr_field{read_field(path)};
  });
}

sr_status sr_field_save(const sr_field* f, const char* path) {
  return guard([&] {
    need(f, "field");
    need(path, "path");
    write_field(path, f->W);
  });
}

sr_status sr_field_dim(const sr_field* f, int* out) {
  return guard([&] {
    need(f, "field");
    need(out, "out");
    *out = f->W.grid().dim();
  });
}

sr_status sr_field_node_count(const sr_field* f, size_t* out) {
  return guard([&] {
    need(f, "field");
    need(out, "out");
    *out = f->W.grid().node_count();
  });
}

sr_status sr_field_stamp_count(const sr_field* f, size_t* out) {
  return guard([&] {
    need(f, "field");
    need(out, "out");
    *out = f->W.stamp_count();
  });
}

sr_status sr_field_interpolate(const sr_field* f, double t, const double* point, size_t n, double* out) {
  return guard([&] {
    need(f, "field");
    need(point, "point");
    need(out, "out");
    require(n == static_cast<size_t>(f->W.grid().dim()), "point has the wrong dimension");
    *out = f->W.interpolate(t, std::span<const double>(point, n));
  });
}

sr_status sr_field_values(const sr_field* f, size_t stamp, double* buf, size_t capacity) {
  return guard([&] {
    need(f, "field");
    need(buf, "buf");
    require(stamp < f->W.stamp_count(), "stamp index out of range");
    const auto v = f->W.slice(stamp);
    require(capacity >= v.size(), "buffer too small");
    std::copy(v.begin(), v.end(), buf);
  });
}

void sr_field_destroy(sr_field* f) { delete f; }

sr_status sr_budget_mask(const sr_field* f, double Q, double eta, uint8_t* out, size_t capacity, size_t* inside) {
  return guard([&] {
    need(f, "field");
    need(out, "out");
    const ScalarField s = slice_budget(f->W, {Q, proxy_eta(Q, eta), f->W.times().front()});
    const SetMask m = sublevel_mask(s, 0, 0.0);
    require(capacity >= m.bits.size(), "buffer too small");
    std::copy(m.bits.begin(), m.bits.end(), out);
    if (inside) *inside = m.count();
  });
}

sr_status sr_rollout(const sr_scenario* sc, const sr_field* f, const double* x0, size_t n, double Q0, double dt,
                     sr_trajectory** out) {
  return guard([&] {
    need(sc, "scenario");
    need(f, "field");
    need(x0, "x0");
    need(out, "out");
    const ReachProblem p = sc->sc.problem();
    RolloutConfig rc;
    rc.dt = std::isnan(dt) ? sc->sc.simulation_dt() : dt;
    rc.t0 = f->W.times().front();
    rc.horizon = sc->sc.horizon - rc.t0;
    *out = new sr_trajectory{rollout(p, f->W, std::span<const double>(x0, n), Q0, rc), p.model};
  });
}

sr_status sr_trajectory_length(const sr_trajectory* tr, size_t* out) {
  return guard([&] {
    need(tr, "trajectory");
    need(out, "out");
    *out = tr->tr.times.size();
  });
}

sr_status sr_trajectory_verdict_json(const sr_trajectory* tr, char** out) {
  return guard([&] {
    need(tr, "trajectory");
    need(out, "out");
    *out = dup(tr->tr.verdict.to_json());
  });
}

sr_status sr_trajectory_csv(const sr_trajectory* tr, char** out) {
  return guard([&] {
    need(tr, "trajectory");
    need(out, "out");
    *out = dup(tr->tr.to_csv(*tr->model));
  });
}

void sr_trajectory_destroy(sr_trajectory* tr) { delete tr; }

sr_status sr_cmd_solve(const sr_solve_options* opt, char** summary) {
  return guard([&] {
    need(opt, "options");
    need(opt->scenario_path, "scenario_path");
    if (opt->mode != SR_MODE_CLASSICAL && opt->mode != SR_MODE_SOFT) fail(ErrorKind::validation, "unknown solve mode");
    SolveCommand c;
    c.scenario = opt->scenario_path;
    c.mode = opt->mode == SR_MODE_SOFT ? SolveMode::soft : SolveMode::classical;
    c.grid_scale = opt->grid_scale;
    c.out_dir = str(opt->out_dir);
    emit(summary, run_solve(c));
  });
}

sr_status sr_cmd_extract(const sr_extract_options* opt, char** summary) {
  return guard([&] {
    need(opt, "options");
    need(opt->field_path, "field_path");
    ExtractCommand c;
    c.field = opt->field_path;
    c.scenario = str(opt->scenario_path);
    if (opt->budget_count) {
      need(opt->budgets, "budgets");
      c.budgets.assign(opt->budgets, opt->budgets + opt->budget_count);
    }
    c.eta = opt->eta;
    c.contours = opt->contours != 0;
    c.svg = opt->svg != 0;
    c.out_dir = str(opt->out_dir);
    emit(summary, run_extract(c));
  });
}

sr_status sr_cmd_qmin(const sr_qmin_options* opt, char** summary) {
  return guard([&] {
    need(opt, "options");
    need(opt->field_path, "field_path");
    QminCommand c;
    c.field = opt->field_path;
    c.scenario = str(opt->scenario_path);
    c.t = opt->t;
    c.eta = opt->eta;
    if (opt->band_count) need(opt->bands, "bands");
    for (size_t i = 0; i < opt->band_count; ++i) c.bands.emplace_back(opt->bands[2 * i], opt->bands[2 * i + 1]);
    c.out_dir = str(opt->out_dir);
    emit(summary, run_qmin(c));
  });
}

sr_status sr_cmd_simulate(const sr_simulate_options* opt, char** summary) {
  return guard([&] {
    need(opt, "options");
    need(opt->scenario_path, "scenario_path");
    need(opt->field_path, "field_path");
    need(opt->x0, "x0");
    SimulateCommand c;
    c.scenario = opt->scenario_path;
    c.field = opt->field_path;
    c.x0.assign(opt->x0, opt->x0 + opt->x0_len);
    c.Q0 = opt->Q0;
    c.dt = opt->dt;
    c.budget_tolerance = opt->budget_tolerance;
    c.svg = opt->svg != 0;
    c.out_dir = str(opt->out_dir);
    emit(summary, run_simulate(c));
  });
}

sr_status sr_cmd_study(const sr_study_options* opt, char** summary) {
  return guard([&] {
    need(opt, "options");
    need(opt->scenario_path, "scenario_path");
    need(opt->study, "study");
    StudyCommand c;
    c.scenario = opt->scenario_path;
    c.kind = opt->study;
    if (opt->size_count) need(opt->sizes, "sizes");
    if (opt->epsilon_count) need(opt->epsilons, "epsilons");
    if (opt->budget_count) need(opt->budgets, "budgets");
    c.sizes.assign(opt->sizes, opt->sizes + opt->size_count);
    c.epsilons.assign(opt->epsilons, opt->epsilons + opt->epsilon_count);
    c.budgets.assign(opt->budgets, opt->budgets + opt->budget_count);
    c.eta = opt->eta;
    c.samples = opt->samples;
    c.seed = opt->seed;
    c.grid_scale = opt->grid_scale;
    c.out_dir = str(opt->out_dir);
    emit(summary, run_study(c));
  });
}

}  // extern "C"
