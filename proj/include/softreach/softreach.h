/* C interface of the soft-constrained reach-avoid library. */
#ifndef SOFTREACH_H
#define SOFTREACH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SR_API __declspec(dllexport)
#else
#define SR_API __attribute__((visibility("default")))
#endif

typedef enum sr_status {
  SR_OK = 0,
  SR_ERR_VALIDATION = 2, /* malformed input or violated precondition */
  SR_ERR_NUMERICAL = 3,  /* CFL violation, non-finite values */
  SR_ERR_DOMAIN = 4,     /* query outside the discretized domain */
  SR_ERR_IO = 5,
  SR_ERR_INTERNAL = 6
} sr_status;

typedef enum sr_mode { SR_MODE_CLASSICAL = 0, SR_MODE_SOFT = 1 } sr_mode;

typedef struct sr_scenario sr_scenario;
typedef struct sr_field sr_field;
typedef struct sr_trajectory sr_trajectory;

/* Message of the last failure on the calling thread; never NULL. */
SR_API const char* sr_last_error(void);
SR_API const char* sr_version(void);
/* Frees strings returned through char** out-parameters. */
SR_API void sr_string_free(char* s);

/* Scenarios */
SR_API sr_status sr_scenario_load(const char* path, sr_scenario** out);
SR_API sr_status sr_scenario_parse(const char* text, const char* base_dir, sr_scenario** out);
SR_API sr_status sr_scenario_serialize(const sr_scenario* sc, char** out_text);
SR_API sr_status sr_scenario_scale_grid(sr_scenario* sc, double factor);
SR_API sr_status sr_scenario_state_dim(const sr_scenario* sc, int* out);
SR_API sr_status sr_scenario_horizon(const sr_scenario* sc, double* out);
SR_API void sr_scenario_destroy(sr_scenario* sc);

/* Value fields */
SR_API sr_status sr_solve(const sr_scenario* sc, sr_mode mode, sr_field** out, char** report_json);
SR_API sr_status sr_field_load(const char* path, sr_field** out);
SR_API sr_status sr_field_save(const sr_field* f, const char* path);
SR_API sr_status sr_field_dim(const sr_field* f, int* out);
SR_API sr_status sr_field_node_count(const sr_field* f, size_t* out);
SR_API sr_status sr_field_stamp_count(const sr_field* f, size_t* out);
/* Multilinear value at (t, point[0..n)). */
SR_API sr_status sr_field_interpolate(const sr_field* f, double t, const double* point, size_t n, double* out);
/* Copies the node values of one stamp into buf[0..capacity). */
SR_API sr_status sr_field_values(const sr_field* f, size_t stamp, double* buf, size_t capacity);
SR_API void sr_field_destroy(sr_field* f);

/* Budget queries on a soft field; out receives one byte per state node. */
SR_API sr_status sr_budget_mask(const sr_field* f, double Q, double eta, uint8_t* out, size_t capacity,
                                size_t* inside);

/* Rollouts */
SR_API sr_status sr_rollout(const sr_scenario* sc, const sr_field* f, const double* x0, size_t n, double Q0,
                            double dt, sr_trajectory** out);
SR_API sr_status sr_trajectory_length(const sr_trajectory* tr, size_t* out);
SR_API sr_status sr_trajectory_verdict_json(const sr_trajectory* tr, char** out);
SR_API sr_status sr_trajectory_csv(const sr_trajectory* tr, char** out);
SR_API void sr_trajectory_destroy(sr_trajectory* tr);

/* Command pipelines. Paths left NULL or empty take the documented defaults;
   doubles set to NAN take the scenario value. Each returns a JSON summary
   through *summary when summary is not NULL. */
typedef struct sr_solve_options {
  const char* scenario_path;
  sr_mode mode;
  double grid_scale; /* 1 keeps the scenario grid */
  const char* out_dir;
} sr_solve_options;

typedef struct sr_extract_options {
  const char* field_path;
  const char* scenario_path;
  const double* budgets;
  size_t budget_count;
  double eta;
  int contours;
  int svg;
  const char* out_dir;
} sr_extract_options;

typedef struct sr_qmin_options {
  const char* field_path;
  const char* scenario_path;
  double t;
  double eta;
  const double* bands; /* pairs t1, t2 */
  size_t band_count;
  const char* out_dir;
} sr_qmin_options;

typedef struct sr_simulate_options {
  const char* scenario_path;
  const char* field_path;
  const double* x0;
  size_t x0_len;
  double Q0;
  double dt;
  double budget_tolerance;
  int svg;
  const char* out_dir;
} sr_simulate_options;

typedef struct sr_study_options {
  const char* scenario_path;
  const char* study; /* "boundary-error" or "eps-convergence" */
  const size_t* sizes;
  size_t size_count;
  const double* epsilons;
  size_t epsilon_count;
  const double* budgets;
  size_t budget_count;
  double eta;
  size_t samples;
  uint64_t seed;
  double grid_scale;
  const char* out_dir;
} sr_study_options;

SR_API sr_status sr_cmd_solve(const sr_solve_options* opt, char** summary);
SR_API sr_status sr_cmd_extract(const sr_extract_options* opt, char** summary);
SR_API sr_status sr_cmd_qmin(const sr_qmin_options* opt, char** summary);
SR_API sr_status sr_cmd_simulate(const sr_simulate_options* opt, char** summary);
SR_API sr_status sr_cmd_study(const sr_study_options* opt, char** summary);

#ifdef __cplusplus
}
#endif

#endif
