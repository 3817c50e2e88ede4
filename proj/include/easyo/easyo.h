/* C interface to the EASYO simulator.
 *
 * All functions return an easyo_status. On failure a message describing the
 * last error of the calling thread is available from easyo_last_error().
 * Handles are opaque and must be released with the matching _free call. */
#ifndef EASYO_EASYO_H
#define EASYO_EASYO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EASYO_API __declspec(dllexport)
#else
#define EASYO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum easyo_status {
  EASYO_OK = 0,
  EASYO_ERR_ARGUMENT = 1,     /* null pointer or bad option value */
  EASYO_ERR_CONFIG = 2,       /* malformed config: unknown key, bad value */
  EASYO_ERR_TOPOLOGY = 3,     /* disconnected session, generator failure */
  EASYO_ERR_VALIDATION = 4,   /* invariant violated (degree, duplicate link, ...) */
  EASYO_ERR_DOMAIN = 5,
  EASYO_ERR_AVAILABILITY = 6, /* a node spent energy it did not have */
  EASYO_ERR_STATE = 7,
  EASYO_ERR_INTERNAL = 8,
  EASYO_ERR_IO = 9
} easyo_status;

typedef struct easyo_scenario easyo_scenario;

typedef enum easyo_audit_mode {
  EASYO_AUDIT_SAMPLED = 0, /* every slot up to 10^4 slots, every 10th beyond */
  EASYO_AUDIT_FULL = 1,
  EASYO_AUDIT_OFF = 2
} easyo_audit_mode;

typedef struct easyo_run_options {
  uint64_t slots;
  uint64_t seed;
  int audit;                 /* easyo_audit_mode */
  uint64_t csv_every;        /* per-slot CSV cadence, 0 disables slots.csv */
  uint64_t snapshot_every;   /* queue snapshot cadence, 0 disables */
  uint64_t bcd_trace_every;  /* BCD trace cadence, 0 disables */
  const char* out_dir;       /* NULL or "" writes no files */
} easyo_run_options;

typedef struct easyo_metrics {
  uint64_t slots;
  uint64_t seed;
  double V;
  double avg_objective;
  double avg_utility;
  double avg_cost;
  double avg_utility_term;
  double avg_cost_term;
  double avg_data_queue;
  double avg_total_backlog;
  double max_data_queue;
  double q_max_bound;
  double avg_energy;
  double max_energy;
  double max_energy_ratio;
  double theta_min;
  double theta_max;
  double avg_admitted;
  double avg_delivered;
  uint64_t feasibility_violations;
  uint64_t monitor_violations_a;
  uint64_t monitor_violations_c;
  uint64_t monitor_violations_d;
  uint64_t audits;
  uint64_t audit_failures;
  double min_audit_slack;
  uint64_t delta_violations;
  uint64_t bcd_nonconvergence;
  uint64_t bcd_sweeps;
  double wall_seconds;
} easyo_metrics;

typedef struct easyo_bounds {
  double sigma;
  double q_max;
  double theta_min;
  double theta_max;
  double p_total_max_max;
  double b;
  double b_tilde;
} easyo_bounds;

EASYO_API const char* easyo_version(void);
EASYO_API const char* easyo_last_error(void);
EASYO_API const char* easyo_status_name(easyo_status status);

/* Scenario construction. *out receives a new handle on success. */
EASYO_API easyo_status easyo_scenario_default(easyo_scenario** out);
EASYO_API easyo_status easyo_scenario_load(const char* path, easyo_scenario** out);
EASYO_API easyo_status easyo_scenario_parse(const char* text, easyo_scenario** out);
/* Generated topology with default parameters, stored in explicit form. */
EASYO_API easyo_status easyo_scenario_generate(int nodes, int channels, uint64_t seed,
                                               easyo_scenario** out);
EASYO_API easyo_status easyo_scenario_clone(const easyo_scenario* scenario, easyo_scenario** out);
EASYO_API void easyo_scenario_free(easyo_scenario* scenario);

/* Sets one [params] key, e.g. ("V", "500"). */
EASYO_API easyo_status easyo_scenario_set_param(easyo_scenario* scenario, const char* key,
                                                const char* value);
EASYO_API easyo_status easyo_scenario_save(const easyo_scenario* scenario, const char* path);
EASYO_API easyo_status easyo_scenario_counts(const easyo_scenario* scenario, int* nodes, int* links,
                                             int* sessions);
EASYO_API easyo_status easyo_scenario_bounds(const easyo_scenario* scenario, easyo_bounds* out);

/* Fills options from the scenario's slots and seed; no files, sampled audits. */
EASYO_API easyo_status easyo_run_options_init(const easyo_scenario* scenario,
                                              easyo_run_options* options);

EASYO_API easyo_status easyo_run(const easyo_scenario* scenario, const easyo_run_options* options,
                                 easyo_metrics* out);

/* One run per V (seed = options->seed + index). metrics and cell_status point to
 * arrays of count elements; cell_status may be NULL. Returns EASYO_OK when the
 * sweep itself ran, even if individual cells failed. */
EASYO_API easyo_status easyo_sweep(const easyo_scenario* scenario, const double* vs, size_t count,
                                   const easyo_run_options* options, easyo_metrics* metrics,
                                   easyo_status* cell_status);

#ifdef __cplusplus
}
#endif

#endif
