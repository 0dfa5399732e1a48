/* C interface to the water-network recovery simulator/planner.
 *
 * Every function returning int yields WATREC_OK on success or an error code;
 * watrec_last_error() describes the most recent failure on the calling thread.
 * Strings returned through char** are heap-allocated; release them with
 * watrec_free_text().
 */
#ifndef WATREC_H
#define WATREC_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define WATREC_OK 0
#define WATREC_ERR_CONFIG 2  /* bad input: files, schema, parameter ranges */
#define WATREC_ERR_RUNTIME 3 /* valid request that failed while executing */

typedef struct watrec_experiment watrec_experiment;

const char* watrec_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* watrec_last_error(void);

void watrec_free_text(char* text);

/* Loads an experiment config (JSON) plus the network and hazard files it
 * references. On success *out owns the experiment; free with close(). */
int watrec_experiment_open(const char* config_path, watrec_experiment** out);
void watrec_experiment_close(watrec_experiment* exp);

int watrec_experiment_set_seed(watrec_experiment* exp, uint64_t master_seed);
int watrec_experiment_set_scenarios(watrec_experiment* exp, int32_t num_scenarios);
int watrec_experiment_set_resources(watrec_experiment* exp, int32_t resource_units);
int watrec_experiment_set_threads(watrec_experiment* exp, int32_t threads);

/* Comma-separated planner names; restricts and reorders the roster. */
int watrec_experiment_select_planners(watrec_experiment* exp, const char* names);

/* Damage scenarios for the current seed/count, as JSON. */
int watrec_experiment_sample_scenarios(watrec_experiment* exp, char** json_out);

/* Stage-by-stage plan for one scenario under one planner, as text. */
int watrec_experiment_plan_trace(watrec_experiment* exp, const char* planner_name,
                                 int32_t scenario_index, char** text_out);

/* Full batch: writes curves.csv, mean_curves.csv, summary.json under out_dir
 * and returns the summary JSON. */
int watrec_experiment_run_batch(watrec_experiment* exp, const char* out_dir,
                                char** summary_json_out);

/* Exact-solver self-verification sweep; report as JSON. */
int watrec_oracle_check(uint64_t seed, int32_t num_mdps, char** report_json_out);

#ifdef __cplusplus
}
#endif

#endif /* WATREC_H */
