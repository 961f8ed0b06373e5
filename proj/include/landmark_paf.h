/* landmark_paf: population-attributable fraction estimation for binary
 * time-dependent exposures by dynamic prediction and landmarking.
 *
 * C API over the shared library. All functions return lmpaf_status; on any
 * failure lmpaf_last_error() carries a thread-local diagnostic. Objects are
 * opaque handles released with their _free function. Strings returned through
 * char** outputs are released with lmpaf_string_free().
 *
 * Configuration is a JSON document; the same schema drives the CLI. See the
 * README for the key reference.
 */
#ifndef LANDMARK_PAF_H
#define LANDMARK_PAF_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lmpaf_status {
  LMPAF_OK = 0,
  LMPAF_ERR_INVALID_ARGUMENT = 1, /* bad inputs, preconditions, config */
  LMPAF_ERR_VALIDATION = 2,       /* cohort invariant violations */
  LMPAF_ERR_ESTIMATION = 3,       /* fitting failed (NotConverged, ...) */
  LMPAF_ERR_PARSE = 4,            /* malformed CSV/JSON */
  LMPAF_ERR_IO = 5,               /* file system */
  LMPAF_ERR_INTERNAL = 6
} lmpaf_status;

typedef struct lmpaf_cohort lmpaf_cohort;
typedef struct lmpaf_table lmpaf_table;

const char* lmpaf_version(void);

/* Thread-local message for the most recent failure in this thread; never
 * NULL, empty when no failure occurred. The short error name (for example
 * "NotConverged: ...") prefixes the text. */
const char* lmpaf_last_error(void);

void lmpaf_string_free(char* s);

/* ---- cohorts ---------------------------------------------------------- */

/* Loads a cohort CSV (plus optional long-format panel CSV). horizon < 0
 * means "infer from the data" (largest final_time). */
lmpaf_status lmpaf_cohort_load(const char* cohort_csv_path,
                               const char* panel_csv_path_or_null,
                               double study_horizon, lmpaf_cohort** out);

/* Samples a cohort from the extended illness-death model. config is the
 * "simulate" section of the JSON schema plus "seed". */
lmpaf_status lmpaf_cohort_simulate(const char* config_json,
                                   lmpaf_cohort** out);

lmpaf_status lmpaf_cohort_write(const lmpaf_cohort* cohort, const char* path);
int64_t lmpaf_cohort_size(const lmpaf_cohort* cohort);
void lmpaf_cohort_free(lmpaf_cohort* cohort);

/* Landmarks with at least min_count exposed and unexposed subjects at risk,
 * spaced `spacing` apart from 0 while the window fits the horizon. The array
 * is allocated by the library; release it with lmpaf_buffer_free. */
lmpaf_status lmpaf_choose_landmarks(const lmpaf_cohort* cohort, double window,
                                    int64_t min_count, double spacing,
                                    double** out_landmarks, int64_t* out_count);
void lmpaf_buffer_free(double* buffer);

/* ---- estimation ------------------------------------------------------- */

/* Runs the configured methods over the configured landmarks; returns the
 * estimates table (columns: landmark, method, estimate, ci_low, ci_high,
 * n_at_risk, n_exposed, n_cases, flag). config_json follows the RunConfig
 * schema; "cohort" keys are ignored (the handle provides the data). */
lmpaf_status lmpaf_estimate(const lmpaf_cohort* cohort,
                            const char* config_json, lmpaf_table** out);

/* As lmpaf_estimate but with cluster-bootstrap percentile intervals. */
lmpaf_status lmpaf_bootstrap(const lmpaf_cohort* cohort,
                             const char* config_json, lmpaf_table** out);

/* Model-implied PAF curve (columns: landmark, variant, true_paf). config is
 * the "simulate" section (hazard model); landmarks are explicit. */
lmpaf_status lmpaf_true_paf(const char* config_json, const double* landmarks,
                            int64_t n_landmarks, double window,
                            lmpaf_table** out);

/* ---- tables ----------------------------------------------------------- */

int64_t lmpaf_table_rows(const lmpaf_table* table);
int64_t lmpaf_table_cols(const lmpaf_table* table);
const char* lmpaf_table_column_name(const lmpaf_table* table, int64_t col);

/* Numeric value of a cell; NaN for text or empty cells. */
double lmpaf_table_value(const lmpaf_table* table, int64_t row, int64_t col);

/* Text of a cell (numbers formatted as in the CSV); the pointer stays valid
 * until the table is freed or this function is called again on any table in
 * the same thread. */
const char* lmpaf_table_text(const lmpaf_table* table, int64_t row,
                             int64_t col);

lmpaf_status lmpaf_table_write_csv(const lmpaf_table* table, const char* path);
void lmpaf_table_free(lmpaf_table* table);

/* ---- batch workflows --------------------------------------------------- */

/* Full CLI-equivalent workflow: "simulate" | "truth" | "estimate" |
 * "bootstrap" | "report". Reads inputs and writes outputs + manifest.json
 * under the configured "out" directory. On success *manifest_json_out (when
 * non-NULL) receives the manifest document and *warnings_out (when non-NULL)
 * the number of flagged landmarks. */
lmpaf_status lmpaf_run(const char* workflow, const char* config_json,
                       char** manifest_json_out, int64_t* warnings_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LANDMARK_PAF_H */
