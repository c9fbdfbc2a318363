#ifndef CADET_H
#define CADET_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Amortized causal-structure inference: simulation of synthetic discovery
 * tasks, transformer-posterior training, prediction, and evaluation, behind a
 * plain-C boundary. Every call returns a status code; on failure a
 * thread-local message is available from cadet_last_error(). */

typedef enum cadet_status {
  CADET_OK = 0,
  CADET_EINVAL = 1,   /* bad arguments or malformed configuration */
  CADET_EIO = 2,      /* file system failure */
  CADET_ENUMERIC = 3, /* non-finite values or diverged computation */
  CADET_EINTERNAL = 4 /* invariant violation inside the library */
} cadet_status;

const char* cadet_version(void);

/* Message from the most recent failing call on this thread ("" if none). The
 * pointer stays valid until the next failing call on the same thread. */
const char* cadet_last_error(void);

/* Frees strings returned through the char** out-parameters below. */
void cadet_string_free(char* s);

/* Stderr log verbosity: "debug", "info", "warn", "error" or "off". */
cadet_status cadet_set_log_level(const char* level);

/* Writes `count` task directories (task_00000, task_00001, ...) under
 * out_dir, each holding values.csv, mask.csv, graph.csv and meta.json.
 * domain_json configures the generating distribution; NULL or "" selects the
 * linear-mechanism defaults. Task k is derived deterministically from
 * (seed, d, k). */
cadet_status cadet_simulate_run(const char* domain_json, int d, int64_t n, int count,
                                uint64_t seed, const char* out_dir);

/* Runs a training loop from a full JSON configuration; writes metrics.jsonl
 * plus checkpoint.json/params.bin under out_dir. */
cadet_status cadet_train_run(const char* config_json, const char* out_dir);

typedef struct cadet_model cadet_model;

/* Loads a checkpoint (path to checkpoint.json or its directory). */
cadet_status cadet_model_open(const char* checkpoint_path, cadet_model** out);
void cadet_model_close(cadet_model* m);

/* Edge beliefs for an n x d dataset. `values` is row-major n*d; `mask` marks
 * intervened entries with 1 and may be NULL (all observational). theta_out
 * receives d*d doubles (row-major, zero diagonal). */
cadet_status cadet_model_predict(cadet_model* m, const double* values, const double* mask,
                                 int64_t n, int d, double* theta_out);

/* Reads values.csv (and mask.csv if present) from task_dir and writes
 * theta.csv under out_dir. */
cadet_status cadet_predict_to_file(cadet_model* m, const char* task_dir, const char* out_dir);

/* Scores a prediction against a ground-truth graph.csv. prediction_csv may
 * hold either probabilities (theta.csv) or a 0/1 adjacency matrix. Writes the
 * report to out_path when non-NULL; report_json_out, when non-NULL, receives
 * the report as a malloc'd JSON string. */
cadet_status cadet_evaluate_files(const char* prediction_csv, const char* truth_csv, double tau,
                                  const char* out_path, char** report_json_out);

/* Runs a named verification suite (see cadet_suite_names). `checkpoint` may
 * be NULL/"" (a reference model is trained and cached under work_dir when one
 * is needed). pass_out receives 1 if every check passed. result_json_out,
 * when non-NULL, receives the full result as a malloc'd JSON string. */
cadet_status cadet_suite_run(const char* name, uint64_t seed, const char* checkpoint,
                             const char* work_dir, int workers, char** result_json_out,
                             int* pass_out);

/* Newline-separated list of suite names, as a malloc'd string. */
cadet_status cadet_suite_names(char** names_out);

#ifdef __cplusplus
}
#endif

#endif /* CADET_H */
