/* C interface to the hyporb library. Every entry point is exception-free:
 * failures come back as a status code plus, where a char** is given, a
 * heap-allocated message to release with hyporb_string_free(). Strings
 * returned by the library are likewise owned by the caller. */
#ifndef HYPORB_H
#define HYPORB_H

#ifdef __cplusplus
extern "C" {
#endif

/* status codes; nonzero values mirror the library's failure taxonomy */
enum {
  HYPORB_OK = 0,
  HYPORB_INVALID_ARGUMENT = 1,
  HYPORB_NUMERIC_DECAY = 2,
  HYPORB_CAP_EXCEEDED = 3,
  HYPORB_AUDIT_FAILED = 4,
  HYPORB_STATS_PRECONDITION = 5,
  HYPORB_EXTRAPOLATION_FAILED = 6,
  HYPORB_IO_ERROR = 7,
  HYPORB_INTERNAL_ERROR = 8
};

/* opaque run configuration; see hyporb_config_json() for the schema */
typedef struct hyporb_config hyporb_config;

/* progress sink: one line per call, no trailing newline; user is passed
 * through untouched. A null function pointer disables logging. */
typedef void (*hyporb_log_fn)(const char* line, void* user);

const char* hyporb_version(void);

void hyporb_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

/* a fresh config with the library defaults (genus 2, base points at i,
 * no radii); set radii before running a command */
hyporb_config* hyporb_config_new(void);

/* parses the canonical JSON schema; returns null on failure and, when
 * error is non-null, stores the reason there */
hyporb_config* hyporb_config_parse(const char* json, char** error);

/* canonical JSON for the config, byte-stable for equal configs */
char* hyporb_config_json(const hyporb_config* config);

void hyporb_config_free(hyporb_config* config);

/* Setters stage values as given; commands validate the whole config and
 * report HYPORB_INVALID_ARGUMENT on a bad combination. Array setters copy
 * count entries; count 0 clears (empty periods select the first basis
 * form). A non-positive or non-finite norm clears the optional. */
void hyporb_config_set_genus(hyporb_config* config, int genus);
void hyporb_config_set_z(hyporb_config* config, double re, double im);
void hyporb_config_set_w(hyporb_config* config, double re, double im);
void hyporb_config_set_periods(hyporb_config* config, const double* periods,
                               int count);
void hyporb_config_set_norm_sq(hyporb_config* config, double norm_sq);
void hyporb_config_set_sup_norm(hyporb_config* config, double sup_norm);
void hyporb_config_set_radii(hyporb_config* config, const double* radii,
                             int count);
void hyporb_config_set_n_max(hyporb_config* config, int n_max);
void hyporb_config_set_margin_factor(hyporb_config* config, double factor);
void hyporb_config_set_element_cap(hyporb_config* config, long long cap);
void hyporb_config_set_workers(hyporb_config* config, int workers);
void hyporb_config_set_output_dir(hyporb_config* config, const char* dir);
void hyporb_config_set_formats(hyporb_config* config, int csv, int json);

/* the staged worker count (0 on a null config), for callers that clamp it */
int hyporb_config_workers(const hyporb_config* config);

/* ---- commands ---------------------------------------------------------- */

/* orbit dumps, one CSV per configured radius */
int hyporb_enumerate(const hyporb_config* config, hyporb_log_fn log,
                     void* user, char** error);

/* moment reports for every radius as moments.json / moments.csv */
int hyporb_report(const hyporb_config* config, hyporb_log_fn log, void* user,
                  char** error);

/* Series scan over radii x n_values x (s_re, s_im) pairs plus the residue
 * probes; needs at least three radii. Null arrays with count 0 select the
 * default grids. probes_passed, when non-null, receives 1 if every probe
 * met its tolerance and the two evaluation algorithms agreed on every row,
 * else 0. */
int hyporb_dirichlet(const hyporb_config* config, const double* s_re,
                     const double* s_im, int s_count, const int* n_values,
                     int n_count, int* probes_passed, hyporb_log_fn log,
                     void* user, char** error);

/* the group record as group.txt */
int hyporb_export_group(const hyporb_config* config, hyporb_log_fn log,
                        void* user, char** error);

/* Runs the full self-check battery (minutes; one x = 13 enumeration) and
 * logs one PASS/FAIL line per check. checks_passed / checks_total, when
 * non-null, receive the tally. Returns HYPORB_OK even when checks fail;
 * nonzero means the battery itself could not run. */
int hyporb_verify(int workers, int* checks_passed, int* checks_total,
                  hyporb_log_fn log, void* user, char** error);

#ifdef __cplusplus
}
#endif

#endif /* HYPORB_H */
