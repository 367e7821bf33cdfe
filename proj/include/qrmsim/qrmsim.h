#ifndef QRMSIM_QRMSIM_H
#define QRMSIM_QRMSIM_H

/*
 * C interface to the qrmsim library.
 *
 * Every function returning qrmsim_status reports failure through the status
 * and leaves a description in qrmsim_last_error(), which is per thread and
 * valid until the next failing call on that thread. Handles are opaque and
 * must be released with the matching *_destroy function.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(QRMSIM_BUILDING_LIBRARY)
#    define QRMSIM_API __declspec(dllexport)
#  else
#    define QRMSIM_API __declspec(dllimport)
#  endif
#else
#  define QRMSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qrmsim_status {
    QRMSIM_OK = 0,
    QRMSIM_ERR_INVALID_ARGUMENT = 1,
    QRMSIM_ERR_CONFIG = 2,
    QRMSIM_ERR_REGIME = 3,
    QRMSIM_ERR_TRUNCATION = 4,
    QRMSIM_ERR_IO = 5,
    QRMSIM_ERR_INTERNAL = 6
} qrmsim_status;

typedef struct qrmsim_config qrmsim_config;
typedef struct qrmsim_report qrmsim_report;

QRMSIM_API const char* qrmsim_version(void);
QRMSIM_API const char* qrmsim_status_name(qrmsim_status status);
QRMSIM_API const char* qrmsim_last_error(void);

/* Configuration with every key at its default. */
QRMSIM_API qrmsim_status qrmsim_config_create(qrmsim_config** out);
/* Reads a key = value file or the metadata JSON written next to a result. */
QRMSIM_API qrmsim_status qrmsim_config_load(const char* path, qrmsim_config** out);
QRMSIM_API qrmsim_status qrmsim_config_parse(const char* text, qrmsim_config** out);
QRMSIM_API void qrmsim_config_destroy(qrmsim_config* config);

QRMSIM_API qrmsim_status qrmsim_config_set(qrmsim_config* config, const char* key, const char* value);
/*
 * Copies the value of `key` into `buffer` (NUL-terminated, truncated to
 * `size`). `*needed` receives the full length including the terminator.
 * Either buffer or needed may be NULL.
 */
QRMSIM_API qrmsim_status qrmsim_config_get(const qrmsim_config* config, const char* key, char* buffer, size_t size,
                                           size_t* needed);

/* Resolves the config and checks the regime conditions without running. */
QRMSIM_API qrmsim_status qrmsim_validate(const qrmsim_config* config, qrmsim_report** out);

/*
 * Runs the ensemble and writes the result table to `csv_path` (the config's
 * output key when NULL) plus `<csv_path>.meta.json`.
 */
QRMSIM_API qrmsim_status qrmsim_run(const qrmsim_config* config, const char* csv_path, qrmsim_report** out);

/* Noise diagnostics; qrmsim_report_passed() is 0 when a variance is out of tolerance. */
QRMSIM_API qrmsim_status qrmsim_noise_stats(const qrmsim_config* config, qrmsim_report** out);

/* Runs one ensemble per zeta and writes the tables and summary.csv into out_dir. */
QRMSIM_API qrmsim_status qrmsim_sweep_zeta(const qrmsim_config* config, const double* zetas, size_t n_zetas,
                                           const char* out_dir, qrmsim_report** out);

/* Analytic amplitude-noise crossover 1 / (Omega_c sqrt(tau T2)). */
QRMSIM_API qrmsim_status qrmsim_crossover_zeta(const qrmsim_config* config, double* out);

QRMSIM_API const char* qrmsim_report_text(const qrmsim_report* report);
QRMSIM_API int qrmsim_report_passed(const qrmsim_report* report);
/* Rows of the result table (0 for reports that carry no table). */
QRMSIM_API size_t qrmsim_report_rows(const qrmsim_report* report);
/*
 * Copies up to `capacity` values of a result-table column, named as in the
 * CSV header (t_s, fidelity_mean, ...). `*written` receives the count.
 */
QRMSIM_API qrmsim_status qrmsim_report_column(const qrmsim_report* report, const char* column, double* dst,
                                              size_t capacity, size_t* written);
QRMSIM_API void qrmsim_report_destroy(qrmsim_report* report);

#ifdef __cplusplus
}
#endif

#endif
