/* Copyright The onelap Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

/* C interface to libonelap. All handles are opaque; every call that can fail
 * returns an onelap_status and leaves a message in onelap_last_error()
 * (per thread, valid until the next failing call on that thread). */

#ifndef ONELAP_ONELAP_H
#define ONELAP_ONELAP_H

#include <stddef.h>

#if defined(_WIN32)
#define ONELAP_API __declspec(dllexport)
#else
#define ONELAP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum onelap_status {
  ONELAP_OK = 0,
  ONELAP_E_CONTRACT = 1,
  ONELAP_E_ORDERING = 2,
  ONELAP_E_MONOTONICITY = 3,
  ONELAP_E_NUMERICAL = 4,
  ONELAP_E_CONFIG = 5,
  ONELAP_E_IO = 6,
  ONELAP_E_CERTIFICATE = 7,
  ONELAP_E_REFUSED = 8,
  ONELAP_E_ARGUMENT = 9,
  ONELAP_E_INTERNAL = 99
} onelap_status;

typedef struct onelap_config onelap_config;
typedef struct onelap_result onelap_result;

ONELAP_API const char* onelap_version(void);
ONELAP_API const char* onelap_last_error(void);
ONELAP_API const char* onelap_status_name(onelap_status s);

/* Caps worker threads; 0 restores the default. ONELAP_THREADS sets the
 * initial cap. */
ONELAP_API onelap_status onelap_set_threads(int n);

ONELAP_API size_t onelap_experiment_count(void);
ONELAP_API const char* onelap_experiment_name(size_t i);

ONELAP_API onelap_status onelap_config_load(const char* path, onelap_config** out);
ONELAP_API onelap_status onelap_config_parse(const char* text, onelap_config** out);
ONELAP_API onelap_status onelap_config_set(onelap_config* cfg, const char* key, const char* value);
/* Canonical text of the user entries; owned by the handle. */
ONELAP_API const char* onelap_config_text(onelap_config* cfg);
ONELAP_API void onelap_config_free(onelap_config* cfg);

/* Runs the static checks; the issues stay readable through
 * onelap_config_issue until the next validate on this handle. */
ONELAP_API onelap_status onelap_config_validate(onelap_config* cfg, size_t* n_issues);
ONELAP_API const char* onelap_config_issue(const onelap_config* cfg, size_t i);

/* Runs in memory only. */
ONELAP_API onelap_status onelap_execute(const onelap_config* cfg, onelap_result** out);
/* Runs and writes all artifacts to output_dir (NULL: the config's output_dir). */
ONELAP_API onelap_status onelap_run(const onelap_config* cfg, const char* output_dir, onelap_result** out);

ONELAP_API const char* onelap_result_experiment(const onelap_result* r);
ONELAP_API const char* onelap_result_summary(const onelap_result* r);
ONELAP_API const char* onelap_result_manifest(const onelap_result* r);
/* NULL if the key is absent. */
ONELAP_API const char* onelap_result_value(const onelap_result* r, const char* key);
ONELAP_API size_t onelap_result_file_count(const onelap_result* r);
ONELAP_API const char* onelap_result_file_name(const onelap_result* r, size_t i);
ONELAP_API const char* onelap_result_file_data(const onelap_result* r, size_t i, size_t* size);
ONELAP_API void onelap_result_free(onelap_result* r);

/* N / R for the ball of radius R in R^N. */
ONELAP_API onelap_status onelap_lambda1_ball(int n, double radius, double* out);

#ifdef __cplusplus
}
#endif

#endif /* ONELAP_ONELAP_H */
