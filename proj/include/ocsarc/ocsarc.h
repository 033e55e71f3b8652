/*
 * C interface to the ocsarc library: online conformal selection with
 * irrevocable (accept-to-reject only) decisions.
 *
 * Every function returns an ocs_status. On failure the message is available
 * from ocs_last_error() on the calling thread until the next failing call.
 * Objects are opaque handles created by *_create and released by *_destroy.
 * Index outputs are 1-based timesteps.
 *
 * Buffer outputs follow one convention: the caller passes a buffer and its
 * capacity; the required count is always written to *count, and entries are
 * copied only when capacity >= *count (otherwise OCS_ERR_BUFFER is returned).
 */
#ifndef OCSARC_H
#define OCSARC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(OCSARC_BUILDING)
#    define OCS_API __declspec(dllexport)
#  else
#    define OCS_API __declspec(dllimport)
#  endif
#else
#  define OCS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ocs_status {
    OCS_OK = 0,
    OCS_ERR_INVALID_INPUT = 1,
    OCS_ERR_PARSE = 2,
    OCS_ERR_SCHEMA = 3,
    OCS_ERR_CONVERGENCE = 4,
    OCS_ERR_CONFIG = 5,
    OCS_ERR_IO = 6,
    OCS_ERR_BUFFER = 7,
    OCS_ERR_INTERNAL = 99
} ocs_status;

typedef enum ocs_method {
    OCS_METHOD_OCS_ARC = 0,
    OCS_METHOD_OB = 1,
    OCS_METHOD_REPEATED_CS = 2
} ocs_method;

typedef struct ocs_calibration ocs_calibration;
typedef struct ocs_selector ocs_selector;
typedef struct ocs_diagnostics ocs_diagnostics;

OCS_API const char* ocs_version(void);
OCS_API const char* ocs_last_error(void);
OCS_API const char* ocs_status_name(ocs_status status);

/* ---- p-values ---------------------------------------------------------- */

OCS_API ocs_status ocs_calibration_create(const double* scores, size_t n, ocs_calibration** out);
OCS_API void ocs_calibration_destroy(ocs_calibration* cal);
OCS_API ocs_status ocs_calibration_size(const ocs_calibration* cal, size_t* n);

/* [#{V_i < v} + u (1 + #{V_i = v})] / (n + 1), u in [0, 1]. */
OCS_API ocs_status ocs_conformal_p(const ocs_calibration* cal, double v_hat, double u, double* p);

/* ---- procedures -------------------------------------------------------- */

OCS_API ocs_status ocs_gamma_at(double r, uint64_t t, double* gamma);

OCS_API ocs_status ocs_offline_bh(const double* pvals, size_t m, double q, size_t* indices,
                                  size_t capacity, size_t* count);

/* `r` is ignored for OCS_METHOD_REPEATED_CS. */
OCS_API ocs_status ocs_selector_create(ocs_method method, double q, double r, ocs_selector** out);
OCS_API void ocs_selector_destroy(ocs_selector* sel);

/* Feeds the next p-value. *newly_count receives the number of indices added
 * this step; fetch them with ocs_selector_last_newly. */
OCS_API ocs_status ocs_selector_push(ocs_selector* sel, double p, size_t* newly_count);
OCS_API ocs_status ocs_selector_last_newly(const ocs_selector* sel, size_t* indices, size_t capacity,
                                           size_t* count);
/* Indices dropped by the last step; always 0 except for repeated_cs. */
OCS_API ocs_status ocs_selector_last_deselected(const ocs_selector* sel, size_t* count);
OCS_API ocs_status ocs_selector_selected(const ocs_selector* sel, size_t* indices, size_t capacity,
                                         size_t* count);
OCS_API ocs_status ocs_selector_k_star(const ocs_selector* sel, size_t* k_star);
OCS_API ocs_status ocs_selector_timestep(const ocs_selector* sel, size_t* t);

/* ---- experiments ------------------------------------------------------- */

OCS_API ocs_status ocs_config_validate(const char* config_path, ocs_diagnostics** out);
OCS_API size_t ocs_diagnostics_count(const ocs_diagnostics* diags);
/* Returned strings live as long as the diagnostics handle. */
OCS_API const char* ocs_diagnostics_field(const ocs_diagnostics* diags, size_t i);
OCS_API const char* ocs_diagnostics_message(const ocs_diagnostics* diags, size_t i);
OCS_API void ocs_diagnostics_destroy(ocs_diagnostics* diags);

typedef struct ocs_run_options {
    const char* out_dir;      /* NULL keeps the config's output_dir */
    uint64_t replicates;      /* 0 keeps the config value */
    uint64_t seed;            /* used when has_seed != 0 */
    int has_seed;
    int write_trajectories;   /* nonzero forces trajectory CSVs on */
    uint64_t threads;         /* 0 keeps the config value */
    void (*on_warning)(const char* message, void* ctx); /* optional */
    void* warning_ctx;
} ocs_run_options;

OCS_API void ocs_run_options_init(ocs_run_options* opts);

/* Runs the configured experiment and writes summary.csv and manifest.json
 * (plus trajectories on request). The output directory actually used is
 * copied into out_dir_buf when it is non-NULL. */
OCS_API ocs_status ocs_experiment_run(const char* config_path, const ocs_run_options* opts,
                                      char* out_dir_buf, size_t out_dir_capacity);

/* Replays random streams through the incremental online BH selector and
 * counts steps where it disagrees with brute-force recomputation. */
OCS_API ocs_status ocs_oracle_check(size_t streams, size_t max_len, uint64_t seed, size_t* steps,
                                    size_t* mismatches);

#ifdef __cplusplus
}
#endif

#endif /* OCSARC_H */
