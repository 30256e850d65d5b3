/* C interface to the leakmap library.
 *
 * All functions return an lkm_status; on failure a message describing the
 * most recent error on the calling thread is available from
 * lkm_last_error(). Objects are opaque handles created by *_create or
 * *_compute functions and released with the matching *_destroy.
 */
#ifndef LEAKMAP_LEAKMAP_H
#define LEAKMAP_LEAKMAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(LEAKMAP_BUILDING_LIBRARY)
#define LKM_API __attribute__((visibility("default")))
#else
#define LKM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lkm_status {
  LKM_OK = 0,
  LKM_ERR_CONFIG = 1,    /* invalid configuration key or value */
  LKM_ERR_NUMERICAL = 2, /* decomposition failure, broken numerical invariant */
  LKM_ERR_IO = 3,        /* unreadable/unwritable file or directory */
  LKM_ERR_ARGUMENT = 4,  /* null handle, out-of-range index, bad size */
  LKM_ERR_INTERNAL = 5
} lkm_status;

typedef struct lkm_config lkm_config;
typedef struct lkm_resonances lkm_resonances;

LKM_API const char* lkm_version(void);
LKM_API const char* lkm_last_error(void);

/* ---- configuration ---------------------------------------------------- */

LKM_API lkm_status lkm_config_create(lkm_config** out);
LKM_API void lkm_config_destroy(lkm_config* config);
/* Replaces the whole configuration with the parsed file. */
LKM_API lkm_status lkm_config_load(lkm_config* config, const char* path);
/* Dotted key such as "leak.center". Does not validate cross-key constraints. */
LKM_API lkm_status lkm_config_set(lkm_config* config, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated); *needed receives the full length + 1. */
LKM_API lkm_status lkm_config_get(const lkm_config* config, const char* key, char* buf,
                                  size_t buflen, size_t* needed);
LKM_API lkm_status lkm_config_serialize(const lkm_config* config, char* buf, size_t buflen,
                                        size_t* needed);
LKM_API lkm_status lkm_config_validate(const lkm_config* config);

/* Runs "ftle-field", "open-classical", "quantum" or "scan". */
LKM_API lkm_status lkm_run(const lkm_config* config, const char* command);

/* ---- classical map ---------------------------------------------------- */

LKM_API lkm_status lkm_step(double K, double q, double p, double* q_out, double* p_out);
LKM_API lkm_status lkm_ftle(double K, double q, double p, uint64_t n, double* out);
/* *escaped is 0/1; *lambda is NaN when the start point lies in the leak (tau = 0). */
LKM_API lkm_status lkm_evolve_open(double K, double q, double p, double leak_center,
                                   double leak_width, uint64_t t_max, uint64_t* tau,
                                   double* lambda, int* escaped);

/* ---- quantum resonances ----------------------------------------------- */

LKM_API lkm_status lkm_resonances_compute(int N, double K, double leak_center, double leak_width,
                                          lkm_resonances** out);
LKM_API void lkm_resonances_destroy(lkm_resonances* set);
LKM_API size_t lkm_resonances_size(const lkm_resonances* set);
LKM_API lkm_status lkm_resonances_eigenvalue(const lkm_resonances* set, size_t k, double* re,
                                             double* im);
/* Infinite for |z| = 1, zero for zero modes. */
LKM_API lkm_status lkm_resonances_dwell_time(const lkm_resonances* set, size_t k, double* out);
/* Writes 2N doubles, interleaved re/im. */
LKM_API lkm_status lkm_resonances_schur_vector(const lkm_resonances* set, size_t k,
                                               double* interleaved, size_t len);

/* ---- phase-space tomography ------------------------------------------- */

/* Wehrl entropy in [0, 1] of an N-dimensional state given as 2N interleaved
 * doubles, on an n_q x n_p Husimi grid. */
LKM_API lkm_status lkm_wehrl_entropy(const double* interleaved, int N, size_t n_q, size_t n_p,
                                     double* s_w);

#ifdef __cplusplus
}
#endif

#endif /* LEAKMAP_LEAKMAP_H */
