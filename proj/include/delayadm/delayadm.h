/* C interface to the delayadm library.
 *
 * Complex arrays are interleaved (re, im) doubles in row-major order.
 * Every call returns a dadm_status; on failure dadm_last_error() holds a
 * message for the calling thread.
 */
#ifndef DELAYADM_H
#define DELAYADM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define DADM_API __declspec(dllexport)
#else
#define DADM_API __attribute__((visibility("default")))
#endif

typedef enum dadm_status {
  DADM_OK = 0,
  DADM_DIMENSION_ERROR = 1,
  DADM_RANGE_ERROR = 2,
  DADM_SINGULARITY_ERROR = 3,
  DADM_CONVERGENCE_ERROR = 4,
  DADM_CONFIG_ERROR = 5,
  DADM_DOMAIN_ERROR = 6,
  DADM_INVALID_ARGUMENT = 7,
  DADM_INTERNAL_ERROR = 8
} dadm_status;

/* Exit codes of dadm_run_experiment, shared with the command-line tool. */
enum { DADM_EXIT_PASS = 0, DADM_EXIT_ERROR = 1, DADM_EXIT_CHECK_FAILED = 2 };

typedef struct dadm_system dadm_system;

DADM_API const char* dadm_version(void);
DADM_API const char* dadm_last_error(void);

/* a: dim×dim. delays: n_delays matrices of dim×dim, stored back to back,
 * with lags in (0, 1]. b: dim×inputs, may be NULL when inputs == 0. */
DADM_API dadm_status dadm_system_create(size_t dim, const double* a, size_t n_delays,
                                        const double* delays, const double* lags, size_t inputs,
                                        const double* b, dadm_system** out);
DADM_API void dadm_system_destroy(dadm_system* sys);

DADM_API dadm_status dadm_system_dim(const dadm_system* sys, size_t* out);
DADM_API dadm_status dadm_system_omega0(const dadm_system* sys, double* out);

/* Integrates from head x with constant history x (m nodes, dt = 1/(2m))
 * and writes z(t_end) to head_out (dim complex values). */
DADM_API dadm_status dadm_simulate_head(const dadm_system* sys, const double* x, double t_end,
                                        int m, double* head_out);

/* ‖T(t)‖ on the discrete lifted space with m history nodes. */
DADM_API dadm_status dadm_semigroup_norm(const dadm_system* sys, double t, int m, double* out);

/* Weighted resolvent norm √(Re λ − ω)·‖(λ − 𝒜)⁻¹B‖ from the closed form. */
DADM_API dadm_status dadm_resolvent_norm(const dadm_system* sys, double re, double im,
                                         double omega, double* out);

/* Runs a named experiment; seed < 0 keeps the config seed and a NULL omega
 * keeps the config (or computed) admissibility ω.
 * exit_code receives DADM_EXIT_*; a failed check is not an API error. */
DADM_API dadm_status dadm_run_experiment(const char* experiment, const char* config_path,
                                         const char* out_dir, int64_t seed, int refine,
                                         const double* omega, int* exit_code);

/* Writes newline-separated diagnostics (empty when valid) into buf,
 * truncated to buf_size. n_problems receives the count. */
DADM_API dadm_status dadm_validate_config(const char* config_path, const char* experiment,
                                          char* buf, size_t buf_size, size_t* n_problems);

#ifdef __cplusplus
}
#endif

#endif
