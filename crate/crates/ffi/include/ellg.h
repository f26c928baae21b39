#ifndef ELLG_H
#define ELLG_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EllgStatus {
  ELLG_STATUS_OK = 0,
  ELLG_STATUS_NULL_POINTER = 1,
  ELLG_STATUS_INVALID_UTF8 = 2,
  ELLG_STATUS_CONFIG_PARSE = 3,
  ELLG_STATUS_CONFIG_VALUE = 4,
  ELLG_STATUS_UNKNOWN_PRESET = 5,
  ELLG_STATUS_MESH = 6,
  ELLG_STATUS_INVARIANT = 7,
  ELLG_STATUS_NOT_CONVERGED = 8,
  ELLG_STATUS_SINGULAR = 9,
  ELLG_STATUS_DIMENSION = 10,
  ELLG_STATUS_IO = 11,
  ELLG_STATUS_FINISHED = 12,
  ELLG_STATUS_BUFFER_TOO_SMALL = 13,
  ELLG_STATUS_PANIC = 14,
} EllgStatus;

/**
 * Opaque simulation handle.
 */
typedef struct EllgSimulation EllgSimulation;

/**
 * One energy record; all norms squared.
 */
typedef struct EllgEnergyRecord {
  double t;
  double exch;
  double v_accum;
  double grad_v_accum;
  double h_l2;
  double h_curl;
  double h_jump_accum;
  double dth_accum;
  double curl_accum;
  double curl_jump_accum;
  double lhs_total;
  double unit_violation_max;
  double tangency_max;
  double min_denominator;
} EllgEnergyRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ellg_version(void);

/**
 * Message of the last failed call on this thread, empty after a success.
 * Valid until the next library call on the same thread.
 */
const char *ellg_last_error_message(void);

/**
 * Create a simulation from a built-in preset such as `"mumag1"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EllgStatus ellg_simulation_from_preset(const char *name, struct EllgSimulation **out);

/**
 * Create a simulation from TOML configuration text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EllgStatus ellg_simulation_from_toml(const char *text, struct EllgSimulation **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `sim` must come from a constructor of this library and not be used afterwards.
 */
void ellg_simulation_free(struct EllgSimulation *sim);

/**
 * Advance one time step. Returns `ELLG_STATUS_FINISHED` once the final
 * time has been reached.
 *
 * # Safety
 * `sim` must be a valid handle.
 */
enum EllgStatus ellg_simulation_step(struct EllgSimulation *sim);

/**
 * Run to the final time.
 *
 * # Safety
 * `sim` must be a valid handle.
 */
enum EllgStatus ellg_simulation_run(struct EllgSimulation *sim);

/**
 * # Safety
 * `sim` must be a valid handle and `out` a valid pointer.
 */
enum EllgStatus ellg_simulation_num_steps(const struct EllgSimulation *sim, size_t *out);

/**
 * # Safety
 * `sim` must be a valid handle and `out` a valid pointer.
 */
enum EllgStatus ellg_simulation_current_step(const struct EllgSimulation *sim, size_t *out);

/**
 * # Safety
 * `sim` must be a valid handle and `out` a valid pointer.
 */
enum EllgStatus ellg_simulation_time(const struct EllgSimulation *sim, double *out);

/**
 * Number of magnetization nodes `V`; the tangent system has size `2V`.
 *
 * # Safety
 * `sim` must be a valid handle and `out` a valid pointer.
 */
enum EllgStatus ellg_simulation_num_omega_nodes(const struct EllgSimulation *sim, size_t *out);

/**
 * Number of magnetic field degrees of freedom.
 *
 * # Safety
 * `sim` must be a valid handle and `out` a valid pointer.
 */
enum EllgStatus ellg_simulation_num_field_dofs(const struct EllgSimulation *sim, size_t *out);

/**
 * Copy the nodal magnetization as `x0 y0 z0 x1 ...` (`3 V` values).
 *
 * # Safety
 * `sim` must be a valid handle and `buf` must hold `len` doubles.
 */
enum EllgStatus ellg_simulation_magnetization(const struct EllgSimulation *sim,
                                              double *buf,
                                              size_t len);

/**
 * Copy the magnetic field coefficients.
 *
 * # Safety
 * `sim` must be a valid handle and `buf` must hold `len` doubles.
 */
enum EllgStatus ellg_simulation_field(const struct EllgSimulation *sim, double *buf, size_t len);

/**
 * Energy record of the current time level.
 *
 * # Safety
 * `sim` must be a valid handle and `out` a valid pointer.
 */
enum EllgStatus ellg_simulation_last_record(const struct EllgSimulation *sim,
                                            struct EllgEnergyRecord *out);

/**
 * Write all records so far as CSV.
 *
 * # Safety
 * `sim` must be a valid handle and `path` a NUL-terminated string.
 */
enum EllgStatus ellg_simulation_write_energy_csv(const struct EllgSimulation *sim,
                                                 const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELLG_H */
