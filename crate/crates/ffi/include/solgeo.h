#ifndef SOLGEO_H
#define SOLGEO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SolgeoStatus {
  SOLGEO_STATUS_OK = 0,
  SOLGEO_STATUS_NULL_POINTER = 1,
  SOLGEO_STATUS_INVALID_ARGUMENT = 2,
  SOLGEO_STATUS_DOMAIN = 3,
  SOLGEO_STATUS_CONSTRAINT = 4,
  SOLGEO_STATUS_NUMERICAL = 5,
  SOLGEO_STATUS_IO = 6,
  SOLGEO_STATUS_PANIC = 7,
} SolgeoStatus;

/**
 * Frames along a curve.
 */
typedef struct SolgeoFrames SolgeoFrames;

/**
 * Result of a run: the JSON report and its verdict.
 */
typedef struct SolgeoReport SolgeoReport;

/**
 * A reconstructed surface.
 */
typedef struct SolgeoSurface SolgeoSurface;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *solgeo_version(void);

/**
 * Copy the last error message of this thread into `buf`. Returns the size
 * needed (0 when there is no error).
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t solgeo_last_error(char *buf, size_t len);

/**
 * Run a command from a JSON configuration (the CLI `--config` format; the
 * `command` key selects check, surface, case or frame).
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SolgeoStatus solgeo_run_json(const char *config_json, struct SolgeoReport **out);

/**
 * 1 when every check passed, 0 otherwise (also for a null handle).
 *
 * # Safety
 * `r` must be null or a live report handle.
 */
int32_t solgeo_report_passed(const struct SolgeoReport *r);

/**
 * Copy the report JSON into `buf`; returns the size needed.
 *
 * # Safety
 * `r` must be a live report handle; `buf` null or `len` writable bytes.
 */
size_t solgeo_report_json(const struct SolgeoReport *r, char *buf, size_t len);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void solgeo_report_free(struct SolgeoReport *r);

/**
 * Propagate the standard frame with constant `(k, τ, σ)` over `steps`
 * steps of size `h`; `beta` is +1 or −1.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SolgeoStatus solgeo_frame_propagate(double k,
                                         double tau,
                                         double sigma,
                                         double beta,
                                         double h,
                                         size_t steps,
                                         struct SolgeoFrames **out);

/**
 * Number of frames (steps + 1); 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t solgeo_frames_len(const struct SolgeoFrames *f);

/**
 * Write frame `idx` as `e1, e2, e3` (nine doubles) into `out9`.
 *
 * # Safety
 * `f` must be a live handle and `out9` point to nine writable doubles.
 */
enum SolgeoStatus solgeo_frames_get(const struct SolgeoFrames *f, size_t idx, double *out9);

/**
 * Largest deviation of the Gram matrix from `diag(β, 1, 1)`.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
double solgeo_frames_max_defect(const struct SolgeoFrames *f);

/**
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void solgeo_frames_free(struct SolgeoFrames *f);

/**
 * Reconstruct a built-in surface case (`plane`, `cylinder`,
 * `sphere-patch`) with `n` points per axis (0 for the default).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SolgeoStatus solgeo_surface_case(const char *name, size_t n, struct SolgeoSurface **out);

/**
 * Number of vertices; 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t solgeo_surface_len(const struct SolgeoSurface *s);

/**
 * Copy vertex positions as `x, y, z` triples (axis 0 fastest) into `out`,
 * which must hold `3 * len` doubles.
 *
 * # Safety
 * `s` must be a live handle and `out` point to `cap` writable doubles.
 */
enum SolgeoStatus solgeo_surface_positions(const struct SolgeoSurface *s, double *out, size_t cap);

/**
 * Mixed-partial defect, compatibility residual and distance from the
 * exact shape, written to the non-null pointers.
 *
 * # Safety
 * `s` must be a live handle; each output null or writable.
 */
enum SolgeoStatus solgeo_surface_diagnostics(const struct SolgeoSurface *s,
                                             double *mixed_partial,
                                             double *gmce_residual,
                                             double *shape_error);

/**
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void solgeo_surface_free(struct SolgeoSurface *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOLGEO_H */
