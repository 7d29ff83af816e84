#ifndef PHOTON_SQL_H
#define PHOTON_SQL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Result codes.
 */
typedef enum PsStatus {
  PS_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  PS_STATUS_NULL_POINTER = 1,
  /*
   A string argument was not valid UTF-8.
   */
  PS_STATUS_INVALID_UTF8 = 2,
  /*
   Malformed or inconsistent input.
   */
  PS_STATUS_VALIDATION = 3,
  /*
   The requested quantity has no finite value for this state.
   */
  PS_STATUS_COMPUTATION = 4,
  /*
   An internal panic was caught at the boundary.
   */
  PS_STATUS_PANIC = 5,
} PsStatus;

/*
 Opaque N-photon state.
 */
typedef struct PsState PsState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *ps_version(void);

/*
 Kind of the last error on this thread (e.g. "InfiniteMoment"), or null.
 Valid until the next library call on the same thread.
 */
const char *ps_last_error_kind(void);

/*
 Message of the last error on this thread, or null.
 Valid until the next library call on the same thread.
 */
const char *ps_last_error_message(void);

/*
 Parses a state document (the JSON accepted by the command-line tool).

 # Safety
 `json` must be null or a NUL-terminated string; `out` must be null or
 valid for writes.
 */
enum PsStatus ps_state_from_json(const char *json, struct PsState **out);

/*
 Product state of `n` photons with a Gaussian envelope of width `kappa`.

 # Safety
 `out` must be null or valid for writes.
 */
enum PsStatus ps_state_product_gaussian(size_t n, double kappa, struct PsState **out);

/*
 Coincident-momentum state of `n` photons with a Gaussian envelope.

 # Safety
 `out` must be null or valid for writes.
 */
enum PsStatus ps_state_coincident_gaussian(size_t n, double kappa, struct PsState **out);

/*
 Kerr soliton with binding `ratio` (< 0), envelope parameter `q` and
 accumulated dispersion `b_integral`.

 # Safety
 `out` must be null or valid for writes.
 */
enum PsStatus ps_state_soliton(size_t n,
                               double ratio,
                               double q,
                               double b_integral,
                               struct PsState **out);

/*
 Releases a state. Null is ignored.

 # Safety
 `state` must be null or a handle from this library not yet freed.
 */
void ps_state_free(struct PsState *state);

/*
 Serializes a state to JSON.

 # Safety
 `state` must be a valid handle; `out` must be null or valid for writes.
 */
enum PsStatus ps_state_to_json(const struct PsState *state, char **out);

/*
 Photon number.

 # Safety
 `state` must be a valid handle; `out` must be null or valid for writes.
 */
enum PsStatus ps_state_photon_count(const struct PsState *state, size_t *out);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must be null or a string from this library not yet freed.
 */
void ps_string_free(char *s);

/*
 RMS center-of-mass width integrated over relative coordinates.

 # Safety
 `state` must be a valid handle; `out` must be null or valid for writes.
 */
enum PsStatus ps_marginal_width(const struct PsState *state, double *out);

/*
 RMS center-of-mass width on the all-photons-coincident slice.

 # Safety
 `state` must be a valid handle; `out` must be null or valid for writes.
 */
enum PsStatus ps_conditional_width(const struct PsState *state, double *out);

/*
 Total N-photon absorption rate.

 # Safety
 `state` must be a valid handle; `out` must be null or valid for writes.
 */
enum PsStatus ps_total_rate(const struct PsState *state, double *out);

/*
 Convergence of a compensated soliton toward the coincident-momentum limit.

 # Safety
 `state` must be a valid handle; `out` must be null or valid for writes.
 */
enum PsStatus ps_uql_metric(const struct PsState *state, double *out);

/*
 New state with relative coordinates dilated by `gamma`.

 # Safety
 `state` must be a valid handle; `out` must be null or valid for writes.
 */
enum PsStatus ps_scale_relative(const struct PsState *state, double gamma, struct PsState **out);

/*
 New soliton state with `delta` added to its accumulated dispersion.

 # Safety
 `state` must be a valid handle; `out` must be null or valid for writes.
 */
enum PsStatus ps_apply_dispersion(const struct PsState *state, double delta, struct PsState **out);

/*
 Absorption pattern on `points` uniform samples of `[x_min, x_max]`,
 normalized to unit integral, written to `intensity[0..points]`.

 # Safety
 `state` must be a valid handle; `intensity` must be null or valid for
 `points` writes.
 */
enum PsStatus ps_absorption_pattern(const struct PsState *state,
                                    double x_min,
                                    double x_max,
                                    size_t points,
                                    double *intensity);

/*
 Width report as JSON.

 # Safety
 `state` must be a valid handle; `out` must be null or valid for writes.
 */
enum PsStatus ps_width_report_json(const struct PsState *state, char **out);

/*
 Analytic versus lattice-quadrature comparison as a JSON array.

 # Safety
 `state` must be a valid handle; `out` must be null or valid for writes.
 */
enum PsStatus ps_oracle_compare_json(const struct PsState *state, uint64_t seed, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOTON_SQL_H */
