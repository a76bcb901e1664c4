#ifndef QEWP_H
#define QEWP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QewpPhotonKind {
  QEWP_PHOTON_KIND_VACUUM = 0,
  QEWP_PHOTON_KIND_FOCK = 1,
  QEWP_PHOTON_KIND_COHERENT = 2,
} QewpPhotonKind;

typedef enum QewpStatus {
  QEWP_STATUS_OK = 0,
  QEWP_STATUS_NULL_POINTER = 1,
  QEWP_STATUS_INVALID_ARGUMENT = 2,
  QEWP_STATUS_CONFIG_ERROR = 3,
  QEWP_STATUS_NUMERICAL_ERROR = 4,
  QEWP_STATUS_PANIC = 5,
} QewpStatus;

/**
 * Opaque scenario handle.
 */
typedef struct QewpScenario QewpScenario;

/**
 * Photon-number increments of one evaluation.
 */
typedef struct QewpEmission {
  double dnu1;
  double dnu2;
  double total;
} QewpEmission;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *qewp_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qewp_version(void);

/**
 * Parses a JSON scenario document (physical or dimensionless).
 */
enum QewpStatus qewp_scenario_from_json(const char *json, struct QewpScenario **out);

/**
 * Unmodulated vacuum scenario with zero small ratios.
 */
enum QewpStatus qewp_scenario_new_dimensionless(double ups,
                                                double theta,
                                                double eps,
                                                double phi0,
                                                double gamma0,
                                                double chirp,
                                                struct QewpScenario **out);

/**
 * `nu0` is ignored for vacuum and must be a non-negative integer for Fock.
 */
enum QewpStatus qewp_scenario_set_photon_state(struct QewpScenario *scenario,
                                               enum QewpPhotonKind kind,
                                               double nu0);

/**
 * Attaches a modulation and sets Γ₀ = w·r to keep both routes to Γ consistent.
 */
enum QewpStatus qewp_scenario_set_modulation(struct QewpScenario *scenario,
                                             double g_mag,
                                             double r,
                                             double w);

enum QewpStatus qewp_scenario_clear_modulation(struct QewpScenario *scenario);

/**
 * Small ratios p_rec/p₀, ħq_z/p₀, σ_p0/p₀ and the recoil asymmetry δ, used
 * only by the oracle.
 */
enum QewpStatus qewp_scenario_set_small_ratios(struct QewpScenario *scenario,
                                               double rec_over_p0,
                                               double qz_over_p0,
                                               double sig_over_p0,
                                               double delta);

/**
 * Releases a scenario; NULL is accepted.
 */
void qewp_scenario_free(struct QewpScenario *scenario);

/**
 * Γ = Γ₀√(1+C²).
 */
enum QewpStatus qewp_scenario_gamma(const struct QewpScenario *scenario, double *out);

/**
 * Closed-form emission.
 */
enum QewpStatus qewp_emit(const struct QewpScenario *scenario, struct QewpEmission *out);

/**
 * Emission by momentum quadrature; `min_nodes` = 0 picks the default grid.
 */
enum QewpStatus qewp_oracle_emit(const struct QewpScenario *scenario,
                                 size_t min_nodes,
                                 struct QewpEmission *out);

enum QewpStatus qewp_bunching_bl(double g_mag, double r, double chirp, int64_t l, double *out);

/**
 * Writes B(w_i) for `n` frequency ratios into `out`.
 */
enum QewpStatus qewp_bunching_spectrum(double g_mag,
                                       double r,
                                       double chirp,
                                       const double *w,
                                       size_t n,
                                       double *out);

/**
 * sin(x)/x with sinc(0) = 1.
 */
double qewp_sinc(double x);

/**
 * Integer-order Bessel function J_n(x).
 */
enum QewpStatus qewp_bessel_jn(int64_t n, double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QEWP_H */
