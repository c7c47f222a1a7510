#ifndef ABDIRAC_H
#define ABDIRAC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Grid quadrature schemes.
typedef enum AbdScheme {
  ABD_SCHEME_COMPOSITE_GAUSS = 0,
  ABD_SCHEME_UNIFORM_TRAPEZOID = 1,
} AbdScheme;

// Result codes.
typedef enum AbdStatus {
  ABD_STATUS_OK = 0,
  ABD_STATUS_NULL_POINTER = 1,
  ABD_STATUS_INVALID_PARAMETER = 2,
  ABD_STATUS_DOMAIN = 3,
  ABD_STATUS_POLE = 4,
  ABD_STATUS_NON_CONVERGENCE = 5,
  ABD_STATUS_UNSUPPORTED = 6,
  ABD_STATUS_SOLVER = 7,
  ABD_STATUS_INTERNAL = 8,
} AbdStatus;

// Opaque transform handle.
typedef struct AbdTransform AbdTransform;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; valid until the next failing
// call on the same thread. Never null.
const char *abd_last_error(void);

// Library version string (static).
const char *abd_version(void);

// `Γ(x)`.
enum AbdStatus abd_gamma(double x, double *out);

// `J_ν(x)` for `ν ≥ 0`, `x ≥ 0`.
enum AbdStatus abd_bessel_j(double nu, double x, double *out);

// `₂F₁(a, b; c; z)` for `0 ≤ z < 1`.
enum AbdStatus abd_hyp2f1(double a, double b, double c, double z, double *out);

// `₂F₁(a, b; c; 1)` for `c − a − b > 0`.
enum AbdStatus abd_hyp2f1_at_one(double a, double b, double c, double *out);

// Explicit local smoothing constant for exponent `gamma` in channel `l`.
enum AbdStatus abd_smoothing_constant(double gamma, double alpha, int32_t l, double *out);

// `∫₀^∞ J_ν(rt) J_μ(st) t^{−λ} dt` for `0 < r ≤ s`.
enum AbdStatus abd_weber_schafheitlin(double nu,
                                      double mu,
                                      double lambda,
                                      double r,
                                      double s,
                                      double *out);

// Creates the transform of channel `(l, alpha)` between a radial grid on
// `(0, r_max]` with `n_r` nodes and an energy grid on `(0, e_max]` with
// `n_e` nodes.
enum AbdStatus abd_transform_new(int32_t l,
                                 double alpha,
                                 double r_max,
                                 uintptr_t n_r,
                                 double e_max,
                                 uintptr_t n_e,
                                 enum AbdScheme grid_scheme,
                                 struct AbdTransform **out);

// Releases a handle. Null is ignored.
void abd_transform_free(struct AbdTransform *h);

// Number of radial nodes, or 0 for a null handle.
uintptr_t abd_transform_radial_len(const struct AbdTransform *h);

// Number of energy nodes, or 0 for a null handle.
uintptr_t abd_transform_energy_len(const struct AbdTransform *h);

// Copies the radial nodes into `out` (`len` must equal the radial length).
enum AbdStatus abd_transform_radial_nodes(const struct AbdTransform *h, double *out, uintptr_t len);

// Copies the radial quadrature weights (including the factor `r`).
enum AbdStatus abd_transform_radial_weights(const struct AbdTransform *h,
                                            double *out,
                                            uintptr_t len);

// Copies the energy nodes.
enum AbdStatus abd_transform_energy_nodes(const struct AbdTransform *h, double *out, uintptr_t len);

// Forward transform of `(f, g)` (radial length each) into the plus and
// minus branches (energy length each).
enum AbdStatus abd_transform_forward(const struct AbdTransform *h,
                                     const double *f,
                                     const double *g,
                                     double *plus,
                                     double *minus);

// Inverse transform of the branches `(plus, minus)` into `(f, g)`.
enum AbdStatus abd_transform_inverse(const struct AbdTransform *h,
                                     const double *plus,
                                     const double *minus,
                                     double *f,
                                     double *g);

// `e^{−itD}` applied to `(f_in, g_in)`, written to `(f_out, g_out)`.
enum AbdStatus abd_transform_evolve(const struct AbdTransform *h,
                                    double t,
                                    const double *f_in,
                                    const double *g_in,
                                    double *f_out,
                                    double *g_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ABDIRAC_H */
