#ifndef OMEGA_LAB_H
#define OMEGA_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OmegaLabStatus {
  OMEGA_LAB_STATUS_OK = 0,
  OMEGA_LAB_STATUS_NULL_ARGUMENT = 1,
  OMEGA_LAB_STATUS_INVALID_UTF8 = 2,
  OMEGA_LAB_STATUS_PARSE = 3,
  OMEGA_LAB_STATUS_EPSILON_BELOW_ONE = 4,
  OMEGA_LAB_STATUS_COMPUTATION = 5,
} OmegaLabStatus;

// A prefix-free machine table.
typedef struct OmegaLabMachine OmegaLabMachine;

// A redundancy function `g`.
typedef struct OmegaLabRedundancy OmegaLabRedundancy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next call into this library from the same thread.
const char *omega_lab_last_error(void);

// Library version as a static string.
const char *omega_lab_version(void);

// Release a string returned by this library.
//
// # Safety
// `s` is null or was returned by this library and not yet freed.
void omega_lab_string_free(char *s);

// Parse a machine table, one `program halt-time` pair per line.
//
// # Safety
// `text` is a nul-terminated string; `out` is valid for writes.
enum OmegaLabStatus omega_lab_machine_parse(const char *text, struct OmegaLabMachine **out);

// A random machine table from `seed` with the default generator settings.
struct OmegaLabMachine *omega_lab_machine_random(uint64_t seed);

// # Safety
// `m` is null or a live handle from this library.
void omega_lab_machine_free(struct OmegaLabMachine *m);

// Halting probability of the table as an exact `a/2^k` string.
//
// # Safety
// `m` is a live handle; `out` is valid for writes.
enum OmegaLabStatus omega_lab_machine_omega(const struct OmegaLabMachine *m, char **out);

// Redundancy function by name: `log`, `h_eps`, `h_star` or `adversarial`.
// `eps` is read for `h_eps` and `h_star` and may be null otherwise.
//
// # Safety
// `kind` is a nul-terminated string; `eps` is null or one; `out` is valid
// for writes.
enum OmegaLabStatus omega_lab_redundancy_new(const char *kind,
                                             const char *eps,
                                             struct OmegaLabRedundancy **out);

// # Safety
// `g` is null or a live handle from this library.
void omega_lab_redundancy_free(struct OmegaLabRedundancy *g);

// Certified `floor(n + g(n))`, the oracle use bound at `n`.
//
// # Safety
// `g` is a live handle; `out` is valid for writes.
enum OmegaLabStatus omega_lab_use_bound(const struct OmegaLabRedundancy *g,
                                        uint64_t n,
                                        uint64_t *out);

// Least `n0` from which the reduction of `alpha = Omega_u` to
// `Omega = Omega_u + Omega_v` is correct through `n_max`. The two tables
// together must have Kraft sum below 1.
//
// # Safety
// All handles are live; `out` is valid for writes.
enum OmegaLabStatus omega_lab_reduce_threshold(const struct OmegaLabMachine *u,
                                               const struct OmegaLabMachine *v,
                                               const struct OmegaLabRedundancy *g,
                                               uint64_t n_max,
                                               uint64_t max_stage,
                                               uint64_t *out);

// Miss measure of a block family (`positions ; bits` per line), by the
// product formula and by enumeration, both as exact `a/2^k` strings.
//
// # Safety
// `blocks` is a nul-terminated string; both outputs are valid for writes.
enum OmegaLabStatus omega_lab_miss_measure(const char *blocks, char **exact, char **brute_force);

// Exhaustive check of the prediction equivalence over all prefixes of
// `length` bits, on the default partition for `g`, with cutoff `cutoff`.
//
// # Safety
// `g` is a live handle; both outputs are valid for writes.
enum OmegaLabStatus omega_lab_beta_exhaustive(const struct OmegaLabRedundancy *g,
                                              size_t length,
                                              size_t cutoff,
                                              uint64_t *counterexamples,
                                              uint64_t *qualifying);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OMEGA_LAB_H */
