#ifndef DIHEDRAL_CUTOFF_H
#define DIHEDRAL_CUTOFF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DcStatus {
  DC_STATUS_OK = 0,
  DC_STATUS_NULL_POINTER = 1,
  DC_STATUS_INVALID_ARGUMENT = 2,
  DC_STATUS_DOMAIN = 3,
  DC_STATUS_SCALE_GUARD = 4,
  DC_STATUS_STEP_BUDGET = 5,
  DC_STATUS_INVALID_DISTRIBUTION = 6,
  DC_STATUS_NON_MONOTONE = 7,
  DC_STATUS_NON_CONVERGENCE = 8,
  DC_STATUS_PARSE = 9,
  DC_STATUS_IO = 10,
  DC_STATUS_BUFFER_TOO_SMALL = 11,
  DC_STATUS_PANIC = 12,
} DcStatus;

typedef enum DcRegime {
  DC_REGIME_SMALL = 0,
  DC_REGIME_COMPARABLE = 1,
  DC_REGIME_LARGE = 2,
} DcRegime;

/*
 A probability vector on D_n in flat-index order.
 */
typedef struct DcDist DcDist;

/*
 A generator set together with its group.
 */
typedef struct DcGeneratorSet DcGeneratorSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. Valid until the
 next call into this library from the same thread.
 */
const char *dc_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *dc_version(void);

/*
 Draws k uniform generators of D_n from `seed`. With `balanced` nonzero,
 resamples up to `max_tries` times until the reflection share is balanced.

 # Safety
 `out` must be valid for writes.
 */
enum DcStatus dc_gens_sample(uint64_t n,
                             size_t k,
                             uint64_t seed,
                             bool balanced,
                             size_t max_tries,
                             struct DcGeneratorSet **out);

/*
 Parses a generator set from its JSON form.

 # Safety
 `json` must be a NUL-terminated string and `out` valid for writes.
 */
enum DcStatus dc_gens_from_json(const char *json, struct DcGeneratorSet **out);

/*
 Writes the JSON form into `buf` (NUL-terminated). `*len` receives the
 byte length without the NUL; `BufferTooSmall` when `cap <= *len`.

 # Safety
 `gs` must come from this library; `buf` must hold `cap` bytes (may be
 NULL when `cap` is 0); `len` valid for writes.
 */
enum DcStatus dc_gens_to_json(const struct DcGeneratorSet *gs, char *buf, size_t cap, size_t *len);

/*
 # Safety
 `gs` must come from this library; out-pointers valid for writes or NULL.
 */
enum DcStatus dc_gens_info(const struct DcGeneratorSet *gs, uint64_t *n, size_t *k, size_t *k_s);

/*
 # Safety
 `gs` must come from this library and not be used afterwards. NULL is a no-op.
 */
void dc_gens_free(struct DcGeneratorSet *gs);

/*
 Law of the continuous-time walk from the identity at time `t`.
 `tol <= 0` and `step_budget == 0` select the defaults.

 # Safety
 `gs` must come from this library and `out` be valid for writes.
 */
enum DcStatus dc_evolve(const struct DcGeneratorSet *gs,
                        double t,
                        double tol,
                        uint64_t step_budget,
                        struct DcDist **out);

/*
 Total variation distance to uniform.

 # Safety
 `d` must come from this library and `out` be valid for writes.
 */
enum DcStatus dc_dist_tv(const struct DcDist *d, double *out);

/*
 `|G| · Σ f² − 1`.

 # Safety
 `d` must come from this library and `out` be valid for writes.
 */
enum DcStatus dc_dist_collision(const struct DcDist *d, double *out);

/*
 Number of entries, 2n.

 # Safety
 `d` must come from this library and `out` be valid for writes.
 */
enum DcStatus dc_dist_len(const struct DcDist *d, size_t *out);

/*
 Copies the probabilities, rotations then reflections.

 # Safety
 `d` must come from this library and `buf` hold `cap` doubles.
 */
enum DcStatus dc_dist_copy_probs(const struct DcDist *d, double *buf, size_t cap);

/*
 # Safety
 `d` must come from this library and not be used afterwards. NULL is a no-op.
 */
void dc_dist_free(struct DcDist *d);

/*
 Cutoff time t₀ for k generators of a group of order `group_size`.

 # Safety
 `t0` must be valid for writes; `regime` valid for writes or NULL.
 */
enum DcStatus dc_cutoff_time(uint64_t k, uint64_t group_size, double *t0, enum DcRegime *regime);

/*
 Solves `k · h(t/k) = log_n` (natural log) for t.

 # Safety
 `out` must be valid for writes.
 */
enum DcStatus dc_entropic_time(uint64_t k, double log_n, double tol, double *out);

/*
 Entropy in nats of the rate-1 simple random walk on ℤ at time `s`.

 # Safety
 `out` must be valid for writes.
 */
enum DcStatus dc_srw_entropy(double s, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIHEDRAL_CUTOFF_H */
