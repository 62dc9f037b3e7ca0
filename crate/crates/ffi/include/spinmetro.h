#ifndef SPINMETRO_H
#define SPINMETRO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every function.
typedef enum SmStatus {
  SM_STATUS_OK = 0,
  // a required pointer argument was null
  SM_STATUS_NULL = 1,
  SM_STATUS_DOMAIN = 2,
  SM_STATUS_SPIN_TOO_LARGE = 3,
  SM_STATUS_DIMENSION = 4,
  SM_STATUS_UNSUPPORTED = 5,
  SM_STATUS_NUMERICAL = 6,
  SM_STATUS_IO = 7,
  SM_STATUS_PARSE = 8,
  // output buffer too small; the required length is reported
  SM_STATUS_BUFFER = 9,
  SM_STATUS_PANIC = 10,
} SmStatus;

// Opaque state handle. Create with `sm_state_*`, release with `sm_state_free`.
typedef struct SmState SmState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL.
// `buf` may be null to query the length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t sm_last_error_message(char *buf, size_t len);

// Largest supported 2s.
uint32_t sm_max_twice_s(void);

// Named benchmark state ("coherent", "ghz", "w", "tetrahedron", "prism",
// "bipyramid", "psi32", "pyramid", or "maximally-mixed").
//
// # Safety
// `tag` must be a NUL-terminated string, `out` a valid pointer.
enum SmStatus sm_state_named(uint32_t twice_s, const char *tag, struct SmState **out);

// Pure state from 2s+1 amplitudes ordered m = s, s−1, …, −s. `im` may be
// null for real amplitudes. The vector is normalized; a zero vector is a
// domain error.
//
// # Safety
// `re` (and `im` if non-null) must point to `n` doubles; `out` must be valid.
enum SmStatus sm_state_pure(uint32_t twice_s,
                            const double *re,
                            const double *im,
                            size_t n,
                            struct SmState **out);

// Density matrix from n×n row-major entries, n = 2s+1.
//
// # Safety
// `re` (and `im` if non-null) must point to `n_entries` doubles; `out` must be valid.
enum SmStatus sm_state_mixed(uint32_t twice_s,
                             const double *re,
                             const double *im,
                             size_t n_entries,
                             struct SmState **out);

// Haar-random pure state from a seed.
//
// # Safety
// `out` must be a valid pointer.
enum SmStatus sm_state_random_pure(uint32_t twice_s, uint64_t seed, struct SmState **out);

// Parses a JSON state file body.
//
// # Safety
// `json` must be a NUL-terminated string, `out` a valid pointer.
enum SmStatus sm_state_from_json(const char *json, struct SmState **out);

// Writes the JSON form of a state into `buf` (NUL-terminated). `needed`
// receives the length excluding the NUL; if `len` is too small nothing is
// written and `SM_STATUS_BUFFER` is returned.
//
// # Safety
// `state` must be a live handle; `buf` null or `len` writable bytes; `needed` valid.
enum SmStatus sm_state_to_json(const struct SmState *state, char *buf, size_t len, size_t *needed);

// Releases a handle. Null is ignored.
//
// # Safety
// `state` must be null or a handle not yet freed.
void sm_state_free(struct SmState *state);

// Spin 2s and Hilbert space dimension of a state; either output may be null.
//
// # Safety
// `state` must be a live handle.
enum SmStatus sm_state_spin(const struct SmState *state, uint32_t *twice_s, size_t *dim);

// 1 for a pure state handle, 0 for a density matrix.
//
// # Safety
// `state` must be a live handle, `is_pure` valid.
enum SmStatus sm_state_is_pure(const struct SmState *state, int32_t *is_pure);

// Tr ρ².
//
// # Safety
// `state` must be a live handle, `out` valid.
enum SmStatus sm_purity(const struct SmState *state, double *out);

// Shell weights r_0..r_{2s}; `len` must be at least 2s+1.
//
// # Safety
// `state` must be a live handle, `out` `len` writable doubles.
enum SmStatus sm_r_vector(const struct SmState *state, double *out, size_t len);

// Largest t with vanishing coherences r_1..r_t (within `tol`); pure states only.
//
// # Safety
// `state` must be a live handle, `out` valid.
enum SmStatus sm_anticoherence_order(const struct SmState *state, double tol, uint32_t *out);

// SU(2)-averaged fidelity under a transform family ("rotation",
// "squeezing", "squeezing-k") at angle `eta` in radians.
//
// # Safety
// `state` must be a live handle, `family` NUL-terminated, `out` valid.
enum SmStatus sm_avg_fidelity(const struct SmState *state,
                              const char *family,
                              double eta,
                              double *out);

// Gradient flow of the cumulative coherence c_t from a pure state.
// `backward` nonzero ascends instead of descending. The final state is
// returned as a new handle; `final_c` and `converged` may be null.
//
// # Safety
// `state` must be a live handle, `out` valid.
enum SmStatus sm_descend(const struct SmState *state,
                         uint32_t t,
                         int32_t backward,
                         double tol,
                         size_t max_steps,
                         struct SmState **out,
                         double *final_c,
                         int32_t *converged);

// Majorana constellation of a pure state: 2s stars as polar and azimuthal
// angles. `len` must be at least 2s.
//
// # Safety
// `state` must be a live handle, `theta` and `phi` `len` writable doubles.
enum SmStatus sm_majorana(const struct SmState *state, double *theta, double *phi, size_t len);

// Clebsch-Gordan coefficient ⟨j1 m1; j2 m2 | j m⟩, all labels doubled.
//
// # Safety
// `out` must be valid.
enum SmStatus sm_clebsch_gordan(uint32_t twice_j1,
                                int32_t twice_m1,
                                uint32_t twice_j2,
                                int32_t twice_m2,
                                uint32_t twice_j,
                                int32_t twice_m,
                                double *out);

// Wigner 6j symbol {j1 j2 j3; j4 j5 j6} from six doubled labels.
//
// # Safety
// `twice_j` must point to 6 values, `out` must be valid.
enum SmStatus sm_six_j(const uint32_t *twice_j, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINMETRO_H */
