#ifndef PULLED_SAW_H
#define PULLED_SAW_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  PS_STATUS_INVALID_ARGUMENT = 2,
  PS_STATUS_OUT_OF_RANGE = 3,
  PS_STATUS_OVERFLOW = 4,
  PS_STATUS_IO = 5,
  PS_STATUS_PARSE = 6,
  PS_STATUS_CHECKSUM = 7,
  PS_STATUS_RESOURCE_LIMIT = 8,
  PS_STATUS_BUFFER_TOO_SMALL = 9,
  PS_STATUS_PANIC = 10,
} PsStatus;

typedef enum PsClass {
  PS_CLASS_POSITIVE = 0,
  PS_CLASS_POSITIVE_UNFOLDED = 1,
  PS_CLASS_FULL_LATTICE = 2,
  PS_CLASS_PLANE = 3,
} PsClass;

typedef enum PsKind {
  PS_KIND_C = 0,
  PS_KIND_L = 1,
  PS_KIND_T = 2,
} PsKind;

typedef enum PsObservable {
  PS_OBSERVABLE_VISITS = 0,
  PS_OBSERVABLE_HEIGHT = 1,
} PsObservable;

/**
 * Opaque table handle: exact counts or a flatPERM estimate.
 */
typedef struct PsTable PsTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *ps_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncating
 * if needed) and returns the full size including the nul; 0 when there is
 * no error recorded.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ps_last_error_message(char *buf, size_t len);

/**
 * Exact enumeration of one class. `workers = 0` uses the default pool.
 *
 * # Safety
 * `out_table` must be a valid pointer to write the new handle to.
 */
enum PsStatus ps_enumerate(uint32_t dimension,
                           uint32_t n_max,
                           uint32_t class_,
                           uint32_t workers,
                           struct PsTable **out_table);

/**
 * flatPERM estimate of positive-walk counts.
 *
 * # Safety
 * `out_table` must be a valid pointer to write the new handle to.
 */
enum PsStatus ps_flatperm(uint32_t dimension,
                          uint32_t n_max,
                          uint64_t tours,
                          uint64_t seed,
                          uint32_t workers,
                          struct PsTable **out_table);

/**
 * Reads a table and verifies its manifest checksum.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out_table` a valid pointer.
 */
enum PsStatus ps_table_read(const char *path, struct PsTable **out_table);

/**
 * Writes the table payload to `path` and its manifest beside it.
 *
 * # Safety
 * `t` must be a live handle; `path` a nul-terminated string.
 */
enum PsStatus ps_table_write(const struct PsTable *t, const char *path);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void ps_table_free(struct PsTable *t);

/**
 * # Safety
 * `t` must be a live handle and the out pointers writable.
 */
enum PsStatus ps_table_info(const struct PsTable *t,
                            uint32_t *dimension,
                            uint32_t *n_max,
                            uint32_t *class_,
                            bool *is_exact);

/**
 * Exact count `c_n(v, h)`; `PS_STATUS_OVERFLOW` if it exceeds 64 bits.
 *
 * # Safety
 * `t` must be a live handle and `count` writable.
 */
enum PsStatus ps_table_count_u64(const struct PsTable *t,
                                 uint32_t n,
                                 uint32_t v,
                                 int32_t h,
                                 uint64_t *count);

/**
 * Exact count as a decimal string; `needed` receives the required size.
 *
 * # Safety
 * `t` must be a live handle, `buf` null or `len` writable bytes, `needed`
 * null or writable.
 */
enum PsStatus ps_table_count_decimal(const struct PsTable *t,
                                     uint32_t n,
                                     uint32_t v,
                                     int32_t h,
                                     char *buf,
                                     size_t len,
                                     size_t *needed);

/**
 * Cell value as a double: the exact count, or the estimate (NaN for a
 * cell the sampler never reached).
 *
 * # Safety
 * `t` must be a live handle and `value` writable.
 */
enum PsStatus ps_table_value(const struct PsTable *t,
                             uint32_t n,
                             uint32_t v,
                             int32_t h,
                             double *value);

/**
 * `log Z_n(a, y)` for partition kind `kind`; `-inf` for an empty slice.
 *
 * # Safety
 * `t` must be a live handle and `log_z` writable.
 */
enum PsStatus ps_table_log_partition(const struct PsTable *t,
                                     uint32_t kind,
                                     uint32_t n,
                                     double a,
                                     double y,
                                     double *log_z);

/**
 * Boltzmann mean and variance of visits or endpoint height.
 *
 * # Safety
 * `t` must be a live handle; `mean` and `variance` writable.
 */
enum PsStatus ps_table_moment(const struct PsTable *t,
                              uint32_t kind,
                              uint32_t observable,
                              uint32_t n,
                              double a,
                              double y,
                              double *mean,
                              double *variance);

/**
 * SHA-256 of the table payload as 64 hex characters plus a nul.
 *
 * # Safety
 * `t` must be a live handle, `buf` null or `len` writable bytes, `needed`
 * null or writable.
 */
enum PsStatus ps_table_checksum(const struct PsTable *t, char *buf, size_t len, size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PULLED_SAW_H */
