#ifndef HENON_H
#define HENON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HenonDirection {
  HENON_DIRECTION_PLUS = 0,
  HENON_DIRECTION_MINUS = 1,
} HenonDirection;

typedef enum HenonStatus {
  HENON_STATUS_OK = 0,
  HENON_STATUS_NULL_POINTER = 1,
  HENON_STATUS_INVALID_INPUT = 2,
  HENON_STATUS_CAP_EXCEEDED = 3,
  /**
   * Numeric evaluation left the representable range.
   */
  HENON_STATUS_OVERFLOW = 4,
  HENON_STATUS_PANIC = 5,
} HenonStatus;

/**
 * Opaque map handle. Create with [`henon_map_from_json`], release with
 * [`henon_map_free`].
 */
typedef struct HenonMapHandle HenonMapHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *henon_last_error(void);

/**
 * Parses a map document (`{"factors": [...]}`) into a new handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HenonStatus henon_map_from_json(const char *json, struct HenonMapHandle **out);

/**
 * # Safety
 * `h` must come from [`henon_map_from_json`] and not be freed twice.
 */
void henon_map_free(struct HenonMapHandle *h);

/**
 * # Safety
 * `h` must be a live handle and `out` a valid pointer.
 */
enum HenonStatus henon_map_degree(const struct HenonMapHandle *h, uint64_t *out);

/**
 * Jacobian determinant as a double and, if `text` is non-null, as an exact
 * `"n/d"` string to be released with [`henon_string_free`].
 *
 * # Safety
 * `h` must be a live handle; `value` a valid pointer; `text` null or valid.
 */
enum HenonStatus henon_map_jacobian(const struct HenonMapHandle *h, double *value, char **text);

/**
 * Applies the map (`Plus`) or its inverse (`Minus`) once.
 *
 * # Safety
 * `h` must be a live handle; `point` and `out` must each hold 4 doubles.
 */
enum HenonStatus henon_map_eval(const struct HenonMapHandle *h,
                                enum HenonDirection direction,
                                const double *point,
                                double *out);

/**
 * Green function `G±` at a point with an absolute error bound.
 *
 * # Safety
 * `h` must be a live handle; `point` must hold 4 doubles; `value` and
 * `error` must be valid pointers.
 */
enum HenonStatus henon_green(const struct HenonMapHandle *h,
                             enum HenonDirection direction,
                             const double *point,
                             double tol,
                             double *value,
                             double *error);

/**
 * Canonical height of a rational point `"x,y"` as a JSON object, released
 * with [`henon_string_free`].
 *
 * # Safety
 * `h` must be a live handle, `point` a NUL-terminated string and `out` a
 * valid pointer.
 */
enum HenonStatus henon_height_json(const struct HenonMapHandle *h,
                                   const char *point,
                                   double tol,
                                   char **out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void henon_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* HENON_H */
