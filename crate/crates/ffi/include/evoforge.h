#ifndef EVOFORGE_H
#define EVOFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EvoStatus {
  EVO_STATUS_OK = 0,
  EVO_STATUS_NULL_POINTER = 1,
  EVO_STATUS_INVALID_UTF8 = 2,
  EVO_STATUS_PARSE_ERROR = 3,
  EVO_STATUS_INVALID_ARGUMENT = 4,
  EVO_STATUS_DOMAIN_ERROR = 5,
  EVO_STATUS_IO_ERROR = 6,
  EVO_STATUS_RUN_FAILED = 7,
  EVO_STATUS_PANIC = 8,
} EvoStatus;

typedef struct EvoBppInstance EvoBppInstance;

/**
 * A parsed heuristic expression.
 */
typedef struct EvoExpr EvoExpr;

typedef struct EvoTspInstance EvoTspInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *evo_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *evo_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void evo_string_free(char *s);

/**
 * Parses `text` into a new expression handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum EvoStatus evo_expr_parse(const char *text, struct EvoExpr **out);

/**
 * Canonical text of an expression; free it with [`evo_string_free`].
 *
 * # Safety
 * `expr` must be a live handle; `out` must be writable.
 */
enum EvoStatus evo_expr_print(const struct EvoExpr *expr, char **out);

/**
 * Node count.
 *
 * # Safety
 * `expr` must be a live handle; `out` must be writable.
 */
enum EvoStatus evo_expr_complexity(const struct EvoExpr *expr, size_t *out);

/**
 * Evaluates with `n` variable bindings given as parallel arrays.
 *
 * # Safety
 * `names` and `values` must each point to `n` valid elements; every name
 * must be a NUL-terminated string.
 */
enum EvoStatus evo_expr_eval(const struct EvoExpr *expr,
                             const char *const *names,
                             const double *values,
                             size_t n,
                             double *out);

/**
 * # Safety
 * `expr` must be null or a handle from [`evo_expr_parse`], not yet freed.
 */
void evo_expr_free(struct EvoExpr *expr);

/**
 * Builds a bin-packing instance from a capacity and `n` item sizes.
 *
 * # Safety
 * `items` must point to `n` readable values; `out` must be writable.
 */
enum EvoStatus evo_bpp_new(double capacity,
                           const double *items,
                           size_t n,
                           struct EvoBppInstance **out);

/**
 * Loads a bin-packing instance file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum EvoStatus evo_bpp_load(const char *path, struct EvoBppInstance **out);

/**
 * Packs the instance online with `expr` as the bin priority and writes the
 * number of bins used.
 *
 * # Safety
 * Both handles must be live; `bins` must be writable.
 */
enum EvoStatus evo_bpp_pack(const struct EvoBppInstance *inst,
                            const struct EvoExpr *expr,
                            size_t *bins);

/**
 * `ceil(total size / capacity)`.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum EvoStatus evo_bpp_lower_bound(const struct EvoBppInstance *inst, size_t *out);

/**
 * # Safety
 * `inst` must be null or a bin-packing handle, not yet freed.
 */
void evo_bpp_free(struct EvoBppInstance *inst);

/**
 * Builds a TSP instance from `n` cities given as interleaved x, y pairs.
 *
 * # Safety
 * `xy` must point to `2 * n` readable values; `out` must be writable.
 */
enum EvoStatus evo_tsp_new(const double *xy, size_t n, struct EvoTspInstance **out);

/**
 * Loads a TSP instance file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum EvoStatus evo_tsp_load(const char *path, struct EvoTspInstance **out);

/**
 * Closed-tour length of a permutation of the `n` cities.
 *
 * # Safety
 * `inst` must be a live handle; `order` must point to `n` readable
 * indices; `out` must be writable.
 */
enum EvoStatus evo_tsp_tour_length(const struct EvoTspInstance *inst,
                                   const size_t *order,
                                   size_t n,
                                   double *out);

/**
 * # Safety
 * `inst` must be null or a TSP handle, not yet freed.
 */
void evo_tsp_free(struct EvoTspInstance *inst);

/**
 * Runs the search described by a config file, like `evoforge run`, and
 * returns the contents of `result.json`. `out_dir` may be null to use the
 * config's output directory.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string, `out_dir` null or one;
 * `result_json` must be writable. Free the result with [`evo_string_free`].
 */
enum EvoStatus evo_run_config(const char *config_path, const char *out_dir, char **result_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVOFORGE_H */
