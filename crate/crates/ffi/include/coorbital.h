#ifndef COORBITAL_H
#define COORBITAL_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum cc_status {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_INVALID_ARGUMENT = 2,
  CC_STATUS_DOMAIN = 3,
  CC_STATUS_NO_CONVERGENCE = 4,
  CC_STATUS_CERTIFICATE_FAILURE = 5,
  CC_STATUS_BUFFER_TOO_SMALL = 6,
  CC_STATUS_PANIC = 7,
} cc_status;

/**
 * A validated configuration of gap angles.
 */
typedef struct cc_configuration cc_configuration;

/**
 * Equal-mass central configuration classes.
 */
typedef struct cc_solution_set cc_solution_set;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *cc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cc_version(void);

/**
 * `f` (order 0) or its derivative of order 1 to 3 at `x`.
 */
enum cc_status cc_f_eval(double x, uint8_t order, double *out);

/**
 * Validates `n` gap angles and returns a new handle.
 */
enum cc_status cc_configuration_new(const double *theta, size_t n, struct cc_configuration **out);

void cc_configuration_free(struct cc_configuration *config);

enum cc_status cc_configuration_len(const struct cc_configuration *config, size_t *out);

/**
 * Copies the angles into `buffer`, which must hold `capacity` values.
 */
enum cc_status cc_configuration_angles(const struct cc_configuration *config,
                                       double *buffer,
                                       size_t capacity);

/**
 * Inf-norm of the residual; a null `masses` means equal masses.
 */
enum cc_status cc_residual(const struct cc_configuration *config,
                           const double *masses,
                           size_t n_masses,
                           double *out);

/**
 * Dimension of the admissible mass space and, when one exists, a positive
 * representative normalized to sum `n` (written to `buffer`).
 */
enum cc_status cc_inverse_masses(const struct cc_configuration *config,
                                 size_t *null_dim,
                                 bool *found,
                                 double *buffer,
                                 size_t capacity);

/**
 * Equal-mass central configuration classes for `n` satellites; `grid = 0`
 * uses the default starting grid.
 */
enum cc_status cc_enumerate(size_t n, size_t grid, struct cc_solution_set **out);

void cc_solution_set_free(struct cc_solution_set *set);

enum cc_status cc_solution_set_len(const struct cc_solution_set *set, size_t *out);

/**
 * Angles of solution `index` (canonical form).
 */
enum cc_status cc_solution_angles(const struct cc_solution_set *set,
                                  size_t index,
                                  double *buffer,
                                  size_t capacity);

enum cc_status cc_solution_residual(const struct cc_solution_set *set, size_t index, double *out);

/**
 * Runs the square-case certificate and returns its JSON report; release it
 * with [`cc_string_free`].
 */
enum cc_status cc_certify_square(char **out_json);

void cc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COORBITAL_H */
