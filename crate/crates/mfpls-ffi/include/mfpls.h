#ifndef MFPLS_H
#define MFPLS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Stable status codes mirroring the library's error taxonomy.
 */
typedef enum MfplsStatus {
  MfplsStatus_Ok = 0,
  MfplsStatus_NonSpdGram = 1,
  MfplsStatus_RankDeficient = 2,
  MfplsStatus_BasisMismatch = 3,
  MfplsStatus_DimensionMismatch = 4,
  MfplsStatus_ZeroCovariance = 5,
  MfplsStatus_DegenerateComponent = 6,
  MfplsStatus_SingularSystem = 7,
  MfplsStatus_InsufficientData = 8,
  MfplsStatus_SingleClass = 9,
  MfplsStatus_EmptyNode = 10,
  MfplsStatus_SingularCovariance = 11,
  MfplsStatus_Validation = 12,
  MfplsStatus_Io = 13,
  MfplsStatus_Csv = 14,
  MfplsStatus_Json = 15,
  MfplsStatus_NullPointer = 16,
  MfplsStatus_Utf8 = 17,
  MfplsStatus_Panic = 18,
} MfplsStatus;

/**
 * A fitted binary discriminant model.
 */
typedef struct MfplsClassifier MfplsClassifier;

/**
 * In-memory dataset under construction: one call per functional dimension.
 */
typedef struct MfplsDataset MfplsDataset;

/**
 * A fitted regression model.
 */
typedef struct MfplsRegression MfplsRegression;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent error on this thread, or null when none.
 * The pointer stays valid until the next failing call on the thread.
 */
const char *mfpls_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *mfpls_version(void);

/**
 * Create an empty dataset builder.
 */
struct MfplsDataset *mfpls_dataset_new(void);

/**
 * Release a dataset.
 *
 * # Safety
 * `ds` must be a pointer returned by [`mfpls_dataset_new`], not yet freed.
 */
void mfpls_dataset_free(struct MfplsDataset *ds);

/**
 * Append a curve dimension: `grid` holds `grid_len` sampling points and
 * `values` holds `n_obs * grid_len` observations, row-major.
 *
 * # Safety
 * `ds` must be a live dataset handle; `grid` and `values` must point to
 * readable arrays of the stated lengths.
 */
enum MfplsStatus mfpls_dataset_add_curve_dim(struct MfplsDataset *ds,
                                             const double *grid,
                                             size_t grid_len,
                                             const double *values,
                                             size_t n_obs);

/**
 * Append an image dimension: `u`/`v` hold the coordinates of `n_points`
 * pixels and `values` holds `n_obs * n_points` observations, row-major.
 *
 * # Safety
 * `ds` must be a live dataset handle; `u`, `v` and `values` must point to
 * readable arrays of the stated lengths.
 */
enum MfplsStatus mfpls_dataset_add_image_dim(struct MfplsDataset *ds,
                                             const double *u,
                                             const double *v,
                                             size_t n_points,
                                             const double *values,
                                             size_t n_obs);

/**
 * Number of observations currently in the dataset (0 when empty).
 *
 * # Safety
 * `ds` must be a live dataset handle.
 */
size_t mfpls_dataset_n_obs(const struct MfplsDataset *ds);

/**
 * Fit a regression model. `basis_u[j]`/`basis_v[j]` give the per-dimension
 * basis sizes (`basis_v[j] = 0` marks a curve dimension). `n_components`
 * of 0 requests cross-validated selection with `cv_folds` folds over
 * `1..=h_max`.
 *
 * # Safety
 * `ds` must be a live dataset handle with `n` observations; `y` must hold
 * `n` readable values; `basis_u`/`basis_v` must hold one entry per
 * dimension; `out` must be writable.
 */
enum MfplsStatus mfpls_fit_regression(const struct MfplsDataset *ds,
                                      const double *y,
                                      size_t n,
                                      const size_t *basis_u,
                                      const size_t *basis_v,
                                      size_t n_components,
                                      size_t cv_folds,
                                      size_t h_max,
                                      uint64_t seed,
                                      struct MfplsRegression **out);

/**
 * Release a regression model.
 *
 * # Safety
 * `m` must come from a successful fit or JSON load, not yet freed.
 */
void mfpls_regression_free(struct MfplsRegression *m);

/**
 * Number of PLS components of a fitted regression model.
 *
 * # Safety
 * `m` must be a live regression handle.
 */
size_t mfpls_regression_n_components(const struct MfplsRegression *m);

/**
 * Predict responses for a dataset with the same dimension layout as the
 * training data. `out` receives one value per observation.
 *
 * # Safety
 * `m` and `ds` must be live handles; `out` must hold `out_len` writable
 * slots with `out_len` equal to the dataset's observation count.
 */
enum MfplsStatus mfpls_regression_predict(const struct MfplsRegression *m,
                                          const struct MfplsDataset *ds,
                                          double *out,
                                          size_t out_len);

/**
 * Serialize a regression model to JSON. Free the string with
 * [`mfpls_string_free`]. Returns null on failure.
 *
 * # Safety
 * `m` must be a live regression handle.
 */
char *mfpls_regression_to_json(const struct MfplsRegression *m);

/**
 * Load a regression model from JSON. Returns null on failure.
 *
 * # Safety
 * `json` must be a NUL-terminated UTF-8 string.
 */
struct MfplsRegression *mfpls_regression_from_json(const char *json);

/**
 * Fit a binary discriminant model; `labels` hold 0/1 values. The
 * component arguments behave as in [`mfpls_fit_regression`] (0 selects by
 * stratified cross-validation on AUC).
 *
 * # Safety
 * As for [`mfpls_fit_regression`], with `labels` holding `n` readable
 * bytes.
 */
enum MfplsStatus mfpls_fit_classifier(const struct MfplsDataset *ds,
                                      const uint8_t *labels,
                                      size_t n,
                                      const size_t *basis_u,
                                      const size_t *basis_v,
                                      size_t n_components,
                                      size_t cv_folds,
                                      size_t h_max,
                                      uint64_t seed,
                                      struct MfplsClassifier **out);

/**
 * Release a classifier.
 *
 * # Safety
 * `m` must come from a successful fit or JSON load, not yet freed.
 */
void mfpls_classifier_free(struct MfplsClassifier *m);

/**
 * Discriminant scores (positive favours class 0) and hard class
 * predictions. Either output pointer may be null to skip it.
 *
 * # Safety
 * `m` and `ds` must be live handles; non-null outputs must hold `out_len`
 * writable slots, with `out_len` equal to the observation count.
 */
enum MfplsStatus mfpls_classifier_predict(const struct MfplsClassifier *m,
                                          const struct MfplsDataset *ds,
                                          double *scores_out,
                                          uint8_t *classes_out,
                                          size_t out_len);

/**
 * Serialize a classifier to JSON. Free with [`mfpls_string_free`].
 *
 * # Safety
 * `m` must be a live classifier handle.
 */
char *mfpls_classifier_to_json(const struct MfplsClassifier *m);

/**
 * Load a classifier from JSON. Returns null on failure.
 *
 * # Safety
 * `json` must be a NUL-terminated UTF-8 string.
 */
struct MfplsClassifier *mfpls_classifier_from_json(const char *json);

/**
 * Release a string returned by a `*_to_json` function.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void mfpls_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MFPLS_H */
