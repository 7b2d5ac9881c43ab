#ifndef SELFROCKET_H
#define SELFROCKET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum SfrStatus {
  SFR_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8 path, or an out-of-range argument.
   */
  SFR_STATUS_INVALID_ARGUMENT = 1,
  SFR_STATUS_IO = 2,
  /**
   * Malformed input data.
   */
  SFR_STATUS_PARSE = 3,
  /**
   * Dimension mismatch, e.g. series length differs from the model's.
   */
  SFR_STATUS_SHAPE = 4,
  /**
   * Invalid hyperparameters.
   */
  SFR_STATUS_CONFIG = 5,
  /**
   * Model file written by an incompatible format version.
   */
  SFR_STATUS_VERSION = 6,
  /**
   * Model file is truncated or corrupt.
   */
  SFR_STATUS_INTEGRITY = 7,
  /**
   * Training labels contain fewer than two classes or cannot be stratified.
   */
  SFR_STATUS_DEGENERATE = 8,
  /**
   * Internal failure (a caught panic).
   */
  SFR_STATUS_INTERNAL = 9,
} SfrStatus;

/**
 * Opaque dataset handle.
 */
typedef struct SfrDataset SfrDataset;

/**
 * Opaque fitted-model handle.
 */
typedef struct SfrModel SfrModel;

/**
 * Fitting parameters. Obtain defaults with [`sfr_config_default`].
 */
typedef struct SfrConfig {
  uint32_t k;
  uint32_t nr;
  uint32_t f;
  uint32_t mds;
  uint32_t top;
  double thresh;
  /**
   * Index (0..15) of the combination used when the vote fails validation.
   */
  int32_t default_combo;
  /**
   * Index (0..15) of a combination to use without selection, or -1 to select.
   */
  int32_t fixed_combo;
  uint64_t seed;
} SfrConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sfr_version(void);

/**
 * Message of the last failed call on this thread, or null if none.
 * The pointer is valid until the next failing call on this thread.
 */
const char *sfr_last_error_message(void);

/**
 * Writes the default configuration to `out`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `SfrConfig`.
 */
enum SfrStatus sfr_config_default(struct SfrConfig *out);

/**
 * Builds a dataset from row-major `values` (`n_instances × series_length`)
 * and optional integer `labels` (null for unlabeled data). Class names are
 * the label values in decimal, ordered by first appearance.
 *
 * # Safety
 * `values` must point to `n_instances * series_length` doubles, `labels` to
 * `n_instances` integers (or be null), and `out` to a writable handle slot.
 */
enum SfrStatus sfr_dataset_from_arrays(const double *values,
                                       size_t n_instances,
                                       size_t series_length,
                                       const int64_t *labels,
                                       struct SfrDataset **out);

/**
 * Loads a UCR-style delimited file; `labeled` is non-zero when the first
 * column holds class labels.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable handle slot.
 */
enum SfrStatus sfr_dataset_load(const char *path, int32_t labeled, struct SfrDataset **out);

/**
 * Number of instances, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t sfr_dataset_len(const struct SfrDataset *ds);

/**
 * Series length, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t sfr_dataset_series_length(const struct SfrDataset *ds);

/**
 * Releases a dataset; null is ignored.
 *
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void sfr_dataset_free(struct SfrDataset *ds);

/**
 * Fits a model on a labeled dataset. `config` may be null for defaults.
 *
 * # Safety
 * `train` must be a live dataset handle, `config` null or a valid
 * `SfrConfig`, and `out` a writable handle slot.
 */
enum SfrStatus sfr_model_fit(const struct SfrDataset *train,
                             const struct SfrConfig *config,
                             struct SfrModel **out);

/**
 * Writes one predicted class id per instance of `ds` into `out_ids`
 * (capacity `capacity`). Ids index the model's classes; see
 * [`sfr_model_class_name`].
 *
 * # Safety
 * `model` and `ds` must be live handles and `out_ids` must point to
 * `capacity` writable `size_t` slots.
 */
enum SfrStatus sfr_model_predict(const struct SfrModel *model,
                                 const struct SfrDataset *ds,
                                 size_t *out_ids,
                                 size_t capacity);

/**
 * Accuracy of `model` on a labeled dataset, matching classes by name.
 *
 * # Safety
 * `model` and `ds` must be live handles and `out` a writable double.
 */
enum SfrStatus sfr_model_score(const struct SfrModel *model,
                               const struct SfrDataset *ds,
                               double *out);

/**
 * Saves the model (atomically) to `path`.
 *
 * # Safety
 * `model` must be a live handle and `path` a NUL-terminated string.
 */
enum SfrStatus sfr_model_save(const struct SfrModel *model, const char *path);

/**
 * Loads a model saved by [`sfr_model_save`] or the CLI.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable handle slot.
 */
enum SfrStatus sfr_model_load(const char *path, struct SfrModel **out);

/**
 * Display name of the selected combination (e.g. `PPV_MIX`), owned by the
 * model; null for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
const char *sfr_model_combo_name(const struct SfrModel *model);

/**
 * Classifier input width (9,996 or 19,992 by default); 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t sfr_model_num_features(const struct SfrModel *model);

/**
 * Number of class names known to the model; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t sfr_model_num_classes(const struct SfrModel *model);

/**
 * Name of class `id`, owned by the model; null if out of range.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
const char *sfr_model_class_name(const struct SfrModel *model, size_t id);

/**
 * Releases a model; null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void sfr_model_free(struct SfrModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SELFROCKET_H */
