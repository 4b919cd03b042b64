#ifndef FEDFUSE_H
#define FEDFUSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Bits of [`FfBinaryMetrics::degenerate`]: the metric had a zero
 * denominator and was reported as 0.
 */
#define FF_DEGENERATE_PRECISION 1

#define FF_DEGENERATE_RECALL 2

#define FF_DEGENERATE_F1 4

#define FF_DEGENERATE_SPECIFICITY 8

#define FF_DEGENERATE_MCC 16

typedef enum FfStatus {
  FF_STATUS_OK = 0,
  FF_STATUS_NULL_POINTER = 1,
  FF_STATUS_INVALID_ARGUMENT = 2,
  FF_STATUS_CONFIG = 3,
  FF_STATUS_SHAPE = 4,
  FF_STATUS_DATA = 5,
  FF_STATUS_DIVERGENCE = 6,
  FF_STATUS_PROTOCOL = 7,
  FF_STATUS_EVIDENCE = 8,
  FF_STATUS_TOTAL_CONFLICT = 9,
  FF_STATUS_PARSE = 10,
  FF_STATUS_IO = 11,
  FF_STATUS_PANIC = 12,
} FfStatus;

typedef enum FfActivation {
  FF_ACTIVATION_RELU = 0,
  FF_ACTIVATION_TANH = 1,
} FfActivation;

/**
 * Frame of discernment: an ordered list of hypothesis labels.
 */
typedef struct FfFrame FfFrame;

/**
 * Mass function over a frame.
 */
typedef struct FfMass FfMass;

/**
 * Trained classifier loaded from a checkpoint.
 */
typedef struct FfModel FfModel;

typedef struct FfBinaryMetrics {
  double accuracy;
  double precision;
  double recall;
  double f1;
  double specificity;
  double mcc;
  uint32_t degenerate;
} FfBinaryMetrics;

typedef struct FfLatency {
  double total_ms;
  double preprocessing_ms;
  double processing_ms;
  double fusion_ms;
  double other_ms;
} FfLatency;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or an empty string.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *ff_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ff_version(void);

/**
 * # Safety
 * `labels` must point to `n` NUL-terminated strings and `out` must be
 * writable.
 */
enum FfStatus ff_frame_new(const char *const *labels, size_t n, struct FfFrame **out);

/**
 * # Safety
 * `frame` must be null or a handle from [`ff_frame_new`] not yet freed.
 */
void ff_frame_free(struct FfFrame *frame);

/**
 * Builds a mass function from `n` (subset, mass) pairs. Subsets are
 * bitmasks over the frame: bit `i` set means hypothesis `i` is included.
 *
 * # Safety
 * `subsets` and `masses` must each point to `n` readable values.
 */
enum FfStatus ff_mass_new(const struct FfFrame *frame,
                          const uint32_t *subsets,
                          const double *masses,
                          size_t n,
                          struct FfMass **out);

/**
 * Bayesian mass function from a probability vector (one entry per
 * hypothesis), normalized.
 *
 * # Safety
 * `probs` must point to `n` readable values.
 */
enum FfStatus ff_mass_from_probs(const struct FfFrame *frame,
                                 const double *probs,
                                 size_t n,
                                 struct FfMass **out);

/**
 * # Safety
 * `mass` must be null or a live handle.
 */
void ff_mass_free(struct FfMass *mass);

/**
 * Mass, belief and plausibility of `subset`.
 *
 * # Safety
 * `mass` must be a live handle; the outputs must be writable or null.
 */
enum FfStatus ff_mass_query(const struct FfMass *mass,
                            uint32_t subset,
                            double *mass_out,
                            double *belief_out,
                            double *plausibility_out);

/**
 * Combines `n >= 1` mass functions with Dempster's rule, folding left to
 * right. `conflict` receives the cumulative conflict and may be null.
 *
 * # Safety
 * `masses` must point to `n` live handles.
 */
enum FfStatus ff_combine(const struct FfMass *const *masses,
                         size_t n,
                         struct FfMass **out,
                         double *conflict);

/**
 * Max-belief singleton decision; ties go to the lowest index.
 *
 * # Safety
 * `mass` must be a live handle; `class_index` writable; `belief_out`
 * writable or null.
 */
enum FfStatus ff_decide(const struct FfMass *mass, size_t *class_index, double *belief_out);

/**
 * Sample-weighted average of `clients` parameter vectors of length `len`.
 * `weights[k]` points to client k's parameters and `samples[k]` is its
 * sample count. The result is written to `out` (length `len`).
 *
 * # Safety
 * `weights` must hold `clients` pointers to `len` readable values each,
 * `samples` must hold `clients` values and `out` must have room for `len`.
 */
enum FfStatus ff_fed_avg(const double *const *weights,
                         const size_t *samples,
                         size_t clients,
                         size_t len,
                         double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum FfStatus ff_binary_metrics(uint64_t tp,
                                uint64_t fp,
                                uint64_t fn_,
                                uint64_t tn,
                                struct FfBinaryMetrics *out);

/**
 * Time in milliseconds to move `size_mbits` over a `bw_mbits` Mbit/s link,
 * rounded to whole microseconds.
 *
 * # Safety
 * `out_ms` must be writable.
 */
enum FfStatus ff_transfer_ms(double size_mbits, double bw_mbits, double *out_ms);

/**
 * Loads a pipeline description file and computes its response times.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum FfStatus ff_pipeline_latency(const char *path, struct FfLatency *out);

/**
 * Loads a checkpoint for the architecture given by `layer_widths` (input
 * dimension, hidden widths..., class count) and `activation`.
 *
 * # Safety
 * `path` must be a NUL-terminated string, `layer_widths` must point to
 * `n_widths` values and `out` must be writable.
 */
enum FfStatus ff_model_load(const char *path,
                            const size_t *layer_widths,
                            size_t n_widths,
                            enum FfActivation activation,
                            struct FfModel **out);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
void ff_model_free(struct FfModel *model);

/**
 * Input dimension and class count of a loaded model.
 *
 * # Safety
 * `model` must be a live handle; outputs writable or null.
 */
enum FfStatus ff_model_dims(const struct FfModel *model, size_t *input_dim, size_t *classes);

/**
 * Class probabilities for one input vector.
 *
 * # Safety
 * `x` must point to `dim` values and `probs` must have room for `classes`.
 */
enum FfStatus ff_model_predict(const struct FfModel *model,
                               const double *x,
                               size_t dim,
                               double *probs,
                               size_t classes);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEDFUSE_H */
