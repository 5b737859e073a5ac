#ifndef NLM_H
#define NLM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Result code of every fallible function.
 */
typedef enum NlmStatus {
  NLM_STATUS_OK = 0,
  NLM_STATUS_NULL_POINTER = 1,
  NLM_STATUS_INVALID_ARGUMENT = 2,
  NLM_STATUS_IO = 3,
  NLM_STATUS_FORMAT = 4,
  NLM_STATUS_DIMENSION_MISMATCH = 5,
  NLM_STATUS_MISSING_ORACLE = 6,
  NLM_STATUS_BUFFER_TOO_SMALL = 7,
  NLM_STATUS_PANIC = 8,
} NlmStatus;

typedef enum NlmSelection {
  /*
   Every pixel of the search window.
   */
  NLM_SELECTION_ALL = 0,
  /*
   The `param` most similar pixels (`param` rounded down, at least 1).
   */
  NLM_SELECTION_TOP_K = 1,
  /*
   Pixels whose raw affinity is at least `param`, with `0 < param <= 1`.
   */
  NLM_SELECTION_THRESHOLD = 2,
} NlmSelection;

typedef enum NlmSource {
  NLM_SOURCE_NOISY = 0,
  NLM_SOURCE_ORACLE = 1,
} NlmSource;

typedef enum NlmCenter {
  NLM_CENTER_INCLUDE = 0,
  NLM_CENTER_EXCLUDE = 1,
} NlmCenter;

typedef enum NlmSelfWeight {
  NLM_SELF_WEIGHT_LITERAL = 0,
  NLM_SELF_WEIGHT_MAX_OTHER = 1,
} NlmSelfWeight;

typedef enum NlmBorder {
  NLM_BORDER_MIRROR = 0,
  NLM_BORDER_CROP = 1,
} NlmBorder;

/*
 Estimator configuration.
 */
typedef struct NlmConfig NlmConfig;

/*
 Grayscale image with double-precision samples in row-major order.
 */
typedef struct NlmImage NlmImage;

/*
 Squared-error split of one estimator run, averaged over the domain.
 */
typedef struct NlmDecomposition {
  double bias;
  double variance;
  double covariance;
  double eqm;
} NlmDecomposition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the most recent failure on the calling thread, as a
 NUL-terminated UTF-8 string. The pointer stays valid until the next
 failing call on this thread. Empty if nothing has failed yet.
 */
const char *nlm_last_error_message(void);

/*
 Creates an image by copying `width * height` samples from `data`.

 # Safety
 `data` must point to `width * height` readable doubles; `out` must be a
 valid pointer to write the new handle to.
 */
enum NlmStatus nlm_image_new(size_t width,
                             size_t height,
                             const double *data,
                             struct NlmImage **out);

/*
 Loads a binary PGM or 8-bit PNG (color is converted to luma).

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum NlmStatus nlm_image_load(const char *path, struct NlmImage **out);

/*
 Saves as a binary PGM, rounding and clamping samples to `[0, 255]`.

 # Safety
 `img` must be a live handle and `path` a NUL-terminated string.
 */
enum NlmStatus nlm_image_save(const struct NlmImage *img, const char *path);

/*
 Width in pixels, or 0 for a null handle.

 # Safety
 `img` must be null or a live handle.
 */
size_t nlm_image_width(const struct NlmImage *img);

/*
 Height in pixels, or 0 for a null handle.

 # Safety
 `img` must be null or a live handle.
 */
size_t nlm_image_height(const struct NlmImage *img);

/*
 Copies the samples into `buf`, which holds `len` doubles. Fails with
 `BufferTooSmall` unless `len >= width * height`.

 # Safety
 `img` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum NlmStatus nlm_image_copy_data(const struct NlmImage *img, double *buf, size_t len);

/*
 Releases an image. Null is ignored.

 # Safety
 `img` must be null or a handle that has not been freed yet.
 */
void nlm_image_free(struct NlmImage *img);

/*
 Adds white Gaussian noise of standard deviation `sigma`. The result is
 fully determined by `seed`. `out_noise` may be null when the noise field
 itself is not needed.

 # Safety
 `img` must be a live handle; `out_noisy` must be writable; `out_noise`
 must be null or writable.
 */
enum NlmStatus nlm_add_gaussian_noise(const struct NlmImage *img,
                                      double sigma,
                                      uint64_t seed,
                                      struct NlmImage **out_noisy,
                                      struct NlmImage **out_noise);

/*
 Default configuration for noise level `sigma` and search radius `d`:
 `h = sigma`, 7x7 patches with Gaussian kernel `a = 2`, all window pixels,
 noisy distances with the center included, mirror borders.

 # Safety
 `out` must be writable.
 */
enum NlmStatus nlm_config_new(double sigma, size_t d, struct NlmConfig **out);

/*
 Releases a configuration. Null is ignored.

 # Safety
 `cfg` must be null or a handle that has not been freed yet.
 */
void nlm_config_free(struct NlmConfig *cfg);

/*
 # Safety
 `cfg` must be a live handle.
 */
enum NlmStatus nlm_config_set_h(struct NlmConfig *cfg, double h);

/*
 # Safety
 `cfg` must be a live handle.
 */
enum NlmStatus nlm_config_set_search_radius(struct NlmConfig *cfg, size_t d);

/*
 # Safety
 `cfg` must be a live handle.
 */
enum NlmStatus nlm_config_set_patch_radius(struct NlmConfig *cfg, size_t radius);

/*
 Standard deviation of the patch kernel; `INFINITY` gives a flat kernel.

 # Safety
 `cfg` must be a live handle.
 */
enum NlmStatus nlm_config_set_kernel_a(struct NlmConfig *cfg, double a);

/*
 `param` is ignored for `All`.

 # Safety
 `cfg` must be a live handle.
 */
enum NlmStatus nlm_config_set_selection(struct NlmConfig *cfg,
                                        enum NlmSelection kind,
                                        double param);

/*
 # Safety
 `cfg` must be a live handle.
 */
enum NlmStatus nlm_config_set_source(struct NlmConfig *cfg, enum NlmSource source);

/*
 # Safety
 `cfg` must be a live handle.
 */
enum NlmStatus nlm_config_set_center(struct NlmConfig *cfg, enum NlmCenter center);

/*
 # Safety
 `cfg` must be a live handle.
 */
enum NlmStatus nlm_config_set_self_weight(struct NlmConfig *cfg, enum NlmSelfWeight policy);

/*
 # Safety
 `cfg` must be a live handle.
 */
enum NlmStatus nlm_config_set_border(struct NlmConfig *cfg, enum NlmBorder border);

/*
 Denoises `noisy`. `oracle` is the clean image, required only when the
 configuration selects similar pixels on it; otherwise it may be null.

 # Safety
 `noisy` and `cfg` must be live handles; `oracle` must be null or live;
 `out` must be writable.
 */
enum NlmStatus nlm_denoise(const struct NlmImage *noisy,
                           const struct NlmConfig *cfg,
                           const struct NlmImage *oracle,
                           struct NlmImage **out);

/*
 Mean squared difference of two images of equal size.

 # Safety
 `a` and `b` must be live handles; `out` must be writable.
 */
enum NlmStatus nlm_mse(const struct NlmImage *a, const struct NlmImage *b, double *out);

/*
 Peak signal-to-noise ratio in dB with peak 255; `INFINITY` for equal images.

 # Safety
 `a` and `b` must be live handles; `out` must be writable.
 */
enum NlmStatus nlm_psnr(const struct NlmImage *a, const struct NlmImage *b, double *out);

/*
 Splits the squared error of denoising `clean + noise` into bias,
 variance and covariance terms.

 # Safety
 `clean`, `noise` and `cfg` must be live handles; `out` must be writable.
 */
enum NlmStatus nlm_decompose_eqm(const struct NlmImage *clean,
                                 const struct NlmImage *noise,
                                 const struct NlmConfig *cfg,
                                 struct NlmDecomposition *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLM_H */
