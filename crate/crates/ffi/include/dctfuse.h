#ifndef DCTFUSE_H
#define DCTFUSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DfMethod {
  DF_METHOD_SF = 0,
  DF_METHOD_SF_CV = 1,
  DF_METHOD_AVERAGE = 2,
  DF_METHOD_CONTRAST = 3,
  DF_METHOD_VARIANCE = 4,
  DF_METHOD_AC_MAX = 5,
} DfMethod;

// Result codes. The numbering of the parse, dimension and argument codes
// matches the command-line tool's exit statuses.
typedef enum DfStatus {
  DF_STATUS_OK = 0,
  DF_STATUS_NULL_POINTER = 1,
  DF_STATUS_PARSE_ERROR = 2,
  DF_STATUS_DIMENSION_MISMATCH = 3,
  DF_STATUS_INVALID_ARGUMENT = 4,
  DF_STATUS_CODEC_ERROR = 5,
  DF_STATUS_PANIC = 6,
} DfStatus;

// Opaque coefficient image.
typedef struct DfImage DfImage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a baseline grayscale JPEG into a handle holding its quantized
// coefficients and quantization table.
//
// # Safety
// `data` must point to `len` readable bytes; `out` must be writable.
enum DfStatus df_parse_jpeg(const uint8_t *data, size_t len, struct DfImage **out);

// Reads a binary PGM and transforms it with the standard table at `quality`
// (1..=100).
//
// # Safety
// `data` must point to `len` readable bytes; `out` must be writable.
enum DfStatus df_parse_pgm(const uint8_t *data, size_t len, uint8_t quality, struct DfImage **out);

// Fuses two images. The result holds dequantized coefficients and A's
// quantization table. `method` is a `DfMethod` value; `threshold` must be
// finite and non-negative.
//
// # Safety
// `a` and `b` must be live handles; `out` must be writable.
enum DfStatus df_fuse(const struct DfImage *a,
                      const struct DfImage *b,
                      uint32_t method,
                      double threshold,
                      struct DfImage **out);

// Entropy codes an image. With `quality` 0 the image's own table is used;
// otherwise the coefficients are re-quantized with the standard table at
// that quality.
//
// # Safety
// `img` must be a live handle; `out` and `out_len` must be writable.
enum DfStatus df_emit_jpeg(const struct DfImage *img,
                           uint8_t quality,
                           uint8_t **out,
                           size_t *out_len);

// Inverse transforms to 8-bit pixels, row-major, `width * height` bytes.
//
// # Safety
// `img` must be a live handle; `out` and `out_len` must be writable.
enum DfStatus df_decode_pixels(const struct DfImage *img, uint8_t **out, size_t *out_len);

// Pixel width, or 0 for a null handle.
//
// # Safety
// `img` must be null or a live handle.
size_t df_image_width(const struct DfImage *img);

// Pixel height, or 0 for a null handle.
//
// # Safety
// `img` must be null or a live handle.
size_t df_image_height(const struct DfImage *img);

// # Safety
// `img` must be null or a handle not yet freed.
void df_image_free(struct DfImage *img);

// Releases a buffer returned by this library.
//
// # Safety
// `buf` and `len` must come from one library call, and not be freed twice.
void df_buffer_free(uint8_t *buf, size_t len);

// RMSE between two 8-bit rasters of the same size.
//
// # Safety
// Both pixel pointers must cover `width * height` bytes; `out` must be
// writable.
enum DfStatus df_rmse(const uint8_t *reference,
                      const uint8_t *test,
                      size_t width,
                      size_t height,
                      double *out);

// SSIM between two 8-bit rasters; `windowed` selects the mean over 8×8
// windows instead of a single global window.
//
// # Safety
// Both pixel pointers must cover `width * height` bytes; `out` must be
// writable.
enum DfStatus df_ssim(const uint8_t *reference,
                      const uint8_t *test,
                      size_t width,
                      size_t height,
                      bool windowed,
                      double *out);

// Message for the last failing call on this thread, or null. Valid until
// the next call into the library from the same thread.
const char *df_last_error(void);

// Library version, static storage.
const char *df_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DCTFUSE_H */
