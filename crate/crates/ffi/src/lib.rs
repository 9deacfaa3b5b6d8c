//! C ABI over `dctfuse`.
//!
//! Images cross the boundary as opaque `DfImage` handles holding coefficient
//! grids. Every fallible call returns a `DfStatus`; on anything other than
//! `DF_STATUS_OK` a human-readable message is available from
//! `df_last_error()` on the same thread until the next failing call.
//!
//! Buffers handed out by the library (`df_emit_jpeg`, `df_decode_pixels`)
//! must be released with `df_buffer_free`, handles with `df_image_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use dctfuse::fusion::FusionError;
use dctfuse::jpeg_codec::parse_pgm_raster;
use dctfuse::metrics::MetricError;
use dctfuse::{
    emit_jpeg, fuse, parse_jpeg, rmse, ssim, BlockImage, CodecError, CoeffForm, FusionConfig,
    FusionMethod, QuantTable, Raster, SsimMode,
};

/// Result codes. The numbering of the parse, dimension and argument codes
/// matches the command-line tool's exit statuses.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfStatus {
    Ok = 0,
    NullPointer = 1,
    ParseError = 2,
    DimensionMismatch = 3,
    InvalidArgument = 4,
    CodecError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfMethod {
    Sf = 0,
    SfCv = 1,
    Average = 2,
    Contrast = 3,
    Variance = 4,
    AcMax = 5,
}

fn method_from(code: u32) -> Option<FusionMethod> {
    Some(match code {
        c if c == DfMethod::Sf as u32 => FusionMethod::Sf,
        c if c == DfMethod::SfCv as u32 => FusionMethod::SfCv,
        c if c == DfMethod::Average as u32 => FusionMethod::Average,
        c if c == DfMethod::Contrast as u32 => FusionMethod::Contrast,
        c if c == DfMethod::Variance as u32 => FusionMethod::Variance,
        c if c == DfMethod::AcMax as u32 => FusionMethod::AcMax,
        _ => return None,
    })
}

/// Opaque coefficient image.
pub struct DfImage {
    inner: BlockImage,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type Outcome = Result<(), (DfStatus, String)>;

fn fail<T>(status: DfStatus, msg: impl Into<String>) -> Result<T, (DfStatus, String)> {
    Err((status, msg.into()))
}

/// Runs `body`, converting errors and panics into a status plus message.
fn guard(body: impl FnOnce() -> Outcome) -> DfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            clear_error();
            DfStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            DfStatus::Panic
        }
    }
}

fn codec_status(e: &CodecError) -> DfStatus {
    match e {
        CodecError::MalformedStream { .. } | CodecError::Unsupported { .. } => DfStatus::ParseError,
        _ => DfStatus::CodecError,
    }
}

fn fusion_status(e: &FusionError) -> DfStatus {
    match e {
        FusionError::DimensionMismatch { .. } => DfStatus::DimensionMismatch,
        _ => DfStatus::InvalidArgument,
    }
}

fn metric_status(e: &MetricError) -> DfStatus {
    match e {
        MetricError::DimensionMismatch(..) => DfStatus::DimensionMismatch,
        MetricError::TooSmall(..) => DfStatus::InvalidArgument,
    }
}

unsafe fn bytes<'a>(data: *const u8, len: usize) -> Result<&'a [u8], (DfStatus, String)> {
    if data.is_null() {
        if len == 0 {
            return Ok(&[]);
        }
        return fail(DfStatus::NullPointer, "data is null");
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn image<'a>(
    handle: *const DfImage,
    what: &str,
) -> Result<&'a BlockImage, (DfStatus, String)> {
    handle
        .as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| (DfStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(out: *mut T, what: &str) -> Outcome {
    if out.is_null() {
        return fail(DfStatus::NullPointer, format!("{what} is null"));
    }
    Ok(())
}

fn hand_out(handle: BlockImage, out: *mut *mut DfImage) {
    let boxed = Box::new(DfImage { inner: handle });
    unsafe { *out = Box::into_raw(boxed) };
}

fn hand_out_buffer(buf: Vec<u8>, out: *mut *mut u8, out_len: *mut usize) {
    let boxed = buf.into_boxed_slice();
    let len = boxed.len();
    unsafe {
        *out_len = len;
        *out = Box::into_raw(boxed) as *mut u8;
    }
}

unsafe fn raster_from(
    pixels: *const u8,
    width: usize,
    height: usize,
    what: &str,
) -> Result<Raster, (DfStatus, String)> {
    let n = width.checked_mul(height).ok_or_else(|| {
        (
            DfStatus::InvalidArgument,
            "image size overflows".to_string(),
        )
    })?;
    let data = bytes(pixels, n).map_err(|(s, _)| (s, format!("{what} is null")))?;
    Raster::from_u8(width, height, data)
        .map_err(|e| (DfStatus::InvalidArgument, format!("{what}: {e}")))
}

/// Parses a baseline grayscale JPEG into a handle holding its quantized
/// coefficients and quantization table.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn df_parse_jpeg(
    data: *const u8,
    len: usize,
    out: *mut *mut DfImage,
) -> DfStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let input = bytes(data, len)?;
        let img = parse_jpeg(input).map_err(|e| (codec_status(&e), e.to_string()))?;
        hand_out(img, out);
        Ok(())
    })
}

/// Reads a binary PGM and transforms it with the standard table at `quality`
/// (1..=100).
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn df_parse_pgm(
    data: *const u8,
    len: usize,
    quality: u8,
    out: *mut *mut DfImage,
) -> DfStatus {
    guard(|| {
        out_ptr(out, "out")?;
        if !(1..=100).contains(&quality) {
            return fail(
                DfStatus::InvalidArgument,
                format!("quality {quality} outside 1..=100"),
            );
        }
        let input = bytes(data, len)?;
        let raster = parse_pgm_raster(input).map_err(|e| (DfStatus::ParseError, e.to_string()))?;
        hand_out(
            BlockImage::from_raster(&raster, &QuantTable::for_quality(quality)),
            out,
        );
        Ok(())
    })
}

/// Fuses two images. The result holds dequantized coefficients and A's
/// quantization table. `method` is a `DfMethod` value; `threshold` must be
/// finite and non-negative.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn df_fuse(
    a: *const DfImage,
    b: *const DfImage,
    method: u32,
    threshold: f64,
    out: *mut *mut DfImage,
) -> DfStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let a = image(a, "a")?;
        let b = image(b, "b")?;
        let method = method_from(method).ok_or_else(|| {
            (
                DfStatus::InvalidArgument,
                format!("unknown method code {method}"),
            )
        })?;
        let cfg = FusionConfig::new(method).with_threshold(threshold);
        let fused = fuse(a, b, &cfg).map_err(|e| (fusion_status(&e), e.to_string()))?;
        hand_out(fused, out);
        Ok(())
    })
}

/// Entropy codes an image. With `quality` 0 the image's own table is used;
/// otherwise the coefficients are re-quantized with the standard table at
/// that quality.
///
/// # Safety
/// `img` must be a live handle; `out` and `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn df_emit_jpeg(
    img: *const DfImage,
    quality: u8,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> DfStatus {
    guard(|| {
        out_ptr(out, "out")?;
        out_ptr(out_len, "out_len")?;
        let img = image(img, "img")?;
        if quality > 100 {
            return fail(
                DfStatus::InvalidArgument,
                format!("quality {quality} outside 0..=100"),
            );
        }
        let quant = if quality == 0 {
            *img.quant()
        } else {
            QuantTable::for_quality(quality)
        };
        let ready = if img.form() == CoeffForm::Quantized && quant == *img.quant() {
            img.clone()
        } else {
            img.dequantized()
                .quantized_with(&quant)
                .map_err(|e| (DfStatus::CodecError, e.to_string()))?
        };
        let stream = emit_jpeg(&ready).map_err(|e| (codec_status(&e), e.to_string()))?;
        hand_out_buffer(stream, out, out_len);
        Ok(())
    })
}

/// Inverse transforms to 8-bit pixels, row-major, `width * height` bytes.
///
/// # Safety
/// `img` must be a live handle; `out` and `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn df_decode_pixels(
    img: *const DfImage,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> DfStatus {
    guard(|| {
        out_ptr(out, "out")?;
        out_ptr(out_len, "out_len")?;
        let img = image(img, "img")?;
        hand_out_buffer(img.to_raster().to_u8(), out, out_len);
        Ok(())
    })
}

/// Pixel width, or 0 for a null handle.
///
/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn df_image_width(img: *const DfImage) -> usize {
    img.as_ref().map_or(0, |h| h.inner.width())
}

/// Pixel height, or 0 for a null handle.
///
/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn df_image_height(img: *const DfImage) -> usize {
    img.as_ref().map_or(0, |h| h.inner.height())
}

/// # Safety
/// `img` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn df_image_free(img: *mut DfImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Releases a buffer returned by this library.
///
/// # Safety
/// `buf` and `len` must come from one library call, and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn df_buffer_free(buf: *mut u8, len: usize) {
    if !buf.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(buf, len)));
    }
}

/// RMSE between two 8-bit rasters of the same size.
///
/// # Safety
/// Both pixel pointers must cover `width * height` bytes; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn df_rmse(
    reference: *const u8,
    test: *const u8,
    width: usize,
    height: usize,
    out: *mut f64,
) -> DfStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let r = raster_from(reference, width, height, "reference")?;
        let t = raster_from(test, width, height, "test")?;
        *out = rmse(&r, &t).map_err(|e| (metric_status(&e), e.to_string()))?;
        Ok(())
    })
}

/// SSIM between two 8-bit rasters; `windowed` selects the mean over 8×8
/// windows instead of a single global window.
///
/// # Safety
/// Both pixel pointers must cover `width * height` bytes; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn df_ssim(
    reference: *const u8,
    test: *const u8,
    width: usize,
    height: usize,
    windowed: bool,
    out: *mut f64,
) -> DfStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let r = raster_from(reference, width, height, "reference")?;
        let t = raster_from(test, width, height, "test")?;
        let mode = if windowed {
            SsimMode::Windowed
        } else {
            SsimMode::Global
        };
        *out = ssim(&r, &t, mode).map_err(|e| (metric_status(&e), e.to_string()))?;
        Ok(())
    })
}

/// Message for the last failing call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn df_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn df_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains a nul byte"),
        };
    VERSION.as_ptr()
}
