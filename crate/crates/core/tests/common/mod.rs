//! Helpers shared by the integration tests.

#![allow(dead_code)]

use rand::Rng;
use zune_core::bytestream::ZCursor;
use zune_core::colorspace::ColorSpace;
use zune_core::options::DecoderOptions;
use zune_jpeg::JpegDecoder;

use dctfuse::Raster;

/// Decodes with zune-jpeg as 8-bit luma: `(width, height, pixels)`.
pub fn reference_decode(stream: &[u8]) -> Result<(usize, usize, Vec<u8>), String> {
    let options = DecoderOptions::default().jpeg_set_out_colorspace(ColorSpace::Luma);
    let mut dec = JpegDecoder::new_with_options(ZCursor::new(stream), options);
    let pixels = dec.decode().map_err(|e| format!("{e:?}"))?;
    let (w, h) = dec.dimensions().ok_or("no dimensions after decode")?;
    Ok((w, h, pixels))
}

/// Smooth gradient plus edges plus noise, clipped to 8 bits.
pub fn natural_ish(rng: &mut impl Rng, width: usize, height: usize) -> Raster {
    let fx: f64 = rng.gen_range(0.02..0.4);
    let fy: f64 = rng.gen_range(0.02..0.4);
    let amp: f64 = rng.gen_range(10.0..90.0);
    let noise: f64 = rng.gen_range(0.0..30.0);
    let edge = rng.gen_range(0..width.max(1));
    let base: f64 = rng.gen_range(60.0..190.0);
    let data = (0..width * height)
        .map(|i| {
            let (r, c) = ((i / width) as f64, (i % width) as f64);
            let step = if (i % width) >= edge { 40.0 } else { -40.0 };
            let v =
                base + amp * (fx * c).sin() * (fy * r).cos() + step + rng.gen_range(-noise..=noise);
            v.round().clamp(0.0, 255.0)
        })
        .collect();
    Raster::new(width, height, data).unwrap()
}
