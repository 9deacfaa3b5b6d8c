//! Full-reference quality metrics.

use thiserror::Error;

use crate::grid::Raster;

/// Dynamic range of 8-bit samples.
pub const DYNAMIC_RANGE: f64 = 255.0;
pub const K1: f64 = 0.01;
pub const K2: f64 = 0.03;
pub const C1: f64 = (K1 * DYNAMIC_RANGE) * (K1 * DYNAMIC_RANGE);
pub const C2: f64 = (K2 * DYNAMIC_RANGE) * (K2 * DYNAMIC_RANGE);
pub const SSIM_WINDOW: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("image sizes differ: {0}×{1} vs {2}×{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("windowed SSIM needs at least {SSIM_WINDOW}×{SSIM_WINDOW} pixels, got {0}×{1}")]
    TooSmall(usize, usize),
}

fn check(a: &Raster, b: &Raster) -> Result<(), MetricError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    Ok(())
}

/// Root mean squared per-pixel difference.
pub fn rmse(reference: &Raster, test: &Raster) -> Result<f64, MetricError> {
    check(reference, test)?;
    let sum: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(r, t)| (r - t) * (r - t))
        .sum();
    Ok((sum / reference.data().len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SsimMode {
    /// One window spanning the whole image.
    #[default]
    Global,
    /// Mean over every 8×8 window at stride 1 with uniform weights.
    Windowed,
}

fn ssim_from_stats(mu1: f64, mu2: f64, var1: f64, var2: f64, cov: f64) -> f64 {
    ((2.0 * mu1 * mu2 + C1) * (2.0 * cov + C2))
        / ((mu1 * mu1 + mu2 * mu2 + C1) * (var1 + var2 + C2))
}

fn global_ssim(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let mu1 = a.iter().sum::<f64>() / n;
    let mu2 = b.iter().sum::<f64>() / n;
    let (mut v1, mut v2, mut cov) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mu1, y - mu2);
        v1 += dx * dx;
        v2 += dy * dy;
        cov += dx * dy;
    }
    ssim_from_stats(mu1, mu2, v1 / n, v2 / n, cov / n)
}

fn windowed_ssim(a: &Raster, b: &Raster) -> f64 {
    let (w, h) = (a.width(), a.height());
    let mut total = 0.0;
    let mut count = 0usize;
    let mut wa = [0.0; SSIM_WINDOW * SSIM_WINDOW];
    let mut wb = [0.0; SSIM_WINDOW * SSIM_WINDOW];
    for top in 0..=h - SSIM_WINDOW {
        for left in 0..=w - SSIM_WINDOW {
            for r in 0..SSIM_WINDOW {
                let src = (top + r) * w + left;
                wa[r * SSIM_WINDOW..(r + 1) * SSIM_WINDOW]
                    .copy_from_slice(&a.data()[src..src + SSIM_WINDOW]);
                wb[r * SSIM_WINDOW..(r + 1) * SSIM_WINDOW]
                    .copy_from_slice(&b.data()[src..src + SSIM_WINDOW]);
            }
            total += global_ssim(&wa, &wb);
            count += 1;
        }
    }
    total / count as f64
}

/// Structural similarity with the standard `K1 = 0.01`, `K2 = 0.03` constants.
pub fn ssim(a: &Raster, b: &Raster, mode: SsimMode) -> Result<f64, MetricError> {
    check(a, b)?;
    match mode {
        SsimMode::Global => Ok(global_ssim(a.data(), b.data())),
        SsimMode::Windowed => {
            if a.width() < SSIM_WINDOW || a.height() < SSIM_WINDOW {
                return Err(MetricError::TooSmall(a.width(), a.height()));
            }
            Ok(windowed_ssim(a, b))
        }
    }
}

/// One (pair, method) result row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub pair_id: String,
    pub method: String,
    pub rmse: f64,
    pub ssim_global: f64,
    pub ssim_windowed: f64,
}

impl MetricReport {
    pub fn measure(
        pair_id: impl Into<String>,
        method: impl Into<String>,
        reference: &Raster,
        test: &Raster,
    ) -> Result<Self, MetricError> {
        Ok(Self {
            pair_id: pair_id.into(),
            method: method.into(),
            rmse: rmse(reference, test)?,
            ssim_global: ssim(reference, test, SsimMode::Global)?,
            ssim_windowed: ssim(reference, test, SsimMode::Windowed)?,
        })
    }
}
