//! 8×8 block kernels: orthonormal DCT-II, quantization and focus statistics.
//!
//! Coefficients are stored in natural (row-major) order, index `u * 8 + v`,
//! where `u` is the vertical and `v` the horizontal frequency. Pixel samples
//! use the same layout with `x` the row and `y` the column. No level shift is
//! applied here; callers that feed 8-bit samples into the JPEG pipeline must
//! subtract 128 themselves.

use std::sync::OnceLock;

use thiserror::Error;

pub const BLOCK_SIDE: usize = 8;
pub const BLOCK_LEN: usize = BLOCK_SIDE * BLOCK_SIDE;

/// Largest magnitude a quantized DC value may take in an 8-bit baseline stream.
pub const MAX_QUANT_DC: i32 = 2047;
/// Largest magnitude a quantized AC value may take with baseline Huffman tables.
pub const MAX_QUANT_AC: i32 = 1023;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlockError {
    #[error("expected {expected:?} coefficients, got {found:?}")]
    FormMismatch {
        expected: CoeffForm,
        found: CoeffForm,
    },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("quantization table entry {value} at index {index} outside 1..=255")]
    BadQuantEntry { index: usize, value: u16 },
}

/// Whether a coefficient block holds entropy-coded integers or real values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoeffForm {
    Quantized,
    Dequantized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelBlock {
    samples: [f64; BLOCK_LEN],
}

impl PixelBlock {
    pub fn new(samples: [f64; BLOCK_LEN]) -> Result<Self, BlockError> {
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(BlockError::NonFinite(i));
        }
        Ok(Self { samples })
    }

    pub fn filled(value: f64) -> Self {
        Self {
            samples: [value; BLOCK_LEN],
        }
    }

    /// Builds a block from `f(row, col)`.
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut samples = [0.0; BLOCK_LEN];
        for (i, s) in samples.iter_mut().enumerate() {
            *s = f(i / BLOCK_SIDE, i % BLOCK_SIDE);
        }
        Self { samples }
    }

    pub fn samples(&self) -> &[f64; BLOCK_LEN] {
        &self.samples
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.samples[row * BLOCK_SIDE + col]
    }

    /// Population variance of the 64 samples.
    pub fn variance(&self) -> f64 {
        let mean = self.samples.iter().sum::<f64>() / BLOCK_LEN as f64;
        self.samples
            .iter()
            .map(|s| (s - mean) * (s - mean))
            .sum::<f64>()
            / BLOCK_LEN as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffBlock {
    coeffs: [f64; BLOCK_LEN],
    form: CoeffForm,
}

impl CoeffBlock {
    pub fn dequantized(coeffs: [f64; BLOCK_LEN]) -> Result<Self, BlockError> {
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(BlockError::NonFinite(i));
        }
        Ok(Self {
            coeffs,
            form: CoeffForm::Dequantized,
        })
    }

    /// Quantized block from integer levels, saturated to the baseline range.
    pub fn quantized(levels: [i32; BLOCK_LEN]) -> Self {
        let mut coeffs = [0.0; BLOCK_LEN];
        for (i, (c, &l)) in coeffs.iter_mut().zip(levels.iter()).enumerate() {
            *c = clamp_level(i, l as f64);
        }
        Self {
            coeffs,
            form: CoeffForm::Quantized,
        }
    }

    pub fn zero(form: CoeffForm) -> Self {
        Self {
            coeffs: [0.0; BLOCK_LEN],
            form,
        }
    }

    pub fn form(&self) -> CoeffForm {
        self.form
    }

    pub fn coeffs(&self) -> &[f64; BLOCK_LEN] {
        &self.coeffs
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.coeffs[u * BLOCK_SIDE + v]
    }

    pub fn dc(&self) -> f64 {
        self.coeffs[0]
    }

    /// Integer levels of a quantized block.
    pub fn levels(&self) -> Result<[i32; BLOCK_LEN], BlockError> {
        self.expect(CoeffForm::Quantized)?;
        Ok(self.coeffs.map(|c| c as i32))
    }

    pub(crate) fn expect(&self, form: CoeffForm) -> Result<(), BlockError> {
        if self.form == form {
            Ok(())
        } else {
            Err(BlockError::FormMismatch {
                expected: form,
                found: self.form,
            })
        }
    }

    /// Applies `f` coefficient-wise to a pair of blocks of the same form.
    pub(crate) fn zip_with(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut coeffs = [0.0; BLOCK_LEN];
        for ((c, a), b) in coeffs.iter_mut().zip(&self.coeffs).zip(&other.coeffs) {
            *c = f(*a, *b);
        }
        Self {
            coeffs,
            form: self.form,
        }
    }

    pub(crate) fn from_raw(coeffs: [f64; BLOCK_LEN], form: CoeffForm) -> Self {
        Self { coeffs, form }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantTable {
    q: [u16; BLOCK_LEN],
}

/// Luminance table from Annex K of the JPEG standard, natural order.
const ANNEX_K_LUMA: [u16; BLOCK_LEN] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

impl QuantTable {
    pub fn new(q: [u16; BLOCK_LEN]) -> Result<Self, BlockError> {
        if let Some((index, &value)) = q.iter().enumerate().find(|(_, &v)| !(1..=255).contains(&v))
        {
            return Err(BlockError::BadQuantEntry { index, value });
        }
        Ok(Self { q })
    }

    /// Every entry set to one; quantization becomes rounding.
    pub fn unit() -> Self {
        Self { q: [1; BLOCK_LEN] }
    }

    /// Annex K luminance table scaled by the usual IJG quality mapping.
    pub fn for_quality(quality: u8) -> Self {
        let quality = u32::from(quality.clamp(1, 100));
        let scale = if quality < 50 {
            5000 / quality
        } else {
            200 - 2 * quality
        };
        let q = ANNEX_K_LUMA.map(|base| {
            let v = (u32::from(base) * scale + 50) / 100;
            v.clamp(1, 255) as u16
        });
        Self { q }
    }

    pub fn entries(&self) -> &[u16; BLOCK_LEN] {
        &self.q
    }

    pub fn get(&self, u: usize, v: usize) -> u16 {
        self.q[u * BLOCK_SIDE + v]
    }
}

/// Spatial frequency and variance of one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusStats {
    pub sf: f64,
    pub variance: f64,
}

struct Tables {
    /// `basis[u][j] = c(u) cos((2j+1)uπ/16)`, rows orthonormal.
    basis: [[f64; BLOCK_SIDE]; BLOCK_SIDE],
    /// Diagonal of the DCT-domain gradient-energy quadratic form.
    sf_weights: [f64; BLOCK_LEN],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut basis = [[0.0; BLOCK_SIDE]; BLOCK_SIDE];
        for (u, row) in basis.iter_mut().enumerate() {
            let scale = if u == 0 {
                (1.0 / BLOCK_SIDE as f64).sqrt()
            } else {
                0.5
            };
            for (j, c) in row.iter_mut().enumerate() {
                *c = scale * (((2 * j + 1) * u) as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        // The DCT-II basis diagonalizes the 1-D path Laplacian with eigenvalues
        // 4 sin²(kπ/16), so the separable 2-D row+column difference energy
        // reduces to a diagonal form in the coefficient domain.
        let lambda: [f64; BLOCK_SIDE] = std::array::from_fn(|k| {
            let s = (k as f64 * std::f64::consts::PI / 16.0).sin();
            4.0 * s * s
        });
        let sf_weights = std::array::from_fn(|i| lambda[i / BLOCK_SIDE] + lambda[i % BLOCK_SIDE]);
        Tables { basis, sf_weights }
    })
}

/// The orthonormal 8×8 DCT-II matrix, row `u` holding basis function `u`.
pub fn dct_matrix() -> &'static [[f64; BLOCK_SIDE]; BLOCK_SIDE] {
    &tables().basis
}

/// Per-coefficient weights `w` with `SF² = (1/64) Σ w[i] F[i]²`.
pub fn sf_weights() -> &'static [f64; BLOCK_LEN] {
    &tables().sf_weights
}

// out = M · X · Mᵀ when `transpose` is false, Mᵀ · X · M otherwise.
fn separable(input: &[f64; BLOCK_LEN], transpose: bool) -> [f64; BLOCK_LEN] {
    let c = dct_matrix();
    let m = |a: usize, b: usize| if transpose { c[b][a] } else { c[a][b] };
    let mut tmp = [0.0; BLOCK_LEN];
    for r in 0..BLOCK_SIDE {
        for k in 0..BLOCK_SIDE {
            let mut acc = 0.0;
            for j in 0..BLOCK_SIDE {
                acc += input[r * BLOCK_SIDE + j] * m(k, j);
            }
            tmp[r * BLOCK_SIDE + k] = acc;
        }
    }
    let mut out = [0.0; BLOCK_LEN];
    for k in 0..BLOCK_SIDE {
        for col in 0..BLOCK_SIDE {
            let mut acc = 0.0;
            for r in 0..BLOCK_SIDE {
                acc += m(k, r) * tmp[r * BLOCK_SIDE + col];
            }
            out[k * BLOCK_SIDE + col] = acc;
        }
    }
    out
}

/// `F = C f Cᵀ`.
pub fn forward_dct(block: &PixelBlock) -> CoeffBlock {
    CoeffBlock::from_raw(separable(&block.samples, false), CoeffForm::Dequantized)
}

/// `f = Cᵀ F C`. Quantized blocks must go through [`dequantize`] first.
pub fn inverse_dct(coeffs: &CoeffBlock) -> Result<PixelBlock, BlockError> {
    coeffs.expect(CoeffForm::Dequantized)?;
    Ok(PixelBlock {
        samples: separable(&coeffs.coeffs, true),
    })
}

/// Row/column first-difference spatial frequency of a pixel block.
///
/// Differences never cross the block border.
pub fn spatial_frequency_spatial(block: &PixelBlock) -> f64 {
    let f = |x: usize, y: usize| block.samples[x * BLOCK_SIDE + y];
    let mut rf2 = 0.0;
    let mut cf2 = 0.0;
    for x in 0..BLOCK_SIDE {
        for y in 1..BLOCK_SIDE {
            let d = f(x, y) - f(x, y - 1);
            rf2 += d * d;
        }
    }
    for x in 1..BLOCK_SIDE {
        for y in 0..BLOCK_SIDE {
            let d = f(x, y) - f(x - 1, y);
            cf2 += d * d;
        }
    }
    ((rf2 + cf2) / BLOCK_LEN as f64).sqrt()
}

/// Spatial frequency evaluated directly on DCT coefficients.
pub fn spatial_frequency_dct(coeffs: &CoeffBlock) -> Result<f64, BlockError> {
    coeffs.expect(CoeffForm::Dequantized)?;
    Ok(sf_dct_unchecked(coeffs))
}

pub(crate) fn sf_dct_unchecked(coeffs: &CoeffBlock) -> f64 {
    let energy: f64 = coeffs
        .coeffs
        .iter()
        .zip(sf_weights())
        .map(|(c, w)| w * c * c)
        .sum();
    (energy / BLOCK_LEN as f64).max(0.0).sqrt()
}

/// Population variance of the pixel block behind `coeffs` (Parseval).
pub fn block_variance_dct(coeffs: &CoeffBlock) -> Result<f64, BlockError> {
    coeffs.expect(CoeffForm::Dequantized)?;
    Ok(variance_dct_unchecked(coeffs))
}

pub(crate) fn variance_dct_unchecked(coeffs: &CoeffBlock) -> f64 {
    let ac: f64 = coeffs.coeffs[1..].iter().map(|c| c * c).sum();
    (ac / BLOCK_LEN as f64).max(0.0)
}

pub fn focus_stats(coeffs: &CoeffBlock) -> Result<FocusStats, BlockError> {
    coeffs.expect(CoeffForm::Dequantized)?;
    Ok(FocusStats {
        sf: sf_dct_unchecked(coeffs),
        variance: variance_dct_unchecked(coeffs),
    })
}

pub fn dequantize(coeffs: &CoeffBlock, q: &QuantTable) -> Result<CoeffBlock, BlockError> {
    coeffs.expect(CoeffForm::Quantized)?;
    let mut out = [0.0; BLOCK_LEN];
    for ((o, c), &step) in out.iter_mut().zip(&coeffs.coeffs).zip(&q.q) {
        *o = c * f64::from(step);
    }
    Ok(CoeffBlock::from_raw(out, CoeffForm::Dequantized))
}

/// Divides by the table, rounds half away from zero and saturates to the
/// baseline range (±2047 for DC, ±1023 for AC).
pub fn quantize(coeffs: &CoeffBlock, q: &QuantTable) -> Result<CoeffBlock, BlockError> {
    coeffs.expect(CoeffForm::Dequantized)?;
    let mut out = [0.0; BLOCK_LEN];
    for (i, ((o, c), &step)) in out.iter_mut().zip(&coeffs.coeffs).zip(&q.q).enumerate() {
        *o = clamp_level(i, (c / f64::from(step)).round());
    }
    Ok(CoeffBlock::from_raw(out, CoeffForm::Quantized))
}

fn clamp_level(index: usize, level: f64) -> f64 {
    let limit = if index == 0 {
        MAX_QUANT_DC
    } else {
        MAX_QUANT_AC
    } as f64;
    level.clamp(-limit, limit)
}
