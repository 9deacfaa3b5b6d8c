//! Block-wise multi-focus fusion of two coefficient-domain images.
//!
//! The primary method compares per-block spatial frequency, records the
//! outcome in a ternary decision map, optionally smooths it with a 3×3
//! majority sum, and composes the fused image block by block (one source,
//! the other, or their mean on a tie). Four simpler criteria are provided
//! as baselines for benchmarking.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::blockdct::{
    sf_dct_unchecked, variance_dct_unchecked, BlockError, CoeffBlock, CoeffForm, BLOCK_LEN,
};
use crate::grid::BlockImage;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error("shape mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },
    #[error("unknown fusion method {0:?} (expected one of sf, sf_cv, average, contrast, variance, ac_max)")]
    UnknownMethod(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no source images")]
    NoInputs,
    #[error(transparent)]
    Block(#[from] BlockError),
}

/// Dense row-major grid with one cell per 8×8 block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMap<T> {
    rows: usize,
    cols: usize,
    cells: Vec<T>,
}

impl<T: Copy> BlockMap<T> {
    pub fn new(rows: usize, cols: usize, cells: Vec<T>) -> Result<Self, FusionError> {
        if cells.len() != rows * cols {
            return Err(FusionError::DimensionMismatch {
                left: format!("{rows}×{cols} map"),
                right: format!("{} cells", cells.len()),
            });
        }
        Ok(Self { rows, cols, cells })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                cells.push(f(r, c));
            }
        }
        Self { rows, cols, cells }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.cells[row * self.cols + col]
    }

    fn check_shape<U>(&self, other: &BlockMap<U>) -> Result<(), FusionError> {
        if self.rows == other.rows && self.cols == other.cols {
            Ok(())
        } else {
            Err(FusionError::DimensionMismatch {
                left: format!("{}×{} blocks", self.rows, self.cols),
                right: format!("{}×{} blocks", other.rows, other.cols),
            })
        }
    }
}

/// Ternary per-block decision: +1 favours A, −1 favours B, 0 undecided.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMap(BlockMap<i8>);

impl DecisionMap {
    pub fn new(map: BlockMap<i8>) -> Result<Self, FusionError> {
        if let Some(bad) = map.cells.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(FusionError::InvalidConfig(format!("decision value {bad}")));
        }
        Ok(Self(map))
    }

    pub fn map(&self) -> &BlockMap<i8> {
        &self.0
    }

    /// Uses the raw decisions directly as the selection signal.
    pub fn as_refined(&self) -> RefinedMap {
        RefinedMap(BlockMap {
            rows: self.0.rows,
            cols: self.0.cols,
            cells: self.0.cells.iter().map(|&w| i32::from(w)).collect(),
        })
    }
}

/// Neighbourhood sums of a decision map; the sign selects the source.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedMap(BlockMap<i32>);

impl RefinedMap {
    pub fn new(map: BlockMap<i32>) -> Self {
        Self(map)
    }

    pub fn map(&self) -> &BlockMap<i32> {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FusionMethod {
    /// Spatial frequency decision, no consistency verification.
    Sf,
    /// Spatial frequency decision refined by the 3×3 majority sum.
    SfCv,
    Average,
    Contrast,
    Variance,
    AcMax,
}

impl FusionMethod {
    pub const ALL: [FusionMethod; 6] = [
        FusionMethod::Sf,
        FusionMethod::SfCv,
        FusionMethod::Average,
        FusionMethod::Contrast,
        FusionMethod::Variance,
        FusionMethod::AcMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FusionMethod::Sf => "sf",
            FusionMethod::SfCv => "sf_cv",
            FusionMethod::Average => "average",
            FusionMethod::Contrast => "contrast",
            FusionMethod::Variance => "variance",
            FusionMethod::AcMax => "ac_max",
        }
    }

    /// Row label used in printed tables.
    pub fn label(self) -> &'static str {
        match self {
            FusionMethod::Sf => "DCT + SF",
            FusionMethod::SfCv => "DCT + SF + CV",
            FusionMethod::Average => "DCT + Avg",
            FusionMethod::Contrast => "DCT + Contrast",
            FusionMethod::Variance => "DCT + Variance",
            FusionMethod::AcMax => "DCT + AC-Max",
        }
    }
}

impl fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FusionMethod {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FusionMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| FusionError::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    pub method: FusionMethod,
    /// Margin by which one block's SF must exceed the other's to win.
    pub threshold: f64,
    /// AC magnitudes above this count towards the AC-Max criterion.
    pub ac_max_tau: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            method: FusionMethod::SfCv,
            threshold: 0.0,
            ac_max_tau: 0.0,
        }
    }
}

impl FusionConfig {
    pub fn new(method: FusionMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            return Err(FusionError::InvalidConfig(format!(
                "threshold must be a finite non-negative number, got {}",
                self.threshold
            )));
        }
        if !(self.ac_max_tau >= 0.0 && self.ac_max_tau.is_finite()) {
            return Err(FusionError::InvalidConfig(format!(
                "ac_max_tau must be a finite non-negative number, got {}",
                self.ac_max_tau
            )));
        }
        Ok(())
    }
}

fn check_pair(a: &BlockImage, b: &BlockImage) -> Result<(), FusionError> {
    if !a.same_shape(b) {
        return Err(FusionError::DimensionMismatch {
            left: format!("{}×{} image", a.width(), a.height()),
            right: format!("{}×{} image", b.width(), b.height()),
        });
    }
    for img in [a, b] {
        if img.form() != CoeffForm::Dequantized {
            return Err(BlockError::FormMismatch {
                expected: CoeffForm::Dequantized,
                found: img.form(),
            }
            .into());
        }
    }
    Ok(())
}

fn measure_grid(image: &BlockImage, f: impl Fn(&CoeffBlock) -> f64) -> BlockMap<f64> {
    let grid = image.grid();
    BlockMap {
        rows: grid.rows(),
        cols: grid.cols(),
        cells: grid.blocks().iter().map(f).collect(),
    }
}

/// Per-block spatial frequency of a dequantized image.
pub fn sf_grid(image: &BlockImage) -> Result<BlockMap<f64>, FusionError> {
    if image.form() != CoeffForm::Dequantized {
        return Err(BlockError::FormMismatch {
            expected: CoeffForm::Dequantized,
            found: image.form(),
        }
        .into());
    }
    Ok(measure_grid(image, sf_dct_unchecked))
}

/// `+1` where `sf_a > sf_b + T`, `−1` where `sf_b > sf_a + T`, else `0`.
pub fn build_decision_map(
    sf_a: &BlockMap<f64>,
    sf_b: &BlockMap<f64>,
    threshold: f64,
) -> Result<DecisionMap, FusionError> {
    sf_a.check_shape(sf_b)?;
    let cells = sf_a
        .cells
        .iter()
        .zip(&sf_b.cells)
        .map(|(&a, &b)| {
            if a > b + threshold {
                1
            } else if b > a + threshold {
                -1
            } else {
                0
            }
        })
        .collect();
    Ok(DecisionMap(BlockMap {
        rows: sf_a.rows,
        cols: sf_a.cols,
        cells,
    }))
}

/// Single-pass 3×3 box sum of the decision map, centre included, cells
/// outside the map contributing zero.
pub fn consistency_verify(w: &DecisionMap) -> RefinedMap {
    let m = &w.0;
    let (rows, cols) = (m.rows as isize, m.cols as isize);
    let out = BlockMap::from_fn(m.rows, m.cols, |i, j| {
        let mut sum = 0i32;
        for di in -1..=1isize {
            for dj in -1..=1isize {
                let (x, y) = (i as isize + di, j as isize + dj);
                if (0..rows).contains(&x) && (0..cols).contains(&y) {
                    sum += i32::from(m.get(x as usize, y as usize));
                }
            }
        }
        sum
    });
    RefinedMap(out)
}

fn average_block(a: &CoeffBlock, b: &CoeffBlock) -> CoeffBlock {
    a.zip_with(b, |x, y| (x + y) / 2.0)
}

fn rebuild(template: &BlockImage, blocks: Vec<CoeffBlock>) -> BlockImage {
    BlockImage::from_parts(
        template.grid().with_blocks(blocks),
        *template.quant(),
        CoeffForm::Dequantized,
    )
}

/// Picks A where `R > 0`, B where `R < 0` and their mean where `R = 0`.
pub fn compose_fused(
    a: &BlockImage,
    b: &BlockImage,
    r: &RefinedMap,
) -> Result<BlockImage, FusionError> {
    check_pair(a, b)?;
    let grid = a.grid();
    if r.0.rows != grid.rows() || r.0.cols != grid.cols() {
        return Err(FusionError::DimensionMismatch {
            left: format!("{}×{} blocks", grid.rows(), grid.cols()),
            right: format!("{}×{} map", r.0.rows, r.0.cols),
        });
    }
    let blocks = a
        .blocks()
        .iter()
        .zip(b.blocks())
        .zip(&r.0.cells)
        .map(|((ba, bb), &sel)| match sel.signum() {
            1 => *ba,
            -1 => *bb,
            _ => average_block(ba, bb),
        })
        .collect();
    Ok(rebuild(a, blocks))
}

/// Decision map and its refinement for a dequantized pair.
pub fn decision_maps(
    a: &BlockImage,
    b: &BlockImage,
    threshold: f64,
) -> Result<(DecisionMap, RefinedMap), FusionError> {
    check_pair(a, b)?;
    let w = build_decision_map(&sf_grid(a)?, &sf_grid(b)?, threshold)?;
    let r = consistency_verify(&w);
    Ok((w, r))
}

/// Coefficient-wise mean of the two sources.
pub fn fuse_average(a: &BlockImage, b: &BlockImage) -> Result<BlockImage, FusionError> {
    check_pair(a, b)?;
    let blocks = a
        .blocks()
        .iter()
        .zip(b.blocks())
        .map(|(x, y)| average_block(x, y))
        .collect();
    Ok(rebuild(a, blocks))
}

// Select by a scalar block score, averaging on ties.
fn select_by_score(
    a: &BlockImage,
    b: &BlockImage,
    score: impl Fn(&CoeffBlock) -> f64,
) -> Result<BlockImage, FusionError> {
    check_pair(a, b)?;
    let blocks = a
        .blocks()
        .iter()
        .zip(b.blocks())
        .map(|(x, y)| {
            let (sx, sy) = (score(x), score(y));
            if sx > sy {
                *x
            } else if sy > sx {
                *y
            } else {
                average_block(x, y)
            }
        })
        .collect();
    Ok(rebuild(a, blocks))
}

/// Keeps the block with more AC coefficients above `tau` in magnitude.
pub fn fuse_ac_max(a: &BlockImage, b: &BlockImage, tau: f64) -> Result<BlockImage, FusionError> {
    select_by_score(a, b, |blk| {
        blk.coeffs()[1..].iter().filter(|c| c.abs() > tau).count() as f64
    })
}

/// Keeps the block with the larger pixel variance.
pub fn fuse_variance(a: &BlockImage, b: &BlockImage) -> Result<BlockImage, FusionError> {
    select_by_score(a, b, variance_dct_unchecked)
}

const CONTRAST_EPS: f64 = 1e-6;

/// Per AC position, takes the coefficient with the larger AC/DC ratio;
/// DC terms are averaged.
pub fn fuse_contrast(a: &BlockImage, b: &BlockImage) -> Result<BlockImage, FusionError> {
    check_pair(a, b)?;
    let blocks = a
        .blocks()
        .iter()
        .zip(b.blocks())
        .map(|(x, y)| {
            let (cx, cy) = (x.coeffs(), y.coeffs());
            let dx = cx[0].abs().max(CONTRAST_EPS);
            let dy = cy[0].abs().max(CONTRAST_EPS);
            let mut out = [0.0; BLOCK_LEN];
            out[0] = (cx[0] + cy[0]) / 2.0;
            for k in 1..BLOCK_LEN {
                let (rx, ry) = (cx[k].abs() / dx, cy[k].abs() / dy);
                out[k] = if rx > ry {
                    cx[k]
                } else if ry > rx {
                    cy[k]
                } else {
                    (cx[k] + cy[k]) / 2.0
                };
            }
            CoeffBlock::from_raw(out, CoeffForm::Dequantized)
        })
        .collect();
    Ok(rebuild(a, blocks))
}

/// Fuses two images. Quantized inputs are dequantized first; the result is
/// always in dequantized form and carries A's quantization table.
pub fn fuse(a: &BlockImage, b: &BlockImage, cfg: &FusionConfig) -> Result<BlockImage, FusionError> {
    cfg.validate()?;
    let a = a.dequantized();
    let b = b.dequantized();
    check_pair(&a, &b)?;
    match cfg.method {
        FusionMethod::Sf => {
            let (w, _) = decision_maps(&a, &b, cfg.threshold)?;
            compose_fused(&a, &b, &w.as_refined())
        }
        FusionMethod::SfCv => {
            let (_, r) = decision_maps(&a, &b, cfg.threshold)?;
            compose_fused(&a, &b, &r)
        }
        FusionMethod::Average => fuse_average(&a, &b),
        FusionMethod::Contrast => fuse_contrast(&a, &b),
        FusionMethod::Variance => fuse_variance(&a, &b),
        FusionMethod::AcMax => fuse_ac_max(&a, &b, cfg.ac_max_tau),
    }
}

/// Folds any number of sources pairwise from the left.
pub fn fuse_all(images: &[BlockImage], cfg: &FusionConfig) -> Result<BlockImage, FusionError> {
    let (first, rest) = images.split_first().ok_or(FusionError::NoInputs)?;
    let mut acc = first.dequantized();
    for next in rest {
        acc = fuse(&acc, next, cfg)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockdct::QuantTable;
    use crate::grid::BlockGrid;

    fn image_of(width: usize, height: usize, blocks: Vec<[f64; BLOCK_LEN]>) -> BlockImage {
        let blocks = blocks
            .into_iter()
            .map(|c| CoeffBlock::dequantized(c).unwrap())
            .collect();
        BlockImage::new(
            BlockGrid::new(width, height, blocks).unwrap(),
            QuantTable::unit(),
        )
        .unwrap()
    }

    fn map(rows: usize, cols: usize, cells: &[i8]) -> DecisionMap {
        DecisionMap::new(BlockMap::new(rows, cols, cells.to_vec()).unwrap()).unwrap()
    }

    fn single(v: f64) -> BlockMap<f64> {
        BlockMap::new(1, 1, vec![v]).unwrap()
    }

    #[test]
    fn decision_rule_examples() {
        let w = |a, b| {
            build_decision_map(&single(a), &single(b), 2.0)
                .unwrap()
                .map()
                .get(0, 0)
        };
        assert_eq!(w(10.0, 7.0), 1);
        assert_eq!(w(8.0, 7.0), 0);
        assert_eq!(w(7.0, 10.0), -1);
    }

    #[test]
    fn decision_map_shape_mismatch() {
        let a = BlockMap::new(1, 2, vec![0.0; 2]).unwrap();
        let b = BlockMap::new(2, 1, vec![0.0; 2]).unwrap();
        assert!(matches!(
            build_decision_map(&a, &b, 0.0),
            Err(FusionError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn majority_sum_examples() {
        let r = consistency_verify(&map(3, 3, &[1; 9]));
        assert_eq!(r.map().get(1, 1), 9);
        assert_eq!(r.map().get(0, 0), 4);
        assert_eq!(r.map().get(0, 1), 6);

        let mut cells = [1i8; 9];
        cells[4] = -1;
        assert_eq!(consistency_verify(&map(3, 3, &cells)).map().get(1, 1), 7);
    }

    #[test]
    fn decision_map_rejects_out_of_range() {
        assert!(DecisionMap::new(BlockMap::new(1, 1, vec![2]).unwrap()).is_err());
    }

    #[test]
    fn compose_branches() {
        let a = image_of(16, 8, vec![[4.0; BLOCK_LEN], [4.0; BLOCK_LEN]]);
        let b = image_of(16, 8, vec![[2.0; BLOCK_LEN], [2.0; BLOCK_LEN]]);
        let r = RefinedMap::new(BlockMap::new(1, 2, vec![3, 0]).unwrap());
        let f = compose_fused(&a, &b, &r).unwrap();
        assert_eq!(f.blocks()[0].coeffs(), &[4.0; BLOCK_LEN]);
        assert_eq!(f.blocks()[1].coeffs(), &[3.0; BLOCK_LEN]);
        let r = RefinedMap::new(BlockMap::new(1, 2, vec![-1, -5]).unwrap());
        assert_eq!(compose_fused(&a, &b, &r).unwrap().blocks(), b.blocks());
    }

    #[test]
    fn compose_rejects_wrong_map() {
        let a = image_of(8, 8, vec![[0.0; BLOCK_LEN]]);
        let r = RefinedMap::new(BlockMap::new(2, 1, vec![0, 0]).unwrap());
        assert!(compose_fused(&a, &a, &r).is_err());
    }

    #[test]
    fn mismatched_images() {
        let a = image_of(8, 8, vec![[0.0; BLOCK_LEN]]);
        let b = image_of(9, 8, vec![[0.0; BLOCK_LEN]; 2]);
        for m in FusionMethod::ALL {
            assert!(matches!(
                fuse(&a, &b, &FusionConfig::new(m)),
                Err(FusionError::DimensionMismatch { .. })
            ));
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in FusionMethod::ALL {
            assert_eq!(m.name().parse::<FusionMethod>().unwrap(), m);
        }
        assert!(matches!(
            "dwt".parse::<FusionMethod>(),
            Err(FusionError::UnknownMethod(_))
        ));
    }

    #[test]
    fn negative_threshold_rejected() {
        let a = image_of(8, 8, vec![[0.0; BLOCK_LEN]]);
        let cfg = FusionConfig::default().with_threshold(-1.0);
        assert!(matches!(
            fuse(&a, &a, &cfg),
            Err(FusionError::InvalidConfig(_))
        ));
    }

    #[test]
    fn ac_max_counts_nonzero() {
        let mut x = [0.0; BLOCK_LEN];
        let mut y = [0.0; BLOCK_LEN];
        x[1..=5].fill(1.0);
        y[1] = 9.0;
        y[2] = 9.0;
        let a = image_of(8, 8, vec![x]);
        let b = image_of(8, 8, vec![y]);
        assert_eq!(fuse_ac_max(&a, &b, 0.0).unwrap().blocks(), a.blocks());
        // equal counts average
        let mut z = [0.0; BLOCK_LEN];
        z[10] = 3.0;
        let one = image_of(8, 8, vec![z]);
        let mut w = [0.0; BLOCK_LEN];
        w[20] = 5.0;
        let other = image_of(8, 8, vec![w]);
        let f = fuse_ac_max(&one, &other, 0.0).unwrap();
        assert_eq!(f.blocks()[0].coeffs()[10], 1.5);
        assert_eq!(f.blocks()[0].coeffs()[20], 2.5);
    }

    #[test]
    fn variance_prefers_texture() {
        let mut flat = [0.0; BLOCK_LEN];
        flat[0] = 300.0;
        let mut tex = [0.0; BLOCK_LEN];
        tex[0] = 100.0;
        tex[9] = 40.0;
        let a = image_of(8, 8, vec![flat]);
        let b = image_of(8, 8, vec![tex]);
        assert_eq!(fuse_variance(&a, &b).unwrap().blocks(), b.blocks());
    }

    #[test]
    fn contrast_takes_larger_ratio() {
        let mut x = [0.0; BLOCK_LEN];
        x[0] = 100.0;
        x[1] = 50.0;
        let mut y = [0.0; BLOCK_LEN];
        y[0] = 60.0;
        let f = fuse_contrast(&image_of(8, 8, vec![x]), &image_of(8, 8, vec![y])).unwrap();
        let c = f.blocks()[0].coeffs();
        assert_eq!(c[1], 50.0);
        assert_eq!(c[0], 80.0);
    }

    #[test]
    fn average_examples() {
        let a = image_of(8, 8, vec![[4.0; BLOCK_LEN]]);
        let b = image_of(8, 8, vec![[2.0; BLOCK_LEN]]);
        assert_eq!(
            fuse_average(&a, &b).unwrap().blocks()[0].coeffs(),
            &[3.0; BLOCK_LEN]
        );
        assert_eq!(fuse_average(&a, &a).unwrap(), a);
    }

    #[test]
    fn fold_over_three_sources() {
        let a = image_of(8, 8, vec![[4.0; BLOCK_LEN]]);
        let cfg = FusionConfig::new(FusionMethod::Average);
        let b = image_of(8, 8, vec![[2.0; BLOCK_LEN]]);
        let c = image_of(8, 8, vec![[0.0; BLOCK_LEN]]);
        let f = fuse_all(&[a, b, c], &cfg).unwrap();
        assert_eq!(f.blocks()[0].coeffs(), &[1.5; BLOCK_LEN]);
        assert!(matches!(fuse_all(&[], &cfg), Err(FusionError::NoInputs)));
    }
}
