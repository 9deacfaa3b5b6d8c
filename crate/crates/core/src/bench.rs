//! Comparative benchmark: every fusion method over a set of synthetic pairs,
//! scored against the sharp originals.
//!
//! Each pair goes through the full coefficient-domain path: the two blurred
//! sources are rounded to 8 bits, JPEG-encoded at the configured quality and
//! parsed back; the fused coefficients are re-quantized with the same table,
//! emitted, parsed and decoded to pixels before scoring.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::blockdct::{QuantTable, BLOCK_SIDE};
use crate::dataset::{make_pair, BlurKernel, BlurSpec, Bounds, DatasetError};
use crate::fusion::{fuse, FusionConfig, FusionError, FusionMethod, RefinedMap};
use crate::grid::{BlockImage, GridError, Raster};
use crate::jpeg_codec::{emit_jpeg, parse_jpeg, parse_pgm_raster, CodecError, PgmError};
use crate::metrics::{MetricError, MetricReport};

/// Label used for aggregate rows in CSV output.
pub const MEAN_ROW_ID: &str = "mean";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("dataset missing: {0}")]
    DatasetMissing(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    BadImage {
        path: PathBuf,
        #[source]
        source: PgmError,
    },
    #[error("pair {pair_id}: {source}")]
    Pair {
        pair_id: String,
        #[source]
        source: PairError,
    },
    #[error(transparent)]
    Config(#[from] FusionError),
}

#[derive(Debug, Error)]
pub enum PairError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetImage {
    pub id: String,
    pub ground_truth: Raster,
}

/// Reads every `*.pgm` in `dir`, sorted by file name; the id is the stem.
pub fn load_dataset(dir: &Path) -> Result<Vec<DatasetImage>, BenchError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| BenchError::DatasetMissing(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(BenchError::DatasetMissing(format!(
            "no .pgm images in {}",
            dir.display()
        )));
    }
    paths.iter().map(|p| load_image(p)).collect()
}

pub fn load_image(path: &Path) -> Result<DatasetImage, BenchError> {
    let bytes = std::fs::read(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let ground_truth = parse_pgm_raster(&bytes).map_err(|source| BenchError::BadImage {
        path: path.to_path_buf(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(DatasetImage { id, ground_truth })
}

/// Directory of the bundled test images.
pub fn default_dataset_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub images: Vec<DatasetImage>,
    pub blur: BlurSpec,
    pub quality: u8,
    pub methods: Vec<FusionMethod>,
    pub threshold: f64,
    pub ac_max_tau: f64,
    /// Evaluate pairs on the rayon pool; results are identical either way.
    pub parallel: bool,
}

impl BenchConfig {
    pub fn new(images: Vec<DatasetImage>) -> Self {
        Self {
            images,
            blur: BlurSpec::default(),
            quality: 75,
            methods: FusionMethod::ALL.to_vec(),
            threshold: 0.0,
            ac_max_tau: 0.0,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: FusionMethod,
    pub rmse: f64,
    pub ssim_global: f64,
    pub ssim_windowed: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub image_ids: Vec<String>,
    pub blur: BlurSpec,
    pub quality: u8,
    pub threshold: f64,
    pub methods: Vec<FusionMethod>,
    /// Sorted by pair id, then method name.
    pub rows: Vec<MetricReport>,
    /// In `methods` order.
    pub means: Vec<MethodSummary>,
}

impl BenchmarkRun {
    pub fn mean(&self, method: FusionMethod) -> Option<&MethodSummary> {
        self.means.iter().find(|m| m.method == method)
    }
}

/// Encodes an 8-bit raster and parses it back, as a sensor node would.
fn through_jpeg(raster: &Raster, quant: &QuantTable) -> Result<BlockImage, PairError> {
    let bytes = emit_jpeg(&BlockImage::from_raster(&raster.quantized_to_u8(), quant))?;
    Ok(parse_jpeg(&bytes)?)
}

/// Re-quantizes fused coefficients, round-trips the stream and returns the
/// decoded 8-bit pixels.
pub fn decode_fused(fused: &BlockImage, quant: &QuantTable) -> Result<Raster, PairError> {
    let bytes = emit_jpeg(&fused.quantized_with(quant)?)?;
    Ok(parse_jpeg(&bytes)?.to_raster().quantized_to_u8())
}

/// Builds the blurred pair for `ground_truth` and returns both sources as
/// dequantized coefficients, after a JPEG round trip at `quality`.
pub fn prepare_pair(
    ground_truth: &Raster,
    blur: &BlurSpec,
    quality: u8,
) -> Result<(BlockImage, BlockImage), PairError> {
    let quant = QuantTable::for_quality(quality);
    let (a, b) = make_pair(ground_truth, blur)?;
    Ok((
        through_jpeg(&a, &quant)?.dequantized(),
        through_jpeg(&b, &quant)?.dequantized(),
    ))
}

/// Correct-selection counts for one half of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SelectionCount {
    pub correct: usize,
    pub total: usize,
}

impl SelectionCount {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

/// How often a refined map picks the sharp source. `inside` covers blocks in
/// the blur region (where `A` is sharp, so `R > 0` is correct), `outside` the
/// rest (`R < 0`). Only blocks whose whole 3×3 neighbourhood lies on the same
/// side of the region boundary are counted; ties count as misses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SelectionFidelity {
    pub inside: SelectionCount,
    pub outside: SelectionCount,
}

pub fn selection_fidelity(
    refined: &RefinedMap,
    region: Bounds,
    width: usize,
    height: usize,
) -> SelectionFidelity {
    let map = refined.map();
    let (rows, cols) = (map.rows(), map.cols());
    // 1 inside, -1 outside, 0 straddling
    let side = |br: usize, bc: usize| -> i8 {
        let top = br * BLOCK_SIDE;
        let left = bc * BLOCK_SIDE;
        let bottom = (top + BLOCK_SIDE).min(height);
        let right = (left + BLOCK_SIDE).min(width);
        let overlap_r = top.max(region.top) < bottom.min(region.bottom);
        let overlap_c = left.max(region.left) < right.min(region.right);
        let fully = region.top <= top
            && bottom <= region.bottom
            && region.left <= left
            && right <= region.right;
        if fully {
            1
        } else if overlap_r && overlap_c {
            0
        } else {
            -1
        }
    };
    let mut out = SelectionFidelity::default();
    for r in 0..rows {
        for c in 0..cols {
            let s = side(r, c);
            if s == 0 {
                continue;
            }
            let uniform = (r.saturating_sub(1)..(r + 2).min(rows))
                .all(|nr| (c.saturating_sub(1)..(c + 2).min(cols)).all(|nc| side(nr, nc) == s));
            if !uniform {
                continue;
            }
            let v = map.get(r, c);
            let count = if s > 0 {
                &mut out.inside
            } else {
                &mut out.outside
            };
            count.total += 1;
            if (s > 0 && v > 0) || (s < 0 && v < 0) {
                count.correct += 1;
            }
        }
    }
    out
}

fn run_pair(
    image: &DatasetImage,
    cfg: &BenchConfig,
    methods: &[FusionMethod],
) -> Result<Vec<MetricReport>, PairError> {
    let quant = QuantTable::for_quality(cfg.quality);
    let (a, b) = prepare_pair(&image.ground_truth, &cfg.blur, cfg.quality)?;
    let mut rows = Vec::with_capacity(methods.len());
    for &method in methods {
        let fcfg = FusionConfig {
            method,
            threshold: cfg.threshold,
            ac_max_tau: cfg.ac_max_tau,
        };
        let fused = fuse(&a, &b, &fcfg)?;
        let pixels = decode_fused(&fused, &quant)?;
        rows.push(MetricReport::measure(
            image.id.clone(),
            method.name(),
            &image.ground_truth,
            &pixels,
        )?);
    }
    Ok(rows)
}

pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchmarkRun, BenchError> {
    if cfg.images.is_empty() {
        return Err(BenchError::DatasetMissing("no images configured".into()));
    }
    FusionConfig {
        method: FusionMethod::SfCv,
        threshold: cfg.threshold,
        ac_max_tau: cfg.ac_max_tau,
    }
    .validate()?;
    let mut methods: Vec<FusionMethod> = Vec::with_capacity(cfg.methods.len());
    for &m in &cfg.methods {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }

    let eval = |img: &DatasetImage| {
        run_pair(img, cfg, &methods).map_err(|source| BenchError::Pair {
            pair_id: img.id.clone(),
            source,
        })
    };
    let per_pair: Vec<Vec<MetricReport>> = if cfg.parallel {
        cfg.images.par_iter().map(eval).collect::<Result<_, _>>()?
    } else {
        cfg.images.iter().map(eval).collect::<Result<_, _>>()?
    };

    let mut rows: Vec<MetricReport> = per_pair.into_iter().flatten().collect();
    rows.sort_by(|x, y| {
        x.pair_id
            .cmp(&y.pair_id)
            .then_with(|| x.method.cmp(&y.method))
    });

    let means = methods
        .iter()
        .map(|&method| {
            let picked: Vec<&MetricReport> =
                rows.iter().filter(|r| r.method == method.name()).collect();
            let n = picked.len() as f64;
            MethodSummary {
                method,
                rmse: picked.iter().map(|r| r.rmse).sum::<f64>() / n,
                ssim_global: picked.iter().map(|r| r.ssim_global).sum::<f64>() / n,
                ssim_windowed: picked.iter().map(|r| r.ssim_windowed).sum::<f64>() / n,
            }
        })
        .collect();

    Ok(BenchmarkRun {
        image_ids: cfg.images.iter().map(|i| i.id.clone()).collect(),
        blur: cfg.blur,
        quality: cfg.quality,
        threshold: cfg.threshold,
        methods,
        rows,
        means,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Text,
}

pub const CSV_HEADER: &str = "pair_id,method,rmse,ssim_global,ssim_windowed,threshold,quality";

pub fn emit_report(run: &BenchmarkRun, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => csv_report(run),
        ReportFormat::Text => text_report(run),
    }
    .into_bytes()
}

/// Several runs (typically a quality sweep) in one report: a single CSV
/// header, or the text tables one after another.
pub fn emit_sweep_report(runs: &[BenchmarkRun], format: ReportFormat) -> Vec<u8> {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for run in runs {
                csv_rows(run, &mut out);
            }
        }
        ReportFormat::Text => {
            for (i, run) in runs.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&text_report(run));
            }
        }
    }
    out.into_bytes()
}

fn csv_report(run: &BenchmarkRun) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    csv_rows(run, &mut out);
    out
}

fn csv_rows(run: &BenchmarkRun, out: &mut String) {
    let (t, q) = (run.threshold, run.quality);
    for r in &run.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{t},{q}",
            r.pair_id, r.method, r.rmse, r.ssim_global, r.ssim_windowed
        );
    }
    for m in &run.means {
        let _ = writeln!(
            out,
            "{MEAN_ROW_ID},{},{},{},{},{t},{q}",
            m.method, m.rmse, m.ssim_global, m.ssim_windowed
        );
    }
}

fn describe_blur(spec: &BlurSpec) -> String {
    match spec.kernel {
        BlurKernel::Gaussian { sigma, radius } => {
            format!(
                "gaussian sigma={sigma} radius={radius}, region {}",
                spec.region
            )
        }
        BlurKernel::Disk { radius } => format!("disk radius={radius}, region {}", spec.region),
    }
}

fn text_report(run: &BenchmarkRun) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} image pairs, JPEG quality {}, threshold T={}, blur: {}",
        run.image_ids.len(),
        run.quality,
        run.threshold,
        describe_blur(&run.blur)
    );
    if run.means.is_empty() {
        return out;
    }
    let best_rmse = run
        .means
        .iter()
        .map(|m| m.rmse)
        .fold(f64::INFINITY, f64::min);
    let best_ssim = run
        .means
        .iter()
        .map(|m| m.ssim_global)
        .fold(f64::NEG_INFINITY, f64::max);
    let mark = |best: bool| if best { " *" } else { "" };

    out.push_str("\nMean RMSE (lower is better)\n");
    let _ = writeln!(out, "{:<16} {:>10}", "Method", "RMSE");
    for m in &run.means {
        let _ = writeln!(
            out,
            "{:<16} {:>10.3}{}",
            m.method.label(),
            m.rmse,
            mark(m.rmse == best_rmse)
        );
    }
    out.push_str("\nMean SSIM (higher is better)\n");
    let _ = writeln!(out, "{:<16} {:>10} {:>10}", "Method", "global", "windowed");
    for m in &run.means {
        let _ = writeln!(
            out,
            "{:<16} {:>10.4} {:>10.4}{}",
            m.method.label(),
            m.ssim_global,
            m.ssim_windowed,
            mark(m.ssim_global == best_ssim)
        );
    }
    out
}
