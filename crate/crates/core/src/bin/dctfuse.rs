//! `dctfuse` command-line tool.
//!
//! Exit status: 0 success, 1 I/O failure while writing, 2 unreadable or
//! malformed input, 3 inputs of different sizes, 4 bad usage.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dctfuse::bench::{
    default_dataset_dir, emit_sweep_report, load_dataset, run_benchmark, BenchConfig, BenchError,
    ReportFormat,
};
use dctfuse::fusion::{decision_maps, FusionError, FusionMethod};
use dctfuse::jpeg_codec::{emit_pgm_raster, parse_pgm_raster};
use dctfuse::metrics::{MetricError, SSIM_WINDOW};
use dctfuse::{
    emit_jpeg, fuse_all, make_pair, parse_jpeg, rmse, ssim, BlockImage, BlurKernel, BlurSpec,
    FusionConfig, QuantTable, Raster, Region, SsimMode,
};

#[derive(Debug, Parser)]
#[command(
    name = "dctfuse",
    version,
    about = "Multi-focus fusion of JPEG images in the DCT domain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fuse two or more baseline grayscale JPEGs of the same scene.
    Fuse(FuseArgs),
    /// Build a synthetic pair with complementary blurred regions.
    Generate(GenerateArgs),
    /// Score images against a ground truth (RMSE, SSIM).
    Evaluate(EvaluateArgs),
    /// Write the block decision maps for a pair as PGM images.
    Inspect(InspectArgs),
    /// Run every fusion method over a directory of ground-truth PGMs.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct FuseArgs {
    /// Source JPEGs; more than two are folded pairwise from the left.
    #[arg(required = true, num_args = 2..)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "sf_cv", value_parser = parse_method)]
    method: FusionMethod,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    threshold: f64,
    /// Re-quantize with the standard table at this quality instead of the
    /// first input's table.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=100))]
    quality: Option<u8>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelKind {
    Gaussian,
    Disk,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    ground_truth: PathBuf,
    /// Region that is sharp in A and blurred in B: left, right, top, bottom
    /// or WxH+X+Y.
    #[arg(long, default_value = "right", value_parser = parse_region)]
    region: Region,
    #[arg(long, value_enum, default_value = "gaussian")]
    kernel: KernelKind,
    /// Gaussian standard deviation in pixels.
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    /// Kernel radius; defaults to ceil(3 sigma) for the Gaussian and 3 for
    /// the disk.
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long, default_value_t = 75, value_parser = clap::value_parser!(u8).range(1..=100))]
    quality: u8,
    /// Output directory (created if missing).
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    ground_truth: PathBuf,
    /// JPEG or PGM images to score.
    #[arg(required = true)]
    images: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct InspectArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    threshold: f64,
    /// Decision map output; the refined map goes next to it as
    /// `<stem>_refined.pgm`.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of ground-truth PGMs; the bundled set when omitted.
    #[arg(long)]
    images: Option<PathBuf>,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<FusionMethod>>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    threshold: f64,
    /// One or more comma-separated qualities, e.g. 50,75,90.
    #[arg(long, value_delimiter = ',', default_value = "75",
          value_parser = clap::value_parser!(u8).range(1..=100))]
    quality: Vec<u8>,
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    #[arg(long, default_value = "right", value_parser = parse_region)]
    region: Region,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Evaluate pairs one at a time.
    #[arg(long)]
    serial: bool,
    /// Write the report here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<FusionMethod, String> {
    s.parse().map_err(|e: FusionError| e.to_string())
}

fn parse_region(s: &str) -> Result<Region, String> {
    s.parse()
        .map_err(|e: dctfuse::dataset::DatasetError| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Input(String),
    Dimensions(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Input(_) => 2,
            Failure::Dimensions(_) => 3,
            Failure::Usage(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Input(m) | Failure::Dimensions(m) | Failure::Usage(m) => m,
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, bytes: &[u8]) -> CmdResult {
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_jpeg(path: &Path) -> Result<BlockImage, Failure> {
    parse_jpeg(&read_input(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_pgm(path: &Path) -> Result<Raster, Failure> {
    parse_pgm_raster(&read_input(path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Pixels of a JPEG or PGM, told apart by their leading bytes.
fn load_any(path: &Path) -> Result<Raster, Failure> {
    let bytes = read_input(path)?;
    let fail = |e: String| Failure::Input(format!("{}: {e}", path.display()));
    if bytes.starts_with(&[0xff, 0xd8]) {
        let img = parse_jpeg(&bytes).map_err(|e| fail(e.to_string()))?;
        Ok(img.to_raster().quantized_to_u8())
    } else if bytes.starts_with(b"P") {
        parse_pgm_raster(&bytes).map_err(|e| fail(e.to_string()))
    } else {
        Err(fail("neither a JPEG nor a PGM".into()))
    }
}

fn check_threshold(t: f64) -> CmdResult {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--threshold must be a non-negative number, got {t}"
        )))
    }
}

fn same_size(images: &[(&Path, (usize, usize))]) -> CmdResult {
    let (first, dims) = images[0];
    for &(path, d) in &images[1..] {
        if d != dims {
            return Err(Failure::Dimensions(format!(
                "{} is {}×{} but {} is {}×{}",
                path.display(),
                d.0,
                d.1,
                first.display(),
                dims.0,
                dims.1
            )));
        }
    }
    Ok(())
}

fn fusion_failure(e: FusionError) -> Failure {
    match e {
        FusionError::DimensionMismatch { .. } => Failure::Dimensions(e.to_string()),
        FusionError::InvalidConfig(_) | FusionError::UnknownMethod(_) => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Input(other.to_string()),
    }
}

fn cmd_fuse(args: FuseArgs) -> CmdResult {
    check_threshold(args.threshold)?;
    let sources = args
        .inputs
        .iter()
        .map(|p| load_jpeg(p))
        .collect::<Result<Vec<_>, _>>()?;
    let dims: Vec<_> = args
        .inputs
        .iter()
        .zip(&sources)
        .map(|(p, s)| (p.as_path(), (s.width(), s.height())))
        .collect();
    same_size(&dims)?;

    let cfg = FusionConfig::new(args.method).with_threshold(args.threshold);
    let fused = fuse_all(&sources, &cfg).map_err(fusion_failure)?;
    let quant = match args.quality {
        Some(q) => QuantTable::for_quality(q),
        None => *sources[0].quant(),
    };
    let stream = fused
        .quantized_with(&quant)
        .map_err(|e| Failure::Input(e.to_string()))
        .and_then(|q| emit_jpeg(&q).map_err(|e| Failure::Input(e.to_string())))?;
    write_output(&args.output, &stream)
}

fn cmd_generate(args: GenerateArgs) -> CmdResult {
    let truth = load_pgm(&args.ground_truth)?;
    let kernel = match args.kernel {
        KernelKind::Gaussian => BlurKernel::Gaussian {
            sigma: args.sigma,
            radius: args.radius.unwrap_or((3.0 * args.sigma).ceil() as usize),
        },
        KernelKind::Disk => BlurKernel::Disk {
            radius: args.radius.unwrap_or(3),
        },
    };
    let spec = BlurSpec {
        kernel,
        region: args.region,
    };
    let (a, b) = make_pair(&truth, &spec).map_err(|e| Failure::Usage(e.to_string()))?;
    let (a, b) = (a.quantized_to_u8(), b.quantized_to_u8());

    fs::create_dir_all(&args.output)
        .map_err(|e| Failure::Io(format!("{}: {e}", args.output.display())))?;
    let quant = QuantTable::for_quality(args.quality);
    for (name, raster) in [("A", &a), ("B", &b)] {
        let stream = emit_jpeg(&BlockImage::from_raster(raster, &quant))
            .map_err(|e| Failure::Input(e.to_string()))?;
        write_output(&args.output.join(format!("{name}.jpg")), &stream)?;
        write_output(
            &args.output.join(format!("{name}.pgm")),
            &emit_pgm_raster(raster),
        )?;
    }
    write_output(&args.output.join("ground.pgm"), &emit_pgm_raster(&truth))
}

fn cmd_evaluate(args: EvaluateArgs) -> CmdResult {
    let truth = load_pgm(&args.ground_truth)?;
    let mut out = String::from("image\trmse\tssim_global\tssim_windowed\n");
    for path in &args.images {
        let img = load_any(path)?;
        same_size(&[
            (args.ground_truth.as_path(), (truth.width(), truth.height())),
            (path.as_path(), (img.width(), img.height())),
        ])?;
        let metric = |e: MetricError| Failure::Dimensions(e.to_string());
        let e = rmse(&truth, &img).map_err(metric)?;
        let g = ssim(&truth, &img, SsimMode::Global).map_err(metric)?;
        let w = if img.width() >= SSIM_WINDOW && img.height() >= SSIM_WINDOW {
            ssim(&truth, &img, SsimMode::Windowed)
                .map_err(metric)?
                .to_string()
        } else {
            "-".to_string()
        };
        let _ = writeln!(out, "{}\t{e}\t{g}\t{w}", path.display());
    }
    print!("{out}");
    Ok(())
}

fn map_pixel(v: i32) -> f64 {
    match v.signum() {
        -1 => 0.0,
        0 => 128.0,
        _ => 255.0,
    }
}

fn refined_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "map".into());
    output.with_file_name(format!("{stem}_refined.pgm"))
}

fn cmd_inspect(args: InspectArgs) -> CmdResult {
    check_threshold(args.threshold)?;
    let a = load_jpeg(&args.a)?;
    let b = load_jpeg(&args.b)?;
    same_size(&[
        (args.a.as_path(), (a.width(), a.height())),
        (args.b.as_path(), (b.width(), b.height())),
    ])?;
    let (w, r) = decision_maps(&a.dequantized(), &b.dequantized(), args.threshold)
        .map_err(fusion_failure)?;

    let (rows, cols) = (w.map().rows(), w.map().cols());
    let render = |get: &dyn Fn(usize, usize) -> i32| {
        let raster = Raster::from_fn(cols, rows, |row, col| map_pixel(get(row, col)))
            .expect("maps are never empty");
        emit_pgm_raster(&raster)
    };
    write_output(
        &args.output,
        &render(&|row, col| i32::from(w.map().get(row, col))),
    )?;
    write_output(
        &refined_path(&args.output),
        &render(&|row, col| r.map().get(row, col)),
    )?;

    let tally = |cells: &mut dyn Iterator<Item = i32>| {
        let mut t = [0usize; 3];
        for v in cells {
            t[(v.signum() + 1) as usize] += 1;
        }
        t
    };
    let tw = tally(&mut w.map().cells().iter().map(|&v| i32::from(v)));
    let tr = tally(&mut r.map().cells().iter().copied());
    println!("blocks\t{cols}x{rows}");
    println!("map\tA\tB\ttie");
    println!("decision\t{}\t{}\t{}", tw[2], tw[0], tw[1]);
    println!("refined\t{}\t{}\t{}", tr[2], tr[0], tr[1]);
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    check_threshold(args.threshold)?;
    let dir = args.images.unwrap_or_else(default_dataset_dir);
    let images = load_dataset(&dir).map_err(|e| Failure::Input(e.to_string()))?;
    let mut cfg = BenchConfig::new(images);
    cfg.blur = BlurSpec {
        kernel: BlurKernel::gaussian(args.sigma),
        region: args.region,
    };
    if let Some(methods) = args.methods {
        cfg.methods = methods;
    }
    cfg.threshold = args.threshold;
    cfg.parallel = !args.serial;

    let mut runs = Vec::with_capacity(args.quality.len());
    for &q in &args.quality {
        cfg.quality = q;
        let run = run_benchmark(&cfg).map_err(|e| match e {
            BenchError::Config(f) => fusion_failure(f),
            BenchError::Pair { .. } => Failure::Input(e.to_string()),
            other => Failure::Input(other.to_string()),
        })?;
        runs.push(run);
    }
    let format = match args.format {
        Format::Csv => ReportFormat::Csv,
        Format::Text => ReportFormat::Text,
    };
    let report = emit_sweep_report(&runs, format);
    match args.output {
        Some(path) => write_output(&path, &report),
        None => std::io::stdout()
            .write_all(&report)
            .map_err(|e| Failure::Io(format!("standard output: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Fuse(a) => cmd_fuse(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dctfuse: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
