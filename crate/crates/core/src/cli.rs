//! Command-line interface: `threshold`, `segment`, `evaluate`, `oracle`, `synth`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
//! 3 computation refused (e.g. exhaustive search with too many thresholds).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::bfo::{BfoConfig, BfoError, StepSize, SwarmCoefficients};
use crate::eval::{evaluate_edges, EvalError, LogBase, MetricReport, DEFAULT_ALPHA};
use crate::imagecore::{compute_histogram, load_image, save_pgm, EdgeMap, ImageError, PgmEncoding};
use crate::otsu::{exhaustive_search, OtsuError, MAX_THRESHOLDS};
use crate::pipeline::{optimize_thresholds, segment_image, PostProcess};
use crate::segment::{class_levels, apply_thresholds, Connectivity};
use crate::synth::{self, SynthError, SynthKind};

pub const THRESHOLDS_FILE: &str = "thresholds.json";
pub const THRESHOLDED_FILE: &str = "thresholded.pgm";
pub const EDGES_FILE: &str = "edges.pgm";
pub const TRACE_FILE: &str = "trace.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SYNTH_IMAGE_FILE: &str = "image.pgm";
pub const SYNTH_LABELS_FILE: &str = "labels.pgm";
pub const SYNTH_EDGES_FILE: &str = "reference_edges.pgm";
pub const SYNTH_INFO_FILE: &str = "synth.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Refused(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Refused(_) => 3,
        }
    }
}

impl From<ImageError> for CliError {
    fn from(e: ImageError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(format!("i/o failure: {e}"))
    }
}

impl From<BfoError> for CliError {
    fn from(e: BfoError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<OtsuError> for CliError {
    fn from(e: OtsuError) -> Self {
        match e {
            OtsuError::MTooLarge(_) => CliError::Refused(e.to_string()),
            OtsuError::InvalidThresholds(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Refused(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "bfoseg", version, about = "Multilevel Otsu segmentation with bacterial foraging optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search m thresholds and write the thresholded image.
    Threshold(ThresholdArgs),
    /// Threshold, extract edges and remove small components.
    Segment(SegmentArgs),
    /// Score a candidate edge image against a reference edge image.
    Evaluate(EvaluateArgs),
    /// Exhaustively search the optimal thresholds (m <= 4).
    Oracle(OracleArgs),
    /// Generate a synthetic test image with ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct BfoArgs {
    /// Number of bacteria (even)
    #[arg(long, default_value_t = 20)]
    pub pop_size: usize,
    /// Chemotactic steps per reproduction cycle
    #[arg(long, default_value_t = 50)]
    pub nc: usize,
    /// Maximum swim length
    #[arg(long, default_value_t = 4)]
    pub ns: usize,
    /// Reproduction steps per dispersal event
    #[arg(long, default_value_t = 4)]
    pub nre: usize,
    /// Elimination-dispersal events
    #[arg(long, default_value_t = 2)]
    pub ned: usize,
    /// Dispersal probability
    #[arg(long, default_value_t = 0.25)]
    pub ped: f64,
    /// Run-length unit shared by all bacteria
    #[arg(long, default_value_t = 2.0)]
    pub step_size: f64,
    #[arg(long, default_value_t = SwarmCoefficients::DEFAULT.attract_depth)]
    pub d_attract: f64,
    #[arg(long, default_value_t = SwarmCoefficients::DEFAULT.attract_width)]
    pub w_attract: f64,
    #[arg(long, default_value_t = SwarmCoefficients::DEFAULT.repel_height)]
    pub h_repellant: f64,
    #[arg(long, default_value_t = SwarmCoefficients::DEFAULT.repel_width)]
    pub w_repellant: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl BfoArgs {
    fn to_config(&self) -> BfoConfig {
        BfoConfig {
            population: self.pop_size,
            chemotactic_steps: self.nc,
            swim_length: self.ns,
            reproduction_steps: self.nre,
            dispersal_events: self.ned,
            dispersal_probability: self.ped,
            step_size: StepSize::Uniform(self.step_size),
            swarm: SwarmCoefficients {
                attract_depth: self.d_attract,
                attract_width: self.w_attract,
                repel_height: self.h_repellant,
                repel_width: self.w_repellant,
            },
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Number of thresholds
    #[arg(short = 'm', value_parser = clap::value_parser!(u8).range(1..=MAX_THRESHOLDS as i64))]
    pub m: u8,
    #[command(flatten)]
    pub bfo: BfoArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    /// Minimum edge component size kept by post-processing
    #[arg(long = "p", default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub p: u64,
    #[arg(long, default_value = "8", value_parser = ["4", "8"])]
    pub connectivity: String,
    /// Optional reference edge image; when given, metrics.json is written
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogBaseArg {
    Nats,
    Bits,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Candidate edge image (non-zero pixels are edges)
    #[arg(long)]
    pub candidate: PathBuf,
    /// Reference edge image (non-zero pixels are edges)
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = LogBaseArg::Nats)]
    pub log_base: LogBaseArg,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(short = 'm', value_parser = clap::value_parser!(u8).range(1..))]
    pub m: u8,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// phantom | bimodal
    #[arg(long, default_value = "phantom")]
    pub kind: String,
    #[arg(long, default_value_t = 128)]
    pub width: usize,
    #[arg(long, default_value_t = 128)]
    pub height: usize,
    /// Standard deviation of additive Gaussian noise
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

/// Validated settings shared by `threshold` and `segment`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub m: usize,
    pub bfo: BfoConfig,
    pub post_process: PostProcess,
    pub alpha: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_threshold_args(a: &ThresholdArgs) -> Result<Self, CliError> {
        let bfo = a.bfo.to_config();
        bfo.validate()?;
        Ok(Self {
            input: a.input.clone(),
            output_dir: a.output_dir.clone(),
            m: a.m as usize,
            seed: bfo.seed,
            bfo,
            post_process: PostProcess::default(),
            alpha: DEFAULT_ALPHA,
        })
    }

    pub fn from_segment_args(a: &SegmentArgs) -> Result<Self, CliError> {
        let mut cfg = Self::from_threshold_args(&a.threshold)?;
        let connectivity = Connectivity::try_from(a.connectivity.parse::<u8>().unwrap_or(0))
            .map_err(CliError::Usage)?;
        cfg.post_process = PostProcess { min_component: a.p as usize, connectivity };
        if !(a.alpha.is_finite() && a.alpha > 0.0) {
            return Err(CliError::Usage(format!("alpha must be positive, got {}", a.alpha)));
        }
        cfg.alpha = a.alpha;
        Ok(cfg)
    }
}

/// Parses `args` (including the program name) and runs the command, writing the
/// primary report to `out` and warnings to standard error.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(out, "{e}")?;
                return Ok(());
            }
            return Err(CliError::Usage(e.render().to_string()));
        }
    };
    match cli.command {
        Command::Threshold(a) => cmd_threshold(&RunConfig::from_threshold_args(&a)?, out),
        Command::Segment(a) => {
            let cfg = RunConfig::from_segment_args(&a)?;
            cmd_segment(&cfg, a.reference.as_deref(), out)
        }
        Command::Evaluate(a) => cmd_evaluate(&a, out),
        Command::Oracle(a) => cmd_oracle(&a, out),
        Command::Synth(a) => cmd_synth(&a, out),
    }
}

/// Entry point for the binary: runs, reports errors, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(args, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string();
            eprint!("{msg}");
            if !msg.ends_with('\n') {
                eprintln!();
            }
            e.exit_code()
        }
    }
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create output directory {}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn warn_level_count(m: usize) {
    if !(3..=4).contains(&m) {
        eprintln!("warning: m = {m}; 3 or 4 thresholds usually suit brain MR images");
    }
}

#[derive(Debug, Serialize)]
struct ThresholdReport<'a> {
    method: &'a str,
    m: usize,
    thresholds: Vec<u8>,
    objective: f64,
    class_levels: Vec<u8>,
}

pub fn cmd_threshold(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    warn_level_count(cfg.m);
    let img = load_image(&cfg.input)?;
    let search = optimize_thresholds(&compute_histogram(&img), cfg.m, &cfg.bfo)?;
    let (_, thresholded) = apply_thresholds(&img, &search.thresholds);
    let report = ThresholdReport {
        method: "bfo",
        m: cfg.m,
        thresholds: search.thresholds.as_slice().to_vec(),
        objective: search.objective,
        class_levels: class_levels(&img, &search.thresholds),
    };
    let text = to_json(&report);
    ensure_dir(&cfg.output_dir)?;
    write_file(&cfg.output_dir.join(THRESHOLDS_FILE), &text)?;
    save_pgm(&thresholded, cfg.output_dir.join(THRESHOLDED_FILE), PgmEncoding::Raw)?;
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn cmd_segment(
    cfg: &RunConfig,
    reference: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    warn_level_count(cfg.m);
    let img = load_image(&cfg.input)?;
    let reference = reference.map(load_image).transpose()?.map(|r| EdgeMap::from_image(&r));
    let seg = segment_image(&img, cfg.m, &cfg.bfo, cfg.post_process)?;
    let metrics = reference
        .as_ref()
        .map(|r| evaluate_edges(&seg.edges, r, cfg.alpha, LogBase::Nats))
        .transpose()?;

    let dir = &cfg.output_dir;
    ensure_dir(dir)?;
    let report = ThresholdReport {
        method: "bfo",
        m: cfg.m,
        thresholds: seg.search.thresholds.as_slice().to_vec(),
        objective: seg.search.objective,
        class_levels: class_levels(&img, &seg.search.thresholds),
    };
    write_file(&dir.join(THRESHOLDS_FILE), &to_json(&report))?;
    save_pgm(&seg.thresholded, dir.join(THRESHOLDED_FILE), PgmEncoding::Raw)?;
    save_pgm(&seg.edges.to_image(), dir.join(EDGES_FILE), PgmEncoding::Raw)?;
    write_file(&dir.join(TRACE_FILE), &seg.search.run.trace_csv())?;
    let mut outputs = vec![THRESHOLDS_FILE, THRESHOLDED_FILE, EDGES_FILE, TRACE_FILE];
    if let Some(m) = &metrics {
        write_file(&dir.join(METRICS_FILE), &to_json(m))?;
        outputs.push(METRICS_FILE);
    }
    outputs.push(MANIFEST_FILE);

    let manifest = json!({
        "command": "segment",
        "config": cfg,
        "thresholds": seg.search.thresholds.as_slice(),
        "objective": seg.search.objective,
        "evaluations": seg.search.run.evaluations,
        "raw_edge_pixels": seg.raw_edges.edge_count(),
        "edge_pixels": seg.edges.edge_count(),
        "outputs": outputs,
    });
    let text = to_json(&manifest);
    write_file(&dir.join(MANIFEST_FILE), &text)?;
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let candidate = EdgeMap::from_image(&load_image(&a.candidate)?);
    let reference = EdgeMap::from_image(&load_image(&a.reference)?);
    if !(a.alpha.is_finite() && a.alpha > 0.0) {
        return Err(CliError::Usage(format!("alpha must be positive, got {}", a.alpha)));
    }
    let base = match a.log_base {
        LogBaseArg::Nats => LogBase::Nats,
        LogBaseArg::Bits => LogBase::Bits,
    };
    let report: MetricReport = evaluate_edges(&candidate, &reference, a.alpha, base)?;
    let text = to_json(&report);
    if let Some(dir) = &a.output_dir {
        ensure_dir(dir)?;
        write_file(&dir.join(METRICS_FILE), &text)?;
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let img = load_image(&a.input)?;
    let (ts, j) = exhaustive_search(&compute_histogram(&img), a.m as usize)?;
    let report = ThresholdReport {
        method: "exhaustive",
        m: a.m as usize,
        thresholds: ts.as_slice().to_vec(),
        objective: j,
        class_levels: class_levels(&img, &ts),
    };
    let text = to_json(&report);
    if let Some(dir) = &a.output_dir {
        ensure_dir(dir)?;
        write_file(&dir.join(THRESHOLDS_FILE), &text)?;
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let kind: SynthKind = a.kind.parse()?;
    let s = synth::generate(kind, a.width, a.height, a.noise, a.seed)?;
    ensure_dir(&a.output_dir)?;
    save_pgm(&s.image, a.output_dir.join(SYNTH_IMAGE_FILE), PgmEncoding::Raw)?;
    save_pgm(&s.labels.to_image(), a.output_dir.join(SYNTH_LABELS_FILE), PgmEncoding::Raw)?;
    save_pgm(&s.reference_edges.to_image(), a.output_dir.join(SYNTH_EDGES_FILE), PgmEncoding::Raw)?;
    let info = json!({
        "kind": kind,
        "width": a.width,
        "height": a.height,
        "noise": a.noise,
        "seed": a.seed,
        "region_means": s.region_means,
        "reference_edge_pixels": s.reference_edges.edge_count(),
        "outputs": [SYNTH_IMAGE_FILE, SYNTH_LABELS_FILE, SYNTH_EDGES_FILE, SYNTH_INFO_FILE],
    });
    let text = to_json(&info);
    write_file(&a.output_dir.join(SYNTH_INFO_FILE), &text)?;
    out.write_all(text.as_bytes())?;
    Ok(())
}
