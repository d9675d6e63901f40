use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sketchmul::experiments::OutputFormat;
use sketchmul::instances::DEFAULT_RHO;
use sketchmul::{InstanceKind, Transform};

#[derive(Parser, Debug)]
#[command(name = "sketchmul", version = env!("SKETCHMUL_BUILD"), about = "Compressed matrix multiplication")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Root seed for hash functions and instances
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Convolution engine: fft or fwht
    #[arg(long, global = true, default_value = "fwht", value_parser = parse_transform)]
    pub transform: Transform,

    /// Result table format: csv or json
    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    pub format: OutputFormat,

    /// Memory budget, in bytes or with a K/M/G suffix
    #[arg(long, global = true, value_parser = parse_bytes)]
    pub max_mem: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate A·B through a product sketch
    Multiply(Multiply),
    /// Generate a benchmark instance
    Gen(Gen),
    /// Check an instance against the reference product
    Verify(Verify),
    /// Run an experiment and write its result table
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Args, Debug)]
pub struct Multiply {
    /// Left operand (binary matrix, or .csv)
    pub a: PathBuf,
    /// Right operand
    pub b: PathBuf,
    /// Output file for the estimated product
    #[arg(short, long)]
    pub out: PathBuf,
    /// Depth constant: d = 2⌊c_d·log₂n/2⌋ + 1
    #[arg(long = "cd", default_value_t = 2.0)]
    pub c_d: f64,
    /// Width constant: b = c_b·n
    #[arg(long = "cb", default_value_t = 4.0)]
    pub c_b: f64,
    /// Explicit sketch width b (overrides --cb, needs --depth)
    #[arg(long)]
    pub width: Option<usize>,
    /// Explicit sketch count d (overrides --cd, needs --width)
    #[arg(long)]
    pub depth: Option<usize>,
    /// Also write the sketch container here
    #[arg(long)]
    pub sketch_out: Option<PathBuf>,
    /// Write run metadata (parameters, hash functions) as JSON here
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Gen {
    /// logunit, diagonal, covariance or lightbulb
    #[arg(value_parser = parse_kind)]
    pub kind: InstanceKind,
    /// Matrix dimension (power of two)
    pub n: usize,
    /// Correlation of the planted pair (covariance, lightbulb)
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    /// Output prefix; writes PREFIX.a.mat, PREFIX.b.mat and PREFIX.json
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct Verify {
    /// Instance prefix as given to `gen`
    pub prefix: PathBuf,
    /// Largest accepted deviation from the recorded values
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCommand {
    /// Sample variance of a depth-1 estimate against ‖AB‖²_F/b
    Variance(Variance),
    /// Accuracy counts per repetition at fixed parameters
    Correctness(Correctness),
    /// Categorize a (c_d, c_b) grid and select Pareto-optimal pairs
    Gridsearch(Gridsearch),
    /// Wall-clock timings over sizes and parameters
    Scaling(Scaling),
}

#[derive(Args, Debug)]
pub struct Variance {
    #[arg(long, value_parser = parse_kind)]
    pub kind: InstanceKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    /// Sketch widths [default: n/4, n/2, …, 4n]
    #[arg(long = "widths", value_delimiter = ',')]
    pub widths: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Entry as I,J [default: first big entry]
    #[arg(long, value_parser = parse_entry)]
    pub entry: Option<(usize, usize)>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Correctness {
    #[arg(long, value_parser = parse_kind)]
    pub kind: InstanceKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    #[arg(long = "cd")]
    pub c_d: f64,
    #[arg(long = "cb")]
    pub c_b: f64,
    /// Distinct instances
    #[arg(long, default_value_t = 10)]
    pub matrices: usize,
    /// Fresh hash functions per instance
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Gridsearch {
    #[arg(long, value_parser = parse_kind)]
    pub kind: InstanceKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    /// c_d values [default: 0.25, 0.5, …, 4.0]
    #[arg(long, value_delimiter = ',')]
    pub cd_grid: Option<Vec<f64>>,
    /// c_b values [default: 0.25, 0.5, 1, 2, 4]
    #[arg(long, value_delimiter = ',')]
    pub cb_grid: Option<Vec<f64>>,
    /// Repetitions with fresh hash functions per pair
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Timed repetitions after the warm-up when confirming Pareto-optimal pairs
    #[arg(long, default_value_t = 3)]
    pub confirm_reps: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Scaling {
    #[arg(long, value_parser = parse_kind)]
    pub kind: InstanceKind,
    /// Matrix sizes, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
    /// Parameter pairs as CD:CB, comma separated
    #[arg(long, value_delimiter = ',', value_parser = parse_pair, required = true)]
    pub params: Vec<(f64, f64)>,
    /// Timed repetitions after the warm-up
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Time both transforms instead of only --transform
    #[arg(long)]
    pub all_transforms: bool,
    /// Also time the reference GEMM
    #[arg(long)]
    pub baseline: bool,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_transform(s: &str) -> Result<Transform, String> {
    s.parse().map_err(|e: sketchmul::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<InstanceKind, String> {
    s.parse().map_err(|e: sketchmul::Error| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: sketchmul::Error| e.to_string())
}

fn parse_entry(s: &str) -> Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or("expected I,J")?;
    Ok((i.trim().parse().map_err(|_| "bad row index")?, j.trim().parse().map_err(|_| "bad column index")?))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (d, b) = s.split_once(':').ok_or("expected CD:CB")?;
    Ok((d.trim().parse().map_err(|_| "bad c_d")?, b.trim().parse().map_err(|_| "bad c_b")?))
}

pub fn parse_bytes(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let (digits, scale) = match s.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some('K') => (&s[..s.len() - 1], 1u64 << 10),
        Some('M') => (&s[..s.len() - 1], 1 << 20),
        Some('G') => (&s[..s.len() - 1], 1 << 30),
        _ => (s, 1),
    };
    let v: u64 = digits.parse().map_err(|_| format!("bad byte count {s:?}"))?;
    v.checked_mul(scale).ok_or_else(|| format!("byte count {s:?} overflows"))
}
