//! Flat result rows and their CSV / JSON emitters.
//!
//! Every row carries `root_seed`, `threads` and `build`, and hash digests are
//! written as 16 hex digits, so a run can be replayed from its output alone.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{CorrectnessConfig, CorrectnessRun, GridCell, GridConfig};
use super::scaling::{Method, TimingRecord};
use super::variance::VarianceResult;
use crate::error::{Error, Result};
use crate::instances::InstanceKind;
use crate::sketch::Transform;

/// Library version, used as the build label when nothing better is known.
pub const LIB_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunInfo {
    pub root_seed: u64,
    /// Resolved worker count.
    pub threads: usize,
    pub build: String,
}

impl RunInfo {
    pub fn new(root_seed: u64, threads: usize) -> Self {
        RunInfo { root_seed, threads: crate::parallel::resolve_threads(threads), build: LIB_VERSION.into() }
    }

    pub fn with_build(self, build: impl Into<String>) -> Self {
        RunInfo { build: build.into(), ..self }
    }
}

pub fn hex_digest(d: u64) -> String {
    format!("{d:016x}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::param(format!("unknown format {other:?} (expected csv or json)"))),
        }
    }
}

/// Writes `rows` as CSV with a header line, or as a pretty JSON array.
pub fn write_rows<T: Serialize, W: Write>(rows: &[T], format: OutputFormat, mut w: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut out = csv::Writer::from_writer(w);
            for r in rows {
                out.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
            }
            out.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub b: usize,
    pub sample_var: f64,
    pub bound: f64,
    pub mean: f64,
    pub truth: f64,
    pub i: usize,
    pub j: usize,
    pub trials: usize,
    pub transform: Transform,
    pub hash_digest: String,
    pub root_seed: u64,
    pub threads: usize,
    pub build: String,
}

pub fn variance_rows(r: &VarianceResult, info: &RunInfo) -> Vec<VarianceRow> {
    r.points
        .iter()
        .map(|p| VarianceRow {
            b: p.b,
            sample_var: p.sample_var,
            bound: p.bound,
            mean: p.mean,
            truth: r.truth,
            i: r.entry.0,
            j: r.entry.1,
            trials: r.trials,
            transform: r.transform,
            hash_digest: hex_digest(p.digest),
            root_seed: info.root_seed,
            threads: info.threads,
            build: info.build.clone(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessRow {
    pub kind: InstanceKind,
    pub n: usize,
    pub transform: Transform,
    pub c_d: f64,
    pub c_b: f64,
    pub d: usize,
    pub b: usize,
    pub matrix: usize,
    pub rep: usize,
    pub big: usize,
    pub small: usize,
    pub big_above_half: usize,
    pub small_below_half: usize,
    pub big_eps01: usize,
    pub small_eps01: usize,
    pub seconds: f64,
    pub instance_seed: u64,
    pub hash_seed: u64,
    pub hash_digest: String,
    pub root_seed: u64,
    pub threads: usize,
    pub build: String,
}

pub fn correctness_rows(cfg: &CorrectnessConfig, runs: &[CorrectnessRun], info: &RunInfo) -> Vec<CorrectnessRow> {
    runs.iter()
        .map(|r| CorrectnessRow {
            kind: cfg.kind,
            n: cfg.n,
            transform: cfg.transform,
            c_d: cfg.c_d,
            c_b: cfg.c_b,
            d: r.d,
            b: r.b,
            matrix: r.matrix,
            rep: r.rep,
            big: r.report.big,
            small: r.report.small,
            big_above_half: r.report.big_above_half,
            small_below_half: r.report.small_below_half,
            big_eps01: r.report.big_eps01,
            small_eps01: r.report.small_eps01,
            seconds: r.seconds,
            instance_seed: r.instance_seed,
            hash_seed: r.hash_seed,
            hash_digest: hex_digest(r.hash_digest),
            root_seed: info.root_seed,
            threads: info.threads,
            build: info.build.clone(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub kind: InstanceKind,
    pub n: usize,
    pub transform: Transform,
    pub c_d: f64,
    pub c_b: f64,
    pub d: usize,
    pub b: usize,
    pub category: super::ParameterCategory,
    pub runs: usize,
    pub pareto: bool,
    pub selected: bool,
    pub median_secs: Option<f64>,
    pub hash_digest: String,
    pub root_seed: u64,
    pub threads: usize,
    pub build: String,
}

pub fn grid_rows(cfg: &GridConfig, cells: &[GridCell], info: &RunInfo) -> Vec<GridRow> {
    cells
        .iter()
        .map(|c| GridRow {
            kind: cfg.kind,
            n: cfg.n,
            transform: cfg.transform,
            c_d: c.c_d,
            c_b: c.c_b,
            d: c.d,
            b: c.b,
            category: c.category,
            runs: c.runs,
            pareto: c.pareto,
            selected: c.selected,
            median_secs: c.median_secs,
            hash_digest: hex_digest(c.digest),
            root_seed: info.root_seed,
            threads: info.threads,
            build: info.build.clone(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub kind: InstanceKind,
    pub n: usize,
    pub method: Method,
    pub c_d: Option<f64>,
    pub c_b: Option<f64>,
    pub d: Option<usize>,
    pub b: Option<usize>,
    pub rep: usize,
    pub warmup: bool,
    pub seconds: f64,
    pub host: String,
    pub instance_seed: u64,
    pub hash_seed: Option<u64>,
    pub hash_digest: Option<String>,
    pub root_seed: u64,
    pub threads: usize,
    pub build: String,
}

pub fn timing_rows(records: &[TimingRecord], info: &RunInfo) -> Vec<TimingRow> {
    records
        .iter()
        .flat_map(|r| {
            r.seconds.iter().enumerate().map(move |(rep, &s)| TimingRow {
                kind: r.kind,
                n: r.n,
                method: r.method,
                c_d: r.c_d,
                c_b: r.c_b,
                d: r.d,
                b: r.b,
                rep,
                warmup: rep == 0,
                seconds: s,
                host: r.host.clone(),
                instance_seed: r.instance_seed,
                hash_seed: r.hash_seed,
                hash_digest: r.hash_digest.map(hex_digest),
                root_seed: info.root_seed,
                threads: info.threads,
                build: info.build.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::variance::VariancePoint;

    fn variance_result() -> VarianceResult {
        VarianceResult {
            entry: (1, 2),
            truth: 0.75,
            frobenius_sq: 64.0,
            trials: 10,
            transform: Transform::Fwht,
            points: vec![
                VariancePoint { b: 64, sample_var: 0.9, bound: 1.0, mean: 0.7, digest: 0xabc },
                VariancePoint { b: 128, sample_var: 0.4, bound: 0.5, mean: 0.8, digest: 0xdef },
            ],
        }
    }

    #[test]
    fn variance_csv_header_and_rows() {
        let info = RunInfo { root_seed: 5, threads: 2, build: "v1".into() };
        let rows = variance_rows(&variance_result(), &info);
        let mut buf = Vec::new();
        write_rows(&rows, OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("b,sample_var,bound,"));
        assert!(lines[0].ends_with("hash_digest,root_seed,threads,build"));
        assert!(lines[1].starts_with("64,0.9,1.0,"));
        assert!(lines[1].contains("0000000000000abc"));
    }

    #[test]
    fn json_round_trip() {
        let info = RunInfo { root_seed: u64::MAX, threads: 1, build: "x".into() };
        let rows = variance_rows(&variance_result(), &info);
        let mut buf = Vec::new();
        write_rows(&rows, OutputFormat::Json, &mut buf).unwrap();
        let back: Vec<VarianceRow> = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, rows);
        assert!(String::from_utf8(buf).unwrap().contains("18446744073709551615"));
    }

    #[test]
    fn format_parsing() {
        assert_eq!("CSV".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert!("xml".parse::<OutputFormat>().is_err());
    }
}
