use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::correctness::{categorize, correctness_metrics, fail_is_certain, CorrectnessReport, ParameterCategory};
use super::{instance_seed, stats, trial_seed};
use crate::error::{Error, Result};
use crate::hashing::Fnv1a;
use crate::instances::{generate, Instance, InstanceKind, DEFAULT_RHO};
use crate::reference::DenseMatrix;
use crate::sketch::{compress, decompress_all, derive_params, SketchParams, Transform};

pub const DEFAULT_C_D_GRID: [f64; 16] = [
    0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0, 3.25, 3.5, 3.75, 4.0,
];
pub const DEFAULT_C_B_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// One timed compress + decompress-all of `AB`.
pub struct SketchRun {
    pub estimate: DenseMatrix,
    pub seconds: f64,
    pub digest: u64,
}

pub fn timed_sketch(a: &DenseMatrix, b: &DenseMatrix, params: &SketchParams, threads: usize) -> Result<SketchRun> {
    let start = Instant::now();
    let sketch = compress(a, b, params, threads)?;
    let estimate = decompress_all(&sketch, threads);
    let seconds = start.elapsed().as_secs_f64();
    Ok(SketchRun { estimate, seconds, digest: sketch.hashes().digest() })
}

/// Sketches `instance` with `params` and scores the estimate against `truth`.
pub fn evaluate(
    instance: &Instance,
    truth: &DenseMatrix,
    params: &SketchParams,
    threads: usize,
) -> Result<(CorrectnessReport, SketchRun)> {
    let run = timed_sketch(&instance.a, &instance.b, params, threads)?;
    let report = correctness_metrics(&run.estimate, truth, &instance.big_positions())?;
    Ok((report, run))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessConfig {
    pub kind: InstanceKind,
    pub n: usize,
    pub rho: f64,
    pub c_d: f64,
    pub c_b: f64,
    pub transform: Transform,
    /// Distinct instances.
    pub matrices: usize,
    /// Fresh hash functions per instance.
    pub hash_reps: usize,
    pub seed: u64,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessRun {
    pub matrix: usize,
    pub rep: usize,
    pub instance_seed: u64,
    pub hash_seed: u64,
    pub hash_digest: u64,
    pub d: usize,
    pub b: usize,
    pub seconds: f64,
    pub report: CorrectnessReport,
}

/// Accuracy counts for `matrices × hash_reps` runs at fixed `(c_d, c_b)`.
pub fn correctness_experiment(cfg: &CorrectnessConfig) -> Result<Vec<CorrectnessRun>> {
    if cfg.matrices == 0 || cfg.hash_reps == 0 {
        return Err(Error::param("need at least one matrix and one repetition"));
    }
    let params = derive_params(cfg.n, cfg.c_d, cfg.c_b, cfg.transform, 0)?;
    let mut out = Vec::with_capacity(cfg.matrices * cfg.hash_reps);
    for m in 0..cfg.matrices {
        let iseed = instance_seed(cfg.seed, m as u64);
        let inst = generate(cfg.kind, cfg.n, cfg.rho, iseed)?;
        let truth = inst.truth(cfg.threads)?;
        for r in 0..cfg.hash_reps {
            let hseed = trial_seed(cfg.seed, (m * cfg.hash_reps + r) as u64);
            let (report, run) = evaluate(&inst, &truth, &params.with_seed(hseed), cfg.threads)?;
            out.push(CorrectnessRun {
                matrix: m,
                rep: r,
                instance_seed: iseed,
                hash_seed: hseed,
                hash_digest: run.digest,
                d: params.d,
                b: params.b,
                seconds: run.seconds,
                report,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub kind: InstanceKind,
    pub n: usize,
    pub rho: f64,
    pub c_d_grid: Vec<f64>,
    pub c_b_grid: Vec<f64>,
    pub repetitions: usize,
    pub transform: Transform,
    pub seed: u64,
    pub threads: usize,
    /// Timed repetitions after the warm-up in the confirmation phase.
    pub confirm_reps: usize,
}

impl GridConfig {
    pub fn new(kind: InstanceKind, n: usize, transform: Transform, seed: u64) -> Self {
        GridConfig {
            kind,
            n,
            rho: DEFAULT_RHO,
            c_d_grid: DEFAULT_C_D_GRID.to_vec(),
            c_b_grid: DEFAULT_C_B_GRID.to_vec(),
            repetitions: 100,
            transform,
            seed,
            threads: 0,
            confirm_reps: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub c_d: f64,
    pub c_b: f64,
    pub d: usize,
    pub b: usize,
    pub category: ParameterCategory,
    /// Runs evaluated; fewer than requested when Fail was settled early.
    pub runs: usize,
    pub digest: u64,
    pub pareto: bool,
    /// Median confirmation time, for Pareto-optimal cells.
    pub median_secs: Option<f64>,
    pub selected: bool,
}

/// `x` dominates `y`: no larger in both constants, smaller in one.
pub fn dominates(x: (f64, f64), y: (f64, f64)) -> bool {
    x.0 <= y.0 && x.1 <= y.1 && (x.0 < y.0 || x.1 < y.1)
}

/// Marks cells not dominated by another cell of the same category. Fail cells
/// are never marked.
pub fn mark_pareto(cells: &mut [GridCell]) {
    let keys: Vec<(ParameterCategory, (f64, f64))> = cells.iter().map(|c| (c.category, (c.c_d, c.c_b))).collect();
    for (cell, &(cat, here)) in cells.iter_mut().zip(&keys) {
        cell.pareto = cat != ParameterCategory::Fail
            && !keys.iter().any(|&(other_cat, other)| other_cat == cat && dominates(other, here));
    }
}

/// Categorizes every `(c_d, c_b)` pair on one instance with fresh hash
/// functions per repetition, keeps the Pareto-optimal pairs per category and
/// selects the fastest of them by median confirmation time.
pub fn grid_search(cfg: &GridConfig) -> Result<Vec<GridCell>> {
    if cfg.c_d_grid.is_empty() || cfg.c_b_grid.is_empty() {
        return Err(Error::param("parameter grids must be nonempty"));
    }
    if cfg.repetitions == 0 {
        return Err(Error::param("need at least one repetition"));
    }
    let mut pairs = Vec::new();
    for &c_d in &cfg.c_d_grid {
        for &c_b in &cfg.c_b_grid {
            pairs.push((c_d, c_b, derive_params(cfg.n, c_d, c_b, cfg.transform, 0)?));
        }
    }
    let inst = generate(cfg.kind, cfg.n, cfg.rho, instance_seed(cfg.seed, 0))?;
    let truth = inst.truth(cfg.threads)?;

    let mut cells = Vec::with_capacity(pairs.len());
    for (c_d, c_b, params) in pairs {
        let mut reports = Vec::with_capacity(cfg.repetitions);
        let mut digest = Fnv1a::default();
        for r in 0..cfg.repetitions {
            let p = params.with_seed(trial_seed(cfg.seed, r as u64));
            let (report, run) = evaluate(&inst, &truth, &p, cfg.threads)?;
            reports.push(report);
            digest.write_u64(run.digest);
            if fail_is_certain(&reports, cfg.repetitions) {
                break;
            }
        }
        let category = if reports.len() < cfg.repetitions {
            ParameterCategory::Fail
        } else {
            categorize(&reports)?
        };
        cells.push(GridCell {
            c_d,
            c_b,
            d: params.d,
            b: params.b,
            category,
            runs: reports.len(),
            digest: digest.finish(),
            pareto: false,
            median_secs: None,
            selected: false,
        });
    }

    mark_pareto(&mut cells);
    for cell in cells.iter_mut().filter(|c| c.pareto) {
        let params = derive_params(cfg.n, cell.c_d, cell.c_b, cfg.transform, trial_seed(cfg.seed, 0))?;
        let times = (0..=cfg.confirm_reps)
            .map(|_| timed_sketch(&inst.a, &inst.b, &params, cfg.threads).map(|r| r.seconds))
            .collect::<Result<Vec<f64>>>()?;
        let measured = if times.len() > 1 { &times[1..] } else { &times[..] };
        cell.median_secs = Some(stats::median_of(measured));
    }
    for cat in ParameterCategory::ALL {
        let best = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.pareto && c.category == cat)
            .min_by(|(_, x), (_, y)| x.median_secs.unwrap().total_cmp(&y.median_secs.unwrap()))
            .map(|(k, _)| k);
        if let Some(k) = best {
            cells[k].selected = true;
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(c_d: f64, c_b: f64, category: ParameterCategory) -> GridCell {
        GridCell {
            c_d,
            c_b,
            d: 1,
            b: 2,
            category,
            runs: 1,
            digest: 0,
            pareto: false,
            median_secs: None,
            selected: false,
        }
    }

    #[test]
    fn pareto_within_category() {
        use ParameterCategory::*;
        let mut cells = vec![
            cell(1.0, 1.0, Good),
            cell(2.0, 1.0, Good),
            cell(0.5, 2.0, Good),
            cell(0.5, 0.5, Fail),
            cell(0.25, 4.0, Perfect),
            cell(2.0, 4.0, Perfect),
        ];
        mark_pareto(&mut cells);
        let flags: Vec<bool> = cells.iter().map(|c| c.pareto).collect();
        assert_eq!(flags, [true, false, true, false, true, false]);
        assert!(dominates((1.0, 1.0), (1.0, 2.0)));
        assert!(!dominates((1.0, 1.0), (1.0, 1.0)));
    }

    #[test]
    fn single_pair_grid_is_selected() {
        let mut cfg = GridConfig::new(InstanceKind::Logunit, 64, Transform::Fwht, 4);
        cfg.c_d_grid = vec![2.0];
        cfg.c_b_grid = vec![1.0];
        cfg.repetitions = 5;
        cfg.confirm_reps = 1;
        cfg.threads = 1;
        let cells = grid_search(&cfg).unwrap();
        assert_eq!(cells.len(), 1);
        assert_ne!(cells[0].category, ParameterCategory::Fail);
        assert!(cells[0].selected && cells[0].pareto);
        assert!(cells[0].median_secs.unwrap() >= 0.0);
    }

    #[test]
    fn grid_rejects_bad_widths() {
        let mut cfg = GridConfig::new(InstanceKind::Logunit, 64, Transform::Fft, 0);
        cfg.c_b_grid = vec![0.3];
        assert!(grid_search(&cfg).is_err());
        cfg.c_b_grid = vec![];
        assert!(grid_search(&cfg).is_err());
    }

    #[test]
    fn correctness_rows() {
        let cfg = CorrectnessConfig {
            kind: InstanceKind::Diagonal,
            n: 32,
            rho: DEFAULT_RHO,
            c_d: 2.0,
            c_b: 4.0,
            transform: Transform::Fft,
            matrices: 2,
            hash_reps: 3,
            seed: 8,
            threads: 1,
        };
        let rows = correctness_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert_eq!(r.report.big + r.report.small, 32 * 32);
            assert_eq!(r.report.big, 32);
        }
        assert_ne!(rows[0].instance_seed, rows[3].instance_seed);
        assert_ne!(rows[0].hash_seed, rows[1].hash_seed);
    }
}
