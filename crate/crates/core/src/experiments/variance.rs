use serde::{Deserialize, Serialize};

use super::{stats, trial_seed};
use crate::error::{Error, Result};
use crate::hashing::Fnv1a;
use crate::reference::{frobenius_norm_sq, gemm_reference, DenseMatrix};
use crate::sketch::{compress_transposed, decompress_entry, SketchParams, Transform};

/// Independent single-sketch estimates of a few entries.
#[derive(Clone, Debug)]
pub struct EstimateSamples {
    /// `values[e][t]` is the estimate of entry `e` in trial `t`.
    pub values: Vec<Vec<f64>>,
    /// Digest over the hash functions of every trial.
    pub digest: u64,
}

/// Runs `trials` sketches of `AB` with width `b`, depth 1 and fresh hash
/// functions, recording the estimates of `entries`.
#[allow(clippy::too_many_arguments)]
pub fn sample_estimates(
    a: &DenseMatrix,
    b: &DenseMatrix,
    entries: &[(usize, usize)],
    width: usize,
    transform: Transform,
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<EstimateSamples> {
    if a.cols() != b.rows() {
        return Err(Error::param("inner dimensions differ"));
    }
    let at = a.transpose();
    let mut values = vec![Vec::with_capacity(trials); entries.len()];
    let mut digest = Fnv1a::default();
    for t in 0..trials {
        let params = SketchParams::new(a.cols(), width, 1, transform, trial_seed(seed, t as u64))?;
        let sketch = compress_transposed(&at, b, &params, threads)?;
        digest.write_u64(sketch.hashes().digest());
        for (v, &(i, j)) in values.iter_mut().zip(entries) {
            v.push(decompress_entry(&sketch, i, j)?);
        }
    }
    Ok(EstimateSamples { values, digest: digest.finish() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub b: usize,
    pub sample_var: f64,
    /// `‖AB‖²_F / b`.
    pub bound: f64,
    pub mean: f64,
    pub digest: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceResult {
    pub entry: (usize, usize),
    pub truth: f64,
    pub frobenius_sq: f64,
    pub trials: usize,
    pub transform: Transform,
    pub points: Vec<VariancePoint>,
}

/// Sample variance of the depth-1 estimate of `entry` for every width in
/// `widths`, next to the bound `‖AB‖²_F / b`.
#[allow(clippy::too_many_arguments)]
pub fn variance_experiment(
    a: &DenseMatrix,
    b: &DenseMatrix,
    entry: (usize, usize),
    widths: &[usize],
    trials: usize,
    transform: Transform,
    seed: u64,
    threads: usize,
) -> Result<VarianceResult> {
    if trials < 2 {
        return Err(Error::param(format!("variance needs at least 2 trials, got {trials}")));
    }
    if widths.is_empty() {
        return Err(Error::param("no sketch widths given"));
    }
    let c = gemm_reference(a, b, threads)?;
    if entry.0 >= c.rows() || entry.1 >= c.cols() {
        return Err(Error::param(format!("entry {entry:?} outside the product")));
    }
    let frobenius_sq = frobenius_norm_sq(&c);
    let mut points = Vec::with_capacity(widths.len());
    for &w in widths {
        let s = sample_estimates(a, b, &[entry], w, transform, trials, seed, threads)?;
        let v = &s.values[0];
        points.push(VariancePoint {
            b: w,
            sample_var: stats::sample_variance(v),
            bound: frobenius_sq / w as f64,
            mean: stats::mean(v),
            digest: s.digest,
        });
    }
    Ok(VarianceResult {
        entry,
        truth: c.get(entry.0, entry.1),
        frobenius_sq,
        trials,
        transform,
        points,
    })
}
