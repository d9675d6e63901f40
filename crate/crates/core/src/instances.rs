//! Synthetic benchmark instances with a known product structure.
//!
//! | kind       | big entries | value          | product nonzeros |
//! |------------|-------------|----------------|------------------|
//! | Logunit    | log₂ n      | 1              | n                |
//! | Diagonal   | n           | 0.5 ≤ |c| < 1  | n                |
//! | Covariance | 1           | ≈ ρ            | n²               |
//! | Lightbulb  | 1           | (n − 2·flips)/n | n²              |

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reference::{gemm_reference, lu_inverse, DenseMatrix};
use crate::rng::{self, SeededRng};

/// Default correlation of the planted pair.
pub const DEFAULT_RHO: f64 = 0.8;

/// Redraws allowed when a random operand turns out singular.
pub const MAX_REDRAWS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Logunit,
    Diagonal,
    Covariance,
    Lightbulb,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 4] =
        [InstanceKind::Logunit, InstanceKind::Diagonal, InstanceKind::Covariance, InstanceKind::Lightbulb];

    pub fn as_str(self) -> &'static str {
        match self {
            InstanceKind::Logunit => "logunit",
            InstanceKind::Diagonal => "diagonal",
            InstanceKind::Covariance => "covariance",
            InstanceKind::Lightbulb => "lightbulb",
        }
    }

    pub fn uses_rho(self) -> bool {
        matches!(self, InstanceKind::Covariance | InstanceKind::Lightbulb)
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InstanceKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown instance kind {s:?}")))
    }
}

/// A product entry and its (exact or approximate) true value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BigEntry {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub kind: InstanceKind,
    pub n: usize,
    pub rho: Option<f64>,
    pub seed: u64,
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub big_entries: Vec<BigEntry>,
    /// Every structural nonzero of the product, for the sparse kinds.
    pub exact_nonzeros: Option<Vec<BigEntry>>,
}

/// JSON sidecar written next to the operand files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub kind: InstanceKind,
    pub n: usize,
    pub rho: Option<f64>,
    pub seed: u64,
    pub big_entries: Vec<BigEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_nonzeros: Option<Vec<BigEntry>>,
}

fn require_pow2(n: usize, min: usize, kind: InstanceKind) -> Result<()> {
    if n < min || !n.is_power_of_two() {
        return Err(Error::param(format!("{kind} needs n a power of two >= {min}, got {n}")));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::param(format!("rho must lie in [0, 1], got {rho}")));
    }
    Ok(())
}

fn uniform_matrix(rng: &mut SeededRng, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
}

/// Draws a U(−1, 1) matrix together with its inverse, redrawing on singularity.
fn invertible_uniform(rng: &mut SeededRng, n: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    for _ in 0..MAX_REDRAWS {
        let m = uniform_matrix(rng, n);
        match lu_inverse(&m) {
            Ok(inv) => return Ok((m, inv)),
            Err(Error::SingularMatrix) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SingularMatrix)
}

fn permutation(rng: &mut SeededRng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// `C = D₁D₂P` with `log₂ n` unit entries and `n − log₂ n` entries of `10⁻⁴`,
/// one per row and column. `A = D₁Ã`, `B = Ã⁻¹D₂P`.
pub fn gen_logunit(n: usize, seed: u64) -> Result<Instance> {
    require_pow2(n, 4, InstanceKind::Logunit)?;
    let mut rng = rng::seeded(seed);
    let log_n = n.trailing_zeros() as usize;
    let (big1, big2) = (log_n / 2, log_n - log_n / 2);
    let slots = permutation(&mut rng, n);
    let mut d1 = vec![0.01; n];
    let mut d2 = vec![0.01; n];
    slots[..big1].iter().for_each(|&i| d1[i] = 100.0);
    slots[big1..big1 + big2].iter().for_each(|&i| d2[i] = 100.0);
    let perm = permutation(&mut rng, n);
    let (base, inv) = invertible_uniform(&mut rng, n)?;

    let a = DenseMatrix::from_fn(n, n, |i, k| d1[i] * base.get(i, k));
    let mut b = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for (l, &dl) in d2.iter().enumerate() {
            b.set(i, perm[l], inv.get(i, l) * dl);
        }
    }
    let nonzeros: Vec<BigEntry> =
        (0..n).map(|i| BigEntry { i, j: perm[i], value: d1[i] * d2[i] }).collect();
    let mut big_entries: Vec<BigEntry> =
        slots[..big1 + big2].iter().map(|&i| nonzeros[i]).collect();
    big_entries.sort_by_key(|e| (e.i, e.j));
    Ok(Instance {
        kind: InstanceKind::Logunit,
        n,
        rho: None,
        seed,
        a,
        b,
        big_entries,
        exact_nonzeros: Some(nonzeros),
    })
}

/// `C = PD` with diagonal entries uniform on `[−1, −0.5) ∪ [0.5, 1)`.
/// `A ~ U(−1, 1)`, `B = A⁻¹PD`.
pub fn gen_diagonal(n: usize, seed: u64) -> Result<Instance> {
    require_pow2(n, 1, InstanceKind::Diagonal)?;
    let mut rng = rng::seeded(seed);
    let diag: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(0.5..1.0);
            if rng.random::<bool>() {
                u
            } else {
                u - 1.5
            }
        })
        .collect();
    let perm = permutation(&mut rng, n);
    let (a, inv) = invertible_uniform(&mut rng, n)?;
    let mut b = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for (l, &pl) in perm.iter().enumerate() {
            b.set(i, pl, inv.get(i, l) * diag[pl]);
        }
    }
    let big_entries: Vec<BigEntry> =
        (0..n).map(|l| BigEntry { i: l, j: perm[l], value: diag[perm[l]] }).collect();
    Ok(Instance {
        kind: InstanceKind::Diagonal,
        n,
        rho: None,
        seed,
        a,
        b,
        exact_nonzeros: Some(big_entries.clone()),
        big_entries,
    })
}

/// Gaussian operands (variance `1/n`) with column `j*` of `B` replaced by
/// `ρ·a_{i*} + √(1−ρ²)·b̃_{j*}`, so that `c_{i*j*} ≈ ρ`.
pub fn gen_covariance(n: usize, rho: f64, seed: u64) -> Result<Instance> {
    require_pow2(n, 2, InstanceKind::Covariance)?;
    check_rho(rho)?;
    let mut rng = rng::seeded(seed);
    let normal = Normal::new(0.0, 1.0 / (n as f64).sqrt()).expect("valid normal");
    let a = DenseMatrix::from_fn(n, n, |_, _| normal.sample(&mut rng));
    let mut b = DenseMatrix::from_fn(n, n, |_, _| normal.sample(&mut rng));
    let i_star = rng.random_range(0..n);
    let j_star = rng.random_range(0..n);
    let mix = (1.0 - rho * rho).sqrt();
    for k in 0..n {
        let v = rho * a.get(i_star, k) + mix * b.get(k, j_star);
        b.set(k, j_star, v);
    }
    let value = planted_value(&a, &b, i_star, j_star);
    Ok(Instance {
        kind: InstanceKind::Covariance,
        n,
        rho: Some(rho),
        seed,
        a,
        b,
        big_entries: vec![BigEntry { i: i_star, j: j_star, value }],
        exact_nonzeros: None,
    })
}

/// Number of sign flips giving inner product ρ between planted ±1 vectors.
pub fn lightbulb_flips(n: usize, rho: f64) -> usize {
    (n as f64 * (1.0 - rho) / 2.0).round() as usize
}

/// Uniform `±1/√n` operands; column `j*` of `B` copies row `i*` of `A` with
/// `round(n(1−ρ)/2)` sign flips, so `c_{i*j*} = (n − 2·flips)/n`.
pub fn gen_lightbulb(n: usize, rho: f64, seed: u64) -> Result<Instance> {
    require_pow2(n, 16, InstanceKind::Lightbulb)?;
    check_rho(rho)?;
    let mut rng = rng::seeded(seed);
    let unit = 1.0 / (n as f64).sqrt();
    let sign = |rng: &mut SeededRng| if rng.random::<bool>() { unit } else { -unit };
    let a = DenseMatrix::from_fn(n, n, |_, _| sign(&mut rng));
    let mut b = DenseMatrix::from_fn(n, n, |_, _| sign(&mut rng));
    let i_star = rng.random_range(0..n);
    let j_star = rng.random_range(0..n);
    let flips = lightbulb_flips(n, rho);
    let flip_at = rand::seq::index::sample(&mut rng, n, flips);
    for k in 0..n {
        b.set(k, j_star, a.get(i_star, k));
    }
    for k in flip_at.iter() {
        b.set(k, j_star, -b.get(k, j_star));
    }
    let value = (n - 2 * flips) as f64 / n as f64;
    Ok(Instance {
        kind: InstanceKind::Lightbulb,
        n,
        rho: Some(rho),
        seed,
        a,
        b,
        big_entries: vec![BigEntry { i: i_star, j: j_star, value }],
        exact_nonzeros: None,
    })
}

fn planted_value(a: &DenseMatrix, b: &DenseMatrix, i: usize, j: usize) -> f64 {
    (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum()
}

/// Generates an instance of `kind`; `rho` is ignored by the sparse kinds.
pub fn generate(kind: InstanceKind, n: usize, rho: f64, seed: u64) -> Result<Instance> {
    match kind {
        InstanceKind::Logunit => gen_logunit(n, seed),
        InstanceKind::Diagonal => gen_diagonal(n, seed),
        InstanceKind::Covariance => gen_covariance(n, rho, seed),
        InstanceKind::Lightbulb => gen_lightbulb(n, rho, seed),
    }
}

impl Instance {
    pub fn meta(&self) -> InstanceMeta {
        InstanceMeta {
            kind: self.kind,
            n: self.n,
            rho: self.rho,
            seed: self.seed,
            big_entries: self.big_entries.clone(),
            exact_nonzeros: self.exact_nonzeros.clone(),
        }
    }

    pub fn big_positions(&self) -> Vec<(usize, usize)> {
        self.big_entries.iter().map(|e| (e.i, e.j)).collect()
    }

    /// The product `AB`, assembled from the known structure for the sparse
    /// kinds and computed by reference GEMM otherwise.
    pub fn truth(&self, threads: usize) -> Result<DenseMatrix> {
        match &self.exact_nonzeros {
            Some(nz) => {
                let mut c = DenseMatrix::zeros(self.n, self.n);
                nz.iter().for_each(|e| c.set(e.i, e.j, e.value));
                Ok(c)
            }
            None => gemm_reference(&self.a, &self.b, threads),
        }
    }

    /// Big-entry positions as a dense mask.
    pub fn big_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n * self.n];
        for e in &self.big_entries {
            mask[e.i * self.n + e.j] = true;
        }
        mask
    }

    /// File paths used by [`Instance::save`] for `prefix`.
    pub fn paths(prefix: &Path) -> (PathBuf, PathBuf, PathBuf) {
        let with = |suffix: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        (with(".a.mat"), with(".b.mat"), with(".json"))
    }

    pub fn save(&self, prefix: &Path) -> Result<()> {
        let (pa, pb, pj) = Self::paths(prefix);
        self.a.save(&pa)?;
        self.b.save(&pb)?;
        fs::write(pj, serde_json::to_string_pretty(&self.meta())?)?;
        Ok(())
    }

    pub fn load(prefix: &Path) -> Result<Self> {
        let (pa, pb, pj) = Self::paths(prefix);
        let meta: InstanceMeta = serde_json::from_str(&fs::read_to_string(pj)?)?;
        let a = DenseMatrix::load(&pa)?;
        let b = DenseMatrix::load(&pb)?;
        if a.rows() != meta.n || a.cols() != meta.n || b.rows() != meta.n || b.cols() != meta.n {
            return Err(Error::Format(format!("operands do not match sidecar n = {}", meta.n)));
        }
        Ok(Instance {
            kind: meta.kind,
            n: meta.n,
            rho: meta.rho,
            seed: meta.seed,
            a,
            b,
            big_entries: meta.big_entries,
            exact_nonzeros: meta.exact_nonzeros,
        })
    }
}
