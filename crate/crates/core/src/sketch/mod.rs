//! Compressed products: sketch construction and entry estimation.
//!
//! For each of `d` independent sketches, every outer product
//! `column_k(A) ⊗ row_k(B)` is hashed into two length-`b` polynomials
//! (`p_A[h1(i)] += s1(i)·A[i][k]`, `p_B[h2(j)] += s2(j)·B[k][j]`) whose
//! convolution is summed over `k`. Entry `(i, j)` of `AB` then sits, with
//! sign `s1(i)·s2(j)`, in coefficient `h1(i) ⊕ h2(j)` (Walsh-Hadamard) or
//! `h1(i) + h2(j) mod b` (FFT) of the result, together with whatever other
//! entries collided there. The estimate is the median over the `d` sketches.

mod compress;
mod container;
mod decompress;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{self, SketchHashes};

pub use compress::{compress, compress_transposed, estimate_footprint};
pub use container::{SKETCH_MAGIC, SKETCH_VERSION};
pub use decompress::{decompress_all, decompress_entry, median};

/// Convolution engine behind a sketch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Fft,
    Fwht,
}

impl Transform {
    pub const ALL: [Transform; 2] = [Transform::Fft, Transform::Fwht];

    pub fn as_str(self) -> &'static str {
        match self {
            Transform::Fft => "fft",
            Transform::Fwht => "fwht",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Transform::Fft => 0,
            Transform::Fwht => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Transform::Fft),
            1 => Some(Transform::Fwht),
            _ => None,
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fft" => Ok(Transform::Fft),
            "fwht" => Ok(Transform::Fwht),
            other => Err(Error::param(format!("unknown transform {other:?} (expected fft or fwht)"))),
        }
    }
}

/// Size and randomness of a product sketch.
///
/// `n` is the inner dimension of the product (the number of outer products);
/// for the square case it is the matrix size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchParams {
    pub n: usize,
    pub b: usize,
    pub d: usize,
    pub transform: Transform,
    pub seed: u64,
}

impl SketchParams {
    pub fn new(n: usize, b: usize, d: usize, transform: Transform, seed: u64) -> Result<Self> {
        let p = SketchParams { n, b, d, transform, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n must be at least 1"));
        }
        hashing::shift_for_buckets(self.b as u64)?;
        if self.d.is_multiple_of(2) {
            return Err(Error::param(format!("d must be a positive odd number, got {}", self.d)));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SketchParams { seed, ..self }
    }
}

/// Odd sketch count for constant `c_d`: `2·⌊c_d·log₂n / 2⌋ + 1`.
pub fn depth_for(n: usize, c_d: f64) -> usize {
    let log_n = n.trailing_zeros() as f64;
    2 * (c_d * log_n / 2.0).floor() as usize + 1
}

/// Parameters from the constants `c_d, c_b > 0`: `d = 2·⌊c_d·log₂n / 2⌋ + 1`
/// and `b = c_b·n`.
pub fn derive_params(
    n: usize,
    c_d: f64,
    c_b: f64,
    transform: Transform,
    seed: u64,
) -> Result<SketchParams> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::param(format!("n must be a power of two, got {n}")));
    }
    if !(c_d > 0.0 && c_d.is_finite()) || !(c_b > 0.0 && c_b.is_finite()) {
        return Err(Error::param(format!("c_d and c_b must be positive, got {c_d}, {c_b}")));
    }
    let width = c_b * n as f64;
    if width.fract() != 0.0 || width < 2.0 || width > hashing::MAX_BUCKETS as f64 {
        return Err(Error::param(format!("c_b·n = {width} is not an admissible sketch width")));
    }
    let b = width as usize;
    if !b.is_power_of_two() {
        return Err(Error::param(format!("c_b·n = {b} is not a power of two")));
    }
    SketchParams::new(n, b, depth_for(n, c_d), transform, seed)
}

/// `d` polynomials of length `b` plus the hash functions that built them.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSketch {
    params: SketchParams,
    rows: usize,
    cols: usize,
    hashes: SketchHashes,
    polys: Vec<f64>,
}

impl ProductSketch {
    pub(crate) fn from_parts(
        params: SketchParams,
        rows: usize,
        cols: usize,
        hashes: SketchHashes,
        polys: Vec<f64>,
    ) -> Result<Self> {
        params.validate()?;
        if hashes.depth() != params.d
            || hashes.s1.len() != params.d
            || hashes.s2.len() != params.d
            || hashes.h2.len() != params.d
        {
            return Err(Error::param("hash count does not match d"));
        }
        if polys.len() != params.d * params.b {
            return Err(Error::param("polynomial storage does not match d·b"));
        }
        Ok(ProductSketch { params, rows, cols, hashes, polys })
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    /// Rows of the estimated product.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Columns of the estimated product.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn hashes(&self) -> &SketchHashes {
        &self.hashes
    }

    /// Coefficients of sketch `t`.
    pub fn poly(&self, t: usize) -> &[f64] {
        let b = self.params.b;
        &self.polys[t * b..(t + 1) * b]
    }

    pub fn polys(&self) -> &[f64] {
        &self.polys
    }

    /// Coefficient index holding entry `(i, j)` in sketch `t`.
    #[inline]
    pub fn index(&self, t: usize, i: usize, j: usize) -> usize {
        let hi = self.hashes.h1[t].bucket(i as u32) as usize;
        let hj = self.hashes.h2[t].bucket(j as u32) as usize;
        combine(self.params.transform, hi, hj, self.params.b)
    }
}

#[inline]
pub(crate) fn combine(transform: Transform, hi: usize, hj: usize, b: usize) -> usize {
    match transform {
        Transform::Fwht => hi ^ hj,
        Transform::Fft => (hi + hj) & (b - 1),
    }
}
