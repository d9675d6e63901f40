use std::ops::{AddAssign, Range};
use std::sync::{Condvar, Mutex};

use num_complex::Complex64;

use super::{ProductSketch, SketchParams, Transform};
use crate::error::{Error, Result};
use crate::hashing::{HashTable, SketchHashes};
use crate::parallel;
use crate::reference::DenseMatrix;
use crate::transforms::{fwht_unchecked, RealFft};

/// Sketches `A·B`. `a` is row-major and is transposed once internally.
///
/// `threads = 0` uses every available core. Results are bit-identical for a
/// fixed `(a, b, params, threads)`.
pub fn compress(
    a: &DenseMatrix,
    b: &DenseMatrix,
    params: &SketchParams,
    threads: usize,
) -> Result<ProductSketch> {
    if a.cols() != b.rows() {
        return Err(Error::param(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    compress_transposed(&a.transpose(), b, params, threads)
}

/// Sketches `A·B` given `Aᵀ` directly (row `k` of `at` is column `k` of `A`).
pub fn compress_transposed(
    at: &DenseMatrix,
    b: &DenseMatrix,
    params: &SketchParams,
    threads: usize,
) -> Result<ProductSketch> {
    params.validate()?;
    let inner = at.rows();
    if inner != b.rows() {
        return Err(Error::param(format!(
            "inner dimensions differ: Aᵀ has {} rows, B has {}",
            inner,
            b.rows()
        )));
    }
    if inner != params.n {
        return Err(Error::param(format!(
            "sketch parameters are for n = {}, operands have inner dimension {inner}",
            params.n
        )));
    }
    let (rows, cols) = (at.cols(), b.cols());
    if rows as u64 > u64::from(u32::MAX) + 1 || cols as u64 > u64::from(u32::MAX) + 1 {
        return Err(Error::param("matrix dimensions exceed 32-bit hash keys"));
    }

    let hashes = SketchHashes::draw(params.seed, params.d, params.b as u64)?;
    let row_tables: Vec<HashTable> = (0..params.d)
        .map(|t| HashTable::build(&hashes.h1[t], &hashes.s1[t], rows))
        .collect();
    let col_tables: Vec<HashTable> = (0..params.d)
        .map(|t| HashTable::build(&hashes.h2[t], &hashes.s2[t], cols))
        .collect();
    let threads = parallel::resolve_threads(threads).min(inner.max(1));

    let job = Job { at, b, params, row_tables: &row_tables, col_tables: &col_tables };
    let polys = match params.transform {
        Transform::Fwht => job.run_fwht(threads),
        Transform::Fft => job.run_fft(threads)?,
    };
    ProductSketch::from_parts(*params, rows, cols, hashes, polys)
}

/// Bytes needed to sketch an `rows×inner` by `inner×cols` product: the two
/// operands, the transposed copy of `A`, the dense estimate, the output
/// polynomials and per-thread scratch.
pub fn estimate_footprint(
    rows: usize,
    inner: usize,
    cols: usize,
    params: &SketchParams,
    threads: usize,
) -> u64 {
    let words = |x: usize| x as u64 * 8;
    let matrices = words(rows * inner) * 2 + words(inner * cols) + words(rows * cols);
    let (d, b) = (params.d, params.b);
    let per_thread = match params.transform {
        // p_A (d×b), p_B (b), local accumulator (d×b)
        Transform::Fwht => words(2 * d * b + b),
        // spectra are complex and b/2+1 long; one real scratch row
        Transform::Fft => words(2 * 2 * d * (b / 2 + 1) + 2 * (b / 2 + 1) + b),
    };
    let hash_tables = (rows + cols) as u64 * d as u64 * 12;
    matrices + words(d * b) + hash_tables + per_thread * parallel::resolve_threads(threads) as u64
}

struct Job<'a> {
    at: &'a DenseMatrix,
    b: &'a DenseMatrix,
    params: &'a SketchParams,
    row_tables: &'a [HashTable],
    col_tables: &'a [HashTable],
}

#[inline]
fn scatter(out: &mut [f64], values: &[f64], table: &HashTable) {
    out.fill(0.0);
    for ((&v, &h), &s) in values.iter().zip(&table.buckets).zip(&table.signs) {
        out[h as usize] += s * v;
    }
}

impl Job<'_> {
    fn run_fwht(&self, threads: usize) -> Vec<f64> {
        let (d, b) = (self.params.d, self.params.b);
        let acc = OrderedRows::new(d, b, 0.0f64);
        parallel::map_chunks(self.params.n, threads, |worker, range: Range<usize>| {
            let mut pa = vec![0.0; d * b];
            let mut pb = vec![0.0; b];
            let mut local = vec![0.0; d * b];
            for k in range {
                let (arow, brow) = (self.at.row(k), self.b.row(k));
                for (t, p) in pa.chunks_exact_mut(b).enumerate() {
                    scatter(p, arow, &self.row_tables[t]);
                    fwht_unchecked(p);
                }
                for (t, (lt, p)) in local.chunks_exact_mut(b).zip(pa.chunks_exact(b)).enumerate() {
                    scatter(&mut pb, brow, &self.col_tables[t]);
                    fwht_unchecked(&mut pb);
                    for ((acc, &x), &y) in lt.iter_mut().zip(p).zip(&pb) {
                        *acc += x * y;
                    }
                }
            }
            acc.merge(worker, &local);
        });

        let mut polys = acc.into_inner();
        let scale = 1.0 / b as f64;
        parallel::for_each_row_mut(&mut polys, b, threads, |_, row| {
            fwht_unchecked(row);
            row.iter_mut().for_each(|v| *v *= scale);
        });
        polys
    }

    fn run_fft(&self, threads: usize) -> Result<Vec<f64>> {
        let (d, b) = (self.params.d, self.params.b);
        let plan = RealFft::new(b)?;
        let bins = plan.bins();
        let zero = Complex64::default();
        let acc = OrderedRows::new(d, bins, zero);
        parallel::map_chunks(self.params.n, threads, |worker, range: Range<usize>| {
            let mut real = vec![0.0; b];
            let mut pa = vec![zero; d * bins];
            let mut pb = vec![zero; bins];
            let mut local = vec![zero; d * bins];
            for k in range {
                let (arow, brow) = (self.at.row(k), self.b.row(k));
                for (t, spec) in pa.chunks_exact_mut(bins).enumerate() {
                    scatter(&mut real, arow, &self.row_tables[t]);
                    plan.forward_into(&real, spec);
                }
                for (t, (lt, spec)) in
                    local.chunks_exact_mut(bins).zip(pa.chunks_exact(bins)).enumerate()
                {
                    scatter(&mut real, brow, &self.col_tables[t]);
                    plan.forward_into(&real, &mut pb);
                    for ((acc, &x), &y) in lt.iter_mut().zip(spec).zip(&pb) {
                        *acc += x * y;
                    }
                }
            }
            acc.merge(worker, &local);
        });

        let mut spectra = acc.into_inner();
        let mut polys = vec![0.0; d * b];
        let mut pairs: Vec<(&mut [Complex64], &mut [f64])> =
            spectra.chunks_exact_mut(bins).zip(polys.chunks_exact_mut(b)).collect();
        let chunks = parallel::split_range(d, threads);
        if chunks.len() == 1 {
            for (spec, out) in &mut pairs {
                plan.inverse_into(spec, out);
            }
        } else {
            std::thread::scope(|s| {
                let mut rest = pairs.as_mut_slice();
                for r in chunks {
                    let (head, tail) = rest.split_at_mut(r.len());
                    rest = tail;
                    let plan = &plan;
                    s.spawn(move || {
                        for (spec, out) in head.iter_mut() {
                            plan.inverse_into(spec, out);
                        }
                    });
                }
            });
        }
        Ok(polys)
    }
}

/// The `d` shared accumulator rows. Row `t` is guarded by its own lock, and
/// workers add into it in worker order so the floating-point sum does not
/// depend on scheduling.
struct OrderedRows<T> {
    width: usize,
    rows: Vec<(Mutex<RowState<T>>, Condvar)>,
}

struct RowState<T> {
    next_worker: usize,
    data: Vec<T>,
}

impl<T: Copy + AddAssign + Send> OrderedRows<T> {
    fn new(d: usize, width: usize, zero: T) -> Self {
        let rows = (0..d)
            .map(|_| (Mutex::new(RowState { next_worker: 0, data: vec![zero; width] }), Condvar::new()))
            .collect();
        OrderedRows { width, rows }
    }

    /// Adds `local` (d rows of `width`) into the shared rows on behalf of `worker`.
    fn merge(&self, worker: usize, local: &[T]) {
        for ((lock, turn), part) in self.rows.iter().zip(local.chunks_exact(self.width)) {
            let mut row = lock.lock().expect("accumulator lock poisoned");
            while row.next_worker != worker {
                row = turn.wait(row).expect("accumulator lock poisoned");
            }
            for (acc, &v) in row.data.iter_mut().zip(part) {
                *acc += v;
            }
            row.next_worker += 1;
            drop(row);
            turn.notify_all();
        }
    }

    fn into_inner(self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.rows.len() * self.width);
        for (lock, _) in self.rows {
            out.extend(lock.into_inner().expect("accumulator lock poisoned").data);
        }
        out
    }
}
