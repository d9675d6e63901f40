use super::{combine, ProductSketch};
use crate::error::{Error, Result};
use crate::hashing::HashTable;
use crate::parallel;
use crate::reference::DenseMatrix;

/// Median of an odd-length slice, reordering it in place.
pub fn median(values: &mut [f64]) -> f64 {
    debug_assert!(values.len() % 2 == 1);
    let mid = values.len() / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

/// Estimate of entry `(i, j)`: the median over sketches of
/// `s1(i)·s2(j)·p[t][idx(i, j)]`.
pub fn decompress_entry(sketch: &ProductSketch, i: usize, j: usize) -> Result<f64> {
    if i >= sketch.rows || j >= sketch.cols {
        return Err(Error::param(format!(
            "entry ({i}, {j}) outside {}x{} product",
            sketch.rows, sketch.cols
        )));
    }
    let h = &sketch.hashes;
    let mut vals: Vec<f64> = (0..sketch.params.d)
        .map(|t| {
            let sign = h.s1[t].sign(i as u32) * h.s2[t].sign(j as u32);
            sign * sketch.poly(t)[sketch.index(t, i, j)]
        })
        .collect();
    Ok(median(&mut vals))
}

/// Every entry estimate, rows distributed over `threads` workers. Entry
/// `(i, j)` equals `decompress_entry(sketch, i, j)` bit for bit.
pub fn decompress_all(sketch: &ProductSketch, threads: usize) -> DenseMatrix {
    let (rows, cols) = (sketch.rows, sketch.cols);
    let p = &sketch.params;
    let h = &sketch.hashes;
    let row_tables: Vec<HashTable> =
        (0..p.d).map(|t| HashTable::build(&h.h1[t], &h.s1[t], rows)).collect();
    let col_tables: Vec<HashTable> =
        (0..p.d).map(|t| HashTable::build(&h.h2[t], &h.s2[t], cols)).collect();

    let mut out = DenseMatrix::zeros(rows, cols);
    let threads = parallel::resolve_threads(threads);
    parallel::for_each_row_mut(out.as_mut_slice(), cols, threads, |i, out_row| {
        let mut vals = vec![0.0; p.d];
        for (j, o) in out_row.iter_mut().enumerate() {
            for (t, v) in vals.iter_mut().enumerate() {
                let (rt, ct) = (&row_tables[t], &col_tables[t]);
                let idx = combine(p.transform, rt.buckets[i] as usize, ct.buckets[j] as usize, p.b);
                *v = rt.signs[i] * ct.signs[j] * sketch.poly(t)[idx];
            }
            *o = median(&mut vals);
        }
    });
    out
}
