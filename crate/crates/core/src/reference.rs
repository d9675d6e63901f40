//! Dense ground truth: row-major matrices, a blocked reference GEMM, norms,
//! and an LU-based inverse used by the instance generators.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::parallel;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Wraps row-major `data`. Entries must be finite.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::param(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite entry at flat index {pos}")));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::param("ragged rows"));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        const TILE: usize = 32;
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i0 in (0..self.rows).step_by(TILE) {
            for j0 in (0..self.cols).step_by(TILE) {
                for i in i0..(i0 + TILE).min(self.rows) {
                    for j in j0..(j0 + TILE).min(self.cols) {
                        out.data[j * self.rows + i] = self.data[i * self.cols + j];
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Reference product `A·B`.
///
/// Blocked over the inner dimension and columns; each output entry is still
/// the plain sum over `k`, accumulated in increasing `k` order. Rows of the
/// output are distributed over `threads` workers (0 = all cores).
pub fn gemm_reference(a: &DenseMatrix, b: &DenseMatrix, threads: usize) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(Error::param(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    const KB: usize = 256;
    const JB: usize = 512;
    let (m, inner, n) = (a.rows, a.cols, b.cols);
    let mut c = DenseMatrix::zeros(m, n);
    let threads = parallel::resolve_threads(threads);
    parallel::for_each_row_mut(&mut c.data, n.max(1), threads, |i, out| {
        let arow = a.row(i);
        for k0 in (0..inner).step_by(KB) {
            let k1 = (k0 + KB).min(inner);
            for j0 in (0..n).step_by(JB) {
                let j1 = (j0 + JB).min(n);
                let out = &mut out[j0..j1];
                for (k, &aik) in arow.iter().enumerate().take(k1).skip(k0) {
                    let brow = &b.row(k)[j0..j1];
                    for (o, &bkj) in out.iter_mut().zip(brow) {
                        *o += aik * bkj;
                    }
                }
            }
        }
    });
    Ok(c)
}

/// `Σ m_ij²`.
pub fn frobenius_norm_sq(m: &DenseMatrix) -> f64 {
    m.data.iter().map(|v| v * v).sum()
}

/// Number of entries with `|m_ij| > tol`.
pub fn nnz(m: &DenseMatrix, tol: f64) -> usize {
    m.data.iter().filter(|v| v.abs() > tol).count()
}

/// Relative pivot threshold below which a matrix is treated as singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// Inverse by LU factorization with partial pivoting.
pub fn lu_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::param(format!("cannot invert a {}x{} matrix", a.rows, a.cols)));
    }
    let n = a.rows;
    let max_entry = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if n == 0 {
        return Ok(a.clone());
    }
    if max_entry == 0.0 {
        return Err(Error::SingularMatrix);
    }
    let threshold = PIVOT_TOL * max_entry;

    // In-place Doolittle factorization, L below the diagonal (unit), U on and above.
    let mut lu = a.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, pivot_abs) = (k..n)
            .map(|i| (i, lu[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= threshold {
            return Err(Error::SingularMatrix);
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let pivot = lu[k * n + k];
        let (upper, lower) = lu.split_at_mut((k + 1) * n);
        let krow = &upper[k * n..];
        for row in lower.chunks_exact_mut(n) {
            let factor = row[k] / pivot;
            row[k] = factor;
            if factor != 0.0 {
                for (x, &u) in row[k + 1..].iter_mut().zip(&krow[k + 1..]) {
                    *x -= factor * u;
                }
            }
        }
    }

    // Solve for all columns at once: X = U⁻¹ L⁻¹ P, working row-wise so the
    // inner loops stay contiguous.
    let mut x = vec![0.0; n * n];
    for (i, &p) in perm.iter().enumerate() {
        x[i * n + p] = 1.0;
    }
    for i in 0..n {
        let (done, rest) = x.split_at_mut(i * n);
        let xi = &mut rest[..n];
        for k in 0..i {
            let l = lu[i * n + k];
            if l != 0.0 {
                for (v, &w) in xi.iter_mut().zip(&done[k * n..(k + 1) * n]) {
                    *v -= l * w;
                }
            }
        }
    }
    for i in (0..n).rev() {
        let (head, tail) = x.split_at_mut((i + 1) * n);
        let xi = &mut head[i * n..];
        for k in i + 1..n {
            let u = lu[i * n + k];
            if u != 0.0 {
                let xk = &tail[(k - i - 1) * n..(k - i) * n];
                for (v, &w) in xi.iter_mut().zip(xk) {
                    *v -= u * w;
                }
            }
        }
        let d = 1.0 / lu[i * n + i];
        xi.iter_mut().for_each(|v| *v *= d);
    }
    Ok(DenseMatrix { rows: n, cols: n, data: x })
}

// Binary container: magic, version (u32), rows (u64), cols (u64), then
// rows·cols little-endian f64 in row-major order.
pub const MATRIX_MAGIC: [u8; 8] = *b"SKMMDMAT";
pub const MATRIX_VERSION: u32 = 1;

impl DenseMatrix {
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&MATRIX_MAGIC)?;
        w.write_all(&MATRIX_VERSION.to_le_bytes())?;
        w.write_all(&(self.rows as u64).to_le_bytes())?;
        w.write_all(&(self.cols as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if magic != MATRIX_MAGIC {
            return Err(Error::Format("not a matrix file (bad magic)".into()));
        }
        let version = read_u32(&mut r)?;
        if version != MATRIX_VERSION {
            return Err(Error::Format(format!("unsupported matrix version {version}")));
        }
        let rows = read_u64(&mut r)? as usize;
        let cols = read_u64(&mut r)? as usize;
        let len = rows
            .checked_mul(cols)
            .and_then(|l| l.checked_mul(8))
            .ok_or_else(|| Error::Format("matrix dimensions overflow".into()))?;
        let mut bytes = Vec::new();
        r.take(len as u64).read_to_end(&mut bytes)?;
        if bytes.len() != len {
            return Err(Error::Format(format!("truncated matrix data: {} of {len} bytes", bytes.len())));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::from_vec(rows, cols, data).map_err(|e| Error::Format(e.to_string()))
    }

    /// One row per line, comma separated, no header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
            rows.push(row);
        }
        Self::from_rows(&rows).map_err(|e| Error::Format(e.to_string()))
    }

    /// Loads a matrix, choosing CSV for `.csv` paths and the binary format otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let file = fs::File::open(path)?;
        let reader = std::io::BufReader::new(file);
        if is_csv(path) {
            Self::read_csv(reader)
        } else {
            Self::read_binary(reader)
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(fs::File::create(path)?);
        if is_csv(path) {
            self.write_csv(&mut w)?;
        } else {
            self.write_binary(&mut w)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn uniform(n: usize, seed: u64) -> DenseMatrix {
        let mut r = rng::seeded(seed);
        DenseMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0))
    }

    fn naive(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum()
        })
    }

    #[test]
    fn identity_product() {
        let x = uniform(17, 1);
        assert_eq!(gemm_reference(&DenseMatrix::identity(17), &x, 1).unwrap(), x);
    }

    #[test]
    fn small_product() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![5.0, 6.0], vec![7.0, 8.0]]).unwrap();
        let c = gemm_reference(&a, &b, 1).unwrap();
        assert_eq!(c.as_slice(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn gemm_matches_naive() {
        let a = uniform(64, 2);
        let b = uniform(64, 3);
        let want = naive(&a, &b);
        for threads in [1, 3] {
            let got = gemm_reference(&a, &b, threads).unwrap();
            let scale = want.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(got.max_abs_diff(&want) <= 1e-10 * scale);
        }
        // Rectangular shapes across block boundaries.
        let mut r = rng::seeded(4);
        let a = DenseMatrix::from_fn(5, 300, |_, _| r.random_range(-1.0..1.0));
        let b = DenseMatrix::from_fn(300, 530, |_, _| r.random_range(-1.0..1.0));
        assert!(gemm_reference(&a, &b, 2).unwrap().max_abs_diff(&naive(&a, &b)) < 1e-12);
    }

    #[test]
    fn gemm_dimension_mismatch() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(matches!(gemm_reference(&a, &a, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn norms_and_counts() {
        assert_eq!(frobenius_norm_sq(&DenseMatrix::zeros(3, 3)), 0.0);
        assert_eq!(frobenius_norm_sq(&DenseMatrix::identity(4)), 4.0);
        assert_eq!(frobenius_norm_sq(&DenseMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap()), 25.0);
        assert_eq!(nnz(&DenseMatrix::zeros(4, 4), 0.0), 0);
        assert_eq!(nnz(&DenseMatrix::identity(8), 0.0), 8);
        let m = DenseMatrix::from_rows(&[vec![1e-4, -0.5], vec![0.0, 2.0]]).unwrap();
        assert_eq!(nnz(&m, 1e-3), 2);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(lu_inverse(&DenseMatrix::identity(5)).unwrap(), DenseMatrix::identity(5));
        let inv = lu_inverse(&DenseMatrix::from_diag(&[2.0, 4.0])).unwrap();
        assert_eq!(inv.as_slice(), &[0.5, 0.0, 0.0, 0.25]);
    }

    #[test]
    fn inverse_residual() {
        for (n, seed) in [(64, 10), (128, 11)] {
            let a = uniform(n, seed);
            let inv = lu_inverse(&a).unwrap();
            let r = gemm_reference(&a, &inv, 1).unwrap();
            assert!(r.max_abs_diff(&DenseMatrix::identity(n)) <= 1e-8, "n={n}");
        }
    }

    #[test]
    fn singular_detected() {
        let s = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(lu_inverse(&s), Err(Error::SingularMatrix)));
        assert!(matches!(lu_inverse(&DenseMatrix::zeros(3, 3)), Err(Error::SingularMatrix)));
        assert!(lu_inverse(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(DenseMatrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_vec(1, 2, vec![1.0]).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let m = uniform(7, 5);
        let mut buf = Vec::new();
        m.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 16 + 49 * 8);
        assert_eq!(DenseMatrix::read_binary(&buf[..]).unwrap(), m);
        assert!(DenseMatrix::read_binary(&buf[..buf.len() - 1]).is_err());
        buf[0] = b'X';
        assert!(matches!(DenseMatrix::read_binary(&buf[..]), Err(Error::Format(_))));
    }

    #[test]
    fn csv_round_trip() {
        let m = uniform(4, 6);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(DenseMatrix::read_csv(&buf[..]).unwrap(), m);
        assert!(DenseMatrix::read_csv(&b"1,2\n3\n"[..]).is_err());
        assert!(DenseMatrix::read_csv(&b"1,x\n"[..]).is_err());
    }

    #[test]
    fn transpose_works() {
        let mut r = rng::seeded(9);
        let m = DenseMatrix::from_fn(37, 70, |_, _| r.random_range(-1.0..1.0));
        let t = m.transpose();
        for i in 0..37 {
            for j in 0..70 {
                assert_eq!(m.get(i, j), t.get(j, i));
            }
        }
    }
}
