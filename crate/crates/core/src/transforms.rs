//! Convolution engines: the Walsh-Hadamard transform for XOR convolution and
//! a radix-2 real FFT for cyclic convolution.
//!
//! The Walsh-Hadamard transform here is unnormalized (`W[i][j] =
//! (−1)^popcount(i & j)`, so `W·W = b·I`). The inverse real FFT carries the
//! usual `1/b` factor.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_pow2(len: usize, min: usize, what: &str) -> Result<()> {
    if len < min || !len.is_power_of_two() {
        return Err(Error::param(format!(
            "{what} length must be a power of two >= {min}, got {len}"
        )));
    }
    Ok(())
}

/// Unnormalized in-place Walsh-Hadamard transform.
pub fn fwht_inplace(x: &mut [f64]) -> Result<()> {
    check_pow2(x.len(), 1, "transform")?;
    fwht_unchecked(x);
    Ok(())
}

/// Butterfly passes without the length check. `x.len()` must be a power of two.
#[inline]
pub(crate) fn fwht_unchecked(x: &mut [f64]) {
    let n = x.len();
    // Radix-4 first pass fuses the two shortest strides.
    if n >= 4 {
        for q in x.chunks_exact_mut(4) {
            let (a, b, c, d) = (q[0], q[1], q[2], q[3]);
            let (s0, d0, s1, d1) = (a + b, a - b, c + d, c - d);
            q[0] = s0 + s1;
            q[1] = d0 + d1;
            q[2] = s0 - s1;
            q[3] = d0 - d1;
        }
    } else if n == 2 {
        let (a, b) = (x[0], x[1]);
        x[0] = a + b;
        x[1] = a - b;
        return;
    }
    let mut h = 4;
    while h < n {
        for block in x.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*u, *v);
                *u = a + b;
                *v = a - b;
            }
        }
        h *= 2;
    }
}

fn check_pair(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::param(format!(
            "convolution operands differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    check_pow2(x.len(), min, "convolution")
}

/// XOR convolution `out[k] = Σ_{i⊕j=k} x[i]·y[j]`.
pub fn xor_convolve(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_pair(x, y, 1)?;
    let mut fx = x.to_vec();
    let mut fy = y.to_vec();
    fwht_unchecked(&mut fx);
    fwht_unchecked(&mut fy);
    for (a, b) in fx.iter_mut().zip(&fy) {
        *a *= b;
    }
    fwht_unchecked(&mut fx);
    let scale = 1.0 / x.len() as f64;
    fx.iter_mut().for_each(|v| *v *= scale);
    Ok(fx)
}

/// A reusable plan for real-input FFTs of one power-of-two length `b ≥ 2`.
///
/// The forward transform produces the half spectrum (`b/2 + 1` bins). It packs
/// the real input into a complex sequence of length `b/2`, runs an iterative
/// radix-2 transform on it and splits the result into even and odd parts.
#[derive(Clone, Debug)]
pub struct RealFft {
    len: usize,
    // Per-stage twiddles: entry `h + j` is e^{-2πi j/(2h)} for the stage of
    // half-width `h`, j < h. The inverse table holds the conjugates.
    stage: Vec<Complex64>,
    stage_inv: Vec<Complex64>,
    // e^{-2πi k/len} for the even/odd split, k ≤ m/2.
    split: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl RealFft {
    pub fn new(len: usize) -> Result<Self> {
        check_pow2(len, 2, "FFT")?;
        let m = len / 2;
        let mut stage = vec![Complex64::new(1.0, 0.0); m.max(1)];
        let mut h = 1;
        while h < m {
            for j in 0..h {
                stage[h + j] = Complex64::from_polar(1.0, -PI * j as f64 / h as f64);
            }
            h *= 2;
        }
        let stage_inv = stage.iter().map(|w| w.conj()).collect();
        let split = (0..=m / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        let bits = m.trailing_zeros();
        let bitrev = (0..m as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Ok(RealFft { len, stage, stage_inv, split, bitrev })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of half-spectrum bins, `len/2 + 1`.
    pub fn bins(&self) -> usize {
        self.len / 2 + 1
    }

    fn complex_inplace(&self, a: &mut [Complex64], inverse: bool) {
        let m = a.len();
        for i in 0..m {
            let j = self.bitrev[i] as usize;
            if i < j {
                a.swap(i, j);
            }
        }
        if m >= 2 {
            for pair in a.chunks_exact_mut(2) {
                let (u, v) = (pair[0], pair[1]);
                pair[0] = u + v;
                pair[1] = u - v;
            }
        }
        let table = if inverse { &self.stage_inv } else { &self.stage };
        let mut half = 2;
        while half < m {
            let tw = &table[half..2 * half];
            for block in a.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for ((u, v), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                    let t = *v * w;
                    *v = *u - t;
                    *u += t;
                }
            }
            half *= 2;
        }
    }

    /// Forward transform of `input` (length `len`) into `out` (length `len/2 + 1`).
    pub fn forward_into(&self, input: &[f64], out: &mut [Complex64]) {
        let m = self.len / 2;
        debug_assert_eq!(input.len(), self.len);
        debug_assert_eq!(out.len(), m + 1);
        for (z, pair) in out[..m].iter_mut().zip(input.chunks_exact(2)) {
            *z = Complex64::new(pair[0], pair[1]);
        }
        self.complex_inplace(&mut out[..m], false);

        let z0 = out[0];
        out[0] = Complex64::new(z0.re + z0.im, 0.0);
        out[m] = Complex64::new(z0.re - z0.im, 0.0);
        for k in 1..=m / 2 {
            let zk = out[k];
            let zmk = out[m - k].conj();
            let even = (zk + zmk) * 0.5;
            let odd = Complex64::new(0.0, -0.5) * (zk - zmk);
            let rot = self.split[k] * odd;
            out[k] = even + rot;
            if m - k != k {
                out[m - k] = (even - rot).conj();
            }
        }
    }

    /// Inverse transform of the half spectrum `spec` into `out`, scaled by
    /// `1/len`. `spec` is used as scratch and left unspecified.
    pub fn inverse_into(&self, spec: &mut [Complex64], out: &mut [f64]) {
        let m = self.len / 2;
        debug_assert_eq!(spec.len(), m + 1);
        debug_assert_eq!(out.len(), self.len);
        let (x0, xm) = (spec[0].re, spec[m].re);
        spec[0] = Complex64::new(0.5 * (x0 + xm), 0.5 * (x0 - xm));
        let i = Complex64::new(0.0, 1.0);
        for k in 1..=m / 2 {
            let xk = spec[k];
            let xmk = spec[m - k].conj();
            let even = (xk + xmk) * 0.5;
            let odd = (xk - xmk) * 0.5 * self.split[k].conj();
            spec[k] = even + i * odd;
            if m - k != k {
                spec[m - k] = even.conj() + i * odd.conj();
            }
        }
        self.complex_inplace(&mut spec[..m], true);
        let scale = 1.0 / m as f64;
        for (pair, z) in out.chunks_exact_mut(2).zip(&spec[..m]) {
            pair[0] = z.re * scale;
            pair[1] = z.im * scale;
        }
    }
}

/// Half spectrum (`b/2 + 1` bins) of a real sequence of power-of-two length `b ≥ 2`.
pub fn fft_forward(x: &[f64]) -> Result<Vec<Complex64>> {
    let plan = RealFft::new(x.len())?;
    let mut out = vec![Complex64::default(); plan.bins()];
    plan.forward_into(x, &mut out);
    Ok(out)
}

/// Tolerance on the imaginary part of the DC and Nyquist bins.
pub const SPECTRUM_IMAG_TOL: f64 = 1e-9;

/// Real sequence whose forward transform is `spectrum`, including the `1/b`
/// factor. Rejects spectra whose DC or Nyquist bin is not real.
pub fn fft_inverse(spectrum: &[Complex64]) -> Result<Vec<f64>> {
    if spectrum.len() < 2 {
        return Err(Error::param("spectrum needs at least two bins"));
    }
    let len = 2 * (spectrum.len() - 1);
    let plan = RealFft::new(len)?;
    let scale = spectrum.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for (name, bin) in [("DC", spectrum[0]), ("Nyquist", spectrum[spectrum.len() - 1])] {
        if bin.im.abs() > SPECTRUM_IMAG_TOL * scale {
            return Err(Error::InvalidSpectrum(format!(
                "{name} bin has imaginary part {}",
                bin.im
            )));
        }
    }
    let mut spec = spectrum.to_vec();
    let mut out = vec![0.0; len];
    plan.inverse_into(&mut spec, &mut out);
    Ok(out)
}

/// Cyclic convolution `out[k] = Σ_{i+j ≡ k (mod b)} x[i]·y[j]`.
pub fn cyclic_convolve(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_pair(x, y, 1)?;
    if x.len() == 1 {
        return Ok(vec![x[0] * y[0]]);
    }
    let plan = RealFft::new(x.len())?;
    let mut fx = vec![Complex64::default(); plan.bins()];
    let mut fy = fx.clone();
    plan.forward_into(x, &mut fx);
    plan.forward_into(y, &mut fy);
    for (a, b) in fx.iter_mut().zip(&fy) {
        *a *= b;
    }
    let mut out = vec![0.0; x.len()];
    plan.inverse_into(&mut fx, &mut out);
    Ok(out)
}
