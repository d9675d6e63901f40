//! Browser bindings for the `www/` page. Every export takes plain numbers or
//! strings and returns JSON or a float array, so the page needs no glue
//! beyond what `wasm-bindgen` generates.
//!
//! The `*_json` functions are ordinary Rust and can be tested natively.

use serde::Serialize;
use sketchmul::experiments::{categorize, correctness_metrics, variance_experiment, CorrectnessReport, VariancePoint};
use sketchmul::instances::{generate, DEFAULT_RHO};
use sketchmul::transforms::{cyclic_convolve, xor_convolve};
use sketchmul::{compress, decompress_all, derive_params, InstanceKind, Transform};
use wasm_bindgen::prelude::*;

/// Largest matrix dimension the page accepts.
pub const MAX_N: usize = 256;

#[derive(Serialize)]
pub struct MultiplyView {
    pub n: usize,
    pub d: usize,
    pub b: usize,
    /// Row-major `n×n`.
    pub truth: Vec<f64>,
    pub estimate: Vec<f64>,
    pub big: Vec<(usize, usize)>,
    pub report: CorrectnessReport,
    pub category: String,
    pub max_error: f64,
}

fn parse<T: std::str::FromStr<Err = sketchmul::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: sketchmul::Error| e.to_string())
}

fn check_n(n: usize) -> Result<(), String> {
    if n > MAX_N {
        return Err(format!("n={n} is too large for the demo (max {MAX_N})"));
    }
    Ok(())
}

/// Generates an instance, sketches its product and compares with the truth.
pub fn multiply_view(kind: &str, n: usize, c_d: f64, c_b: f64, transform: &str, seed: u64) -> Result<MultiplyView, String> {
    check_n(n)?;
    let kind: InstanceKind = parse(kind)?;
    let transform: Transform = parse(transform)?;
    let e = |e: sketchmul::Error| e.to_string();
    let inst = generate(kind, n, DEFAULT_RHO, seed).map_err(e)?;
    let truth = inst.truth(1).map_err(e)?;
    let params = derive_params(n, c_d, c_b, transform, seed ^ 0x5eed).map_err(e)?;
    let est = decompress_all(&compress(&inst.a, &inst.b, &params, 1).map_err(e)?, 1);
    let big = inst.big_positions();
    let report = correctness_metrics(&est, &truth, &big).map_err(e)?;
    let category = categorize(&[report]).map_err(e)?;
    Ok(MultiplyView {
        n,
        d: params.d,
        b: params.b,
        max_error: est.max_abs_diff(&truth),
        truth: truth.as_slice().to_vec(),
        estimate: est.as_slice().to_vec(),
        big,
        report,
        category: category.as_str().to_string(),
    })
}

pub fn multiply_json(kind: &str, n: usize, c_d: f64, c_b: f64, transform: &str, seed: u64) -> Result<String, String> {
    let v = multiply_view(kind, n, c_d, c_b, transform, seed)?;
    serde_json::to_string(&v).map_err(|e| e.to_string())
}

/// Variance of a single-sketch estimate of the first big entry, for widths
/// `n/4` through `4n`.
pub fn variance_points(kind: &str, n: usize, trials: usize, transform: &str, seed: u64) -> Result<Vec<VariancePoint>, String> {
    check_n(n)?;
    let kind: InstanceKind = parse(kind)?;
    let transform: Transform = parse(transform)?;
    let e = |e: sketchmul::Error| e.to_string();
    let inst = generate(kind, n, DEFAULT_RHO, seed).map_err(e)?;
    let entry = inst.big_positions()[0];
    let widths: Vec<usize> = (0..5).map(|k| ((n / 4) << k).max(2)).collect();
    let r = variance_experiment(&inst.a, &inst.b, entry, &widths, trials, transform, seed, 1).map_err(e)?;
    Ok(r.points)
}

pub fn variance_json(kind: &str, n: usize, trials: usize, transform: &str, seed: u64) -> Result<String, String> {
    let p = variance_points(kind, n, trials, transform, seed)?;
    serde_json::to_string(&p).map_err(|e| e.to_string())
}

/// Cyclic (`fft`) or XOR (`fwht`) convolution of two equal-length vectors.
pub fn convolve_vec(x: &[f64], y: &[f64], transform: &str) -> Result<Vec<f64>, String> {
    let r = match parse::<Transform>(transform)? {
        Transform::Fft => cyclic_convolve(x, y),
        Transform::Fwht => xor_convolve(x, y),
    };
    r.map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn multiply(kind: &str, n: usize, c_d: f64, c_b: f64, transform: &str, seed: u32) -> Result<String, JsValue> {
    multiply_json(kind, n, c_d, c_b, transform, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn variance(kind: &str, n: usize, trials: usize, transform: &str, seed: u32) -> Result<String, JsValue> {
    variance_json(kind, n, trials, transform, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn convolve(x: &[f64], y: &[f64], transform: &str) -> Result<Vec<f64>, JsValue> {
    convolve_vec(x, y, transform).map_err(|e| JsValue::from_str(&e))
}
