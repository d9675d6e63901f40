//! Compressed matrix multiplication.
//!
//! A [`ProductSketch`] of `C = AB` is built from `d` independent count-sketch
//! polynomials of length `b`. Every entry of `C` can then be estimated from the
//! sketch alone; the estimate is unbiased and its variance is bounded by
//! `‖AB‖²_F / b`, so the method pays off when the product is dominated by a
//! handful of large entries.
//!
//! Two convolution engines are provided: cyclic convolution through a real FFT
//! and XOR convolution through the Walsh-Hadamard transform. Both share the
//! same hash families and the same statistical guarantees.
//!
//! ```
//! use sketchmul::{compress, decompress_all, DenseMatrix, SketchParams, Transform};
//!
//! let a = DenseMatrix::identity(8);
//! let b = DenseMatrix::identity(8);
//! let params = SketchParams::new(8, 256, 9, Transform::Fwht, 7).unwrap();
//! let sketch = compress(&a, &b, &params, 1).unwrap();
//! let c = decompress_all(&sketch, 1);
//! assert!((c.get(3, 3) - 1.0).abs() < 1e-9);
//! ```

pub mod error;
pub mod experiments;
pub mod hashing;
pub mod instances;
mod parallel;
pub mod reference;
pub mod rng;
pub mod sketch;
pub mod transforms;

pub use error::{Error, Result};
pub use hashing::{HashPair, SketchHashes};
pub use instances::{BigEntry, Instance, InstanceKind};
pub use parallel::resolve_threads;
pub use reference::{frobenius_norm_sq, gemm_reference, lu_inverse, nnz, DenseMatrix};
pub use sketch::{
    compress, compress_transposed, decompress_all, decompress_entry, derive_params, ProductSketch,
    SketchParams, Transform,
};
