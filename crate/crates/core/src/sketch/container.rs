//! Binary sketch container.
//!
//! Layout, all integers little-endian:
//!
//! | field            | type        |
//! |------------------|-------------|
//! | magic            | `b"SKMMPSKT"` |
//! | version          | u32         |
//! | n                | u64         |
//! | rows, cols       | u64, u64    |
//! | b, d             | u64, u64    |
//! | transform        | u8 (0 = fft, 1 = fwht) |
//! | seed             | u64         |
//! | hash pairs       | 4d × (a: u64, c: u64), ordered h1[0..d], h2[0..d], s1[0..d], s2[0..d] |
//! | coefficients     | d·b × f64, sketch-major |

use std::io::{Read, Write};

use super::{ProductSketch, SketchParams, Transform};
use crate::error::{Error, Result};
use crate::hashing::{HashPair, SketchHashes};
use crate::reference::{read_u32, read_u64};

pub const SKETCH_MAGIC: [u8; 8] = *b"SKMMPSKT";
pub const SKETCH_VERSION: u32 = 1;

impl ProductSketch {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let p = &self.params;
        let mut buf = Vec::with_capacity(64 + 64 * p.d + 8 * p.d * p.b);
        buf.extend_from_slice(&SKETCH_MAGIC);
        buf.extend_from_slice(&SKETCH_VERSION.to_le_bytes());
        for v in [p.n, self.rows, self.cols, p.b, p.d] {
            buf.extend_from_slice(&(v as u64).to_le_bytes());
        }
        buf.push(p.transform.code());
        buf.extend_from_slice(&p.seed.to_le_bytes());
        for pair in self.hashes.iter_pairs() {
            buf.extend_from_slice(&pair.a.to_le_bytes());
            buf.extend_from_slice(&pair.c.to_le_bytes());
        }
        for v in &self.polys {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("sketch container: {m}"));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if magic != SKETCH_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = read_u32(&mut r)?;
        if version != SKETCH_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let n = read_u64(&mut r)? as usize;
        let rows = read_u64(&mut r)? as usize;
        let cols = read_u64(&mut r)? as usize;
        let b = read_u64(&mut r)? as usize;
        let d = read_u64(&mut r)? as usize;
        let mut code = [0u8; 1];
        r.read_exact(&mut code)?;
        let transform = Transform::from_code(code[0]).ok_or_else(|| bad("unknown transform code"))?;
        let seed = read_u64(&mut r)?;
        let params = SketchParams::new(n, b, d, transform, seed).map_err(|e| bad(&e.to_string()))?;

        let mut groups: [Vec<HashPair>; 4] = Default::default();
        for (g, buckets) in groups.iter_mut().zip([b as u64, b as u64, 2, 2]) {
            for _ in 0..d {
                let a = read_u64(&mut r)?;
                let c = read_u64(&mut r)?;
                g.push(HashPair::new(a, c, buckets)?);
            }
        }
        let [h1, h2, s1, s2] = groups;
        let hashes = SketchHashes { h1, h2, s1, s2 };

        let len = d.checked_mul(b).and_then(|x| x.checked_mul(8)).ok_or_else(|| bad("size overflow"))?;
        let mut bytes = Vec::new();
        r.take(len as u64).read_to_end(&mut bytes)?;
        if bytes.len() != len {
            return Err(bad("truncated coefficients"));
        }
        let polys = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        ProductSketch::from_parts(params, rows, cols, hashes, polys)
    }
}
