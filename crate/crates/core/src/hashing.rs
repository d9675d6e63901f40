//! Multiply-add-shift hashing.
//!
//! `h(x) = ((a·x + c) mod 2⁶⁴) >> (64 − log₂ b)` for 32-bit keys `x` and
//! uniformly random 64-bit `a`, `c`. The family is 2-wise independent for any
//! power-of-two `b ≤ 2³²`. Sign hashes are the same family with `b = 2`,
//! mapping bucket 0 to `+1` and bucket 1 to `−1`.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest bucket count supported by 32-bit keys.
pub const MAX_BUCKETS: u64 = 1 << 32;

/// One member `h_{a,c}` of the hash family, targeting `2^(64 - shift)` buckets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashPair {
    pub a: u64,
    pub c: u64,
    pub shift: u32,
}

/// `64 − log₂ b` for a valid bucket count.
pub fn shift_for_buckets(buckets: u64) -> Result<u32> {
    if !(2..=MAX_BUCKETS).contains(&buckets) || !buckets.is_power_of_two() {
        return Err(Error::param(format!(
            "bucket count must be a power of two in [2, 2^32], got {buckets}"
        )));
    }
    Ok(64 - buckets.trailing_zeros())
}

impl HashPair {
    pub fn new(a: u64, c: u64, buckets: u64) -> Result<Self> {
        Ok(HashPair { a, c, shift: shift_for_buckets(buckets)? })
    }

    /// Draws `a` and `c` (in that order) from `rng`.
    pub fn draw<R: RngCore + ?Sized>(rng: &mut R, buckets: u64) -> Result<Self> {
        let shift = shift_for_buckets(buckets)?;
        let a = rng.next_u64();
        let c = rng.next_u64();
        Ok(HashPair { a, c, shift })
    }

    pub fn buckets(&self) -> u64 {
        1u64 << (64 - self.shift)
    }

    #[inline]
    pub fn bucket(&self, x: u32) -> u32 {
        (self.a.wrapping_mul(u64::from(x)).wrapping_add(self.c) >> self.shift) as u32
    }

    /// Sign hash: bucket 0 is `+1`, bucket 1 is `−1`. Only meaningful when the
    /// pair targets two buckets.
    #[inline]
    pub fn sign(&self, x: u32) -> f64 {
        debug_assert_eq!(self.shift, 63);
        if self.bucket(x) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// The `4d` hash functions of a product sketch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchHashes {
    pub h1: Vec<HashPair>,
    pub h2: Vec<HashPair>,
    pub s1: Vec<HashPair>,
    pub s2: Vec<HashPair>,
}

impl SketchHashes {
    /// Draws `d` sets of hashes from `seed`. For each sketch `t` the sign
    /// hashes `s1[t], s2[t]` are drawn first, then the bucket hashes
    /// `h1[t], h2[t]`.
    pub fn draw(seed: u64, d: usize, buckets: u64) -> Result<Self> {
        shift_for_buckets(buckets)?;
        let mut rng = rng::seeded(seed);
        let mut out = SketchHashes {
            h1: Vec::with_capacity(d),
            h2: Vec::with_capacity(d),
            s1: Vec::with_capacity(d),
            s2: Vec::with_capacity(d),
        };
        for _ in 0..d {
            out.s1.push(HashPair::draw(&mut rng, 2)?);
            out.s2.push(HashPair::draw(&mut rng, 2)?);
            out.h1.push(HashPair::draw(&mut rng, buckets)?);
            out.h2.push(HashPair::draw(&mut rng, buckets)?);
        }
        Ok(out)
    }

    pub fn depth(&self) -> usize {
        self.h1.len()
    }

    /// All pairs in serialization order: `h1[..], h2[..], s1[..], s2[..]`.
    pub fn iter_pairs(&self) -> impl Iterator<Item = &HashPair> {
        self.h1.iter().chain(&self.h2).chain(&self.s1).chain(&self.s2)
    }

    /// FNV-1a digest of every `(a, c)` pair, for tagging result rows.
    pub fn digest(&self) -> u64 {
        let mut d = Fnv1a::default();
        for p in self.iter_pairs() {
            d.write_u64(p.a);
            d.write_u64(p.c);
        }
        d.finish()
    }
}

/// Incremental FNV-1a (64-bit).
#[derive(Clone, Copy, Debug)]
pub struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv1a {
    pub fn write_u64(&mut self, v: u64) {
        for byte in v.to_le_bytes() {
            self.0 ^= u64::from(byte);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

/// Per-index bucket and sign tables of one sketch, precomputed for `0..len`.
pub(crate) struct HashTable {
    pub buckets: Vec<u32>,
    pub signs: Vec<f64>,
}

impl HashTable {
    pub fn build(bucket: &HashPair, sign: &HashPair, len: usize) -> Self {
        let buckets = (0..len as u32).map(|x| bucket.bucket(x)).collect();
        let signs = (0..len as u32).map(|x| sign.sign(x)).collect();
        HashTable { buckets, signs }
    }
}
