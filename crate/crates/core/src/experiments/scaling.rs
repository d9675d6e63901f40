use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::grid::timed_sketch;
use super::{instance_seed, stats, trial_seed};
use crate::error::{Error, Result};
use crate::instances::{generate, InstanceKind, DEFAULT_RHO};
use crate::reference::gemm_reference;
use crate::sketch::{derive_params, estimate_footprint, Transform};

/// What a timing row measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fft,
    Fwht,
    Gemm,
}

impl From<Transform> for Method {
    fn from(t: Transform) -> Self {
        match t {
            Transform::Fft => Method::Fft,
            Transform::Fwht => Method::Fwht,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fft => "fft",
            Method::Fwht => "fwht",
            Method::Gemm => "gemm",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// Wall-clock seconds of `1 + R` repetitions of one configuration; the first
/// entry of `seconds` is the warm-up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub kind: InstanceKind,
    pub n: usize,
    pub method: Method,
    pub c_d: Option<f64>,
    pub c_b: Option<f64>,
    pub d: Option<usize>,
    pub b: Option<usize>,
    pub seconds: Vec<f64>,
    pub threads: usize,
    pub host: String,
    pub instance_seed: u64,
    pub hash_seed: Option<u64>,
    pub hash_digest: Option<u64>,
}

impl TimingRecord {
    pub fn warmup(&self) -> f64 {
        self.seconds[0]
    }

    /// Repetitions after the warm-up.
    pub fn measured(&self) -> &[f64] {
        &self.seconds[1..]
    }

    /// Min, median and max over the measured repetitions; `None` when `R = 0`.
    pub fn summary(&self) -> Option<TimingSummary> {
        let m = self.measured();
        if m.is_empty() {
            return None;
        }
        Some(TimingSummary {
            min: m.iter().cloned().fold(f64::INFINITY, f64::min),
            median: stats::median_of(m),
            max: m.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub kind: InstanceKind,
    pub ns: Vec<usize>,
    /// `(c_d, c_b)` pairs.
    pub params: Vec<(f64, f64)>,
    pub transforms: Vec<Transform>,
    /// Timed repetitions after the warm-up.
    pub repetitions: usize,
    pub seed: u64,
    pub threads: usize,
    pub baseline: bool,
    /// Memory budget in bytes.
    pub max_mem: Option<u64>,
    pub rho: f64,
    pub host: String,
}

impl ScalingConfig {
    pub fn new(kind: InstanceKind, ns: Vec<usize>, params: Vec<(f64, f64)>, seed: u64) -> Self {
        ScalingConfig {
            kind,
            ns,
            params,
            transforms: Transform::ALL.to_vec(),
            repetitions: 5,
            seed,
            threads: 0,
            baseline: false,
            max_mem: None,
            rho: DEFAULT_RHO,
            host: host_label(),
        }
    }
}

/// Best-effort machine name for timing rows.
pub fn host_label() -> String {
    std::fs::read_to_string("/proc/sys/kernel/hostname")
        .ok()
        .or_else(|| std::env::var("HOSTNAME").ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

/// Bytes the instance generator needs at size `n` (operands, a copy and an inverse).
fn instance_footprint(n: usize) -> u64 {
    5 * (n as u64) * (n as u64) * 8
}

fn check_budget(required: u64, budget: Option<u64>) -> Result<()> {
    match budget {
        Some(budget) if required > budget => Err(Error::MemoryBudget { required, budget }),
        _ => Ok(()),
    }
}

/// Times compress + decompress-all for every size, parameter pair and
/// transform on the same instance and hash functions, plus the reference
/// GEMM when `baseline` is set. All configurations are checked against the
/// memory budget before anything is allocated.
pub fn scaling_run(cfg: &ScalingConfig) -> Result<Vec<TimingRecord>> {
    if cfg.ns.is_empty() || cfg.params.is_empty() || cfg.transforms.is_empty() {
        return Err(Error::param("sizes, parameters and transforms must be nonempty"));
    }
    for &n in &cfg.ns {
        check_budget(instance_footprint(n), cfg.max_mem)?;
        for &(c_d, c_b) in &cfg.params {
            for &t in &cfg.transforms {
                let p = derive_params(n, c_d, c_b, t, 0)?;
                check_budget(estimate_footprint(n, n, n, &p, cfg.threads), cfg.max_mem)?;
            }
        }
    }

    let mut out = Vec::new();
    for (k, &n) in cfg.ns.iter().enumerate() {
        let iseed = instance_seed(cfg.seed, k as u64);
        let inst = generate(cfg.kind, n, cfg.rho, iseed)?;
        for (q, &(c_d, c_b)) in cfg.params.iter().enumerate() {
            let hseed = trial_seed(cfg.seed, q as u64);
            for &t in &cfg.transforms {
                let params = derive_params(n, c_d, c_b, t, hseed)?;
                let mut seconds = Vec::with_capacity(cfg.repetitions + 1);
                let mut digest = 0;
                for _ in 0..=cfg.repetitions {
                    let run = timed_sketch(&inst.a, &inst.b, &params, cfg.threads)?;
                    seconds.push(run.seconds);
                    digest = run.digest;
                }
                out.push(TimingRecord {
                    kind: cfg.kind,
                    n,
                    method: t.into(),
                    c_d: Some(c_d),
                    c_b: Some(c_b),
                    d: Some(params.d),
                    b: Some(params.b),
                    seconds,
                    threads: cfg.threads,
                    host: cfg.host.clone(),
                    instance_seed: iseed,
                    hash_seed: Some(hseed),
                    hash_digest: Some(digest),
                });
            }
        }
        if cfg.baseline {
            let seconds = (0..=cfg.repetitions)
                .map(|_| {
                    let start = Instant::now();
                    gemm_reference(&inst.a, &inst.b, cfg.threads).map(|_| start.elapsed().as_secs_f64())
                })
                .collect::<Result<Vec<f64>>>()?;
            out.push(TimingRecord {
                kind: cfg.kind,
                n,
                method: Method::Gemm,
                c_d: None,
                c_b: None,
                d: None,
                b: None,
                seconds,
                threads: cfg.threads,
                host: cfg.host.clone(),
                instance_seed: iseed,
                hash_seed: None,
                hash_digest: None,
            });
        }
    }
    Ok(out)
}
