mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;
use sketchmul::experiments::{
    correctness_experiment, correctness_rows, grid_rows, grid_search, instance_seed, scaling_run, timing_rows,
    variance_experiment, variance_rows, write_rows, CorrectnessConfig, GridConfig, OutputFormat, RunInfo,
    ScalingConfig,
};
use sketchmul::instances::{generate, Instance};
use sketchmul::sketch::estimate_footprint;
use sketchmul::{
    compress, decompress_all, derive_params, gemm_reference, DenseMatrix, Error, SketchHashes, SketchParams,
    Transform,
};

use args::{Cli, Command, ExperimentCommand, Global};

const BUILD: &str = env!("SKETCHMUL_BUILD");

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for anything the user can fix by changing arguments, 1 otherwise.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::MemoryBudget { .. } => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> sketchmul::Result<ExitCode> {
    let g = cli.global;
    match cli.command {
        Command::Multiply(m) => multiply(&g, m),
        Command::Gen(a) => {
            let inst = generate(a.kind, a.n, a.rho, g.seed)?;
            inst.save(&a.out)?;
            let (pa, pb, pj) = Instance::paths(&a.out);
            eprintln!("wrote {}, {}, {}", pa.display(), pb.display(), pj.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(a) => verify(&g, &a.prefix, a.tol),
        Command::Experiment(e) => experiment(&g, e),
    }
}

fn check_budget(required: u64, g: &Global) -> sketchmul::Result<()> {
    match g.max_mem {
        Some(budget) if required > budget => Err(Error::MemoryBudget { required, budget }),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct MultiplyMeta<'a> {
    rows: usize,
    inner: usize,
    cols: usize,
    params: &'a SketchParams,
    hashes: &'a SketchHashes,
    threads: usize,
    seconds: f64,
    build: &'a str,
}

fn multiply(g: &Global, m: args::Multiply) -> sketchmul::Result<ExitCode> {
    let a = DenseMatrix::load(&m.a)?;
    let b = DenseMatrix::load(&m.b)?;
    if a.cols() != b.rows() {
        return Err(Error::InvalidParameter(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.cols();
    let params = match (m.width, m.depth) {
        (Some(w), Some(d)) => SketchParams::new(n, w, d, g.transform, g.seed)?,
        (None, None) => derive_params(n, m.c_d, m.c_b, g.transform, g.seed)?,
        _ => return Err(Error::InvalidParameter("--width and --depth must be given together".into())),
    };
    check_budget(estimate_footprint(a.rows(), n, b.cols(), &params, g.threads), g)?;

    let start = Instant::now();
    let sketch = compress(&a, &b, &params, g.threads)?;
    let estimate = decompress_all(&sketch, g.threads);
    let seconds = start.elapsed().as_secs_f64();
    estimate.save(&m.out)?;
    if let Some(path) = &m.sketch_out {
        sketch.write_to(BufWriter::new(File::create(path)?))?;
    }
    let threads = sketchmul::resolve_threads(g.threads);
    if let Some(path) = &m.meta {
        let meta = MultiplyMeta {
            rows: a.rows(),
            inner: n,
            cols: b.cols(),
            params: &params,
            hashes: sketch.hashes(),
            threads,
            seconds,
            build: BUILD,
        };
        std::fs::write(path, serde_json::to_string_pretty(&meta)?)?;
    }
    eprintln!(
        "n={n} b={} d={} transform={} threads={threads} seed={} time={seconds:.3}s",
        params.b, params.d, params.transform, params.seed
    );
    Ok(ExitCode::SUCCESS)
}

fn verify(g: &Global, prefix: &Path, tol: f64) -> sketchmul::Result<ExitCode> {
    let inst = Instance::load(prefix)?;
    let c = gemm_reference(&inst.a, &inst.b, g.threads)?;
    let mut worst: f64 = 0.0;
    if let Some(nz) = &inst.exact_nonzeros {
        let mut expected = DenseMatrix::zeros(inst.n, inst.n);
        nz.iter().for_each(|e| expected.set(e.i, e.j, e.value));
        worst = c.max_abs_diff(&expected);
    }
    for e in &inst.big_entries {
        worst = worst.max((c.get(e.i, e.j) - e.value).abs());
    }
    let ok = worst <= tol;
    println!(
        "{} n={} kind={} big_entries={} max_deviation={worst:.3e} tolerance={tol:e}",
        if ok { "ok" } else { "mismatch" },
        inst.n,
        inst.kind,
        inst.big_entries.len()
    );
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn emit<T: Serialize>(rows: &[T], format: OutputFormat, out: Option<&Path>) -> sketchmul::Result<()> {
    match out {
        Some(p) => write_rows(rows, format, BufWriter::new(File::create(p)?)),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_rows(rows, format, &mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn experiment(g: &Global, e: ExperimentCommand) -> sketchmul::Result<ExitCode> {
    let info = RunInfo::new(g.seed, g.threads).with_build(BUILD);
    match e {
        ExperimentCommand::Variance(v) => {
            let widths = match v.widths {
                Some(w) => w,
                None => {
                    let mut w = Vec::new();
                    let mut b = (v.n / 4).max(2);
                    while b <= 4 * v.n {
                        w.push(b);
                        b *= 2;
                    }
                    w
                }
            };
            if widths.iter().any(|&b| !b.is_power_of_two() || b < 2) {
                return Err(Error::InvalidParameter("sketch widths must be powers of two >= 2".into()));
            }
            if v.trials < 2 {
                return Err(Error::InvalidParameter(format!("need at least 2 trials, got {}", v.trials)));
            }
            let inst = generate(v.kind, v.n, v.rho, instance_seed(g.seed, 0))?;
            let entry = match v.entry {
                Some(e) => e,
                None => (inst.big_entries[0].i, inst.big_entries[0].j),
            };
            let r = variance_experiment(&inst.a, &inst.b, entry, &widths, v.trials, g.transform, g.seed, g.threads)?;
            emit(&variance_rows(&r, &info), g.format, v.output.as_deref())?;
        }
        ExperimentCommand::Correctness(c) => {
            let cfg = CorrectnessConfig {
                kind: c.kind,
                n: c.n,
                rho: c.rho,
                c_d: c.c_d,
                c_b: c.c_b,
                transform: g.transform,
                matrices: c.matrices,
                hash_reps: c.reps,
                seed: g.seed,
                threads: g.threads,
            };
            let p = derive_params(c.n, c.c_d, c.c_b, g.transform, 0)?;
            check_budget(estimate_footprint(c.n, c.n, c.n, &p, g.threads), g)?;
            let runs = correctness_experiment(&cfg)?;
            emit(&correctness_rows(&cfg, &runs, &info), g.format, c.output.as_deref())?;
        }
        ExperimentCommand::Gridsearch(s) => {
            let mut cfg = GridConfig::new(s.kind, s.n, g.transform, g.seed);
            cfg.rho = s.rho;
            if let Some(grid) = s.cd_grid {
                cfg.c_d_grid = grid;
            }
            if let Some(grid) = s.cb_grid {
                cfg.c_b_grid = grid;
            }
            cfg.repetitions = s.reps;
            cfg.confirm_reps = s.confirm_reps;
            cfg.threads = g.threads;
            for &c_d in &cfg.c_d_grid {
                for &c_b in &cfg.c_b_grid {
                    let p = derive_params(s.n, c_d, c_b, g.transform, 0)?;
                    check_budget(estimate_footprint(s.n, s.n, s.n, &p, g.threads), g)?;
                }
            }
            let cells = grid_search(&cfg)?;
            emit(&grid_rows(&cfg, &cells, &info), g.format, s.output.as_deref())?;
        }
        ExperimentCommand::Scaling(s) => {
            let mut cfg = ScalingConfig::new(s.kind, s.ns, s.params, g.seed);
            cfg.transforms = if s.all_transforms { Transform::ALL.to_vec() } else { vec![g.transform] };
            cfg.repetitions = s.reps;
            cfg.threads = g.threads;
            cfg.baseline = s.baseline;
            cfg.max_mem = g.max_mem;
            cfg.rho = s.rho;
            let records = scaling_run(&cfg)?;
            emit(&timing_rows(&records, &info), g.format, s.output.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
