//! Batch runs over random ensembles.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{Context, Result};
use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wrdyn_core::dynamics::{iterate, WRConfig};
use wrdyn_core::identities::audit_trace;

use crate::commands::{EXIT_BREAKDOWN, EXIT_OK, EXIT_SPEC};
use crate::ensemble::draw;
use crate::report::{limit_rank, write_json};
use crate::spec::{Ensemble, Overrides, SweepSpec};

/// One CSV row. Result fields are empty when the run broke down.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SweepRow {
    pub seed: u64,
    pub dim: usize,
    pub active_dim: Option<usize>,
    pub tau: Option<f64>,
    pub limit_rank: Option<usize>,
    pub max_residual: Option<f64>,
    pub steps: Option<usize>,
    pub wall_time: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct SweepSummary {
    pub ensemble: Option<Ensemble>,
    pub runs: usize,
    pub breakdowns: usize,
    pub not_converged: usize,
    pub max_residual: Option<f64>,
    /// `active_dim → limit_rank → count`.
    pub limit_rank_histogram: Option<BTreeMap<usize, BTreeMap<usize, usize>>>,
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub out: PathBuf,
    /// Worker threads; `0` uses all available cores.
    pub workers: usize,
    /// Write 0 in the `wall_time` column so outputs are reproducible.
    pub no_timing: bool,
}

pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

struct Cell {
    seed: u64,
    dim: usize,
    tau: f64,
}

fn run_cell(spec: &SweepSpec, c: &Cell) -> (SweepRow, bool, bool) {
    let start = Instant::now();
    let inst = draw(spec.ensemble, c.dim, c.tau, c.seed);
    let norm = inst.r0.norm();
    let cfg = WRConfig {
        rank_tol: spec.tolerances.rank_tol,
        conv_tol: spec.tolerances.conv_tol,
        coupling_tol: spec.tolerances.coupling_tol,
        max_iter: spec.max_iter,
        ..WRConfig::new(inst.r0, inst.u).expect("ensemble draws are valid")
    };
    let mut row = SweepRow { seed: c.seed, dim: c.dim, active_dim: None, tau: None, limit_rank: None, max_residual: None, steps: None, wall_time: 0.0 };
    let (broke, converged) = match iterate(&cfg) {
        Ok(trace) => {
            let audit = audit_trace(&trace);
            row.active_dim = Some(trace.active.as_ref().map_or(0, |a| a.dim()));
            row.tau = Some(trace.active.as_ref().map_or(0.0, |a| a.tau));
            row.limit_rank = Some(limit_rank(&trace.limit_estimate, norm));
            row.max_residual = Some(audit.worst().0);
            row.steps = Some(trace.records.len() - 1);
            (false, trace.converged)
        }
        Err(e) => {
            warn!("seed {} dim {} tau {}: {e}", c.seed, c.dim, c.tau);
            (true, false)
        }
    };
    row.wall_time = start.elapsed().as_secs_f64();
    debug!("seed {} dim {} tau {} done in {:.3}s", c.seed, c.dim, c.tau, row.wall_time);
    (row, broke, converged)
}

fn sort_key(r: &SweepRow) -> (u64, usize, u64) {
    (r.seed, r.dim, r.tau.unwrap_or(-1.0).to_bits())
}

/// Runs every `(dim, τ, seed)` cell. Rows are appended to `sweep.partial.csv`
/// as they finish; `sweep.csv` (sorted by seed) and `summary.json` are written
/// at the end.
pub fn run_sweep(spec: &SweepSpec, opts: &SweepOptions) -> Result<SweepResult> {
    fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    let cells: Vec<Cell> = spec
        .dims
        .iter()
        .flat_map(|&dim| spec.tau_targets.iter().flat_map(move |&tau| (spec.seeds.start..spec.seeds.end).map(move |seed| Cell { seed, dim, tau })))
        .collect();
    info!("sweep: {} runs on {:?} ensemble", cells.len(), spec.ensemble);
    let partial_path = opts.out.join("sweep.partial.csv");
    let partial = Mutex::new(csv::Writer::from_path(&partial_path)?);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.workers).build()?;
    let results: Vec<(SweepRow, bool, bool)> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| {
                let (mut row, broke, conv) = run_cell(spec, c);
                if opts.no_timing {
                    row.wall_time = 0.0;
                }
                let mut w = partial.lock().unwrap();
                if w.serialize(&row).and_then(|_| w.flush().map_err(Into::into)).is_err() {
                    warn!("could not append to {}", partial_path.display());
                }
                (row, broke, conv)
            })
            .collect()
    });
    drop(partial);

    let mut summary = SweepSummary { ensemble: Some(spec.ensemble), runs: results.len(), ..Default::default() };
    let mut hist: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (row, broke, conv) in &results {
        summary.breakdowns += *broke as usize;
        summary.not_converged += (!broke && !conv) as usize;
        if let Some(m) = row.max_residual {
            summary.max_residual = Some(summary.max_residual.map_or(m, |s: f64| s.max(m)));
        }
        if let (Some(a), Some(l)) = (row.active_dim, row.limit_rank) {
            *hist.entry(a).or_default().entry(l).or_default() += 1;
        }
    }
    if spec.collect.limit_rank_histogram {
        summary.limit_rank_histogram = Some(hist);
    }
    if !spec.collect.residual_max {
        summary.max_residual = None;
    }

    let mut rows: Vec<SweepRow> = results.into_iter().map(|r| r.0).collect();
    rows.sort_by_key(sort_key);
    let mut w = csv::Writer::from_path(opts.out.join("sweep.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    write_json(&opts.out.join("summary.json"), &summary)?;
    fs::remove_file(&partial_path).ok();
    Ok(SweepResult { rows, summary })
}

pub fn cmd_sweep(path: &Path, overrides: &Overrides, opts: &SweepOptions) -> i32 {
    let mut spec = match SweepSpec::load(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_SPEC;
        }
    };
    spec.apply(overrides);
    if let Err(e) = spec.validate() {
        eprintln!("error: {e}");
        return EXIT_SPEC;
    }
    let res = match run_sweep(&spec, opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_SPEC;
        }
    };
    let s = &res.summary;
    println!("runs {} breakdowns {} not_converged {} max_residual {:?}", s.runs, s.breakdowns, s.not_converged, s.max_residual);
    if let Some(h) = &s.limit_rank_histogram {
        for (dim, counts) in h {
            let parts: Vec<String> = counts.iter().map(|(r, n)| format!("{r}:{n}")).collect();
            println!("active_dim {dim}: limit_rank {}", parts.join(" "));
        }
    }
    if s.breakdowns > 0 {
        EXIT_BREAKDOWN
    } else {
        EXIT_OK
    }
}
