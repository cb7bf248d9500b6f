//! The `run`, `check` and `sweep` subcommands.

use std::io::Write;
use std::path::Path;

use log::{debug, error, info, warn};
use wrdyn_core::dynamics::{iterate, RunStatus, WRConfig, WRTrace};
use wrdyn_core::identities::{audit_trace, tolerance, IdentityReport};
use wrdyn_core::oracle::{cross_validate, weighted_recursion, weighted_start, CrossValidation};
use wrdyn_core::structure::predict_limit_with;
use wrdyn_core::Error;

use crate::report::{write_json, write_trace, RunReport};
use crate::spec::{Overrides, RunSpec, SpecError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SPEC: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_BREAKDOWN: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

/// Steps compared against the scalar recursion in `check`.
pub const ORACLE_STEPS: usize = 50;
pub const ORACLE_TOL: f64 = 1e-10;

/// Outcome of a single instance.
pub struct Outcome {
    pub cfg: WRConfig,
    pub trace: WRTrace,
    pub audit: IdentityReport,
    pub report: RunReport,
}

pub fn exit_for(err: &Error) -> i32 {
    match err {
        Error::NumericalBreakdown { .. } => EXIT_BREAKDOWN,
        _ => EXIT_SPEC,
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<(RunSpec, WRConfig), SpecError> {
    let mut spec = RunSpec::load(path)?;
    spec.apply(overrides);
    let cfg = spec.config()?;
    Ok((spec, cfg))
}

/// Iterates one configuration and assembles its report.
pub fn execute(cfg: WRConfig) -> Result<Outcome, Error> {
    let trace = iterate(&cfg)?;
    let audit = audit_trace(&trace);
    let classification = predict_limit_with(&cfg).map_err(|e| e.to_string());
    let report = RunReport::new(&trace, &audit, classification, cfg.r0.norm());
    Ok(Outcome { cfg, trace, audit, report })
}

fn save(spec: &RunSpec, out: &Outcome) -> anyhow::Result<()> {
    if let Some(p) = &spec.outputs.trace_path {
        write_trace(p, &out.trace.records, spec.outputs.format)?;
        info!("trace written to {}", p.display());
    }
    if let Some(p) = &spec.outputs.report_path {
        write_json(p, &out.report)?;
        info!("report written to {}", p.display());
    }
    Ok(())
}

fn prepare(path: &Path, overrides: &Overrides) -> Result<(RunSpec, Outcome), i32> {
    let (spec, cfg) = load(path, overrides).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_SPEC
    })?;
    debug!("dim {} rank_tol {:e} conv_tol {:e} max_iter {}", cfg.r0.dim(), cfg.rank_tol, cfg.conv_tol, cfg.max_iter);
    let out = execute(cfg).map_err(|e| {
        eprintln!("error: {e}");
        exit_for(&e)
    })?;
    Ok((spec, out))
}

fn status_code(trace: &WRTrace) -> i32 {
    match trace.status {
        RunStatus::Converged => EXIT_OK,
        RunStatus::MaxIterExceeded => EXIT_MAX_ITER,
    }
}

pub fn cmd_run(path: &Path, overrides: &Overrides) -> i32 {
    let (spec, out) = match prepare(path, overrides) {
        Ok(v) => v,
        Err(code) => return code,
    };
    if let Err(e) = save(&spec, &out) {
        eprintln!("error: {e:#}");
        return EXIT_SPEC;
    }
    if spec.outputs.report_path.is_none() {
        println!("{}", serde_json::to_string_pretty(&out.report).expect("report serializes"));
    } else {
        let r = &out.report;
        let kind = r.classification.as_ref().map(|c| format!("{:?}", c.kind)).unwrap_or_else(|| "-".into());
        println!("steps {} converged {} N {:?} kind {kind} limit_rank {}", r.steps, r.converged, r.stabilized_at, r.limit_rank);
    }
    if out.trace.status == RunStatus::MaxIterExceeded {
        warn!("max_iter {} reached before convergence", out.cfg.max_iter);
    }
    status_code(&out.trace)
}

/// Perturbs one record so that the audit must notice.
pub fn inject_fault(trace: &mut WRTrace) {
    let n0 = trace.active.as_ref().map_or(0, |a| a.n);
    let idx = trace.records.iter().position(|r| r.n > n0).unwrap_or(trace.records.len() - 1);
    let r = &mut trace.records[idx];
    r.log_det += 1e-3;
    r.det *= 1e-3f64.exp();
    if let Some(c) = r.block_coords.as_mut() {
        c.a *= 1.0 + 1e-3;
    }
    info!("fault injected at step {}", r.n);
}

/// Scalar cross-validation when the active block is 2×2 with `u_E ≠ 0`.
pub fn oracle_check(trace: &WRTrace) -> Option<Result<CrossValidation, Error>> {
    let active = trace.active.as_ref()?;
    if active.dim() != 2 || active.e.is_none() {
        return None;
    }
    Some(weighted_start(active).and_then(|(xi, zeta, d, rho)| {
        let s = weighted_recursion(xi, zeta, d, rho, ORACLE_STEPS)?;
        cross_validate(trace, &s, ORACLE_TOL)
    }))
}

fn print_table(w: &mut impl Write, audit: &IdentityReport, oracle: &Option<Result<CrossValidation, Error>>) -> std::io::Result<()> {
    writeln!(w, "{:<24} {:>12} {:>10}  status", "identity", "max", "tol")?;
    for (name, v) in audit.max.iter() {
        let tol = tolerance(name).unwrap_or(0.0);
        match v {
            Some(v) => writeln!(w, "{name:<24} {v:>12.3e} {tol:>10.0e}  {}", if v <= tol { "ok" } else { "FAIL" })?,
            None => writeln!(w, "{name:<24} {:>12} {tol:>10.0e}  vacuous", "-")?,
        }
    }
    if let Some(s) = &audit.summability {
        writeln!(w, "{:<24} {:>12.3e} {:>10.0e}  {}", "summability_total", s.residual, tolerance("summability").unwrap(), if s.passes() { "ok" } else { "FAIL" })?;
    }
    if let Some(o) = &audit.offdiag {
        writeln!(w, "{:<24} {:>12.3e} {:>10.0e}  {}", "final_b", o.final_b, wrdyn_core::identities::TOL_FINAL_DECOUPLING, if o.final_b <= wrdyn_core::identities::TOL_FINAL_DECOUPLING { "ok" } else { "FAIL" })?;
    }
    if let Some(g) = &audit.growth {
        writeln!(w, "{:<24} {:>12} {:>10}  {}", "growth_bounds", g.checked, "-", if g.holds() { "ok" } else { "FAIL" })?;
    }
    if let Some(from) = audit.inverse_skipped_from {
        writeln!(w, "inverse checks skipped from step {from}")?;
    }
    match oracle {
        Some(Ok(v)) => writeln!(w, "{:<24} {:>12.3e} {:>10.0e}  {}", "scalar_oracle", v.max_rel, v.tol, if v.passed() { "ok" } else { "FAIL" })?,
        Some(Err(e)) => writeln!(w, "{:<24} {:>12} {:>10}  FAIL ({e})", "scalar_oracle", "-", "-")?,
        None => writeln!(w, "{:<24} {:>12} {:>10}  not applicable", "scalar_oracle", "-", "-")?,
    }
    Ok(())
}

pub fn cmd_check(path: &Path, overrides: &Overrides, fault: bool) -> i32 {
    let (spec, mut out) = match prepare(path, overrides) {
        Ok(v) => v,
        Err(code) => return code,
    };
    if fault {
        inject_fault(&mut out.trace);
        out.audit = audit_trace(&out.trace);
    }
    let oracle = oracle_check(&out.trace);
    let _ = print_table(&mut std::io::stdout().lock(), &out.audit, &oracle);
    if let Err(e) = save(&spec, &out) {
        eprintln!("error: {e:#}");
        return EXIT_SPEC;
    }
    let oracle_ok = oracle.as_ref().is_none_or(|o| o.as_ref().is_ok_and(|v| v.passed()));
    if !out.audit.passes() || !oracle_ok {
        error!("identity check failed (first failure at step {:?})", out.audit.first_failure);
        return EXIT_CHECK_FAILED;
    }
    status_code(&out.trace)
}
