//! Run reports and trace serialization.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use wrdyn_core::dynamics::{RunStatus, StepRecord, WRTrace};
use wrdyn_core::identities::{IdentityReport, RESIDUAL_NAMES};
use wrdyn_core::matcore::{Mat, PSDMatrix};
use wrdyn_core::structure::ClassificationResult;

use crate::spec::TraceFormat;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ActiveSummary {
    pub dim: usize,
    pub tau: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    /// Stabilization index `N`.
    pub stabilized_at: Option<usize>,
    pub active: Option<ActiveSummary>,
    pub classification: Option<ClassificationResult>,
    pub classification_error: Option<String>,
    /// Row-major `[re, im]` entries of the last iterate.
    pub limit_estimate: Vec<Vec<[f64; 2]>>,
    pub limit_eigenvalues: Vec<f64>,
    pub limit_rank: usize,
    /// Largest value of each identity residual; `null` when never evaluated.
    pub max_residuals: BTreeMap<String, Option<f64>>,
    pub identities_pass: bool,
    pub converged: bool,
    pub converged_at: Option<usize>,
    pub steps: usize,
    pub status: RunStatus,
}

/// Relative eigenvalue threshold used to count the rank of a limit.
pub const LIMIT_RANK_TOL: f64 = 1e-6;

/// Eigenvalues above `LIMIT_RANK_TOL · max(1, ‖R_0‖)`.
pub fn limit_rank(limit: &PSDMatrix, scale: f64) -> usize {
    let cut = LIMIT_RANK_TOL * scale.max(1.0);
    limit.eigenvalues().iter().filter(|&&l| l > cut).count()
}

pub fn mat_entries(m: &Mat) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

impl RunReport {
    pub fn new(trace: &WRTrace, audit: &IdentityReport, classification: Result<ClassificationResult, String>, norm_r0: f64) -> Self {
        let (classification, classification_error) = match classification {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e)),
        };
        RunReport {
            stabilized_at: trace.stabilized_at,
            active: trace.active.as_ref().map(|a| ActiveSummary { dim: a.dim(), tau: a.tau, rho: a.rho }),
            classification,
            classification_error,
            limit_estimate: mat_entries(trace.limit_estimate.as_mat()),
            limit_eigenvalues: trace.limit_estimate.eigenvalues().to_vec(),
            limit_rank: limit_rank(&trace.limit_estimate, norm_r0),
            max_residuals: audit.max.iter().map(|(n, v)| (n.to_string(), v)).collect(),
            identities_pass: audit.passes(),
            converged: trace.converged,
            converged_at: trace.converged_at,
            steps: trace.records.len().saturating_sub(1),
            status: trace.status,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

const SCALAR_COLUMNS: [&str; 9] = ["n", "rank", "lambda_min", "lambda_max", "det", "log_det", "trace", "gap", "weight_norm"];

/// Scalar part of a step record, as stored in CSV traces.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRecord {
    pub n: usize,
    pub rank: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub det: f64,
    pub log_det: f64,
    pub trace: f64,
    pub gap: f64,
    pub weight_norm: f64,
    pub residuals: BTreeMap<String, Option<f64>>,
}

impl From<&StepRecord> for CsvRecord {
    fn from(r: &StepRecord) -> Self {
        CsvRecord {
            n: r.n,
            rank: r.rank,
            lambda_min: r.lambda_min,
            lambda_max: r.lambda_max,
            det: r.det,
            log_det: r.log_det,
            trace: r.trace,
            gap: r.gap,
            weight_norm: r.weight_norm,
            residuals: r.residuals.iter().map(|(n, v)| (n.to_string(), v)).collect(),
        }
    }
}

// Display for f64 is the shortest string that parses back to the same value.
fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trace(path: &Path, records: &[StepRecord], format: TraceFormat) -> Result<()> {
    match format {
        TraceFormat::Json => write_json(path, &records),
        TraceFormat::Csv => {
            let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
            w.write_record(SCALAR_COLUMNS.iter().chain(RESIDUAL_NAMES.iter()))?;
            for r in records {
                let c = CsvRecord::from(r);
                let mut row = vec![c.n.to_string(), c.rank.to_string()];
                row.extend([c.lambda_min, c.lambda_max, c.det, c.log_det, c.trace, c.gap, c.weight_norm].map(|x| x.to_string()));
                row.extend(RESIDUAL_NAMES.iter().map(|n| fmt_opt(c.residuals[*n])));
                w.write_record(&row)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

pub fn read_json_trace(path: &Path) -> Result<Vec<StepRecord>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

pub fn read_csv_trace(path: &Path) -> Result<Vec<CsvRecord>> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let expected: Vec<&str> = SCALAR_COLUMNS.iter().chain(RESIDUAL_NAMES.iter()).copied().collect();
    if header != expected {
        bail!("unexpected trace header {header:?}");
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let f = |i: usize| -> Result<f64> { Ok(row[i].parse()?) };
        let mut residuals = BTreeMap::new();
        for (k, name) in RESIDUAL_NAMES.iter().enumerate() {
            let cell = &row[SCALAR_COLUMNS.len() + k];
            residuals.insert(name.to_string(), if cell.is_empty() { None } else { Some(cell.parse()?) });
        }
        out.push(CsvRecord {
            n: row[0].parse()?,
            rank: row[1].parse()?,
            lambda_min: f(2)?,
            lambda_max: f(3)?,
            det: f(4)?,
            log_det: f(5)?,
            trace: f(6)?,
            gap: f(7)?,
            weight_norm: f(8)?,
            residuals,
        });
    }
    Ok(out)
}
