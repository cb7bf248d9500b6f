//! JSON run and sweep specifications.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wrdyn_core::dynamics::WRConfig;
use wrdyn_core::matcore::{HermitianMatrix, Mat, PSDMatrix, UnitVector};
use wrdyn_core::{C64, DEFAULT_CONV_TOL, DEFAULT_COUPLING_TOL, DEFAULT_MAX_ITER, DEFAULT_RANK_TOL, DEFAULT_STAB_WINDOW};

/// A spec that failed to load.
#[derive(Debug)]
pub enum SpecError {
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed JSON, with the 1-based position reported by the parser.
    Parse { path: PathBuf, line: usize, column: usize, msg: String },
    Invalid(String),
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            SpecError::Parse { path, line, column, msg } => {
                write!(f, "{}:{line}:{column}: {msg}", path.display())
            }
            SpecError::Invalid(msg) => write!(f, "invalid spec: {msg}"),
        }
    }
}

impl std::error::Error for SpecError {}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default = "default_conv_tol")]
    pub conv_tol: f64,
    #[serde(default = "default_coupling_tol")]
    pub coupling_tol: f64,
}

fn default_rank_tol() -> f64 {
    DEFAULT_RANK_TOL
}
fn default_conv_tol() -> f64 {
    DEFAULT_CONV_TOL
}
fn default_coupling_tol() -> f64 {
    DEFAULT_COUPLING_TOL
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank_tol: DEFAULT_RANK_TOL, conv_tol: DEFAULT_CONV_TOL, coupling_tol: DEFAULT_COUPLING_TOL }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub trace_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    #[serde(default)]
    pub format: TraceFormat,
}

/// A single instance: `R_0` as row-major `[re, im]` entries and the vector `u`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub u: Vec<[f64; 2]>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub stab_window: Option<usize>,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Command-line values that take precedence over the spec.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub rank_tol: Option<f64>,
    pub conv_tol: Option<f64>,
    pub max_iter: Option<usize>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|e| SpecError::Parse {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

fn resolve(base: &Path, p: &Option<PathBuf>) -> Option<PathBuf> {
    p.as_ref().map(|p| if p.is_absolute() { p.clone() } else { base.join(p) })
}

impl RunSpec {
    /// Reads a spec; relative output paths are taken relative to the spec file.
    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let mut spec: RunSpec = parse_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        spec.outputs.trace_path = resolve(base, &spec.outputs.trace_path);
        spec.outputs.report_path = resolve(base, &spec.outputs.report_path);
        Ok(spec)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.rank_tol {
            self.tolerances.rank_tol = v;
        }
        if let Some(v) = o.conv_tol {
            self.tolerances.conv_tol = v;
        }
        if let Some(v) = o.max_iter {
            self.max_iter = v;
        }
    }

    /// Builds the engine configuration. `u` is normalized.
    pub fn config(&self) -> Result<WRConfig, SpecError> {
        let n = self.matrix.len();
        if n == 0 {
            return Err(SpecError::Invalid("matrix is empty".into()));
        }
        if let Some((i, row)) = self.matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(SpecError::Invalid(format!("matrix is not square: row {i} has {} entries, expected {n}", row.len())));
        }
        if self.u.len() != n {
            return Err(SpecError::Invalid(format!("u has {} entries, matrix is {n}x{n}", self.u.len())));
        }
        let rows: Vec<Vec<C64>> = self.matrix.iter().map(|r| r.iter().map(|&[a, b]| C64::new(a, b)).collect()).collect();
        let h = HermitianMatrix::new(Mat::from_rows(&rows)).map_err(|e| SpecError::Invalid(format!("matrix: {e}")))?;
        let r0 = PSDMatrix::new(h, self.tolerances.rank_tol).map_err(|e| SpecError::Invalid(format!("matrix: {e}")))?;
        let u: Vec<C64> = self.u.iter().map(|&[a, b]| C64::new(a, b)).collect();
        let u = UnitVector::normalize(&u).map_err(|e| SpecError::Invalid(format!("u: {e}")))?;
        let cfg = WRConfig {
            r0,
            u,
            rank_tol: self.tolerances.rank_tol,
            conv_tol: self.tolerances.conv_tol,
            coupling_tol: self.tolerances.coupling_tol,
            stab_window: self.stab_window.unwrap_or(DEFAULT_STAB_WINDOW),
            max_iter: self.max_iter,
        };
        cfg.validate().map_err(|e| SpecError::Invalid(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// `G G* + εI` active block with a Haar-random weight direction.
    Wishart,
    /// Coupled 2×2 block plus a frozen reducing part.
    CoupledBlock,
    /// `λ e e* ⊕ B` with weight direction `e`.
    DecoupledTransverse,
}

/// Half-open seed range `[start, end)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Collect {
    #[serde(default = "yes")]
    pub limit_rank_histogram: bool,
    #[serde(default = "yes")]
    pub residual_max: bool,
}

fn yes() -> bool {
    true
}

impl Default for Collect {
    fn default() -> Self {
        Collect { limit_rank_histogram: true, residual_max: true }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub dims: Vec<usize>,
    pub tau_targets: Vec<f64>,
    pub seeds: SeedRange,
    pub ensemble: Ensemble,
    #[serde(default)]
    pub collect: Collect,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let spec: SweepSpec = parse_json(path)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.rank_tol {
            self.tolerances.rank_tol = v;
        }
        if let Some(v) = o.conv_tol {
            self.tolerances.conv_tol = v;
        }
        if let Some(v) = o.max_iter {
            self.max_iter = v;
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let bad = |m: &str| Err(SpecError::Invalid(m.into()));
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return bad("dims must be nonempty and each at least 2");
        }
        if self.tau_targets.is_empty() || self.tau_targets.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return bad("tau_targets must be nonempty and inside (0, 1)");
        }
        if self.seeds.end <= self.seeds.start {
            return bad("seed range is empty");
        }
        let t = &self.tolerances;
        if ![t.rank_tol, t.conv_tol, t.coupling_tol].iter().all(|&x| x > 0.0 && x.is_finite()) {
            return bad("tolerances must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        Ok(())
    }
}
