use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{detect_stabilization, ActiveBlock, WRConfig, WREngine};
use crate::error::Result;
use crate::identities::{
    block_coordinates_in, check_a_recursion, check_b_decrement, check_det_decay, check_inverse_update,
    growth_residuals, inverse_stats, offdiag_excess, summability_residual, transverse_residual,
    BlockCoordinates, DefectFrame, InverseStats, Residuals,
};
use crate::matcore::{EigenDecomposition, HermitianMatrix, Mat, OrthonormalBasis, PSDMatrix};

/// Spectra are stored in full only up to this ambient dimension.
const FULL_SPECTRUM_MAX_DIM: usize = 32;
/// Inverse-side checks stop once `λ_min(T_n) < INVERSE_FLOOR·‖T_N‖`.
const INVERSE_FLOOR: f64 = 1e3 * f64::EPSILON;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    pub n: usize,
    /// Ambient spectrum, ascending; absent above 32 dimensions.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub eigenvalues: Option<Vec<f64>>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Product of the nonzero eigenvalues, i.e. `det T_n` on the support.
    pub det: f64,
    pub log_det: f64,
    pub rank: usize,
    pub trace: f64,
    /// `⟨u, R_n u⟩`.
    pub gap: f64,
    /// `‖P_{ran R_n} u‖`.
    pub weight_norm: f64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub block_coords: Option<BlockCoordinates>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub inverse: Option<InverseStats>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub residuals: Residuals,
    /// Support basis, kept only while stabilization is undecided.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub support: Option<OrthonormalBasis>,
}

impl StepRecord {
    fn of(eng: &WREngine) -> Self {
        let dim = eng.dim();
        let k = eng.rank();
        let sup = eng.support_eigenvalues();
        let eigenvalues = (dim <= FULL_SPECTRUM_MAX_DIM).then(|| {
            let mut v = alloc::vec![0.0; dim - k];
            v.extend_from_slice(&sup);
            v
        });
        let log_det = eng.log_det();
        StepRecord {
            n: eng.n(),
            eigenvalues,
            lambda_min: if k < dim { 0.0 } else { sup.first().copied().unwrap_or(0.0) },
            lambda_max: sup.last().copied().unwrap_or(0.0),
            det: log_det.exp(),
            log_det,
            rank: k,
            trace: eng.trace(),
            gap: eng.gap(),
            weight_norm: eng.weight_norm(),
            block_coords: None,
            inverse: None,
            residuals: Residuals::default(),
            support: Some(eng.support()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RunStatus {
    Converged,
    MaxIterExceeded,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WRTrace {
    pub records: Vec<StepRecord>,
    pub limit_estimate: PSDMatrix,
    pub converged: bool,
    /// Smallest `n` with `gap(R_n) ≤ conv_tol` and `‖R_{n+1} − R_n‖ ≤ conv_tol·max(1, ‖R_0‖)`.
    pub converged_at: Option<usize>,
    pub stabilized_at: Option<usize>,
    pub active: Option<ActiveBlock>,
    pub status: RunStatus,
    /// First step at which inverse-side checks were skipped.
    pub inverse_skipped_from: Option<usize>,
}

impl WRTrace {
    /// Largest recorded value of each residual.
    pub fn max_residuals(&self) -> Residuals {
        let mut out = Residuals::default();
        for r in &self.records {
            let cur = &r.residuals;
            let m = |a: &mut Option<f64>, b: Option<f64>| {
                if let Some(b) = b {
                    *a = Some(a.map_or(b, |a: f64| a.max(b)));
                }
            };
            m(&mut out.det_decay, cur.det_decay);
            m(&mut out.a_recursion, cur.a_recursion);
            m(&mut out.b_decrement, cur.b_decrement);
            m(&mut out.summability, cur.summability);
            m(&mut out.offdiag_cs, cur.offdiag_cs);
            m(&mut out.inv_update, cur.inv_update);
            m(&mut out.beta_bound, cur.beta_bound);
            m(&mut out.s_bound, cur.s_bound);
            m(&mut out.lambda_min_bound, cur.lambda_min_bound);
            m(&mut out.transverse_persistence, cur.transverse_persistence);
        }
        out
    }
}

struct Snapshot {
    t: PSDMatrix,
    coords: Option<BlockCoordinates>,
    stats: Option<InverseStats>,
    log_det: f64,
}

/// Follows the weighted recursion on a stabilized block and fills in the
/// per-step certificate data.
struct Tracker {
    n0: usize,
    basis: Mat,
    frame: Option<DefectFrame>,
    tau: f64,
    rho: f64,
    norm_t0: f64,
    prev: Option<Snapshot>,
    first_coords: Option<BlockCoordinates>,
    first_stats: Option<InverseStats>,
    weighted_sum: f64,
    decoupled: Option<(f64, HermitianMatrix)>,
    coupling_tol: f64,
    inverse_skipped_from: Option<usize>,
}

impl Tracker {
    fn new(block: &ActiveBlock, coupling_tol: f64) -> Result<Self> {
        let frame = block.e.as_ref().map(DefectFrame::new).transpose()?;
        Ok(Tracker {
            n0: block.n,
            basis: block.e_basis.as_mat().clone(),
            frame,
            tau: block.tau,
            rho: block.rho,
            norm_t0: block.t.norm(),
            prev: None,
            first_coords: None,
            first_stats: None,
            weighted_sum: 0.0,
            decoupled: None,
            coupling_tol,
            inverse_skipped_from: None,
        })
    }

    fn observe(&mut self, eng: &WREngine, rec: &mut StepRecord) -> Result<()> {
        let v = self.basis.adjoint_mul(eng.basis());
        let t = PSDMatrix::from_spectrum(EigenDecomposition {
            eigenvalues: eng.support_eigenvalues(),
            eigenvectors: OrthonormalBasis::from_mat_unchecked(v),
        });
        let m = eng.n() - self.n0;
        let coords = self.frame.as_ref().map(|f| block_coordinates_in(&t, f));
        let mut stats = None;
        if let Some(frame) = &self.frame {
            if self.inverse_skipped_from.is_none() {
                if t.lambda_min() >= INVERSE_FLOOR * self.norm_t0 {
                    stats = Some(inverse_stats(&t, &frame.e)?);
                } else {
                    self.inverse_skipped_from = Some(eng.n());
                }
            }
        }
        let mut res = Residuals::default();
        if let Some(p) = &self.prev {
            res.det_decay = Some(check_det_decay(p.log_det, rec.log_det, self.tau));
            if let (Some(a), Some(b)) = (&p.coords, &coords) {
                res.a_recursion = Some(check_a_recursion(a, b, self.tau));
                res.b_decrement = Some(check_b_decrement(a, b, self.tau));
            }
            if let (Some(_), Some(_), Some(frame)) = (&p.stats, &stats, &self.frame) {
                res.inv_update = Some(check_inverse_update(&p.t, &t, &frame.e, self.tau, self.rho)?.residual);
            }
        }
        if let Some(c) = &coords {
            if self.first_coords.is_none() {
                self.first_coords = Some(c.clone());
                if c.b_norm() <= self.coupling_tol * self.norm_t0 {
                    self.decoupled = Some((c.a, c.big_b.clone()));
                }
            }
            let first = self.first_coords.as_ref().unwrap();
            res.summability = Some(summability_residual(first, c, self.tau * self.weighted_sum));
            res.offdiag_cs = Some(offdiag_excess(c, self.norm_t0));
            if let Some((lambda0, b0)) = &self.decoupled {
                res.transverse_persistence = Some(transverse_residual(c, m, *lambda0, self.tau, b0));
            }
            self.weighted_sum += c.y_norm().powi(2);
        }
        if let Some(st) = &stats {
            let first = *self.first_stats.get_or_insert(*st);
            let (b, s, l) = growth_residuals(m, st, &first, self.tau, self.rho, self.norm_t0, t.dim());
            res.beta_bound = Some(b);
            res.s_bound = Some(s);
            res.lambda_min_bound = Some(l);
        }
        rec.block_coords = coords.clone();
        rec.inverse = stats;
        rec.residuals = res;
        self.prev = Some(Snapshot { t, coords, stats, log_det: rec.log_det });
        Ok(())
    }
}

/// Runs the iteration from `cfg.r0` until convergence or `cfg.max_iter` steps.
///
/// One record is kept per iterate `R_0, R_1, …`. After support stabilization
/// at `N`, records `n ≥ N` also carry block coordinates, inverse statistics
/// and identity residuals of the weighted recursion on the active block.
pub fn iterate(cfg: &WRConfig) -> Result<WRTrace> {
    cfg.validate()?;
    let mut eng = WREngine::new(&cfg.r0, &cfg.u, cfg.rank_tol)?;
    let scale = cfg.r0.norm().max(1.0);
    let mut records = alloc::vec![StepRecord::of(&eng)];
    // Engine states since the last rank change, for retroactive tracking.
    let mut pending: Vec<WREngine> = alloc::vec![eng.clone()];
    let mut tracker: Option<Tracker> = None;
    let mut stabilized_at = None;
    let mut active = None;
    let mut converged_at = None;

    let start_tracking = |n_stab: usize,
                              pending: &mut Vec<WREngine>,
                              records: &mut Vec<StepRecord>|
     -> Result<(Option<Tracker>, Option<ActiveBlock>)> {
        let Some(base) = pending.iter().find(|s| s.n() == n_stab) else {
            return Ok((None, None));
        };
        let block =
            match ActiveBlock::from_support(base.basis(), base.support_eigenvalues(), cfg.u.as_slice(), n_stab, cfg.rank_tol) {
                Ok(b) => b,
                Err(crate::Error::EmptySupport) => return Ok((None, None)),
                Err(e) => return Err(e),
            };
        let mut tr = Tracker::new(&block, cfg.coupling_tol)?;
        for s in pending.iter().filter(|s| s.n() >= n_stab) {
            let idx = records.iter().position(|r| r.n == s.n()).unwrap();
            tr.observe(s, &mut records[idx])?;
        }
        pending.clear();
        for r in records.iter_mut() {
            r.support = None;
        }
        Ok((Some(tr), Some(block)))
    };

    for _ in 0..cfg.max_iter {
        let gap = eng.gap();
        let prev_rank = eng.rank();
        let step = eng.advance()?;
        let mut rec = StepRecord::of(&eng);
        let done = gap <= cfg.conv_tol && step.step_norm <= cfg.conv_tol * scale;
        if let Some(tr) = tracker.as_mut() {
            rec.support = None;
            tr.observe(&eng, &mut rec)?;
            records.push(rec);
        } else {
            if eng.rank() != prev_rank {
                pending.clear();
            }
            pending.push(eng.clone());
            records.push(rec);
            if stabilized_at.is_none() {
                if let Some(n_stab) = detect_stabilization(&records, cfg.rank_tol, cfg.stab_window) {
                    stabilized_at = Some(n_stab);
                    let (t, b) = start_tracking(n_stab, &mut pending, &mut records)?;
                    tracker = t;
                    active = b;
                }
            }
        }
        if done {
            converged_at = Some(eng.n() - 1);
            break;
        }
    }

    if converged_at.is_some() && stabilized_at.is_none() {
        // Converged before the window filled: the support is final.
        let last_rank = records.last().unwrap().rank;
        let n_stab = records.iter().rev().take_while(|r| r.rank == last_rank).last().unwrap().n;
        stabilized_at = Some(n_stab);
        let (t, b) = start_tracking(n_stab, &mut pending, &mut records)?;
        tracker = t;
        active = b;
    }
    for r in records.iter_mut() {
        r.support = None;
    }
    let converged = converged_at.is_some();
    Ok(WRTrace {
        records,
        limit_estimate: eng.state(),
        converged,
        converged_at,
        stabilized_at,
        active,
        status: if converged { RunStatus::Converged } else { RunStatus::MaxIterExceeded },
        inverse_skipped_from: tracker.and_then(|t| t.inverse_skipped_from),
    })
}

/// Outcome of [`stabilize`]: the stabilization index and the active block,
/// which is absent when the stabilized support is `{0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stabilized {
    pub n: usize,
    pub block: Option<ActiveBlock>,
}

/// Runs the iteration only until the support stabilizes (or the run
/// converges, or `cfg.max_iter` steps pass, in which case `None`).
pub fn stabilize(cfg: &WRConfig) -> Result<Option<Stabilized>> {
    cfg.validate()?;
    let mut eng = WREngine::new(&cfg.r0, &cfg.u, cfg.rank_tol)?;
    let scale = cfg.r0.norm().max(1.0);
    let mut records = alloc::vec![StepRecord::of(&eng)];
    let mut states = alloc::vec![eng.clone()];
    let mut found = None;
    for _ in 0..cfg.max_iter {
        let gap = eng.gap();
        let step = eng.advance()?;
        records.push(StepRecord::of(&eng));
        states.push(eng.clone());
        if let Some(n) = detect_stabilization(&records, cfg.rank_tol, cfg.stab_window) {
            found = Some(n);
            break;
        }
        if gap <= cfg.conv_tol && step.step_norm <= cfg.conv_tol * scale {
            let last_rank = eng.rank();
            found = records.iter().rev().take_while(|r| r.rank == last_rank).last().map(|r| r.n);
            break;
        }
    }
    let Some(n) = found else { return Ok(None) };
    let base = &states[n];
    match ActiveBlock::from_support(base.basis(), base.support_eigenvalues(), cfg.u.as_slice(), n, cfg.rank_tol) {
        Ok(b) => Ok(Some(Stabilized { n, block: Some(b) })),
        Err(crate::Error::EmptySupport) => Ok(Some(Stabilized { n, block: None })),
        Err(e) => Err(e),
    }
}
