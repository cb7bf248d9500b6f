//! Certificate checkers for the identities satisfied by the weighted recursion
//! `T ↦ T^{1/2}(I − τ|e⟩⟨e|)T^{1/2}` on a stabilized active block.
//!
//! Coordinates are taken relative to the split `E = ℂe ⊕ e⊥` with
//! `a = ⟨e, Te⟩`, `b = QTe`, `B = QTQ` and `y = QT^{1/2}e`, where `Q` projects
//! onto `e⊥`. Every checker returns a nonnegative residual already divided by
//! its natural scale, so it can be compared directly with the matching
//! tolerance constant.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::WRTrace;
use crate::error::{Error, Result};
use crate::matcore::{dot, eigh, norm2, norm_sqr, HermitianMatrix, Mat, OrthonormalBasis, PSDMatrix, UnitVector, C64};

pub const TOL_DET_DECAY: f64 = 1e-8;
pub const TOL_A_RECURSION: f64 = 1e-10;
pub const TOL_B_DECREMENT: f64 = 1e-10;
pub const TOL_SUMMABILITY: f64 = 1e-8;
pub const TOL_OFFDIAG: f64 = 1e-10;
pub const TOL_INV_UPDATE: f64 = 1e-8;
pub const TOL_GROWTH: f64 = 1e-9;
pub const TOL_TRANSVERSE: f64 = 1e-9;
/// Bound on the final `‖y_n‖` and `‖b_n‖` of a converged run.
pub const TOL_FINAL_DECOUPLING: f64 = 1e-6;

/// Stable residual names, in report order.
pub const RESIDUAL_NAMES: [&str; 10] = [
    "det_decay",
    "a_recursion",
    "B_decrement",
    "summability",
    "offdiag_cs",
    "inv_update",
    "beta_bound",
    "s_bound",
    "lambda_min_bound",
    "transverse_persistence",
];

/// Tolerance for the residual called `name`.
pub fn tolerance(name: &str) -> Option<f64> {
    Some(match name {
        "det_decay" => TOL_DET_DECAY,
        "a_recursion" => TOL_A_RECURSION,
        "B_decrement" => TOL_B_DECREMENT,
        "summability" => TOL_SUMMABILITY,
        "offdiag_cs" => TOL_OFFDIAG,
        "inv_update" => TOL_INV_UPDATE,
        "beta_bound" | "s_bound" | "lambda_min_bound" => TOL_GROWTH,
        "transverse_persistence" => TOL_TRANSVERSE,
        _ => return None,
    })
}

/// Per-step residuals; `None` when the check does not apply at that step.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Residuals {
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub det_decay: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub a_recursion: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, rename = "B_decrement", skip_serializing_if = "Option::is_none"))]
    pub b_decrement: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub summability: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub offdiag_cs: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub inv_update: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub beta_bound: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub s_bound: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub lambda_min_bound: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub transverse_persistence: Option<f64>,
}

impl Residuals {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "det_decay" => self.det_decay,
            "a_recursion" => self.a_recursion,
            "B_decrement" => self.b_decrement,
            "summability" => self.summability,
            "offdiag_cs" => self.offdiag_cs,
            "inv_update" => self.inv_update,
            "beta_bound" => self.beta_bound,
            "s_bound" => self.s_bound,
            "lambda_min_bound" => self.lambda_min_bound,
            "transverse_persistence" => self.transverse_persistence,
            _ => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, Option<f64>)> + '_ {
        RESIDUAL_NAMES.iter().map(move |&n| (n, self.get(n)))
    }

    /// `true` when every present residual is within its tolerance.
    pub fn passes(&self) -> bool {
        self.iter().all(|(n, v)| v.map_or(true, |v| v <= tolerance(n).unwrap()))
    }
}

/// Orthonormal frame `{e} ∪ F` of the active block, `F` spanning `e⊥`.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectFrame {
    pub e: UnitVector,
    pub f: OrthonormalBasis,
}

impl DefectFrame {
    pub fn new(e: &UnitVector) -> Result<Self> {
        let eb = OrthonormalBasis::from_vectors(e.dim(), &[e.as_slice().to_vec()])?;
        Ok(DefectFrame { e: e.clone(), f: eb.complement() })
    }

    pub fn dim(&self) -> usize {
        self.e.dim()
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockCoordinates {
    pub a: f64,
    pub b: Vec<C64>,
    #[cfg_attr(feature = "serde", serde(rename = "B"))]
    pub big_b: HermitianMatrix,
    pub y: Vec<C64>,
}

impl BlockCoordinates {
    pub fn b_norm(&self) -> f64 {
        norm2(&self.b)
    }

    pub fn y_norm(&self) -> f64 {
        norm2(&self.y)
    }

    /// Rebuilds `T` in the ambient coordinates of `frame`.
    pub fn reassemble(&self, frame: &DefectFrame) -> Mat {
        let e = frame.e.as_slice();
        let f = frame.f.as_mat();
        let fb = f.mul_vec(&self.b);
        let mut t = Mat::outer(e, e).scale(self.a);
        t = t.add(&Mat::outer(&fb, e)).add(&Mat::outer(e, &fb));
        t.add(&frame.f.lift_mat(self.big_b.as_mat()))
    }
}

/// Block coordinates of `T` relative to `e`.
pub fn block_coordinates(t: &PSDMatrix, e: &UnitVector) -> Result<BlockCoordinates> {
    if t.dim() != e.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), found: e.dim() });
    }
    Ok(block_coordinates_in(t, &DefectFrame::new(e)?))
}

pub fn block_coordinates_in(t: &PSDMatrix, frame: &DefectFrame) -> BlockCoordinates {
    let e = frame.e.as_slice();
    let f = frame.f.as_mat();
    let tm = t.as_mat();
    let te = tm.mul_vec(e);
    let half = t.power(0.5).expect("positive power");
    let he = half.mul_vec(e);
    BlockCoordinates {
        a: dot(e, &te).re,
        b: f.adjoint_mul_vec(&te),
        big_b: HermitianMatrix::symmetrized(f.adjoint_mul(&tm.matmul(f))),
        y: f.adjoint_mul_vec(&he),
    }
}

/// `|a_{n+1} − (1−τ)a_n − τ‖y_n‖²| / max(1, a_n)`.
pub fn check_a_recursion(cur: &BlockCoordinates, next: &BlockCoordinates, tau: f64) -> f64 {
    let want = (1.0 - tau) * cur.a + tau * norm_sqr(&cur.y);
    (next.a - want).abs() / cur.a.abs().max(1.0)
}

/// `‖B_{n+1} − B_n + τ|y_n⟩⟨y_n|‖_F / max(1, ‖B_n‖)`.
pub fn check_b_decrement(cur: &BlockCoordinates, next: &BlockCoordinates, tau: f64) -> f64 {
    let mut d = next.big_b.as_mat().sub(cur.big_b.as_mat());
    d.sub_outer(-tau, &cur.y, &cur.y);
    d.norm_fro() / cur.big_b.as_mat().norm_fro().max(1.0)
}

/// The trace form of the `B` decrement: `|tr B_n − tr B_{n+1} − τ‖y_n‖²| / max(1, tr B_n)`.
pub fn check_b_trace_decrement(cur: &BlockCoordinates, next: &BlockCoordinates, tau: f64) -> f64 {
    let lhs = cur.big_b.trace() - next.big_b.trace();
    (lhs - tau * norm_sqr(&cur.y)).abs() / cur.big_b.trace().abs().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SummabilityReport {
    /// `|τ Σ_{n<last} ‖y_n‖² − tr(B_0 − B_last)| / max(1, tr B_0)`.
    pub residual: f64,
    /// Last `‖y_n‖`. Bounded by `√(gap/τ)` at the stopping rule, so it is
    /// reported but not part of [`Self::passes`].
    pub final_y: f64,
}

impl SummabilityReport {
    pub fn passes(&self) -> bool {
        self.residual <= TOL_SUMMABILITY
    }
}

/// Telescoped summability residual over the whole sequence.
pub fn check_summability(coords: &[BlockCoordinates], tau: f64, converged: bool) -> Result<SummabilityReport> {
    if !converged {
        return Err(Error::NotConverged);
    }
    let Some(last) = coords.last() else {
        return Ok(SummabilityReport { residual: 0.0, final_y: 0.0 });
    };
    let sum: f64 = coords[..coords.len() - 1].iter().map(|c| norm_sqr(&c.y)).sum();
    Ok(SummabilityReport { residual: summability_residual(&coords[0], last, tau * sum), final_y: last.y_norm() })
}

/// Partial telescoping residual given `τ Σ_{k<n} ‖y_k‖²`.
pub fn summability_residual(first: &BlockCoordinates, cur: &BlockCoordinates, weighted_sum: f64) -> f64 {
    let tr0 = first.big_b.trace();
    (weighted_sum - (tr0 - cur.big_b.trace())).abs() / tr0.abs().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OffdiagReport {
    /// `max_n max(0, ‖b_n‖² − ‖T_0‖ a_n) / max(1, ‖T_0‖²)`.
    pub max_excess: f64,
    pub final_b: f64,
}

/// Cauchy–Schwarz bound `‖b_n‖² ≤ ‖T_0‖ a_n` along the sequence.
pub fn check_offdiag_collapse(coords: &[BlockCoordinates], norm_t0: f64) -> OffdiagReport {
    let max_excess = coords.iter().map(|c| offdiag_excess(c, norm_t0)).fold(0.0, f64::max);
    OffdiagReport { max_excess, final_b: coords.last().map_or(0.0, |c| c.b_norm()) }
}

pub fn offdiag_excess(c: &BlockCoordinates, norm_t0: f64) -> f64 {
    (norm_sqr(&c.b) - norm_t0 * c.a).max(0.0) / (norm_t0 * norm_t0).max(1.0)
}

/// `|det T_{n+1} / det T_n − (1−τ)| / (1−τ)`, from log-determinants.
pub fn check_det_decay(log_det_cur: f64, log_det_next: f64, tau: f64) -> f64 {
    (log_det_next - log_det_cur - (-tau).ln_1p()).exp_m1().abs()
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InverseStats {
    /// `⟨e, T^{-1} e⟩`.
    pub beta: f64,
    /// `tr T^{-1}`.
    pub s: f64,
    pub lambda_min: f64,
}

pub fn inverse_stats(t: &PSDMatrix, e: &UnitVector) -> Result<InverseStats> {
    if t.lambda_min() <= 0.0 {
        return Err(Error::NotStrictlyPositive { min_eigenvalue: t.lambda_min() });
    }
    let spec = t.spectrum();
    let g = spec.eigenvectors.coords(e);
    let beta = spec.eigenvalues.iter().zip(&g).map(|(l, x)| x.norm_sqr() / l).sum();
    let s = spec.eigenvalues.iter().map(|l| 1.0 / l).sum();
    Ok(InverseStats { beta, s, lambda_min: t.lambda_min() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InverseUpdateCheck {
    /// `‖T_{n+1}^{-1} − T_n^{-1} − (τ/ρ)|T_n^{-1/2}e⟩⟨T_n^{-1/2}e|‖_F / max(1, ‖T_n^{-1}‖)`.
    pub residual: f64,
    /// Numerical rank of `T_{n+1}^{-1} − T_n^{-1}` at the same scale.
    pub diff_rank: usize,
}

/// Rank-one additive update of the inverse.
pub fn check_inverse_update(
    tcur: &PSDMatrix,
    tnext: &PSDMatrix,
    e: &UnitVector,
    tau: f64,
    rho: f64,
) -> Result<InverseUpdateCheck> {
    let inv_cur = tcur.inverse()?;
    let inv_next = tnext.inverse()?;
    let w = tcur.power(-0.5)?.mul_vec(e);
    let diff = inv_next.sub(&inv_cur);
    let mut r = diff.clone();
    r.sub_outer(tau / rho, &w, &w);
    let scale = (1.0 / tcur.lambda_min()).max(1.0);
    let thresh = TOL_INV_UPDATE * scale;
    let diff_rank = eigh(&HermitianMatrix::symmetrized(diff)).eigenvalues.iter().filter(|l| l.abs() > thresh).count();
    Ok(InverseUpdateCheck { residual: r.norm_fro() / scale, diff_rank })
}

/// Violations of the three growth bounds at `m` steps after stabilization,
/// each as `max(0, excess) / max(1, bound)`: `(β, s, λ_min)`.
pub fn growth_residuals(
    m: usize,
    cur: &InverseStats,
    first: &InverseStats,
    tau: f64,
    rho: f64,
    norm_t0: f64,
    dim_e: usize,
) -> (f64, f64, f64) {
    let mf = m as f64;
    let beta_lo = first.beta + mf * tau / (rho * norm_t0);
    let s_lo = first.s + tau / rho * mf * first.beta + tau * tau / (2.0 * rho * rho * norm_t0) * mf * (mf - 1.0);
    let lam_hi = dim_e as f64 / cur.s;
    (
        (beta_lo - cur.beta).max(0.0) / beta_lo.abs().max(1.0),
        (s_lo - cur.s).max(0.0) / s_lo.abs().max(1.0),
        (cur.lambda_min - lam_hi).max(0.0) / lam_hi.max(1.0),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthReport {
    pub beta_excess: f64,
    pub s_excess: f64,
    pub lambda_excess: f64,
    /// Smallest `C` with `dim E / s_n ≤ C / n²` over the checked steps `n ≥ 1`.
    pub empirical_c: f64,
    pub checked: usize,
}

impl GrowthReport {
    pub fn holds(&self) -> bool {
        self.beta_excess <= TOL_GROWTH && self.s_excess <= TOL_GROWTH && self.lambda_excess <= TOL_GROWTH
    }
}

/// Lower bounds on `β_n`, `s_n` and the upper bound on `λ_min(T_n)`, where
/// `stats[n]` belongs to the `n`-th step after stabilization.
pub fn check_growth_bounds(stats: &[InverseStats], tau: f64, rho: f64, norm_t0: f64, dim_e: usize) -> GrowthReport {
    let mut rep = GrowthReport { beta_excess: 0.0, s_excess: 0.0, lambda_excess: 0.0, empirical_c: 0.0, checked: stats.len() };
    let Some(first) = stats.first() else { return rep };
    for (m, st) in stats.iter().enumerate() {
        let (b, s, l) = growth_residuals(m, st, first, tau, rho, norm_t0, dim_e);
        rep.beta_excess = rep.beta_excess.max(b);
        rep.s_excess = rep.s_excess.max(s);
        rep.lambda_excess = rep.lambda_excess.max(l);
        if m >= 1 {
            let mf = m as f64;
            rep.empirical_c = rep.empirical_c.max(dim_e as f64 / st.s * mf * mf);
        }
    }
    rep
}

/// `‖T_n − ((1−τ)^n λ_0 |e⟩⟨e| ⊕ B_0)‖_F / max(1, ‖T_0‖)` for one step.
pub fn transverse_residual(c: &BlockCoordinates, m: usize, lambda0: f64, tau: f64, b0: &HermitianMatrix) -> f64 {
    let scale = lambda0.max(b0.norm()).max(1.0);
    let da = c.a - (1.0 - tau).powi(m as i32) * lambda0;
    let db = c.big_b.as_mat().sub(b0.as_mat()).norm_fro();
    let off = norm2(&c.b);
    (da * da + 2.0 * off * off + db * db).sqrt() / scale
}

/// Decoupled evolution `T_n = (1−τ)^n λ_0 |e⟩⟨e| ⊕ B_0`; maximum residual over
/// the sequence. Requires `‖b_0‖ ≤ coupling_tol·‖T_0‖`.
pub fn check_transverse_persistence(
    coords: &[BlockCoordinates],
    lambda0: f64,
    tau: f64,
    b0: &HermitianMatrix,
    coupling_tol: f64,
) -> Result<f64> {
    let Some(first) = coords.first() else { return Ok(0.0) };
    let scale = lambda0.max(b0.norm());
    let coupling = first.b_norm();
    if coupling > coupling_tol * scale {
        return Err(Error::NotDecoupled { coupling });
    }
    Ok(coords.iter().enumerate().map(|(m, c)| transverse_residual(c, m, lambda0, tau, b0)).fold(0.0, f64::max))
}

/// Maximum of each named residual over a trace, recomputed from the recorded
/// block coordinates and log-determinants where possible, otherwise taken
/// from the recorded values.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentityReport {
    pub max: Residuals,
    /// First record index whose residuals exceed a tolerance.
    pub first_failure: Option<usize>,
    pub summability: Option<SummabilityReport>,
    pub offdiag: Option<OffdiagReport>,
    pub growth: Option<GrowthReport>,
    /// Index from which inverse-side checks were skipped.
    pub inverse_skipped_from: Option<usize>,
}

impl IdentityReport {
    pub fn passes(&self) -> bool {
        self.first_failure.is_none()
            && self.max.passes()
            && self.summability.map_or(true, |s| s.passes())
            && self.offdiag.map_or(true, |o| o.max_excess <= TOL_OFFDIAG && o.final_b <= TOL_FINAL_DECOUPLING)
            && self.growth.map_or(true, |g| g.holds())
    }

    /// Largest residual over all names, and the largest ratio residual/tolerance.
    pub fn worst(&self) -> (f64, f64) {
        self.max.iter().filter_map(|(n, v)| v.map(|v| (v, v / tolerance(n).unwrap()))).fold((0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
    }
}

fn bump(slot: &mut Option<f64>, v: Option<f64>) {
    if let Some(v) = v {
        // NaN must register as a failure.
        let v = if v.is_nan() { f64::INFINITY } else { v };
        *slot = Some(slot.map_or(v, |s| s.max(v)));
    }
}

/// Audits a trace: recomputes the block identities from consecutive records and
/// merges them with the recorded per-step residuals.
pub fn audit_trace(trace: &WRTrace) -> IdentityReport {
    let mut rep = IdentityReport::default();
    let Some(active) = trace.active.as_ref() else {
        return rep;
    };
    rep.inverse_skipped_from = trace.inverse_skipped_from;
    let n0 = active.n;
    let tau = active.tau;
    let recs: Vec<_> = trace.records.iter().filter(|r| r.n >= n0).collect();
    let norm_t0 = active.t.norm();
    let mut mx = Residuals::default();
    let mut weighted = 0.0;
    let mut first_coords: Option<&BlockCoordinates> = None;
    for (i, r) in recs.iter().enumerate() {
        let mut step = Residuals::default();
        if i > 0 {
            let p = recs[i - 1];
            step.det_decay = Some(check_det_decay(p.log_det, r.log_det, tau));
            if let (Some(a), Some(b)) = (&p.block_coords, &r.block_coords) {
                step.a_recursion = Some(check_a_recursion(a, b, tau));
                step.b_decrement = Some(check_b_decrement(a, b, tau));
            }
        }
        if let Some(c) = &r.block_coords {
            let first = *first_coords.get_or_insert(c);
            step.summability = Some(summability_residual(first, c, tau * weighted));
            step.offdiag_cs = Some(offdiag_excess(c, norm_t0));
            weighted += norm_sqr(&c.y);
        }
        step.inv_update = r.residuals.inv_update;
        step.beta_bound = r.residuals.beta_bound;
        step.s_bound = r.residuals.s_bound;
        step.lambda_min_bound = r.residuals.lambda_min_bound;
        step.transverse_persistence = r.residuals.transverse_persistence;
        if !step.passes() && rep.first_failure.is_none() {
            rep.first_failure = Some(r.n);
        }
        for name in RESIDUAL_NAMES {
            let slot = match name {
                "det_decay" => &mut mx.det_decay,
                "a_recursion" => &mut mx.a_recursion,
                "B_decrement" => &mut mx.b_decrement,
                "summability" => &mut mx.summability,
                "offdiag_cs" => &mut mx.offdiag_cs,
                "inv_update" => &mut mx.inv_update,
                "beta_bound" => &mut mx.beta_bound,
                "s_bound" => &mut mx.s_bound,
                "lambda_min_bound" => &mut mx.lambda_min_bound,
                _ => &mut mx.transverse_persistence,
            };
            bump(slot, step.get(name));
        }
    }
    rep.max = mx;
    let coords: Vec<BlockCoordinates> = recs.iter().filter_map(|r| r.block_coords.clone()).collect();
    if !coords.is_empty() {
        rep.offdiag = Some(check_offdiag_collapse(&coords, norm_t0));
        if trace.converged {
            rep.summability = check_summability(&coords, tau, true).ok();
        } else if let Some(o) = rep.offdiag.as_mut() {
            // Final decay of `b` is only asserted for converged runs.
            o.final_b = 0.0;
        }
    }
    let stats: Vec<InverseStats> = recs.iter().map_while(|r| r.inverse).collect();
    if !stats.is_empty() && active.e.is_some() {
        rep.growth = Some(check_growth_bounds(&stats, tau, active.rho, norm_t0, active.t.dim()));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c;

    fn psd(rows: &[[f64; 2]]) -> PSDMatrix {
        PSDMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn identity_block() {
        let bc = block_coordinates(&PSDMatrix::identity(3), &UnitVector::basis(3, 0)).unwrap();
        assert_eq!(bc.a, 1.0);
        assert_eq!(bc.b_norm(), 0.0);
        assert!(bc.big_b.as_mat().sub(&Mat::identity(2)).max_abs() < 1e-15);
        assert!(bc.y_norm() < 1e-15);
    }

    #[test]
    fn rank_one_block() {
        let e = UnitVector::normalize(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let t = PSDMatrix::new(HermitianMatrix::new(Mat::outer(&e, &e)).unwrap(), 1e-10).unwrap();
        let bc = block_coordinates(&t, &e).unwrap();
        assert!((bc.a - 1.0).abs() < 1e-15);
        assert!(bc.b_norm() < 1e-15 && bc.y_norm() < 1e-15);
        assert!(bc.big_b.as_mat().max_abs() < 1e-15);
    }

    #[test]
    fn example_block_coordinates() {
        let bc = block_coordinates(&psd(&[[1.0, 1.0], [1.0, 2.0]]), &UnitVector::basis(2, 0)).unwrap();
        assert!((bc.a - 1.0).abs() < 1e-15);
        assert!((bc.b[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((bc.big_b.get(0, 0).re - 2.0).abs() < 1e-15);
        assert!((bc.y_norm() - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reassembly_is_exact() {
        let m = Mat::from_rows(&[
            alloc::vec![c(2.0, 0.0), c(0.5, 0.5), c(0.1, 0.0)],
            alloc::vec![c(0.5, -0.5), c(1.5, 0.0), c(0.0, -0.2)],
            alloc::vec![c(0.1, 0.0), c(0.0, 0.2), c(1.0, 0.0)],
        ]);
        let t = PSDMatrix::new(HermitianMatrix::new(m.clone()).unwrap(), 1e-10).unwrap();
        let e = UnitVector::normalize(&[c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)]).unwrap();
        let frame = DefectFrame::new(&e).unwrap();
        let bc = block_coordinates_in(&t, &frame);
        assert!(bc.reassemble(&frame).sub(&m).max_abs() < 1e-14);
    }

    #[test]
    fn inverse_stats_of_example_block() {
        let st = inverse_stats(&psd(&[[1.0, 1.0], [1.0, 2.0]]), &UnitVector::basis(2, 0)).unwrap();
        assert!((st.beta - 2.0).abs() < 1e-14);
        assert!((st.s - 3.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_update_diagonal() {
        let (a, d, tau) = (2.0, 3.0, 0.25);
        let t = psd(&[[a, 0.0], [0.0, d]]);
        let tn = psd(&[[(1.0 - tau) * a, 0.0], [0.0, d]]);
        let e = UnitVector::basis(2, 0);
        let chk = check_inverse_update(&t, &tn, &e, tau, 1.0 - tau).unwrap();
        assert!(chk.residual < 1e-15);
        assert_eq!(chk.diff_rank, 1);
    }

    #[test]
    fn det_decay_exact() {
        let r = check_det_decay(0.3, 0.3 + 0.5f64.ln(), 0.5);
        assert!(r < 1e-15);
    }

    #[test]
    fn growth_at_start_is_trivial() {
        let st = InverseStats { beta: 2.0, s: 3.0, lambda_min: 0.3 };
        let rep = check_growth_bounds(&[st], 0.5, 0.5, 2.6, 2);
        assert!(rep.holds());
    }

    #[test]
    fn transverse_rejects_coupled() {
        let bc = block_coordinates(&psd(&[[1.0, 1.0], [1.0, 2.0]]), &UnitVector::basis(2, 0)).unwrap();
        let b0 = bc.big_b.clone();
        assert!(matches!(
            check_transverse_persistence(&[bc], 1.0, 0.5, &b0, 1e-10),
            Err(Error::NotDecoupled { .. })
        ));
    }

    #[test]
    fn transverse_geometric_decay() {
        let e = UnitVector::basis(2, 0);
        let coords: Vec<_> = (0..5)
            .map(|n| block_coordinates(&psd(&[[0.5f64.powi(n), 0.0], [0.0, 1.0]]), &e).unwrap())
            .collect();
        let b0 = coords[0].big_b.clone();
        assert!(check_transverse_persistence(&coords, 1.0, 0.5, &b0, 1e-10).unwrap() < 1e-15);
    }
}
