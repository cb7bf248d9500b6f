//! The iteration `R_{n+1} = R_n^{1/2}(I − |u⟩⟨u|)R_n^{1/2}`, its traces, support
//! stabilization and the induced weighted recursion on the active block.

mod engine;
mod trace;

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

pub use engine::{Step, WREngine};
pub use trace::{iterate, stabilize, RunStatus, Stabilized, StepRecord, WRTrace};

use crate::error::{Error, Result};
use crate::matcore::{
    norm2, principal_angle_sines, range_basis, EigenDecomposition, HermitianMatrix, Mat, OrthonormalBasis,
    PSDMatrix, UnitVector, C64,
};

/// `‖u_E‖` at or below this is treated as `u_E = 0`.
pub const ZERO_WEIGHT_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WRConfig {
    pub r0: PSDMatrix,
    pub u: UnitVector,
    pub rank_tol: f64,
    pub conv_tol: f64,
    pub coupling_tol: f64,
    pub stab_window: usize,
    pub max_iter: usize,
}

impl WRConfig {
    /// Configuration with the default tolerances.
    pub fn new(r0: PSDMatrix, u: UnitVector) -> Result<Self> {
        let cfg = WRConfig {
            r0,
            u,
            rank_tol: crate::DEFAULT_RANK_TOL,
            conv_tol: crate::DEFAULT_CONV_TOL,
            coupling_tol: crate::DEFAULT_COUPLING_TOL,
            stab_window: crate::DEFAULT_STAB_WINDOW,
            max_iter: crate::DEFAULT_MAX_ITER,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r0.dim() != self.u.dim() {
            return Err(Error::DimensionMismatch { expected: self.r0.dim(), found: self.u.dim() });
        }
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.rank_tol) || !pos(self.conv_tol) || !pos(self.coupling_tol) {
            return Err(Error::InvalidConfig("tolerances must be positive and finite"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1"));
        }
        if self.stab_window == 0 {
            return Err(Error::InvalidConfig("stab_window must be at least 1"));
        }
        Ok(())
    }
}

fn phi(t: &PSDMatrix, v: &[C64]) -> Result<PSDMatrix> {
    let w = t.power(0.5)?.mul_vec(v);
    let mut m = t.as_mat().clone();
    m.sub_outer(1.0, &w, &w);
    PSDMatrix::new(HermitianMatrix::symmetrized(m), crate::DEFAULT_RANK_TOL)
        .map_err(|_| Error::NumericalBreakdown { step: 0, detail: "iterate left the PSD cone" })
}

/// One step `R^{1/2}(I − |u⟩⟨u|)R^{1/2}`, evaluated as `R − |R^{1/2}u⟩⟨R^{1/2}u|`.
pub fn wr_step(r: &PSDMatrix, u: &UnitVector) -> Result<PSDMatrix> {
    if r.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: r.dim(), found: u.dim() });
    }
    phi(r, u)
}

/// One step of the weighted recursion `T^{1/2}(I − |u_E⟩⟨u_E|)T^{1/2}` with
/// `‖u_E‖ ≤ 1`.
pub fn weighted_step(t: &PSDMatrix, u_e: &[C64]) -> Result<PSDMatrix> {
    if t.dim() != u_e.len() {
        return Err(Error::DimensionMismatch { expected: t.dim(), found: u_e.len() });
    }
    let norm = norm2(u_e);
    if norm > 1.0 + 1e-12 {
        return Err(Error::WeightTooLarge { norm });
    }
    if norm == 0.0 {
        return Ok(t.clone());
    }
    phi(t, u_e)
}

/// `⟨u, R u⟩ = tr(R_n − R_{n+1})`.
pub fn step_gap(r: &PSDMatrix, u: &UnitVector) -> f64 {
    r.quad_form(u)
}

/// Stabilized support `E` and the data of the induced recursion on it.
///
/// `t` is `R_N` compressed to `E`; `u_e`, `e` are in the coordinates of the
/// columns of `e_basis`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActiveBlock {
    #[cfg_attr(feature = "serde", serde(rename = "E"))]
    pub e_basis: OrthonormalBasis,
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub n: usize,
    #[cfg_attr(feature = "serde", serde(rename = "T_N"))]
    pub t: PSDMatrix,
    pub u_e: Vec<C64>,
    pub tau: f64,
    pub rho: f64,
    pub e: Option<UnitVector>,
}

impl ActiveBlock {
    /// Builds the block from an eigenbasis of the support and the matching
    /// nonzero eigenvalues (ascending).
    pub(crate) fn from_support(
        basis: &Mat,
        eigenvalues: Vec<f64>,
        u: &[C64],
        n: usize,
        rank_tol: f64,
    ) -> Result<Self> {
        let k = basis.cols();
        if k == 0 {
            return Err(Error::EmptySupport);
        }
        let u_e = basis.adjoint_mul_vec(u);
        let norm = norm2(&u_e);
        if norm >= 1.0 - rank_tol.sqrt() {
            return Err(Error::NotStabilized { weight_norm: norm });
        }
        let e = if norm > ZERO_WEIGHT_TOL { Some(UnitVector::normalize(&u_e)?) } else { None };
        let tau = norm * norm;
        let t = PSDMatrix::from_spectrum(EigenDecomposition {
            eigenvalues,
            eigenvectors: OrthonormalBasis::standard(k),
        });
        Ok(ActiveBlock {
            e_basis: OrthonormalBasis::from_mat_unchecked(basis.clone()),
            n,
            t,
            u_e,
            tau,
            rho: 1.0 - tau,
            e,
        })
    }

    pub fn dim(&self) -> usize {
        self.t.dim()
    }

    /// `P_E u` as an ambient vector.
    pub fn u_e_ambient(&self) -> Vec<C64> {
        self.e_basis.lift(&self.u_e)
    }
}

/// Active block of an iterate whose support has stabilized.
///
/// `E` is the eigenbasis of the support, so `T_N` is diagonal. The returned
/// block has `n = 0`; callers that know the stabilization index set it.
pub fn extract_active_block(r_n: &PSDMatrix, u: &UnitVector, rank_tol: f64) -> Result<ActiveBlock> {
    if r_n.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: r_n.dim(), found: u.dim() });
    }
    let e = range_basis(r_n, rank_tol);
    let thresh = rank_tol * r_n.lambda_max().max(1.0);
    let values: Vec<f64> = r_n.eigenvalues().iter().copied().filter(|&l| l > thresh).collect();
    ActiveBlock::from_support(e.as_mat(), values, u, 0, rank_tol)
}

/// Smallest recorded `N` such that the `stab_window` records after it keep the
/// rank of `R_N` and have supports within principal angle `√rank_tol` of it.
///
/// Records without a stored support are compared by rank only.
pub fn detect_stabilization(records: &[StepRecord], rank_tol: f64, stab_window: usize) -> Option<usize> {
    let thr = rank_tol.sqrt();
    let len = records.len();
    (0..len).take_while(|&i| i + stab_window < len).find_map(|i| {
        let base = &records[i];
        let ok = records[i + 1..=i + stab_window].iter().all(|r| {
            r.rank == base.rank
                && match (&base.support, &r.support) {
                    (Some(a), Some(b)) => principal_angle_sines(b, a)
                        .map(|s| s.last().map_or(true, |&x| x <= thr))
                        .unwrap_or(false),
                    _ => true,
                }
        });
        ok.then_some(base.n)
    })
}
