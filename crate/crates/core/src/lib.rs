//! Weighted residual operator dynamics `R ↦ R^{1/2}(I − P)R^{1/2}` for a rank-one
//! projection `P = |u⟩⟨u|` on a finite-dimensional complex inner-product space.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `std` feature for native
//! float intrinsics and `serde` for serializable traces and reports.
//!
//! * [`matcore`] — dense Hermitian kernel: eigendecomposition, PSD square roots,
//!   ranks, subspace bases, Krylov closure, Loewner comparison.
//! * [`dynamics`] — the iteration engine, traces, support stabilization and the
//!   induced weighted recursion on the active block.
//! * [`structure`] — reducing splits, the two-dimensional classifications,
//!   stationarity and the combined limit predictor.
//! * [`identities`] — per-step certificate checkers for the block and inverse
//!   identities the dynamics satisfies.
//! * [`oracle`] — scalar recursions for 2×2 active blocks used to cross-validate
//!   the matrix engine.
#![no_std]

extern crate alloc;

pub mod dynamics;
pub mod error;
pub mod identities;
pub mod matcore;
pub mod oracle;
pub mod structure;

pub use error::{Error, Result};
pub use matcore::{
    C64, EigenDecomposition, HermitianMatrix, Mat, OrthonormalBasis, PSDMatrix, UnitVector,
};

/// Default relative rank threshold.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Default convergence tolerance on the step gap and step size.
pub const DEFAULT_CONV_TOL: f64 = 1e-11;
/// Default threshold on `|b_0| / ‖T_0‖` below which a 2×2 block counts as decoupled.
pub const DEFAULT_COUPLING_TOL: f64 = 1e-10;
pub const DEFAULT_STAB_WINDOW: usize = 3;
pub const DEFAULT_MAX_ITER: usize = 10_000;
