use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matcore::{
    norm2, scaled_one_sided_jacobi, EigenDecomposition, Mat, OrthonormalBasis, PSDMatrix, UnitVector, C64,
};

/// Iteration state held in factored form `R_n = U diag(σ²) U*`, where `U` has
/// orthonormal columns spanning the support of `R_n`.
///
/// A step with `c = U*u` computes `Σ(I − cc*)Σ` as `Y*Y` for
/// `Y = (I − cc*)^{1/2} Σ` and diagonalizes it by one-sided Jacobi on `Y`, so
/// the singular values keep high relative accuracy even when they spread over
/// many orders of magnitude. `σ` is held as `ln σ`, so eigenvalues that fall
/// below the floating-point range stay distinct and nonzero. When `‖c‖ ≥ 1 − √rank_tol` the direction lies in
/// the support, `I − cc*` is treated as the exact projection onto `c⊥`, and
/// the rank drops by one.
#[derive(Clone, Debug)]
pub struct WREngine {
    u: Vec<C64>,
    rank_tol: f64,
    n: usize,
    basis: Mat,
    log_sigma: Vec<f64>,
    coords: Vec<C64>,
}

/// Outcome of one [`WREngine::advance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub dropped: bool,
    /// `‖R_{n+1} − R_n‖` (spectral and Frobenius agree: the difference has rank one).
    pub step_norm: f64,
}

impl WREngine {
    pub fn new(r0: &PSDMatrix, u: &UnitVector, rank_tol: f64) -> Result<Self> {
        if r0.dim() != u.dim() {
            return Err(Error::DimensionMismatch { expected: r0.dim(), found: u.dim() });
        }
        let spec = r0.spectrum();
        let thresh = rank_tol * spec.max().max(1.0);
        let keep: Vec<usize> = (0..spec.dim()).filter(|&j| spec.eigenvalues[j] > thresh).collect();
        let vecs = spec.eigenvectors.as_mat();
        let cols: Vec<Vec<C64>> = keep.iter().map(|&j| vecs.col(j)).collect();
        let basis = Mat::from_columns(r0.dim(), &cols);
        let log_sigma = keep.iter().map(|&j| 0.5 * spec.eigenvalues[j].ln()).collect();
        let coords = basis.adjoint_mul_vec(u);
        Ok(WREngine { u: u.as_slice().to_vec(), rank_tol, n: 0, basis, log_sigma, coords })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Index of the current iterate.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.log_sigma.len()
    }

    /// Logs of the square roots of the nonzero eigenvalues, ascending.
    pub fn log_sigma(&self) -> &[f64] {
        &self.log_sigma
    }

    /// Square roots of the nonzero eigenvalues, ascending. Entries below the
    /// floating-point range read as 0.
    pub fn sigma(&self) -> Vec<f64> {
        self.log_sigma.iter().map(|l| l.exp()).collect()
    }

    pub fn support_eigenvalues(&self) -> Vec<f64> {
        self.log_sigma.iter().map(|l| (2.0 * l).exp()).collect()
    }

    /// Orthonormal eigenvectors spanning the support, matching [`Self::sigma`].
    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn support(&self) -> OrthonormalBasis {
        OrthonormalBasis::from_mat_unchecked(self.basis.clone())
    }

    /// `U* u`, the direction in support coordinates.
    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    /// `‖P_{ran R_n} u‖`.
    pub fn weight_norm(&self) -> f64 {
        norm2(&self.coords)
    }

    /// `⟨u, R_n u⟩`.
    pub fn gap(&self) -> f64 {
        let v: Vec<C64> = self.log_sigma.iter().zip(&self.coords).map(|(&l, &c)| c * l.exp()).collect();
        let r = norm2(&v);
        r * r
    }

    pub fn trace(&self) -> f64 {
        self.support_eigenvalues().iter().sum()
    }

    /// Log of the product of the nonzero eigenvalues.
    pub fn log_det(&self) -> f64 {
        self.log_sigma.iter().map(|l| 2.0 * l).sum()
    }

    /// Current iterate as a dense matrix with its spectral decomposition.
    pub fn state(&self) -> PSDMatrix {
        let n = self.dim();
        let k = self.rank();
        let kernel = self.support().complement();
        let mut values = alloc::vec![0.0; n - k];
        values.extend(self.support_eigenvalues());
        let vecs = kernel.concat(&self.support());
        PSDMatrix::from_spectrum(EigenDecomposition { eigenvalues: values, eigenvectors: vecs })
    }

    /// Replaces `R_n` by `R_{n+1}`.
    pub fn advance(&mut self) -> Result<Step> {
        let k = self.rank();
        let cn = norm2(&self.coords);
        if k == 0 || cn == 0.0 {
            self.n += 1;
            return Ok(Step { dropped: false, step_norm: 0.0 });
        }
        let chat: Vec<C64> = self.coords.iter().map(|&x| x / cn).collect();
        let dropped = cn >= 1.0 - self.rank_tol.sqrt();
        let (mut y, mut ell, lift, step_norm) = if dropped {
            // x ∝ Σ^{-1} ĉ, scaled by σ_min to stay in range.
            let lmin = self.log_sigma.iter().copied().fold(f64::INFINITY, f64::min);
            let x: Vec<C64> = chat.iter().zip(&self.log_sigma).map(|(&c, &l)| c * (lmin - l).exp()).collect();
            let xn = norm2(&x);
            if !xn.is_finite() || xn == 0.0 {
                return Err(Error::NumericalBreakdown { step: self.n, detail: "degenerate null direction" });
            }
            let x: Vec<C64> = x.iter().map(|&v| v / xn).collect();
            let rest = OrthonormalBasis::from_vectors(k, &[x])?.complement();
            let rest = rest.as_mat().clone();
            let sigma = self.sigma();
            // Y = (I − ĉĉ*) Σ V_rest
            let mut y = Mat::from_fn(k, k - 1, |i, j| rest[(i, j)] * sigma[i]);
            let proj = y.adjoint_mul_vec(&chat);
            y.sub_outer(1.0, &chat, &proj);
            let sc: Vec<C64> = chat.iter().zip(&sigma).map(|(&c, &s)| c * s).collect();
            let g = norm2(&sc);
            (y, alloc::vec![0.0; k - 1], Some(rest), g * g)
        } else {
            let t = cn * cn;
            let alpha = t / (1.0 + (1.0 - t).sqrt());
            // Columns of (I − cc*)^{1/2}; the scales e^{ℓ} stay separate.
            let y = Mat::from_fn(k, k, |i, j| {
                let d = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                d - chat[i] * chat[j].conj() * alpha
            });
            (y, self.log_sigma.clone(), None, self.gap())
        };
        let v = scaled_one_sided_jacobi(&mut y, &mut ell);
        let rot = match lift {
            Some(rest) => rest.matmul(&v),
            None => v,
        };
        let basis = self.basis.matmul(&rot);
        let mut order: Vec<usize> = (0..ell.len()).collect();
        order.sort_by(|&i, &j| ell[i].total_cmp(&ell[j]));
        let log_sigma: Vec<f64> = order.iter().map(|&i| ell[i]).collect();
        if log_sigma.iter().any(|l| !l.is_finite()) {
            return Err(Error::NumericalBreakdown { step: self.n, detail: "vanishing singular value" });
        }
        let mut sorted = Mat::zeros(basis.rows(), order.len());
        for (dst, &src) in order.iter().enumerate() {
            sorted.set_col(dst, &basis.col(src));
        }
        self.coords = sorted.adjoint_mul_vec(&self.u);
        self.basis = sorted;
        self.log_sigma = log_sigma;
        self.n += 1;
        Ok(Step { dropped, step_norm })
    }
}

impl Iterator for WREngine {
    type Item = Result<PSDMatrix>;

    /// Advances and yields the new iterate.
    fn next(&mut self) -> Option<Result<PSDMatrix>> {
        Some(self.advance().map(|_| self.state()))
    }
}
