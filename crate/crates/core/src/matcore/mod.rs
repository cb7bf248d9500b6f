//! Dense Hermitian / PSD linear-algebra kernel.

mod basis;
mod dense;
mod eigen;
mod ops;

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

pub use basis::{krylov_span, principal_angle_sines, range_basis, OrthonormalBasis};
pub use dense::{basis_vec, dot, norm2, norm_sqr, real_vec, scale_vec, Mat, C64};
pub use eigen::{eigh, EigenDecomposition};
pub use ops::{compress, compress_psd, loewner_leq, numerical_rank, psd_sqrt, sqrt2x2};

#[cfg(test)]
pub(crate) use dense::c;
pub(crate) use eigen::scaled_one_sided_jacobi;

use crate::error::{Error, Result};

/// Relative tolerance for the Hermitian symmetry test.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Relative tolerance on `‖u‖ = 1`.
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance on `‖B*B − I‖` for orthonormal bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Square complex matrix equal to its conjugate transpose.
///
/// Construction symmetrizes, so `entries[i][j] == conj(entries[j][i])` holds
/// exactly afterwards.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct HermitianMatrix(Mat);

impl HermitianMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
        }
        let scale = m.norm_fro();
        let skew = m.sub(&m.adjoint()).norm_fro();
        if skew > HERMITIAN_TOL * scale {
            return Err(Error::NonHermitianInput { residual: skew / scale });
        }
        Ok(HermitianMatrix(m.hermitian_part()))
    }

    /// Wraps a matrix known to be Hermitian up to rounding, symmetrizing it.
    pub(crate) fn symmetrized(m: Mat) -> Self {
        HermitianMatrix(m.hermitian_part())
    }

    pub fn from_real_rows<const N: usize>(rows: &[[f64; N]]) -> Result<Self> {
        HermitianMatrix::new(Mat::from_real_rows(rows))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(Mat::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(Mat::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Spectral norm (largest absolute eigenvalue).
    pub fn norm(&self) -> f64 {
        eigh(self).spectral_norm()
    }

    pub fn sub(&self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0.sub(&rhs.0))
    }

    pub fn add(&self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0.add(&rhs.0))
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix(self.0.scale(s))
    }

    /// Quadratic form `⟨v, H v⟩`.
    pub fn quad_form(&self, v: &[C64]) -> f64 {
        dot(v, &self.0.mul_vec(v)).re
    }

    /// `A ⊕ B` in block-diagonal form.
    pub fn direct_sum(&self, other: &HermitianMatrix) -> HermitianMatrix {
        let (a, b) = (self.dim(), other.dim());
        let n = a + b;
        HermitianMatrix(self.0.embed(n, n, 0, 0).add(&other.0.embed(n, n, a, a)))
    }
}

/// Hermitian positive-semidefinite matrix together with its spectral
/// decomposition.
///
/// Eigenvalues that are negative but within `rank_tol·max(1, λ_max)` of zero are
/// clamped to zero in the stored spectrum; the entries are kept as given.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "HermitianMatrix", into = "HermitianMatrix"))]
pub struct PSDMatrix {
    matrix: HermitianMatrix,
    spectrum: EigenDecomposition,
}

impl TryFrom<HermitianMatrix> for PSDMatrix {
    type Error = Error;
    fn try_from(h: HermitianMatrix) -> Result<Self> {
        PSDMatrix::new(h, crate::DEFAULT_RANK_TOL)
    }
}

impl From<PSDMatrix> for HermitianMatrix {
    fn from(p: PSDMatrix) -> HermitianMatrix {
        p.matrix
    }
}

impl PSDMatrix {
    pub fn new(matrix: HermitianMatrix, rank_tol: f64) -> Result<Self> {
        let spectrum = eigh(&matrix);
        Self::with_spectrum(matrix, spectrum, rank_tol)
    }

    pub fn from_real_rows<const N: usize>(rows: &[[f64; N]]) -> Result<Self> {
        PSDMatrix::new(HermitianMatrix::from_real_rows(rows)?, crate::DEFAULT_RANK_TOL)
    }

    fn with_spectrum(matrix: HermitianMatrix, mut spectrum: EigenDecomposition, rank_tol: f64) -> Result<Self> {
        let floor = -rank_tol * spectrum.max().max(1.0);
        if spectrum.min() < floor {
            return Err(Error::IndefiniteInput { min_eigenvalue: spectrum.min() });
        }
        for l in spectrum.eigenvalues.iter_mut() {
            if *l < 0.0 {
                *l = 0.0;
            }
        }
        Ok(PSDMatrix { matrix, spectrum })
    }

    /// Builds `V·diag(λ)·V*` from a known spectral decomposition. The
    /// eigenvalues must already be nonnegative and ascending.
    pub fn from_spectrum(spectrum: EigenDecomposition) -> Self {
        debug_assert!(spectrum.eigenvalues.iter().all(|&l| l >= 0.0));
        debug_assert!(spectrum.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let matrix = HermitianMatrix::symmetrized(spectrum.reconstruct());
        PSDMatrix { matrix, spectrum }
    }

    pub fn zeros(n: usize) -> Self {
        PSDMatrix::from_spectrum(EigenDecomposition {
            eigenvalues: alloc::vec![0.0; n],
            eigenvectors: OrthonormalBasis::standard(n),
        })
    }

    pub fn identity(n: usize) -> Self {
        PSDMatrix::from_spectrum(EigenDecomposition {
            eigenvalues: alloc::vec![1.0; n],
            eigenvectors: OrthonormalBasis::standard(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn as_mat(&self) -> &Mat {
        self.matrix.as_mat()
    }

    pub fn spectrum(&self) -> &EigenDecomposition {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    pub fn lambda_min(&self) -> f64 {
        self.spectrum.min()
    }

    pub fn lambda_max(&self) -> f64 {
        self.spectrum.max()
    }

    /// Spectral norm, which for a PSD matrix is `λ_max`.
    pub fn norm(&self) -> f64 {
        self.spectrum.max()
    }

    pub fn trace(&self) -> f64 {
        self.spectrum.eigenvalues.iter().sum()
    }

    pub fn det(&self) -> f64 {
        self.spectrum.eigenvalues.iter().product()
    }

    /// `ln det`, `-inf` when singular.
    pub fn log_det(&self) -> f64 {
        self.spectrum.eigenvalues.iter().map(|l| l.ln()).sum()
    }

    /// `true` when `λ_min > rank_tol·max(1, λ_max)`.
    pub fn is_strictly_positive(&self, rank_tol: f64) -> bool {
        self.dim() > 0 && self.lambda_min() > rank_tol * self.lambda_max().max(1.0)
    }

    /// `S^p` for `p ≠ 0` restricted to the support; requires strict positivity
    /// when `p < 0`.
    pub fn power(&self, p: f64) -> Result<Mat> {
        if p < 0.0 && self.lambda_min() <= 0.0 {
            return Err(Error::NotStrictlyPositive { min_eigenvalue: self.lambda_min() });
        }
        Ok(self.spectrum.apply_fn(|l| if l > 0.0 { l.powf(p) } else { 0.0 }))
    }

    pub fn inverse(&self) -> Result<Mat> {
        if self.lambda_min() <= 0.0 {
            return Err(Error::NotStrictlyPositive { min_eigenvalue: self.lambda_min() });
        }
        Ok(self.spectrum.apply_fn(|l| 1.0 / l))
    }

    pub fn quad_form(&self, v: &[C64]) -> f64 {
        self.matrix.quad_form(v)
    }

    pub fn direct_sum(&self, other: &PSDMatrix) -> PSDMatrix {
        let a = self.spectrum.eigenvectors.as_mat();
        let b = other.spectrum.eigenvectors.as_mat();
        let n = self.dim() + other.dim();
        let vecs = a.embed(n, self.dim(), 0, 0);
        let vecs_b = b.embed(n, other.dim(), self.dim(), 0);
        let mut pairs: Vec<(f64, Vec<C64>)> = Vec::with_capacity(n);
        for (j, &l) in self.eigenvalues().iter().enumerate() {
            pairs.push((l, vecs.col(j)));
        }
        for (j, &l) in other.eigenvalues().iter().enumerate() {
            pairs.push((l, vecs_b.col(j)));
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let values = pairs.iter().map(|p| p.0).collect();
        let cols: Vec<Vec<C64>> = pairs.into_iter().map(|p| p.1).collect();
        PSDMatrix::from_spectrum(EigenDecomposition {
            eigenvalues: values,
            eigenvectors: OrthonormalBasis::from_mat_unchecked(Mat::from_columns(n, &cols)),
        })
    }
}

/// Complex vector of unit Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct UnitVector(Vec<C64>);

impl UnitVector {
    pub fn new(v: Vec<C64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::ZeroVector);
        }
        let n = norm2(&v);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnitVector { norm: n });
        }
        Ok(UnitVector(v))
    }

    /// `v / ‖v‖`.
    pub fn normalize(v: &[C64]) -> Result<Self> {
        let n = norm2(v);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(UnitVector(v.iter().map(|&x| x / n).collect()))
    }

    pub fn basis(n: usize, i: usize) -> Self {
        UnitVector(basis_vec(n, i))
    }

    pub fn from_real(v: &[f64]) -> Result<Self> {
        UnitVector::new(real_vec(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }
}

impl core::ops::Deref for UnitVector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}
