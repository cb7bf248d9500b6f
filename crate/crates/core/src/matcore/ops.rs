#[allow(unused_imports)]
use num_traits::Float;

use super::dense::Mat;
use super::eigen::eigh;
use super::{EigenDecomposition, HermitianMatrix, OrthonormalBasis, PSDMatrix};
use crate::error::{Error, Result};

/// Principal square root, from the stored spectrum.
pub fn psd_sqrt(s: &PSDMatrix) -> PSDMatrix {
    let spec = s.spectrum();
    let floor = s.dim() as f64 * f64::EPSILON * s.lambda_max();
    PSDMatrix::from_spectrum(EigenDecomposition {
        eigenvalues: spec.eigenvalues.iter().map(|&l| if l > floor { l.sqrt() } else { 0.0 }).collect(),
        eigenvectors: spec.eigenvectors.clone(),
    })
}

/// Closed-form square root of a 2×2 PSD matrix:
/// `(M + √det·I) / √(tr M + 2√det)`. The zero matrix maps to zero.
pub fn sqrt2x2(m: &PSDMatrix) -> Result<PSDMatrix> {
    if m.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: m.dim() });
    }
    let a = m.as_mat();
    let tr = a[(0, 0)].re + a[(1, 1)].re;
    let det = a[(0, 0)].re * a[(1, 1)].re - a[(0, 1)].norm_sqr();
    let sd = if det > 4.0 * f64::EPSILON * tr * tr { det.sqrt() } else { 0.0 };
    let denom = tr + 2.0 * sd;
    if denom <= 0.0 {
        return Ok(PSDMatrix::zeros(2));
    }
    let root = a.add(&Mat::identity(2).scale(sd)).scale(1.0 / denom.sqrt());
    PSDMatrix::new(HermitianMatrix::symmetrized(root), crate::DEFAULT_RANK_TOL)
}

/// Number of eigenvalues above `rank_tol·max(1, λ_max)`.
pub fn numerical_rank(s: &PSDMatrix, rank_tol: f64) -> usize {
    let thresh = rank_tol * s.lambda_max().max(1.0);
    s.eigenvalues().iter().filter(|&&l| l > thresh).count()
}

/// `B* S B`.
pub fn compress(s: &HermitianMatrix, b: &OrthonormalBasis) -> Result<HermitianMatrix> {
    if b.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: b.dim() });
    }
    let bm = b.as_mat();
    Ok(HermitianMatrix::symmetrized(bm.adjoint_mul(&s.as_mat().matmul(bm))))
}

pub fn compress_psd(s: &PSDMatrix, b: &OrthonormalBasis) -> Result<PSDMatrix> {
    PSDMatrix::new(compress(s.hermitian(), b)?, crate::DEFAULT_RANK_TOL)
}

/// `A ≤ B` in the Loewner order: `λ_min(B − A) ≥ −tol·max(1, ‖B‖)`.
pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: b.dim(), found: a.dim() });
    }
    let diff = eigh(&b.sub(a));
    Ok(diff.min() >= -tol * b.norm().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psd(rows: &[[f64; 2]]) -> PSDMatrix {
        PSDMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn sqrt_of_diagonal() {
        let r = psd_sqrt(&psd(&[[4.0, 0.0], [0.0, 9.0]]));
        assert!(r.as_mat().sub(&Mat::diag_real(&[2.0, 3.0])).max_abs() < 1e-15);
    }

    #[test]
    fn sqrt_of_zero() {
        assert_eq!(psd_sqrt(&PSDMatrix::zeros(3)).as_mat().max_abs(), 0.0);
        assert_eq!(sqrt2x2(&PSDMatrix::zeros(2)).unwrap().as_mat().max_abs(), 0.0);
    }

    #[test]
    fn closed_form_matches_spectral_root() {
        let m = psd(&[[1.0, 1.0], [1.0, 2.0]]);
        let s5 = 5f64.sqrt();
        let want = Mat::from_real_rows(&[[2.0 / s5, 1.0 / s5], [1.0 / s5, 3.0 / s5]]);
        let a = sqrt2x2(&m).unwrap();
        let b = psd_sqrt(&m);
        assert!(a.as_mat().sub(&want).max_abs() < 1e-15);
        assert!(b.as_mat().sub(&want).max_abs() < 1e-14);
        assert!(a.as_mat().matmul(a.as_mat()).sub(m.as_mat()).max_abs() < 1e-14);
    }

    #[test]
    fn closed_form_rank_one_diagonal() {
        let a = sqrt2x2(&psd(&[[4.0, 0.0], [0.0, 0.0]])).unwrap();
        assert!(a.as_mat().sub(&Mat::diag_real(&[2.0, 0.0])).max_abs() < 1e-15);
    }

    #[test]
    fn ranks() {
        assert_eq!(numerical_rank(&psd(&[[1.0, 0.0], [0.0, 1e-16]]), 1e-12), 1);
        assert_eq!(numerical_rank(&psd(&[[1.0, 1.0], [1.0, 1.0]]), 1e-10), 1);
        assert_eq!(numerical_rank(&PSDMatrix::identity(3), 1e-10), 3);
    }

    #[test]
    fn loewner_basic() {
        let z = HermitianMatrix::zeros(2);
        let i = HermitianMatrix::identity(2);
        assert!(loewner_leq(&z, &i, 1e-12).unwrap());
        assert!(!loewner_leq(&i, &z, 1e-12).unwrap());
    }

    #[test]
    fn compress_selects_block() {
        let s = HermitianMatrix::new(Mat::diag_real(&[1.0, 2.0, 3.0])).unwrap();
        let b = OrthonormalBasis::from_mat_unchecked(Mat::identity(3).columns(1..3));
        let t = compress(&s, &b).unwrap();
        assert!(t.as_mat().sub(&Mat::diag_real(&[2.0, 3.0])).max_abs() == 0.0);
    }
}
