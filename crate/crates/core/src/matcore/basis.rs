use alloc::vec::Vec;

use super::dense::{axpy_neg, basis_vec, dot, norm2, Mat, C64};
use super::eigen::one_sided_jacobi;
use super::{HermitianMatrix, PSDMatrix, ORTHONORMAL_TOL};
use crate::error::{Error, Result};

/// `k` orthonormal columns in a `dim`-dimensional space, stored as a
/// `dim × k` matrix.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrthonormalBasis {
    cols: Mat,
}

impl OrthonormalBasis {
    /// Validates `‖B*B − I‖ ≤ 1e-10` entrywise.
    pub fn new(cols: Mat) -> Result<Self> {
        let k = cols.cols();
        let residual = cols.adjoint_mul(&cols).sub(&Mat::identity(k)).max_abs();
        if residual > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(OrthonormalBasis { cols })
    }

    pub(crate) fn from_mat_unchecked(cols: Mat) -> Self {
        OrthonormalBasis { cols }
    }

    /// Orthonormalizes the given vectors in order (modified Gram–Schmidt,
    /// applied twice). Fails if they are linearly dependent.
    pub fn from_vectors(dim: usize, vectors: &[Vec<C64>]) -> Result<Self> {
        let mut out: Vec<Vec<C64>> = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            let before = norm2(v);
            let mut w = v.clone();
            orthogonalize(&mut w, &out);
            let n = norm2(&w);
            if before == 0.0 || n <= 1e-10 * before {
                return Err(Error::ZeroVector);
            }
            w.iter_mut().for_each(|x| *x /= n);
            out.push(w);
        }
        Ok(OrthonormalBasis { cols: Mat::from_columns(dim, &out) })
    }

    pub fn standard(n: usize) -> Self {
        OrthonormalBasis { cols: Mat::identity(n) }
    }

    pub fn empty(dim: usize) -> Self {
        OrthonormalBasis { cols: Mat::zeros(dim, 0) }
    }

    pub fn as_mat(&self) -> &Mat {
        &self.cols
    }

    pub fn dim(&self) -> usize {
        self.cols.rows()
    }

    pub fn k(&self) -> usize {
        self.cols.cols()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.cols.col(j)
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.k()).map(|j| self.cols.col(j)).collect()
    }

    /// Coordinates `B* v`.
    pub fn coords(&self, v: &[C64]) -> Vec<C64> {
        self.cols.adjoint_mul_vec(v)
    }

    /// `B c`, the ambient vector with coordinates `c`.
    pub fn lift(&self, c: &[C64]) -> Vec<C64> {
        self.cols.mul_vec(c)
    }

    /// `B X B*` for a `k × k` matrix `X`.
    pub fn lift_mat(&self, x: &Mat) -> Mat {
        self.cols.matmul(x).matmul(&self.cols.adjoint())
    }

    /// Orthogonal projector `B B*`.
    pub fn projector(&self) -> Mat {
        self.cols.matmul(&self.cols.adjoint())
    }

    /// Columns of `self` followed by those of `other`.
    pub fn concat(&self, other: &OrthonormalBasis) -> OrthonormalBasis {
        let mut cols = self.columns();
        cols.extend(other.columns());
        OrthonormalBasis { cols: Mat::from_columns(self.dim(), &cols) }
    }

    /// Orthonormal basis of the orthogonal complement.
    ///
    /// Deterministic: standard basis vectors are projected onto the complement
    /// and the one with the largest remainder is accepted next (lowest index on
    /// ties), so the complement of `{e_1}` is `{e_2, …, e_n}`.
    pub fn complement(&self) -> OrthonormalBasis {
        let n = self.dim();
        let mut accepted: Vec<Vec<C64>> = self.columns();
        let mut out: Vec<Vec<C64>> = Vec::new();
        let mut used = alloc::vec![false; n];
        for _ in self.k()..n {
            let mut best: Option<(usize, f64, Vec<C64>)> = None;
            for i in (0..n).filter(|&i| !used[i]) {
                let mut w = basis_vec(n, i);
                orthogonalize(&mut w, &accepted);
                let r = norm2(&w);
                if best.as_ref().map_or(true, |b| r > b.1 + 1e-12) {
                    best = Some((i, r, w));
                }
            }
            let Some((i, r, mut w)) = best else { break };
            if r <= 1e-8 {
                break;
            }
            used[i] = true;
            w.iter_mut().for_each(|x| *x /= r);
            accepted.push(w.clone());
            out.push(w);
        }
        OrthonormalBasis { cols: Mat::from_columns(n, &out) }
    }
}

/// Removes the components along the orthonormal `basis`, twice for stability.
fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for q in basis {
            let h = dot(q, w);
            axpy_neg(w, h, q);
        }
    }
}

/// Eigenvectors of `S` whose eigenvalues exceed `rank_tol·max(1, λ_max)`.
pub fn range_basis(s: &PSDMatrix, rank_tol: f64) -> OrthonormalBasis {
    let spec = s.spectrum();
    let thresh = rank_tol * spec.max().max(1.0);
    let vecs = spec.eigenvectors.as_mat();
    let cols: Vec<Vec<C64>> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > thresh)
        .map(|(j, _)| vecs.col(j))
        .collect();
    OrthonormalBasis { cols: Mat::from_columns(s.dim(), &cols) }
}

/// Orthonormal basis of `span{v, Sv, S²v, …}`.
///
/// Arnoldi with full reorthogonalization; the recursion stops when the new
/// direction has norm at most `rank_tol·max(1, ‖S‖)`.
pub fn krylov_span(s: &HermitianMatrix, v: &[C64], rank_tol: f64) -> Result<OrthonormalBasis> {
    let n = s.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.len() });
    }
    let vn = norm2(v);
    if vn == 0.0 || !vn.is_finite() {
        return Err(Error::ZeroVector);
    }
    let thresh = rank_tol * s.norm().max(1.0);
    let mut qs: Vec<Vec<C64>> = alloc::vec![v.iter().map(|&x| x / vn).collect()];
    while qs.len() < n {
        let mut w = s.as_mat().mul_vec(qs.last().unwrap());
        orthogonalize(&mut w, &qs);
        let wn = norm2(&w);
        if wn <= thresh {
            break;
        }
        w.iter_mut().for_each(|x| *x /= wn);
        qs.push(w);
    }
    Ok(OrthonormalBasis { cols: Mat::from_columns(n, &qs) })
}

/// Sines of the principal angles between `span(A)` and `span(B)`, ascending.
///
/// These are the singular values of `(I − BB*)A`; one value per column of `A`.
pub fn principal_angle_sines(a: &OrthonormalBasis, b: &OrthonormalBasis) -> Result<Vec<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let bm = b.as_mat();
    let mut resid = a.as_mat().sub(&bm.matmul(&bm.adjoint_mul(a.as_mat())));
    let (mut s, _) = one_sided_jacobi(&mut resid);
    for x in s.iter_mut() {
        *x = x.min(1.0);
    }
    s.sort_by(f64::total_cmp);
    Ok(s)
}
