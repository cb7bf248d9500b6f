//! Cyclic Jacobi methods.
//!
//! The two-sided variant diagonalizes a Hermitian matrix; the one-sided
//! (Hestenes) variant orthogonalizes the columns of a rectangular matrix and
//! yields singular values with high relative accuracy when the matrix is a
//! well-conditioned matrix times a diagonal scaling.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::dense::{normalize_phase, norm2, Mat, C64};
use super::{HermitianMatrix, OrthonormalBasis};

const EPS: f64 = f64::EPSILON;
const MAX_SWEEPS: usize = 80;

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: OrthonormalBasis,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Largest absolute eigenvalue (the spectral norm).
    pub fn spectral_norm(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// `V · diag(f(λ)) · V*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Mat {
        let v = self.eigenvectors.as_mat();
        let n = v.rows();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = Mat::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out.hermitian_part()
    }

    pub fn reconstruct(&self) -> Mat {
        self.apply_fn(|l| l)
    }
}

/// Unitary acting on coordinates `(p, q)`, stored as
/// `[[c, s], [−s·w̄, c·w̄]]`: the phase `w̄` makes the pivot real, then a real
/// Jacobi rotation zeroes it.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Rotation {
    c: f64,
    s: f64,
    w: C64,
    /// Shift `t·|a_pq|` applied to the diagonal.
    pub(crate) shift: f64,
}

impl Rotation {
    /// Rotation that annihilates `a_pq` of the Hermitian 2×2 block
    /// `[[a_pp, a_pq], [conj(a_pq), a_qq]]`. `None` when `a_pq = 0`.
    pub(crate) fn annihilating(app: f64, aqq: f64, apq: C64) -> Option<Rotation> {
        let g = apq.norm();
        if g == 0.0 {
            return None;
        }
        let w = apq / g;
        let theta = (aqq - app) / (2.0 * g);
        let t = if theta.abs() > 1e150 {
            0.5 / theta
        } else {
            let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
            sgn / (theta.abs() + (theta * theta + 1.0).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        Some(Rotation { c, s: t * c, w, shift: t * g })
    }

    /// `X ← X · U` on columns `p, q`.
    #[inline]
    pub(crate) fn apply_cols(&self, x: &mut Mat, p: usize, q: usize) {
        let wb = self.w.conj();
        for i in 0..x.rows() {
            let xp = x[(i, p)];
            let xq = x[(i, q)] * wb;
            x[(i, p)] = xp * self.c - xq * self.s;
            x[(i, q)] = xp * self.s + xq * self.c;
        }
    }

    /// `X ← U* · X` on rows `p, q`.
    #[inline]
    pub(crate) fn apply_rows(&self, x: &mut Mat, p: usize, q: usize) {
        let w = self.w;
        for j in 0..x.cols() {
            let xp = x[(p, j)];
            let xq = x[(q, j)] * w;
            x[(p, j)] = xp * self.c - xq * self.s;
            x[(q, j)] = xp * self.s + xq * self.c;
        }
    }
}

/// Hermitian eigendecomposition by cyclic two-sided Jacobi.
///
/// Eigenvalues ascend; each eigenvector has its first significant component
/// real and positive.
pub fn eigh(h: &HermitianMatrix) -> EigenDecomposition {
    let mut a = h.as_mat().clone();
    let n = a.rows();
    let mut v = Mat::identity(n);
    let tiny = f64::MIN_POSITIVE / EPS;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if g <= tiny || g <= EPS * (app.abs() * aqq.abs()).sqrt() {
                    continue;
                }
                let Some(rot) = Rotation::annihilating(app, aqq, apq) else { continue };
                rot.apply_cols(&mut a, p, q);
                rot.apply_rows(&mut a, p, q);
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(app - rot.shift, 0.0);
                a[(q, q)] = C64::new(aqq + rot.shift, 0.0);
                rot.apply_cols(&mut v, p, q);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    sorted_decomposition(diag, &v)
}

fn sorted_decomposition(values: Vec<f64>, vectors: &Mat) -> EigenDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = Mat::zeros(vectors.rows(), n);
    let mut sorted = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.col(src);
        normalize_phase(&mut col);
        out.set_col(dst, &col);
        sorted.push(values[src]);
    }
    EigenDecomposition { eigenvalues: sorted, eigenvectors: OrthonormalBasis::from_mat_unchecked(out) }
}

/// One-sided Jacobi: finds a unitary `V` with `Y·V = Z` having mutually
/// orthogonal columns. Returns the column norms of `Z` and `V`.
///
/// The column norms are the singular values of `Y` (unordered).
pub(crate) fn one_sided_jacobi(y: &mut Mat) -> (Vec<f64>, Mat) {
    let m = y.cols();
    let mut v = Mat::identity(m);
    let mut norms: Vec<f64> = (0..m).map(|j| col_norm_sqr(y, j)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = col_dot(y, p, q);
                if gamma.norm() <= EPS * (alpha * beta).sqrt() {
                    continue;
                }
                let Some(rot) = Rotation::annihilating(alpha, beta, gamma) else { continue };
                rot.apply_cols(y, p, q);
                rot.apply_cols(&mut v, p, q);
                norms[p] = col_norm_sqr(y, p);
                norms[q] = col_norm_sqr(y, q);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = (0..m).map(|j| norm2(&y.col(j))).collect();
    (sigma, v)
}

/// One-sided Jacobi on `Y = V·diag(e^ℓ)` given in scaled form: `v` holds
/// unit columns and `ell` their log norms, so column scales far outside the
/// floating-point range are handled. On return `v` holds the orthogonalized
/// unit columns, `ell` the log singular values (unordered), and the result is
/// the accumulated unitary.
pub(crate) fn scaled_one_sided_jacobi(v: &mut Mat, ell: &mut [f64]) -> Mat {
    let m = v.cols();
    let mut acc = Mat::identity(m);
    for j in 0..m {
        renormalize(v, ell, j);
    }
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let gamma = col_dot(v, p, q);
                let g = gamma.norm();
                if g <= EPS {
                    continue;
                }
                let w = gamma / g;
                let d = ell[q] - ell[p];
                let sgn = if d >= 0.0 { 1.0 } else { -1.0 };
                let small = (-d.abs()).exp();
                let a = (1.0 - small * small) / (2.0 * g);
                // kappa = t·e^{|d|}
                let kappa = sgn / (a + (a * a + small * small).sqrt());
                let t = kappa * small;
                let c = 1.0 / (1.0 + t * t).sqrt();
                let (sp, sq) = if d >= 0.0 { (c * kappa, c * kappa * small * small) } else { (c * kappa * small * small, c * kappa) };
                let wb = w.conj();
                for i in 0..v.rows() {
                    let xp = v[(i, p)];
                    let xq = v[(i, q)] * wb;
                    v[(i, p)] = xp * c - xq * sp;
                    v[(i, q)] = xp * sq + xq * c;
                }
                Rotation { c, s: t * c, w, shift: 0.0 }.apply_cols(&mut acc, p, q);
                renormalize(v, ell, p);
                renormalize(v, ell, q);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }
    acc
}

fn renormalize(v: &mut Mat, ell: &mut [f64], j: usize) {
    let n = norm2(&v.col(j));
    if n > 0.0 && n.is_finite() {
        for i in 0..v.rows() {
            v[(i, j)] /= n;
        }
        ell[j] += n.ln();
    } else {
        ell[j] = f64::NEG_INFINITY;
    }
}

fn col_norm_sqr(y: &Mat, j: usize) -> f64 {
    let n = norm2(&y.col(j));
    n * n
}

fn col_dot(y: &Mat, p: usize, q: usize) -> C64 {
    (0..y.rows()).map(|i| y[(i, p)].conj() * y[(i, q)]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::dense::c;

    fn herm(rows: &[[f64; 2]]) -> HermitianMatrix {
        HermitianMatrix::new(Mat::from_real_rows(rows)).unwrap()
    }

    #[test]
    fn swap_matrix_eigenpairs() {
        let e = eigh(&herm(&[[0.0, 1.0], [1.0, 0.0]]));
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
        let v = e.eigenvectors.as_mat();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((v[(0, 0)] - c(s, 0.0)).norm() < 1e-15);
        assert!((v[(1, 0)] - c(-s, 0.0)).norm() < 1e-15);
        assert!((v[(0, 1)] - c(s, 0.0)).norm() < 1e-15);
        assert!((v[(1, 1)] - c(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let m = Mat::from_rows(&[
            alloc::vec![c(2.0, 0.0), c(1.0, -1.0), c(0.0, 0.5)],
            alloc::vec![c(1.0, 1.0), c(3.0, 0.0), c(-0.25, 0.0)],
            alloc::vec![c(0.0, -0.5), c(-0.25, 0.0), c(1.0, 0.0)],
        ]);
        let h = HermitianMatrix::new(m.clone()).unwrap();
        let e = eigh(&h);
        assert!(e.reconstruct().sub(&m).max_abs() < 1e-13);
        let v = e.eigenvectors.as_mat();
        assert!(v.adjoint_mul(v).sub(&Mat::identity(3)).max_abs() < 1e-14);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn one_sided_jacobi_graded_columns() {
        // Y = B·D with B well conditioned and D spanning 60 orders of magnitude.
        let b = Mat::from_real_rows(&[[1.0, 0.3], [0.2, 1.0]]);
        let d = [1.0, 1e-60];
        let mut y = Mat::from_fn(2, 2, |i, j| b[(i, j)] * d[j]);
        let det_b = 1.0 - 0.06;
        let (s, v) = one_sided_jacobi(&mut y);
        assert!(v.adjoint_mul(&v).sub(&Mat::identity(2)).max_abs() < 1e-15);
        let prod = s[0] * s[1];
        assert!((prod / (det_b * 1e-60) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scaled_jacobi_beyond_float_range() {
        let b = Mat::from_real_rows(&[[1.0, 0.3], [0.2, 1.0]]);
        let mut v = b.clone();
        let mut ell = [0.0, -1000.0];
        let acc = scaled_one_sided_jacobi(&mut v, &mut ell);
        assert!(acc.adjoint_mul(&acc).sub(&Mat::identity(2)).max_abs() < 1e-15);
        assert!(v.adjoint_mul(&v).sub(&Mat::identity(2)).max_abs() < 1e-15);
        let det_b: f64 = 1.0 - 0.06;
        assert!((ell[0] + ell[1] - (det_b.ln() - 1000.0)).abs() < 1e-12);
    }

    #[test]
    fn scaled_jacobi_matches_plain() {
        let y = Mat::from_real_rows(&[[2.0, 0.5, 0.1], [0.3, 1.0, -0.4], [0.0, 0.7, 3.0]]);
        let (mut plain, _) = one_sided_jacobi(&mut y.clone());
        let mut v = y.clone();
        let mut ell = [0.0; 3];
        scaled_one_sided_jacobi(&mut v, &mut ell);
        let mut scaled: Vec<f64> = ell.iter().map(|l| l.exp()).collect();
        plain.sort_by(f64::total_cmp);
        scaled.sort_by(f64::total_cmp);
        for (a, b) in plain.iter().zip(&scaled) {
            assert!((a / b - 1.0).abs() < 1e-14);
        }
    }
}
