use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub type C64 = Complex64;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) const ZERO: C64 = c(0.0, 0.0);
pub(crate) const ONE: C64 = c(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == cols), "ragged rows");
        Mat::from_fn(r, cols, |i, j| rows[i][j])
    }

    pub fn from_real_rows<const N: usize>(rows: &[[f64; N]]) -> Self {
        Mat::from_fn(rows.len(), N, |i, j| c(rows[i][j], 0.0))
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = c(v, 0.0);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(nrows: usize, cols: &[Vec<C64>]) -> Self {
        assert!(cols.iter().all(|v| v.len() == nrows), "column length mismatch");
        Mat::from_fn(nrows, cols.len(), |i, j| cols[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    /// Columns `range` as a new matrix.
    pub fn columns(&self, range: core::ops::Range<usize>) -> Mat {
        let start = range.start;
        Mat::from_fn(self.rows, range.len(), |i, j| self[(i, start + j)])
    }

    pub fn adjoint(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self* · rhs` without materializing the adjoint.
    pub fn adjoint_mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.rows, rhs.rows, "adjoint_mul dimension mismatch");
        let mut out = Mat::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let arow = self.row(k);
            let brow = rhs.row(k);
            for (i, a) in arow.iter().enumerate() {
                let a = a.conj();
                if a == ZERO {
                    continue;
                }
                for (j, &b) in brow.iter().enumerate() {
                    out.data[i * rhs.cols + j] += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `self* · v`.
    pub fn adjoint_mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, v.len(), "adjoint_mul_vec dimension mismatch");
        let mut out = vec![ZERO; self.cols];
        for (k, &x) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(k)) {
                *o += a.conj() * x;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// Subtracts `alpha · v w*` in place.
    pub fn sub_outer(&mut self, alpha: f64, v: &[C64], w: &[C64]) {
        assert_eq!((self.rows, self.cols), (v.len(), w.len()));
        for i in 0..self.rows {
            let vi = v[i] * alpha;
            for j in 0..self.cols {
                self.data[i * self.cols + j] -= vi * w[j].conj();
            }
        }
    }

    /// `v w*`.
    pub fn outer(v: &[C64], w: &[C64]) -> Mat {
        Mat::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    /// `(self + self*) / 2`.
    pub fn hermitian_part(&self) -> Mat {
        assert!(self.is_square());
        Mat::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Embeds `self` as the block starting at `(r0, c0)` of a zero `rows × cols` matrix.
    pub fn embed(&self, rows: usize, cols: usize, r0: usize, c0: usize) -> Mat {
        let mut out = Mat::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(r0 + i, c0 + j)] = self[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `⟨x, y⟩ = Σ conj(x_i) y_i`.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, &b)| a.conj() * b).sum()
}

/// Euclidean norm, scaled so that tiny and huge entries neither underflow nor overflow.
pub fn norm2(x: &[C64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.re.abs()).max(v.im.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let inv = 1.0 / scale;
    let ss: f64 = x
        .iter()
        .map(|v| {
            let (a, b) = (v.re * inv, v.im * inv);
            a * a + b * b
        })
        .sum();
    scale * ss.sqrt()
}

/// Squared Euclidean norm without rescaling.
pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

pub fn scale_vec(x: &[C64], s: C64) -> Vec<C64> {
    x.iter().map(|&v| v * s).collect()
}

/// `y ← y − alpha x`.
pub(crate) fn axpy_neg(y: &mut [C64], alpha: C64, x: &[C64]) {
    for (a, &b) in y.iter_mut().zip(x) {
        *a -= alpha * b;
    }
}

pub fn real_vec(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| c(v, 0.0)).collect()
}

pub fn basis_vec(n: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    v[i] = ONE;
    v
}

/// Multiplies `x` by a unimodular scalar so that its first significant
/// component is real and positive.
pub(crate) fn normalize_phase(x: &mut [C64]) {
    let big = x.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if big == 0.0 {
        return;
    }
    if let Some(first) = x.iter().find(|v| v.norm() > 1e-10 * big) {
        let phase = first.conj() / first.norm();
        for v in x.iter_mut() {
            *v *= phase;
        }
    }
}
