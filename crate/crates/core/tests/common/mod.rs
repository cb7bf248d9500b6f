#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wrdyn_core::matcore::{OrthonormalBasis, PSDMatrix, UnitVector};
use wrdyn_core::{HermitianMatrix, Mat, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cgauss(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| cgauss(rng))
}

pub fn psd_from(m: Mat) -> PSDMatrix {
    PSDMatrix::new(HermitianMatrix::new(m).unwrap(), 1e-10).unwrap()
}

/// `G G* / n + eps I` with standard complex Gaussian `G`.
pub fn wishart(rng: &mut ChaCha8Rng, n: usize, eps: f64) -> PSDMatrix {
    let g = gaussian_mat(rng, n, n);
    psd_from(g.matmul(&g.adjoint()).scale(1.0 / n as f64).add(&Mat::identity(n).scale(eps)))
}

/// PSD of the given rank (`rank ≤ n`).
pub fn low_rank(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> PSDMatrix {
    let g = gaussian_mat(rng, n, rank);
    psd_from(g.matmul(&g.adjoint()))
}

pub fn unit(rng: &mut ChaCha8Rng, n: usize) -> UnitVector {
    let v: Vec<C64> = (0..n).map(|_| cgauss(rng)).collect();
    UnitVector::normalize(&v).unwrap()
}

pub fn unitary(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let cols: Vec<Vec<C64>> = (0..n).map(|_| (0..n).map(|_| cgauss(rng)).collect()).collect();
    OrthonormalBasis::from_vectors(n, &cols).unwrap().as_mat().clone()
}

pub fn conj(q: &Mat, t: &PSDMatrix) -> PSDMatrix {
    psd_from(q.matmul(t.as_mat()).matmul(&q.adjoint()).hermitian_part())
}

/// Random strictly positive `k × k` block with entries of order one.
pub fn positive_block(rng: &mut ChaCha8Rng, k: usize) -> PSDMatrix {
    wishart(rng, k, 0.1)
}

/// `R_0 = 0 ⊕ T ⊕ F` on `ℂ ⊕ ℂ^k ⊕ ℂ^m`, rotated by a random unitary, with
/// `u = √(1−τ) e_0 + √τ w` for a unit `w` in the middle block, so the active
/// block is `T` with weight `√τ w` from step 0 and `F` is frozen.
pub struct Planted {
    pub r0: PSDMatrix,
    pub u: UnitVector,
    pub t: PSDMatrix,
    pub w: Vec<C64>,
    pub tau: f64,
    pub frozen: Option<PSDMatrix>,
    pub q: Mat,
}

pub fn planted(rng: &mut ChaCha8Rng, t: PSDMatrix, w: Vec<C64>, tau: f64, frozen: Option<PSDMatrix>, rotate: bool) -> Planted {
    let k = t.dim();
    let m = frozen.as_ref().map_or(0, |f| f.dim());
    let n = 1 + k + m;
    let mut r = Mat::zeros(n, n);
    for i in 0..k {
        for j in 0..k {
            r[(1 + i, 1 + j)] = t.as_mat()[(i, j)];
        }
    }
    if let Some(f) = &frozen {
        for i in 0..m {
            for j in 0..m {
                r[(1 + k + i, 1 + k + j)] = f.as_mat()[(i, j)];
            }
        }
    }
    let mut u = vec![C64::new(0.0, 0.0); n];
    u[0] = C64::new((1.0 - tau).sqrt(), 0.0);
    for i in 0..k {
        u[1 + i] = w[i] * tau.sqrt();
    }
    let q = if rotate { unitary(rng, n) } else { Mat::identity(n) };
    let r0 = psd_from(q.matmul(&r).matmul(&q.adjoint()).hermitian_part());
    let u = UnitVector::normalize(&q.mul_vec(&u)).unwrap();
    Planted { r0, u, t, w, tau, frozen, q }
}

pub fn example_r0() -> PSDMatrix {
    PSDMatrix::from_real_rows(&[[0.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 2.0]]).unwrap()
}

pub fn example_u() -> UnitVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    UnitVector::from_real(&[s, s, 0.0]).unwrap()
}

pub fn example_t0() -> PSDMatrix {
    PSDMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 2.0]]).unwrap()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.sub(b).max_abs()
}
