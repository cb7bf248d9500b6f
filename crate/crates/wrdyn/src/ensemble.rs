//! Random instance generators for sweeps.
//!
//! Every instance lives on `ℂ ⊕ ℂ^dim`: `R_0 = 0 ⊕ T` with `T` strictly
//! positive, and `u = √(1−τ) e_0 + √τ w` with `w` a unit vector in the `T`
//! block. The kernel direction `e_0` absorbs the weight `1 − τ`, so the active
//! block is `T` from step 0 with weight exactly `τ`. The whole picture is then
//! rotated by a seeded Haar unitary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wrdyn_core::matcore::{dot, norm2, HermitianMatrix, Mat, OrthonormalBasis, PSDMatrix, UnitVector};
use wrdyn_core::C64;

use crate::spec::Ensemble;

/// Regularization added to Wishart draws.
pub const WISHART_EPS: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct Instance {
    pub r0: PSDMatrix,
    pub u: UnitVector,
    /// The active block before rotation.
    pub t: PSDMatrix,
    pub tau: f64,
    /// Rank of the limit on the active block when the ensemble determines it.
    pub expected_limit_rank: Option<usize>,
}

/// Deterministic generator for one `(seed, dim, τ)` cell.
pub fn rng_for(seed: u64, dim: usize, tau: f64) -> ChaCha8Rng {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    g.set_stream(((dim as u64) << 32) ^ tau.to_bits().rotate_left(7));
    g
}

pub fn cgauss(g: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(g);
    let im: f64 = StandardNormal.sample(g);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian(g: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| cgauss(g))
}

pub fn psd(m: Mat) -> PSDMatrix {
    let h = HermitianMatrix::new(m.hermitian_part()).expect("hermitian part");
    PSDMatrix::new(h, wrdyn_core::DEFAULT_RANK_TOL).expect("positive semidefinite by construction")
}

/// `G G* + εI` with standard complex Gaussian `G`.
pub fn wishart(g: &mut ChaCha8Rng, n: usize, eps: f64) -> PSDMatrix {
    let x = gaussian(g, n, n);
    psd(x.matmul(&x.adjoint()).add(&Mat::identity(n).scale(eps)))
}

/// Haar-distributed unit vector.
pub fn haar_unit(g: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| cgauss(g)).collect();
    UnitVector::normalize(&v).expect("nonzero gaussian vector").into_vec()
}

/// Haar-distributed unitary.
pub fn haar_unitary(g: &mut ChaCha8Rng, n: usize) -> Mat {
    let cols: Vec<Vec<C64>> = (0..n).map(|_| (0..n).map(|_| cgauss(g)).collect()).collect();
    OrthonormalBasis::from_vectors(n, &cols).expect("gaussian columns are independent").as_mat().clone()
}

/// Smallest `|b_0| / ‖T‖` accepted for coupled-block draws.
pub const MIN_COUPLING: f64 = 0.05;

/// Strictly positive 2×2 block and unit direction `w` with `|⟨w⊥, T w⟩| ≥ MIN_COUPLING·‖T‖`.
pub fn coupled_pair(g: &mut ChaCha8Rng) -> (PSDMatrix, Vec<C64>) {
    loop {
        let t = wishart(g, 2, 0.1);
        let w = haar_unit(g, 2);
        let tw = t.as_mat().mul_vec(&w);
        let a = dot(&w, &tw);
        let b: Vec<C64> = tw.iter().zip(&w).map(|(&x, &y)| x - y * a).collect();
        if norm2(&b) >= MIN_COUPLING * t.norm() {
            return (t, w);
        }
    }
}

/// `0 ⊕ T` with `u = √(1−τ) e_0 + √τ w`, conjugated by `q`.
pub fn embed(t: &PSDMatrix, w: &[C64], tau: f64, q: &Mat) -> (PSDMatrix, UnitVector) {
    let k = t.dim();
    let r = t.as_mat().embed(k + 1, k + 1, 1, 1);
    let mut u = vec![C64::new(0.0, 0.0); k + 1];
    u[0] = C64::new((1.0 - tau).sqrt(), 0.0);
    for (ui, wi) in u[1..].iter_mut().zip(w) {
        *ui = wi * tau.sqrt();
    }
    let r0 = psd(q.matmul(&r).matmul(&q.adjoint()));
    let u = UnitVector::normalize(&q.mul_vec(&u)).expect("unit weight vector");
    (r0, u)
}

/// Draws one instance with a `dim`-dimensional active block.
pub fn draw(ensemble: Ensemble, dim: usize, tau: f64, seed: u64) -> Instance {
    assert!(dim >= 2, "active dimension must be at least 2");
    let mut g = rng_for(seed, dim, tau);
    let (t, w, expected) = match ensemble {
        Ensemble::Wishart => {
            let t = wishart(&mut g, dim, WISHART_EPS);
            let w = haar_unit(&mut g, dim);
            (t, w, None)
        }
        Ensemble::CoupledBlock => {
            let (core, mut w) = coupled_pair(&mut g);
            w.resize(dim, C64::new(0.0, 0.0));
            let t = if dim > 2 { core.direct_sum(&wishart(&mut g, dim - 2, 0.1)) } else { core };
            (t, w, Some(dim - 2))
        }
        Ensemble::DecoupledTransverse => {
            let lambda = 0.5 + g.random::<f64>();
            let b = wishart(&mut g, dim - 1, 0.1);
            let t = psd(Mat::diag_real(&[lambda]).embed(dim, dim, 0, 0).add(&b.as_mat().embed(dim, dim, 1, 1)));
            let mut w = vec![C64::new(0.0, 0.0); dim];
            w[0] = C64::new(1.0, 0.0);
            (t, w, Some(dim - 1))
        }
    };
    let q = haar_unitary(&mut g, dim + 1);
    let (r0, u) = embed(&t, &w, tau, &q);
    Instance { r0, u, t, tau, expected_limit_rank: expected }
}
