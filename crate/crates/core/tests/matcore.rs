mod common;

use common::*;
use proptest::prelude::*;
use wrdyn_core::dynamics::wr_step;
use wrdyn_core::matcore::*;
use wrdyn_core::Error;

fn herm(rows: &[[f64; 2]]) -> HermitianMatrix {
    HermitianMatrix::from_real_rows(rows).unwrap()
}

#[test]
fn eigh_diagonal_sorts() {
    let h = HermitianMatrix::new(Mat::diag_real(&[3.0, 1.0, 2.0])).unwrap();
    let e = eigh(&h);
    assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
    let v = e.eigenvectors.as_mat();
    assert_eq!(v.col(0), basis_vec(3, 1));
    assert_eq!(v.col(1), basis_vec(3, 2));
    assert_eq!(v.col(2), basis_vec(3, 0));
}

#[test]
fn eigh_golden_ratio_block() {
    let e = eigh(&herm(&[[1.0, 1.0], [1.0, 2.0]]));
    let r5 = 5f64.sqrt();
    assert!((e.eigenvalues[0] - (3.0 - r5) / 2.0).abs() < 1e-15);
    assert!((e.eigenvalues[1] - (3.0 + r5) / 2.0).abs() < 1e-15);
    for (i, l) in e.eigenvalues.iter().enumerate() {
        // characteristic polynomial λ² − 3λ + 1
        assert!((l * l - 3.0 * l + 1.0).abs() < 1e-14, "root {i}");
    }
}

#[test]
fn eigh_rejects_skew_input() {
    let m = Mat::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]);
    assert!(matches!(HermitianMatrix::new(m), Err(Error::NonHermitianInput { .. })));
}

#[test]
fn eigenvector_phase_convention() {
    let mut r = rng(5);
    let s = wishart(&mut r, 4, 0.0);
    let v = s.spectrum().eigenvectors.as_mat();
    for j in 0..4 {
        let first = v.col(j).into_iter().find(|x| x.norm() > 1e-12).unwrap();
        assert!(first.im.abs() < 1e-15 && first.re > 0.0);
    }
}

#[test]
fn sqrt_examples() {
    let s = psd_sqrt(&PSDMatrix::from_real_rows(&[[4.0, 0.0], [0.0, 9.0]]).unwrap());
    assert!(s.as_mat().sub(&Mat::diag_real(&[2.0, 3.0])).max_abs() < 1e-15);
    assert!(psd_sqrt(&PSDMatrix::zeros(3)).as_mat().max_abs() == 0.0);
    let want = Mat::from_real_rows(&[[2.0, 1.0], [1.0, 3.0]]).scale(1.0 / 5f64.sqrt());
    let s = psd_sqrt(&example_t0());
    assert!(s.as_mat().sub(&want).max_abs() < 1e-15);
    assert!(s.as_mat().matmul(s.as_mat()).sub(example_t0().as_mat()).max_abs() < 1e-15);
}

#[test]
fn sqrt_rejects_indefinite() {
    let h = herm(&[[1.0, 0.0], [0.0, -0.5]]);
    assert!(matches!(PSDMatrix::new(h, 1e-10), Err(Error::IndefiniteInput { .. })));
}

#[test]
fn sqrt2x2_examples() {
    let want = Mat::from_real_rows(&[[2.0, 1.0], [1.0, 3.0]]).scale(1.0 / 5f64.sqrt());
    assert!(sqrt2x2(&example_t0()).unwrap().as_mat().sub(&want).max_abs() < 1e-15);
    assert!(sqrt2x2(&PSDMatrix::identity(2)).unwrap().as_mat().sub(&Mat::identity(2)).max_abs() < 1e-15);
    let d = sqrt2x2(&PSDMatrix::from_real_rows(&[[7.0, 0.0], [0.0, 0.0]]).unwrap()).unwrap();
    assert!(d.as_mat().sub(&Mat::diag_real(&[7f64.sqrt(), 0.0])).max_abs() < 1e-15);
    assert_eq!(sqrt2x2(&PSDMatrix::zeros(2)).unwrap().as_mat().max_abs(), 0.0);
}

#[test]
fn rank_examples() {
    let s = PSDMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 1e-16]]).unwrap();
    assert_eq!(numerical_rank(&s, 1e-12), 1);
    assert_eq!(numerical_rank(&PSDMatrix::identity(3), 1e-10), 3);
    let s = PSDMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
    assert_eq!(numerical_rank(&s, 1e-10), 1);
}

#[test]
fn range_examples() {
    let b = range_basis(&PSDMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 5.0]]).unwrap(), 1e-10);
    assert_eq!(b.k(), 1);
    assert!((b.column(0)[1].norm() - 1.0).abs() < 1e-15);
    let b = range_basis(&PSDMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap(), 1e-10);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(b.k(), 1);
    assert!((b.column(0)[0] - c(s, 0.0)).norm() < 1e-15 && (b.column(0)[1] - c(s, 0.0)).norm() < 1e-15);
    assert_eq!(range_basis(&wishart(&mut rng(1), 4, 0.1), 1e-10).k(), 4);
    assert_eq!(range_basis(&PSDMatrix::zeros(3), 1e-10).k(), 0);
}

#[test]
fn compress_examples() {
    let s = HermitianMatrix::new(Mat::diag_real(&[1.0, 2.0, 3.0])).unwrap();
    let b = OrthonormalBasis::from_vectors(3, &[basis_vec(3, 1), basis_vec(3, 2)]).unwrap();
    assert!(compress(&s, &b).unwrap().as_mat().sub(&Mat::diag_real(&[2.0, 3.0])).max_abs() == 0.0);
    assert_eq!(compress(&s, &OrthonormalBasis::standard(3)).unwrap(), s);
    let e = OrthonormalBasis::from_vectors(3, &[basis_vec(3, 1), basis_vec(3, 2)]).unwrap();
    let t = compress(example_r0().hermitian(), &e).unwrap();
    assert!(t.as_mat().sub(example_t0().as_mat()).max_abs() == 0.0);
    let short = OrthonormalBasis::standard(2);
    assert!(matches!(compress(&s, &short), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn loewner_examples() {
    let z = HermitianMatrix::zeros(3);
    let i = HermitianMatrix::identity(3);
    assert!(loewner_leq(&z, &i, 1e-12).unwrap());
    assert!(!loewner_leq(&i, &z, 1e-12).unwrap());
    assert!(loewner_leq(&z, &HermitianMatrix::identity(2), 1e-12).is_err());
    let mut r = rng(11);
    for _ in 0..20 {
        let n = 2 + (r.next_u32() % 5) as usize;
        let rr = wishart(&mut r, n, 0.0);
        let u = unit(&mut r, n);
        let next = wr_step(&rr, &u).unwrap();
        assert!(loewner_leq(next.hermitian(), rr.hermitian(), 1e-12).unwrap());
    }
}

fn invariance_residual(s: &HermitianMatrix, b: &OrthonormalBasis) -> f64 {
    let bm = b.as_mat();
    let sb = s.as_mat().matmul(bm);
    sb.sub(&bm.matmul(&bm.adjoint_mul(&sb))).max_abs()
}

#[test]
fn krylov_examples() {
    let s = HermitianMatrix::new(Mat::diag_real(&[1.0, 2.0, 3.0])).unwrap();
    assert_eq!(krylov_span(&s, &basis_vec(3, 0), 1e-10).unwrap().k(), 1);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let k = krylov_span(&s, &[c(r, 0.0), c(r, 0.0), c(0.0, 0.0)], 1e-10).unwrap();
    assert_eq!(k.k(), 2);
    assert!(invariance_residual(&s, &k) < 1e-14);
    let mut g = rng(3);
    let w = wishart(&mut g, 4, 0.0);
    let k = krylov_span(w.hermitian(), &unit(&mut g, 4), 1e-10).unwrap();
    assert_eq!(k.k(), 4);
    assert!(invariance_residual(w.hermitian(), &k) < 1e-12);
    assert_eq!(krylov_span(&s, &[c(0.0, 0.0); 3], 1e-10), Err(Error::ZeroVector));
}

#[test]
fn principal_angles_of_equal_spans_vanish() {
    let mut g = rng(4);
    let q = unitary(&mut g, 5);
    let cols: Vec<_> = (0..3).map(|j| q.col(j)).collect();
    let a = OrthonormalBasis::from_vectors(5, &cols).unwrap();
    let coeffs = [[c(1.0, 0.0), c(0.0, 0.5), c(0.0, 0.0)], [c(1.0, 0.0), c(1.0, 0.5), c(0.0, -1.0)], [c(2.0, 0.0), c(0.0, 0.0), c(3.0, 1.0)]];
    let mixed: Vec<_> = coeffs.iter().map(|x| a.lift(x)).collect();
    let b = OrthonormalBasis::from_vectors(5, &mixed).unwrap();
    assert!(principal_angle_sines(&a, &b).unwrap().iter().all(|&s| s < 1e-14));
}

fn seeded_psd(seed: u64, n: usize, rank: usize) -> PSDMatrix {
    let mut g = rng(seed);
    let t = low_rank(&mut g, n, rank.min(n));
    let scale = (g.next_u32() % 7) as f64 - 3.0;
    psd_from(t.as_mat().scale(10f64.powf(scale)))
}

use rand::RngCore;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sqrt_squares_back(seed in any::<u64>(), n in 1usize..=16, rank in 1usize..=16) {
        let s = seeded_psd(seed, n, rank);
        let h = psd_sqrt(&s);
        let err = h.as_mat().matmul(h.as_mat()).sub(s.as_mat()).max_abs();
        prop_assert!(err <= 1e-9 * s.norm().max(1.0), "err {err}");
    }

    #[test]
    fn sqrt2x2_agrees_with_eigen_route(seed in any::<u64>(), rank in 1usize..=2) {
        let s = seeded_psd(seed, 2, rank);
        let a = sqrt2x2(&s).unwrap();
        let b = psd_sqrt(&s);
        prop_assert!(a.as_mat().sub(b.as_mat()).max_abs() <= 1e-10 * s.norm().sqrt().max(1.0));
    }

    #[test]
    fn sqrt_keeps_rank(seed in any::<u64>(), n in 1usize..=8, rank in 1usize..=8) {
        let s = seeded_psd(seed, n, rank);
        prop_assert_eq!(numerical_rank(&psd_sqrt(&s), 1e-10), numerical_rank(&s, 1e-10));
    }

    #[test]
    fn krylov_span_and_complement_reduce(seed in any::<u64>(), n in 2usize..=8, k in 1usize..=8) {
        let mut g = rng(seed);
        // Repeated eigenvalues make proper invariant subspaces likely.
        let vals: Vec<f64> = (0..n).map(|i| (i % k.min(n)) as f64 + 1.0).collect();
        let q = unitary(&mut g, n);
        let s = HermitianMatrix::new(q.matmul(&Mat::diag_real(&vals)).matmul(&q.adjoint()).hermitian_part()).unwrap();
        let v = unit(&mut g, n);
        let b = krylov_span(&s, &v, 1e-10).unwrap();
        let tol = 1e-8 * s.norm();
        prop_assert!(invariance_residual(&s, &b) <= tol);
        prop_assert!(invariance_residual(&s, &b.complement()) <= tol);
        prop_assert_eq!(b.k() + b.complement().k(), n);
    }

    #[test]
    fn compression_stays_psd(seed in any::<u64>(), n in 2usize..=8, k in 1usize..=8) {
        let mut g = rng(seed);
        let s = wishart(&mut g, n, 0.0);
        let q = unitary(&mut g, n);
        let cols: Vec<_> = (0..k.min(n)).map(|j| q.col(j)).collect();
        let b = OrthonormalBasis::from_vectors(n, &cols).unwrap();
        prop_assert!(compress_psd(&s, &b).is_ok());
    }

    #[test]
    fn reconstruction_matches(seed in any::<u64>(), n in 1usize..=12) {
        let mut g = rng(seed);
        let h = HermitianMatrix::new(gaussian_mat(&mut g, n, n).hermitian_part()).unwrap();
        let e = eigh(&h);
        let scale = e.spectral_norm().max(1.0);
        prop_assert!(e.reconstruct().sub(h.as_mat()).max_abs() <= 1e-10 * scale);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}
