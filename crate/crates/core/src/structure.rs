//! Reducing decompositions, limit classification and stationarity.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{iterate, stabilize, weighted_step, ActiveBlock, WRConfig};
use crate::error::{Error, Result};
use crate::matcore::{
    compress, krylov_span, norm2, psd_sqrt, EigenDecomposition, HermitianMatrix, Mat, OrthonormalBasis, PSDMatrix,
    UnitVector, C64,
};

/// Commutator threshold for the two-dimensional full-space dichotomy,
/// relative to `‖R‖`.
pub const COMMUTING_TOL: f64 = 1e-10;

/// `H = M ⊕ M⊥` with `M` the largest reducing subspace of `R` inside `u⊥`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReducingSplit {
    #[cfg_attr(feature = "serde", serde(rename = "M"))]
    pub m: OrthonormalBasis,
    #[cfg_attr(feature = "serde", serde(rename = "Mperp"))]
    pub mperp: OrthonormalBasis,
    /// `R` compressed to `M`; left untouched by the iteration.
    pub frozen: HermitianMatrix,
    /// `R` compressed to `M⊥`, where the dynamics happens.
    pub active_seed: PSDMatrix,
}

/// `M = span{u, Ru, R²u, …}⊥`.
pub fn maximal_reducing_in_uperp(r: &HermitianMatrix, u: &UnitVector, rank_tol: f64) -> Result<ReducingSplit> {
    let mperp = krylov_span(r, u, rank_tol)?;
    let m = mperp.complement();
    let frozen = compress(r, &m)?;
    let active_seed = PSDMatrix::new(compress(r, &mperp)?, rank_tol)?;
    Ok(ReducingSplit { m, mperp, frozen, active_seed })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LimitKind {
    /// `P` commutes with the relevant operator; the limit is `(I − P)R(I − P)`.
    CommutingCompression,
    /// Non-commuting two-dimensional full space; the limit is 0.
    Dim2Collapse,
    /// `e⊥` reduces the active block; only the `e` component decays.
    TransversePersistence,
    /// Coupled two-dimensional active part; it collapses to 0.
    ActiveDim2,
    /// Coupled active part of dimension ≥ 3; no prediction.
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassificationResult {
    pub kind: LimitKind,
    /// Ambient limit; absent exactly when `kind` is `Unknown`.
    pub predicted_limit: Option<PSDMatrix>,
    /// Which structural rule produced the prediction.
    pub rule: String,
    pub certificate: BTreeMap<String, f64>,
    /// Final iterate of a full run, attached when no prediction is made.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub numerical_limit: Option<PSDMatrix>,
}

impl ClassificationResult {
    fn new(kind: LimitKind, limit: Option<PSDMatrix>, rule: &str) -> Self {
        ClassificationResult {
            kind,
            predicted_limit: limit,
            rule: String::from(rule),
            certificate: BTreeMap::new(),
            numerical_limit: None,
        }
    }

    fn cert(mut self, key: &str, value: f64) -> Self {
        self.certificate.insert(String::from(key), value);
        self
    }
}

fn commutator_norm(r: &Mat, u: &[C64]) -> f64 {
    let p = Mat::outer(u, u);
    p.matmul(r).sub(&r.matmul(&p)).norm_fro()
}

fn to_psd(m: Mat) -> Result<PSDMatrix> {
    PSDMatrix::new(HermitianMatrix::symmetrized(m), crate::DEFAULT_RANK_TOL)
}

/// `(I − P)R(I − P)` with `P = |u⟩⟨u|`.
fn compress_off(r: &Mat, u: &[C64]) -> Mat {
    let n = r.rows();
    let mut q = Mat::identity(n);
    q.sub_outer(1.0, u, u);
    q.matmul(r).matmul(&q)
}

/// Two-dimensional full-space dichotomy: the commuting case converges to
/// `(I − P)R(I − P)`, every other case to 0.
pub fn classify_dim2_fullspace(r: &PSDMatrix, u: &UnitVector) -> Result<ClassificationResult> {
    if r.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: r.dim() });
    }
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: u.dim() });
    }
    let comm = commutator_norm(r.as_mat(), u);
    let res = if comm <= COMMUTING_TOL * r.norm() {
        let limit = to_psd(compress_off(r.as_mat(), u))?;
        ClassificationResult::new(LimitKind::CommutingCompression, Some(limit), "two-dimensional dichotomy: commuting")
    } else {
        ClassificationResult::new(LimitKind::Dim2Collapse, Some(PSDMatrix::zeros(2)), "two-dimensional dichotomy: collapse")
    };
    Ok(res.cert("commutator", comm))
}

/// Two-dimensional active block `T_0` with weight vector `u_E`, `0 < ‖u_E‖ < 1`.
///
/// With `e = u_E/‖u_E‖` and `f ⊥ e`, `b_0 = ⟨f, T_0 e⟩` decides the branch:
/// decoupled blocks keep `QT_0Q` (`Q = I − |e⟩⟨e|`), coupled ones collapse.
/// The limit is expressed in the coordinates of `T_0`.
pub fn classify_active_dim2(
    t0: &PSDMatrix,
    u_e: &[C64],
    rank_tol: f64,
    coupling_tol: f64,
) -> Result<ClassificationResult> {
    if t0.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: t0.dim() });
    }
    if u_e.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: u_e.len() });
    }
    let norm = norm2(u_e);
    if !(norm > 0.0 && norm < 1.0) {
        return Err(Error::WeightOutOfRange { norm });
    }
    if !t0.is_strictly_positive(rank_tol) {
        return Err(Error::NotStrictlyPositive { min_eigenvalue: t0.lambda_min() });
    }
    let e = UnitVector::normalize(u_e)?;
    let f = OrthonormalBasis::from_vectors(2, &[e.as_slice().to_vec()])?.complement().column(0);
    let te = t0.as_mat().mul_vec(&e);
    let b0 = crate::matcore::dot(&f, &te).norm();
    let tau = norm * norm;
    let res = if b0 <= coupling_tol * t0.norm() {
        let limit = to_psd(compress_off(t0.as_mat(), &e))?;
        ClassificationResult::new(LimitKind::TransversePersistence, Some(limit), "decoupled active block: transverse part persists")
    } else {
        ClassificationResult::new(LimitKind::ActiveDim2, Some(PSDMatrix::zeros(2)), "coupled two-dimensional active block: collapse")
    };
    Ok(res.cert("coupling", b0).cert("tau", tau))
}

/// Predicts `lim R_n` with default tolerances and the given rank threshold.
pub fn predict_limit(r: &PSDMatrix, u: &UnitVector, rank_tol: f64) -> Result<ClassificationResult> {
    let mut cfg = WRConfig::new(r.clone(), u.clone())?;
    cfg.rank_tol = rank_tol;
    predict_limit_with(&cfg)
}

/// Predicts `lim R_n` from the structure of `R_0`.
///
/// The frozen part on `M` is split off first. The iteration on `M⊥` is run
/// until its support stabilizes, and the active block `(T_N, e)` is reduced
/// once more by its own largest reducing subspace `K ⊂ e⊥`. The limit is
/// `R|_M ⊕ T_N|_K ⊕ 0` whenever `dim K⊥ ≤ 2`; larger coupled remainders are
/// reported as `Unknown` together with the numerical limit of a full run.
pub fn predict_limit_with(cfg: &WRConfig) -> Result<ClassificationResult> {
    cfg.validate()?;
    let r = &cfg.r0;
    let u = &cfg.u;
    let n = r.dim();
    if n == 2 {
        return classify_dim2_fullspace(r, u);
    }
    let split = maximal_reducing_in_uperp(r.hermitian(), u, cfg.rank_tol)?;
    let u_m = UnitVector::normalize(&split.mperp.coords(u))?;
    let sub = WRConfig { r0: split.active_seed.clone(), u: u_m, ..cfg.clone() };
    let Some(stab) = stabilize(&sub)? else {
        return Err(Error::NotConverged);
    };
    let frozen = split.m.lift_mat(split.frozen.as_mat());
    let finish = |res: ClassificationResult, active: Mat| -> Result<ClassificationResult> {
        let limit = to_psd(frozen.add(&split.mperp.lift_mat(&active)))?;
        Ok(ClassificationResult { predicted_limit: Some(limit), ..res }
            .cert("frozen_dim", split.m.k() as f64)
            .cert("stabilized_at", stab.n as f64))
    };
    let Some(block) = stab.block else {
        let res = ClassificationResult::new(LimitKind::CommutingCompression, None, "stabilized support is trivial");
        return finish(res.cert("active_dim", 0.0), Mat::zeros(split.mperp.k(), split.mperp.k()));
    };
    let e_lift = block.e_basis.clone();
    let Some(e) = block.e.clone() else {
        let res = ClassificationResult::new(LimitKind::CommutingCompression, None, "stabilized support orthogonal to u");
        let t = e_lift.lift_mat(block.t.as_mat());
        return finish(res.cert("active_dim", block.dim() as f64).cert("tau", 0.0), t);
    };
    let kperp = krylov_span(block.t.hermitian(), &e, cfg.rank_tol)?;
    let k = kperp.complement();
    let kept = k.lift_mat(&compress(block.t.hermitian(), &k)?.into_mat());
    let coupled_dim = kperp.k();
    let base = |kind, rule| {
        ClassificationResult::new(kind, None, rule)
            .cert("active_dim", block.dim() as f64)
            .cert("coupled_dim", coupled_dim as f64)
            .cert("tau", block.tau)
            .cert("coupling", coupling(&block, &e))
    };
    match coupled_dim {
        1 => finish(
            base(LimitKind::TransversePersistence, "decoupled active block: transverse part persists"),
            e_lift.lift_mat(&kept),
        ),
        2 if block.dim() == 2 => {
            let res = classify_active_dim2(&block.t, &block.u_e, cfg.rank_tol, cfg.coupling_tol)?;
            let active = e_lift.lift_mat(res.predicted_limit.as_ref().unwrap().as_mat());
            let mut out = base(res.kind, &res.rule);
            out.certificate.extend(res.certificate);
            finish(out, active)
        }
        2 => finish(
            base(LimitKind::ActiveDim2, "coupled two-dimensional remainder collapses; reducing part kept"),
            e_lift.lift_mat(&kept),
        ),
        _ => {
            let trace = iterate(cfg)?;
            let mut res = base(LimitKind::Unknown, "coupled active remainder of dimension three or more");
            res.numerical_limit = Some(trace.limit_estimate);
            Ok(res.cert("frozen_dim", split.m.k() as f64).cert("stabilized_at", stab.n as f64))
        }
    }
}

fn coupling(block: &ActiveBlock, e: &UnitVector) -> f64 {
    let te = block.t.as_mat().mul_vec(e);
    let a = crate::matcore::dot(e, &te);
    let b: Vec<C64> = te.iter().zip(e.iter()).map(|(&x, &y)| x - y * a).collect();
    norm2(&b)
}

/// The four residuals of the stationarity test, each relative to
/// `max(1, ‖S‖)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationarityReport {
    pub stationary: bool,
    /// `‖Φ(S) − S‖_F`.
    pub fixed_point: f64,
    /// `‖S^{1/2}e‖`.
    pub sqrt_annihilates: f64,
    /// `‖Se‖`.
    pub annihilates: f64,
    /// `‖(I − Q)S‖_F` with `Q` the projection onto `e⊥`.
    pub supported_on_eperp: f64,
}

impl StationarityReport {
    pub fn max_residual(&self) -> f64 {
        self.fixed_point.max(self.sqrt_annihilates).max(self.annihilates).max(self.supported_on_eperp)
    }
}

/// Tests whether `S` is a fixed point of `T ↦ T^{1/2}(I − |u_E⟩⟨u_E|)T^{1/2}`
/// through four equivalent conditions.
pub fn is_stationary(s: &PSDMatrix, u_e: &[C64], tol: f64) -> Result<StationarityReport> {
    if s.dim() != u_e.len() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: u_e.len() });
    }
    let scale = s.norm().max(1.0);
    let fixed_point = weighted_step(s, u_e)?.as_mat().sub(s.as_mat()).norm_fro() / scale;
    let (sqrt_annihilates, annihilates, supported_on_eperp) = if norm2(u_e) <= crate::dynamics::ZERO_WEIGHT_TOL {
        (0.0, 0.0, 0.0)
    } else {
        let e = UnitVector::normalize(u_e)?;
        let half = psd_sqrt(s).as_mat().mul_vec(&e);
        let se = s.as_mat().mul_vec(&e);
        let proj = Mat::outer(&e, &e).matmul(s.as_mat()).norm_fro();
        (norm2(&half) / scale, norm2(&se) / scale, proj / scale)
    };
    let stationary = [fixed_point, sqrt_annihilates, annihilates, supported_on_eperp].iter().all(|&r| r <= tol);
    Ok(StationarityReport { stationary, fixed_point, sqrt_annihilates, annihilates, supported_on_eperp })
}

/// `PSDMatrix` with the given spectrum placed on the columns of `basis`
/// (zero on the complement).
pub fn psd_on(basis: &OrthonormalBasis, eigenvalues: &[f64]) -> PSDMatrix {
    let comp = basis.complement();
    let mut values = alloc::vec![0.0; comp.k()];
    values.extend_from_slice(eigenvalues);
    let vecs = comp.concat(basis);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let cols: Vec<Vec<C64>> = order.iter().map(|&i| vecs.column(i)).collect();
    PSDMatrix::from_spectrum(EigenDecomposition {
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
        eigenvectors: OrthonormalBasis::new(Mat::from_columns(basis.dim(), &cols)).expect("orthonormal"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c;

    fn example_r0() -> PSDMatrix {
        PSDMatrix::from_real_rows(&[[0.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 2.0]]).unwrap()
    }

    fn example_u() -> UnitVector {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        UnitVector::from_real(&[s, s, 0.0]).unwrap()
    }

    #[test]
    fn split_of_diagonal_with_axis() {
        let r = HermitianMatrix::new(Mat::diag_real(&[1.0, 2.0, 3.0])).unwrap();
        let s = maximal_reducing_in_uperp(&r, &UnitVector::basis(3, 0), 1e-10).unwrap();
        assert_eq!(s.m.k(), 2);
        assert!(s.frozen.as_mat().sub(&Mat::diag_real(&[2.0, 3.0])).max_abs() < 1e-15);
    }

    #[test]
    fn split_of_example_is_trivial() {
        let s = maximal_reducing_in_uperp(example_r0().hermitian(), &example_u(), 1e-10).unwrap();
        assert_eq!(s.m.k(), 0);
        assert_eq!(s.mperp.k(), 3);
    }

    #[test]
    fn dim2_branches() {
        let d = PSDMatrix::from_real_rows(&[[2.0, 0.0], [0.0, 1.0]]).unwrap();
        let r = classify_dim2_fullspace(&d, &UnitVector::basis(2, 0)).unwrap();
        assert_eq!(r.kind, LimitKind::CommutingCompression);
        assert!(r.predicted_limit.unwrap().as_mat().sub(&Mat::diag_real(&[0.0, 1.0])).max_abs() < 1e-15);
        let t = PSDMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 2.0]]).unwrap();
        let r = classify_dim2_fullspace(&t, &UnitVector::basis(2, 0)).unwrap();
        assert_eq!(r.kind, LimitKind::Dim2Collapse);
    }

    #[test]
    fn active_dim2_branches() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let ue = [c(s, 0.0), c(0.0, 0.0)];
        let t = PSDMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 2.0]]).unwrap();
        let r = classify_active_dim2(&t, &ue, 1e-10, 1e-10).unwrap();
        assert_eq!(r.kind, LimitKind::ActiveDim2);
        assert_eq!(r.certificate["coupling"], 1.0);
        let r = classify_active_dim2(&PSDMatrix::identity(2), &ue, 1e-10, 1e-10).unwrap();
        assert_eq!(r.kind, LimitKind::TransversePersistence);
        assert!(r.predicted_limit.unwrap().as_mat().sub(&Mat::diag_real(&[0.0, 1.0])).max_abs() < 1e-15);
        assert!(matches!(
            classify_active_dim2(&t, &[c(1.0, 0.0), c(0.0, 0.0)], 1e-10, 1e-10),
            Err(Error::WeightOutOfRange { .. })
        ));
    }

    #[test]
    fn predict_commuting_diagonal() {
        let r = PSDMatrix::from_real_rows(&[[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]]).unwrap();
        let p = predict_limit(&r, &UnitVector::basis(3, 0), 1e-10).unwrap();
        assert_eq!(p.kind, LimitKind::CommutingCompression);
        assert!(p.predicted_limit.unwrap().as_mat().sub(&Mat::diag_real(&[0.0, 2.0, 3.0])).max_abs() < 1e-12);
    }

    #[test]
    fn predict_example_collapses() {
        let p = predict_limit(&example_r0(), &example_u(), 1e-10).unwrap();
        assert_eq!(p.kind, LimitKind::ActiveDim2);
        assert_eq!(p.certificate["stabilized_at"], 0.0);
        assert!(p.predicted_limit.unwrap().as_mat().max_abs() < 1e-15);
    }

    #[test]
    fn stationary_on_eperp() {
        let e = UnitVector::from_real(&[0.6, 0.8, 0.0]).unwrap();
        let comp = OrthonormalBasis::from_vectors(3, &[e.as_slice().to_vec()]).unwrap().complement();
        let s = psd_on(&comp, &[0.5, 4.0]);
        let ue: Vec<C64> = e.iter().map(|x| x * 0.7).collect();
        let rep = is_stationary(&s, &ue, 1e-12).unwrap();
        assert!(rep.stationary, "{rep:?}");
        let rep = is_stationary(&PSDMatrix::identity(3), &ue, 1e-12).unwrap();
        assert!(!rep.stationary);
        assert!(rep.annihilates > 0.5 && rep.supported_on_eperp > 0.5);
    }
}
