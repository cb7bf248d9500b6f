//! Scalar recursions for coupled 2×2 active blocks.
//!
//! A strictly positive block written as `[[a, b], [b, d]]` in a frame `{e, f}`
//! with `b ≥ 0` is tracked through `ξ = b/d`, `ζ = √det/d` and `d`. These
//! recursions use only scalar arithmetic and serve as an independent check on
//! the matrix engine.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{ActiveBlock, WRTrace};
use crate::error::{Error, Result};
use crate::identities::{block_coordinates, BlockCoordinates};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ScalarKind {
    /// Weight `diag(1/2, 1)`; sequences `y`, `z`, `d`.
    HalfWeight,
    /// Weight `diag(ρ, 1)`; sequences `xi`, `zeta`, `d`.
    Weighted,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalarTrace {
    pub kind: ScalarKind,
    pub sequences: BTreeMap<String, Vec<f64>>,
    /// `ρ`.
    pub rho: f64,
}

impl ScalarTrace {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.sequences.get(name).map(|v| v.as_slice())
    }

    /// Number of recorded iterates.
    pub fn len(&self) -> usize {
        self.sequences.values().map(|v| v.len()).min().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Names of the `(b/d, √det/d, d)` sequences.
    fn names(&self) -> [&'static str; 3] {
        match self.kind {
            ScalarKind::HalfWeight => ["y", "z", "d"],
            ScalarKind::Weighted => ["xi", "zeta", "d"],
        }
    }

    /// Geometric mean ratio `(x_last/x_first)^{1/k}` over the last `k` steps.
    pub fn empirical_rate(&self, name: &str, k: usize) -> Option<f64> {
        let v = self.get(name)?;
        if v.len() < 2 || k == 0 {
            return None;
        }
        let k = k.min(v.len() - 1);
        let (a, b) = (v[v.len() - 1 - k], v[v.len() - 1]);
        (a > 0.0 && b > 0.0).then(|| ((b / a).ln() / k as f64).exp())
    }
}

fn check_start(vals: &[f64], d0: f64) -> Result<()> {
    if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || !(d0.is_finite() && d0 > 0.0) {
        return Err(Error::InvalidStart);
    }
    Ok(())
}

/// Iterates `T ↦ T^{1/2} diag(1/2, 1) T^{1/2}` in the variables `y = b/d`,
/// `z = √det/d` and `d`; returns `steps + 1` values of each.
pub fn half_weight_recursion(y0: f64, z0: f64, d0: f64, steps: usize) -> Result<ScalarTrace> {
    check_start(&[y0, z0], d0)?;
    let (mut y, mut z, mut d) = (y0, z0, d0);
    let (mut ys, mut zs, mut ds) = (alloc::vec![y], alloc::vec![z], alloc::vec![d]);
    let r2 = core::f64::consts::SQRT_2;
    for _ in 0..steps {
        let den = y * y + 2.0 * z * z + 4.0 * z + 2.0;
        let ny = y * (y * y + z * z + 3.0 * z + 2.0) / den;
        let nz = r2 * z * (y * y + z * z + 2.0 * z + 1.0) / den;
        let nd = d * den / (2.0 * (y * y + z * z + 2.0 * z + 1.0));
        (y, z, d) = (ny, nz, nd);
        ys.push(y);
        zs.push(z);
        ds.push(d);
    }
    let mut sequences = BTreeMap::new();
    sequences.insert(String::from("y"), ys);
    sequences.insert(String::from("z"), zs);
    sequences.insert(String::from("d"), ds);
    Ok(ScalarTrace { kind: ScalarKind::HalfWeight, sequences, rho: 0.5 })
}

/// Iterates `T ↦ T^{1/2} diag(ρ, 1) T^{1/2}` in the variables `ξ = b/d` and
/// `d`, with `ζ_n = ρ^{n/2}√det T_0 / d_n` taken from the determinant law.
pub fn weighted_recursion(xi0: f64, zeta0: f64, d0: f64, rho: f64, steps: usize) -> Result<ScalarTrace> {
    check_start(&[xi0, zeta0], d0)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidStart);
    }
    let tau = 1.0 - rho;
    let sqrt_det0 = zeta0 * d0;
    let (mut xi, mut d) = (xi0, d0);
    let mut zeta = zeta0;
    let (mut xs, mut zs, mut ds) = (alloc::vec![xi], alloc::vec![zeta], alloc::vec![d]);
    for n in 1..=steps {
        let w = (zeta + 1.0) * (zeta + 1.0);
        let den = rho * xi * xi + w;
        let nxi = xi * (1.0 - tau * zeta * (zeta + 1.0) / den);
        let nd = d * den / (xi * xi + w);
        xi = nxi;
        d = nd;
        zeta = rho.powf(n as f64 / 2.0) * sqrt_det0 / d;
        xs.push(xi);
        zs.push(zeta);
        ds.push(d);
    }
    let mut sequences = BTreeMap::new();
    sequences.insert(String::from("xi"), xs);
    sequences.insert(String::from("zeta"), zs);
    sequences.insert(String::from("d"), ds);
    Ok(ScalarTrace { kind: ScalarKind::Weighted, sequences, rho })
}

/// `(b/d, √det/d, d)` of a 2×2 block in the frame `{e, f}`, with `b` made
/// nonnegative by the choice of phase of `f`.
pub fn frame_scalars(c: &BlockCoordinates, log_det: f64) -> Result<(f64, f64, f64)> {
    if c.b.len() != 1 {
        return Err(Error::IncompatibleTraces("active block is not two-dimensional"));
    }
    let d = c.big_b.get(0, 0).re;
    Ok((c.b[0].norm() / d, (0.5 * log_det).exp() / d, d))
}

/// Starting values `(ξ_0, ζ_0, d_0, ρ)` for [`weighted_recursion`] from an active block.
pub fn weighted_start(block: &ActiveBlock) -> Result<(f64, f64, f64, f64)> {
    let e = block.e.as_ref().ok_or(Error::IncompatibleTraces("u_E = 0"))?;
    if block.dim() != 2 {
        return Err(Error::IncompatibleTraces("active block is not two-dimensional"));
    }
    let c = block_coordinates(&block.t, e)?;
    let (xi, zeta, d) = frame_scalars(&c, block.t.log_det())?;
    Ok((xi, zeta, d, block.rho))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossValidation {
    /// Largest relative discrepancy at each compared step.
    pub per_step: Vec<f64>,
    pub max_rel: f64,
    pub first_failure: Option<usize>,
    pub tol: f64,
}

impl CrossValidation {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }

    pub fn steps(&self) -> usize {
        self.per_step.len()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Compares a matrix run's active block, step by step from its stabilization
/// index, with a scalar trace: `b/d`, `√det/d` and `d` must agree to relative
/// `tol`. Steps present in only one of the two are ignored.
pub fn cross_validate(trace: &WRTrace, scalar: &ScalarTrace, tol: f64) -> Result<CrossValidation> {
    let mut out = CrossValidation { per_step: Vec::new(), max_rel: 0.0, first_failure: None, tol };
    if scalar.is_empty() {
        return Ok(out);
    }
    let active = trace.active.as_ref().ok_or(Error::IncompatibleTraces("trace has no active block"))?;
    if active.dim() != 2 || active.e.is_none() {
        return Err(Error::IncompatibleTraces("active block is not a 2×2 block with u_E ≠ 0"));
    }
    if (active.rho - scalar.rho).abs() > 1e-12 {
        return Err(Error::IncompatibleTraces("weights differ"));
    }
    let [xn, zn, dn] = scalar.names();
    let (xs, zs, ds) = (scalar.get(xn).unwrap(), scalar.get(zn).unwrap(), scalar.get(dn).unwrap());
    let recs = trace.records.iter().filter(|r| r.n >= active.n);
    for (k, rec) in recs.take(scalar.len()).enumerate() {
        let Some(c) = &rec.block_coords else { break };
        let (x, z, d) = frame_scalars(c, rec.log_det)?;
        let r = rel(x, xs[k]).max(rel(z, zs[k])).max(rel(d, ds[k]));
        out.per_step.push(r);
        out.max_rel = out.max_rel.max(r);
        if r > tol && out.first_failure.is_none() {
            out.first_failure = Some(k);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_contraction_bound() {
        let s = half_weight_recursion(0.5, 0.5, 2.0, 100).unwrap();
        let (y, z) = (s.get("y").unwrap(), s.get("z").unwrap());
        let bound = 5.0 * core::f64::consts::SQRT_2 / 9.0;
        for n in 0..100 {
            assert!(z[n + 1] <= bound * z[n]);
            assert!(y[n + 1] <= y[n] && y[n + 1] > 0.2);
        }
    }

    #[test]
    fn zero_z_is_invariant() {
        let s = half_weight_recursion(0.3, 0.0, 1.5, 10).unwrap();
        assert!(s.get("y").unwrap().iter().all(|&y| y == 0.3));
        assert!(s.get("z").unwrap().iter().all(|&z| z == 0.0));
        let ratio = (0.09 + 2.0) / (2.0 * 1.09);
        for w in s.get("d").unwrap().windows(2) {
            assert!(rel(w[1] / w[0], ratio) < 1e-15);
        }
        let s = half_weight_recursion(0.0, 0.0, 1.5, 10).unwrap();
        assert!(s.get("d").unwrap().iter().all(|&d| d == 1.5));
    }

    #[test]
    fn recursions_coincide_at_half() {
        let a = half_weight_recursion(0.5, 0.5, 2.0, 60).unwrap();
        let b = weighted_recursion(0.5, 0.5, 2.0, 0.5, 60).unwrap();
        for (x, y) in a.get("d").unwrap().iter().zip(b.get("d").unwrap()) {
            assert!(rel(*x, *y) < 1e-13);
        }
        for (x, y) in a.get("y").unwrap().iter().zip(b.get("xi").unwrap()) {
            assert!(rel(*x, *y) < 1e-13);
        }
    }

    #[test]
    fn decoupled_start_is_constant() {
        let s = weighted_recursion(0.0, 0.7, 3.0, 0.2, 20).unwrap();
        assert!(s.get("xi").unwrap().iter().all(|&x| x == 0.0));
        assert!(s.get("d").unwrap().iter().all(|&d| rel(d, 3.0) < 1e-15));
    }

    #[test]
    fn invalid_starts() {
        assert_eq!(half_weight_recursion(-0.1, 0.5, 2.0, 3), Err(Error::InvalidStart));
        assert_eq!(half_weight_recursion(0.1, 0.5, 0.0, 3), Err(Error::InvalidStart));
        assert_eq!(weighted_recursion(0.1, 0.5, 1.0, 1.0, 3), Err(Error::InvalidStart));
    }
}
