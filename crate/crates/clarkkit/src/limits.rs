//! Stolz-region approach paths and robust nontangential limit estimation.
//!
//! A limit `lim_{z -> lambda}` along a nontangential region is realized as a
//! geometric approach path `z_k = lambda (1 - q^k e^{i psi})` together with
//! Cauchy-difference convergence detection, Aitken extrapolation of the last
//! iterates (the error of the implemented function classes decays at an
//! unknown algebraic rate in `1 - |z|`, which is geometric along the path),
//! and a quantitative divergence verdict for quantities that blow up.

use nalgebra::DVector;
use serde::Serialize;

use crate::linalg::CMatrix;
use crate::{invalid, C64, Result};

/// Default aperture of the approach region.
pub const DEFAULT_APERTURE: f64 = 2.0;
/// Default geometric ratio of `1 - |z_k|`.
pub const DEFAULT_RATIO: f64 = 0.5;
/// Default step budget; with ratio 1/2 this reaches the `min_gap` floor.
pub const DEFAULT_MAX_STEPS: usize = 40;
/// Default Cauchy-difference tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Floor on `1 - |z|` guarding double-precision collapse.
pub const DEFAULT_MIN_GAP: f64 = 1e-12;

/// Path and tolerance bundle used by the higher modules.
#[derive(Clone, Copy, Debug)]
pub struct ApproachOpts {
    pub aperture: f64,
    pub ratio: f64,
    pub angle: f64,
    pub max_steps: usize,
    pub min_gap: f64,
    pub tol: f64,
}

impl Default for ApproachOpts {
    fn default() -> Self {
        ApproachOpts {
            aperture: DEFAULT_APERTURE,
            ratio: DEFAULT_RATIO,
            angle: 0.0,
            max_steps: DEFAULT_MAX_STEPS,
            min_gap: DEFAULT_MIN_GAP,
            tol: DEFAULT_TOL,
        }
    }
}

impl ApproachOpts {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_angle(mut self, angle: f64) -> Self {
        self.angle = angle;
        self
    }

    pub fn path(&self, lambda: C64) -> Result<StolzPath> {
        Ok(StolzPath::new(lambda, self.aperture, self.ratio, self.angle)?
            .with_max_steps(self.max_steps)
            .with_min_gap(self.min_gap))
    }
}

/// An approach path inside the Stolz region `|z - lambda| < t (1 - |z|)`.
#[derive(Clone, Debug)]
pub struct StolzPath {
    lambda: C64,
    aperture: f64,
    ratio: f64,
    angle: f64,
    max_steps: usize,
    min_gap: f64,
}

impl StolzPath {
    /// Build a path approaching `lambda` on the circle. The angle offset is
    /// clipped so that every generated point satisfies the Stolz constraint
    /// for the requested aperture.
    pub fn new(lambda: C64, aperture: f64, ratio: f64, angle: f64) -> Result<Self> {
        if (lambda.norm() - 1.0).abs() > 1e-12 {
            return invalid(format!("path target must be unimodular, |lambda| = {}", lambda.norm()));
        }
        if aperture <= 1.0 {
            return invalid(format!("aperture must exceed 1, got {aperture}"));
        }
        if !(0.0 < ratio && ratio < 1.0) {
            return invalid(format!("ratio must lie in (0,1), got {ratio}"));
        }
        let lambda = lambda / lambda.norm();
        // clip into |tan psi| < aperture - 1, then shrink until every step
        // satisfies the pointwise constraint
        let cap = (aperture - 1.0).atan() * 0.999;
        let mut psi = angle.clamp(-cap, cap);
        let mut path = StolzPath {
            lambda,
            aperture,
            ratio,
            angle: psi,
            max_steps: DEFAULT_MAX_STEPS,
            min_gap: DEFAULT_MIN_GAP,
        };
        for _ in 0..64 {
            if path.all_points_inside() {
                return Ok(path);
            }
            psi *= 0.8;
            path.angle = psi;
        }
        path.angle = 0.0;
        Ok(path)
    }

    pub fn radial(lambda: C64) -> Result<Self> {
        StolzPath::new(lambda, DEFAULT_APERTURE, DEFAULT_RATIO, 0.0)
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_min_gap(mut self, min_gap: f64) -> Self {
        self.min_gap = min_gap;
        self
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    /// k-th point, k >= 1: `lambda (1 - q^k e^{i psi})`.
    pub fn point(&self, k: usize) -> C64 {
        let delta = self.ratio.powi(k as i32);
        let offset = C64::from_polar(delta, self.angle);
        self.lambda * (C64::new(1.0, 0.0) - offset)
    }

    /// Points until `1 - |z|` would drop below the gap floor.
    pub fn points(&self) -> Vec<C64> {
        let mut out = Vec::new();
        for k in 1..=self.max_steps {
            let z = self.point(k);
            if 1.0 - z.norm() < self.min_gap {
                break;
            }
            out.push(z);
        }
        out
    }

    pub fn inside(&self, z: C64) -> bool {
        (z - self.lambda).norm() < self.aperture * (1.0 - z.norm())
    }

    fn all_points_inside(&self) -> bool {
        (1..=self.max_steps).all(|k| {
            let z = self.point(k);
            1.0 - z.norm() < self.min_gap || self.inside(z)
        })
    }
}

/// Outcome classification for an estimated limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    Diverging,
    Inconclusive,
}

/// Values a limit can be taken in: anything with a norm and an entrywise
/// Aitken acceleration.
pub trait LimitValue: Clone {
    fn norm(&self) -> f64;
    fn diff_norm(&self, other: &Self) -> f64;
    fn accelerate(v0: &Self, v1: &Self, v2: &Self) -> Self;
    fn neutral() -> Self;
}

fn aitken_entry(a: C64, b: C64, c: C64) -> C64 {
    let d1 = b - a;
    let d2 = c - b;
    let den = d2 - d1;
    let scale = a.norm().max(b.norm()).max(c.norm()).max(1e-300);
    if den.norm() <= 1e-14 * scale + 1e-300 {
        c
    } else {
        c - d2 * d2 / den
    }
}

impl LimitValue for CMatrix {
    fn norm(&self) -> f64 {
        self.op_norm()
    }

    fn diff_norm(&self, other: &Self) -> f64 {
        self.sub(other).op_norm()
    }

    fn accelerate(v0: &Self, v1: &Self, v2: &Self) -> Self {
        CMatrix::from_fn(v0.dim(), |i, j| {
            aitken_entry(v0.get(i, j), v1.get(i, j), v2.get(i, j))
        })
    }

    fn neutral() -> Self {
        CMatrix::zeros(1)
    }
}

impl LimitValue for DVector<C64> {
    fn norm(&self) -> f64 {
        nalgebra::DVector::norm(self)
    }

    fn diff_norm(&self, other: &Self) -> f64 {
        (self - other).norm()
    }

    fn accelerate(v0: &Self, v1: &Self, v2: &Self) -> Self {
        DVector::from_fn(v0.len(), |i, _| aitken_entry(v0[i], v1[i], v2[i]))
    }

    fn neutral() -> Self {
        DVector::zeros(1)
    }
}

/// An estimated nontangential limit with convergence diagnostics.
#[derive(Clone, Debug)]
pub struct Limit<T> {
    pub value: T,
    pub verdict: Verdict,
    pub est_error: f64,
    pub steps_used: usize,
    pub divergence_rate: Option<f64>,
    pub note: Option<String>,
}

/// Matrix-valued limit, the common case.
pub type LimitResult = Limit<CMatrix>;
/// Vector-valued limit.
pub type VectorLimit = Limit<DVector<C64>>;

impl<T> Limit<T> {
    pub fn converged(&self) -> bool {
        self.verdict == Verdict::Converged
    }

    pub fn diverging(&self) -> bool {
        self.verdict == Verdict::Diverging
    }
}

impl LimitResult {
    /// Scalar view of a 1x1 limit value.
    pub fn scalar(&self) -> C64 {
        self.value.get(0, 0)
    }
}

fn inconclusive<T: LimitValue>(value: T, steps: usize, note: String) -> Limit<T> {
    Limit {
        value,
        verdict: Verdict::Inconclusive,
        est_error: f64::INFINITY,
        steps_used: steps,
        divergence_rate: None,
        note: Some(note),
    }
}

/// Estimate `lim g(z)` along a Stolz path, in any [`LimitValue`] space.
///
/// Converged: either the raw Cauchy differences fall below `tol`, or the
/// sequence contracts at a stable geometric rate and the Aitken-accelerated
/// iterates agree to `tol` (an algebraic error in `1 - |z|` is geometric
/// along the path, so acceleration reaches tolerances the raw sequence
/// cannot within the gap floor). The reported value is the accelerated one
/// and `est_error` covers the extrapolation residue. Diverging: the norms
/// grow persistently (factor above 1.2 over five consecutive steps, or
/// monotone growth with stable per-step factor above 1.02 doubling over ten
/// steps, or monotone escape beyond `1/tol`); `divergence_rate` reports the
/// geometric mean per-step factor. Anything else is inconclusive, as is an
/// evaluation failure along the path.
pub fn nt_limit_in<T: LimitValue>(
    g: &mut dyn FnMut(C64) -> Result<T>,
    path: &StolzPath,
    tol: f64,
) -> Limit<T> {
    let points = path.points();
    if points.is_empty() {
        return inconclusive(
            T::neutral(),
            0,
            "path has no usable points above the gap floor".into(),
        );
    }
    let mut vals: Vec<T> = Vec::with_capacity(points.len());
    let mut norms: Vec<f64> = Vec::with_capacity(points.len());
    let mut diffs: Vec<f64> = Vec::with_capacity(points.len());
    let mut accel_prev: Option<T> = None;
    for (k, &z) in points.iter().enumerate() {
        let v = match g(z) {
            Ok(v) => v,
            Err(e) => {
                let last = vals.last().cloned().unwrap_or_else(T::neutral);
                return inconclusive(
                    last,
                    k,
                    format!("evaluation failed at step {} (z = {}): {}", k + 1, z, e),
                );
            }
        };
        norms.push(v.norm());
        vals.push(v);
        let steps = vals.len();
        if steps >= 2 {
            diffs.push(vals[steps - 1].diff_norm(&vals[steps - 2]));
        }

        let accel = if steps >= 3 {
            Some(T::accelerate(
                &vals[steps - 3],
                &vals[steps - 2],
                &vals[steps - 1],
            ))
        } else {
            None
        };

        if let Some(diff) = diffs.last().copied() {
            if diff < tol {
                let (value, correction) = match &accel {
                    Some(a) => (a.clone(), a.diff_norm(&vals[steps - 1])),
                    None => (vals[steps - 1].clone(), 0.0),
                };
                return Limit {
                    value,
                    verdict: Verdict::Converged,
                    est_error: diff + correction,
                    steps_used: steps,
                    divergence_rate: None,
                    note: None,
                };
            }
        }

        // accelerated convergence: stable geometric contraction plus
        // agreement of consecutive accelerated iterates
        if let (Some(a), Some(ap)) = (&accel, &accel_prev) {
            let d = diffs.len();
            if d >= 3 {
                let r1 = safe_ratio(diffs[d - 2], diffs[d - 3]);
                let r2 = safe_ratio(diffs[d - 1], diffs[d - 2]);
                let geometric = r1 > 0.0
                    && r2 > 0.0
                    && r1 < 0.97
                    && r2 < 0.97
                    && (r1 - r2).abs() < 0.05;
                let accel_diff = a.diff_norm(ap);
                if geometric && accel_diff < tol {
                    let r = r1.max(r2);
                    let est = accel_diff * (1.0 + r / (1.0 - r))
                        + f64::EPSILON * (1.0 + a.norm());
                    return Limit {
                        value: a.clone(),
                        verdict: Verdict::Converged,
                        est_error: est,
                        steps_used: steps,
                        divergence_rate: None,
                        note: None,
                    };
                }
            }
        }
        accel_prev = accel;

        if let Some(rate) = divergence_rate(&norms, tol) {
            return Limit {
                value: vals[steps - 1].clone(),
                verdict: Verdict::Diverging,
                est_error: f64::INFINITY,
                steps_used: steps,
                divergence_rate: Some(rate),
                note: None,
            };
        }
    }
    let steps = vals.len();
    let last_diff = diffs.last().copied().unwrap_or(f64::INFINITY);
    inconclusive(
        vals[steps - 1].clone(),
        steps,
        format!("no verdict within {steps} steps; last Cauchy difference {last_diff:.3e}"),
    )
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        -1.0
    }
}

/// Matrix-valued limit.
pub fn nt_limit(
    g: &mut dyn FnMut(C64) -> Result<CMatrix>,
    path: &StolzPath,
    tol: f64,
) -> LimitResult {
    nt_limit_in(g, path, tol)
}

/// Vector-valued limit.
pub fn nt_limit_vec(
    g: &mut dyn FnMut(C64) -> Result<DVector<C64>>,
    path: &StolzPath,
    tol: f64,
) -> VectorLimit {
    nt_limit_in(g, path, tol)
}

/// Limit of 1x1 values.
pub fn nt_limit_scalar(
    g: &mut dyn FnMut(C64) -> Result<C64>,
    path: &StolzPath,
    tol: f64,
) -> LimitResult {
    nt_limit(&mut |z| g(z).map(CMatrix::scalar), path, tol)
}

fn geometric_mean_ratio(norms: &[f64]) -> f64 {
    let k = norms.len() - 1;
    (norms[k] / norms[0]).powf(1.0 / k as f64)
}

/// Divergence rules. The strong rule (factor > 1.2 over five steps) catches
/// poles; the sustained rule (ten monotone steps, factors >= 1.02, total
/// growth >= 2) catches slow algebraic blowup such as `(1-|z|)^{-s}` with
/// small `s`, whose per-step factor never reaches 1.2.
fn divergence_rate(norms: &[f64], tol: f64) -> Option<f64> {
    let n = norms.len();
    if n >= 6 {
        let w = &norms[n - 6..];
        if w.windows(2).all(|p| p[0] > 0.0 && p[1] / p[0] > 1.2) {
            return Some(geometric_mean_ratio(w));
        }
        if norms[n - 1] > 1.0 / tol && w.windows(2).all(|p| p[1] >= p[0]) && norms[n - 1] > 2.0 * w[0]
        {
            return Some(geometric_mean_ratio(w));
        }
    }
    if n >= 11 {
        let w = &norms[n - 11..];
        let monotone = w.windows(2).all(|p| p[1] >= p[0] * 1.02);
        if monotone && w[10] >= 2.0 * w[0] {
            return Some(geometric_mean_ratio(w));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::Error;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn one() -> C64 {
        c(1.0, 0.0)
    }

    #[test]
    fn radial_path_points_are_real() {
        let p = StolzPath::new(one(), 2.0, 0.5, 0.0).unwrap();
        for (k, z) in p.points().iter().enumerate() {
            let expected = 1.0 - 0.5f64.powi(k as i32 + 1);
            assert!((z - c(expected, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn rotated_radial_path() {
        let i = c(0.0, 1.0);
        let p = StolzPath::new(i, 2.0, 0.5, 0.0).unwrap();
        for (k, z) in p.points().iter().enumerate() {
            let expected = i * (1.0 - 0.5f64.powi(k as i32 + 1));
            assert!((z - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn angled_path_stays_in_stolz_region() {
        let p = StolzPath::new(one(), 4.0, 0.5, 0.3).unwrap();
        for z in p.points() {
            assert!((z - one()).norm() < 4.0 * (1.0 - z.norm()));
        }
        assert!(p.points().len() > 30);
    }

    #[test]
    fn rejects_bad_aperture() {
        assert!(StolzPath::new(one(), 1.0, 0.5, 0.0).is_err());
        assert!(StolzPath::new(one(), 2.0, 1.5, 0.0).is_err());
        assert!(StolzPath::new(c(0.5, 0.0), 2.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn constant_quotient_converges_to_one() {
        let p = StolzPath::radial(one()).unwrap();
        let r = nt_limit_scalar(&mut |z| Ok((1.0 - z) / (1.0 - z)), &p, 1e-8);
        assert!(r.converged());
        assert!((r.scalar() - one()).norm() < 1e-12);
    }

    #[test]
    fn pole_diverges_at_ratio_rate() {
        let p = StolzPath::radial(one()).unwrap();
        let r = nt_limit_scalar(&mut |z| Ok(1.0 / (1.0 - z)), &p, 1e-8);
        assert!(r.diverging());
        let rate = r.divergence_rate.unwrap();
        assert!((rate - 2.0).abs() < 0.2, "rate {rate}");
    }

    #[test]
    fn sqrt_vanishing_converges_to_zero() {
        let p = StolzPath::radial(one()).unwrap();
        let r = nt_limit_scalar(&mut |z| Ok((1.0 - z).sqrt()), &p, 1e-8);
        assert!(r.converged());
        assert!(r.scalar().norm() < 1e-7, "value {}", r.scalar());
        assert!(r.est_error < 1e-6);
    }

    #[test]
    fn slow_algebraic_blowup_is_flagged_divergent() {
        // (1-z)^{-0.2} grows by 2^{0.2} ~ 1.149 per step, below the strong
        // 1.2 threshold
        let p = StolzPath::radial(one()).unwrap();
        let r = nt_limit_scalar(&mut |z| Ok((1.0 - z).powf(-0.2)), &p, 1e-4);
        assert!(r.diverging(), "verdict {:?}", r.verdict);
        let rate = r.divergence_rate.unwrap();
        assert!((rate - 0.5f64.powf(-0.2)).abs() < 0.05, "rate {rate}");
    }

    #[test]
    fn evaluation_failure_is_inconclusive_with_note() {
        let p = StolzPath::radial(one()).unwrap();
        let mut calls = 0;
        let r = nt_limit_scalar(
            &mut |z| {
                calls += 1;
                if calls > 3 {
                    Err(Error::Numerical("boom".into()))
                } else {
                    Ok(z)
                }
            },
            &p,
            1e-8,
        );
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.note.unwrap().contains("boom"));
    }

    #[test]
    fn angled_and_radial_paths_agree_on_limits() {
        // path independence on functions with a radial limit, bounded in the region
        let funcs: Vec<(Box<dyn Fn(C64) -> C64>, C64)> = vec![
            (Box::new(|z: C64| (1.0 - z).powf(0.5)), c(0.0, 0.0)),
            (Box::new(|z: C64| (2.0 + z) / (3.0 - z)), c(1.5, 0.0)),
            (Box::new(|z: C64| z * z), c(1.0, 0.0)),
        ];
        let tol = 1e-8;
        for (f, expected) in funcs {
            for psi in [-0.3, 0.0, 0.3] {
                let p = StolzPath::new(one(), 2.0, 0.5, psi).unwrap();
                let r = nt_limit_scalar(&mut |z| Ok(f(z)), &p, tol);
                assert!(r.converged());
                assert!(
                    (r.scalar() - expected).norm() < 5.0 * tol,
                    "psi {psi} value {}",
                    r.scalar()
                );
            }
        }
    }

    #[test]
    fn est_error_bounds_true_error_with_high_coverage() {
        // families with known limits: L + c (1-z)^p
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut covered = 0;
        let trials = 200;
        for _ in 0..trials {
            let limit = c(next() * 4.0 - 2.0, next() * 4.0 - 2.0);
            let coeff = c(next() * 4.0 - 2.0, next() * 4.0 - 2.0);
            let pow = 0.3 + 1.7 * next();
            let p = StolzPath::radial(one()).unwrap();
            let r = nt_limit_scalar(&mut |z| Ok(limit + coeff * (1.0 - z).powf(pow)), &p, 1e-8);
            if !r.converged() {
                continue;
            }
            let true_err = (r.scalar() - limit).norm();
            if true_err <= r.est_error.max(1e-15) {
                covered += 1;
            }
        }
        assert!(
            covered as f64 >= 0.95 * trials as f64,
            "coverage {covered}/{trials}"
        );
    }

    #[test]
    fn matrix_limits_work_entrywise() {
        let p = StolzPath::radial(one()).unwrap();
        let r = nt_limit(
            &mut |z| {
                Ok(CMatrix::from_fn(2, |i, j| {
                    if i == j {
                        z.powu(i as u32 + 1)
                    } else {
                        (1.0 - z) * c(i as f64 - j as f64, 0.0)
                    }
                }))
            },
            &p,
            1e-8,
        );
        assert!(r.converged());
        assert!((r.value.get(0, 0) - one()).norm() < 1e-9);
        assert!((r.value.get(1, 1) - one()).norm() < 1e-9);
        assert!(r.value.get(0, 1).norm() < 1e-9);
    }

    #[test]
    fn vector_limits_converge() {
        use nalgebra::DVector;
        let p = StolzPath::radial(one()).unwrap();
        let r = nt_limit_vec(
            &mut |z| Ok(DVector::from_vec(vec![z, (1.0 - z).sqrt()])),
            &p,
            1e-8,
        );
        assert!(r.converged());
        assert!((r.value[0] - one()).norm() < 1e-9);
        assert!(r.value[1].norm() < 1e-7);
    }
}
