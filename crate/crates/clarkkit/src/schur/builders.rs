//! The construction variants behind [`SchurMap`].

use std::sync::Arc;

use serde_json::{json, Value};

use super::{SchurFunction, SchurMap};
use crate::linalg::CMatrix;
use crate::{invalid, C64, Result};

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

// ---------------------------------------------------------------------------
// constant contraction

pub(super) struct Constant {
    pub c: CMatrix,
}

impl SchurMap for Constant {
    fn dim(&self) -> usize {
        self.c.dim()
    }

    fn eval_unchecked(&self, _z: C64) -> CMatrix {
        self.c.clone()
    }

    fn kind(&self) -> &'static str {
        "constant"
    }

    fn to_spec(&self) -> Value {
        json!({"type": "constant", "matrix": serde_json::to_value(&self.c).unwrap()})
    }
}

/// Constant function with `||C|| < 1`.
pub fn constant(c: CMatrix) -> Result<SchurFunction> {
    if c.op_norm() >= 1.0 {
        return invalid(format!("constant must be strictly contractive, ||C|| = {}", c.op_norm()));
    }
    SchurFunction::new(Arc::new(Constant { c }))
}

// ---------------------------------------------------------------------------
// scalar Blaschke product

pub(super) struct Blaschke {
    pub zeros: Vec<C64>,
}

impl Blaschke {
    fn value(&self, z: C64) -> C64 {
        self.zeros
            .iter()
            .map(|&w| (z - w) / (1.0 - w.conj() * z))
            .product()
    }
}

impl SchurMap for Blaschke {
    fn dim(&self) -> usize {
        1
    }

    fn eval_unchecked(&self, z: C64) -> CMatrix {
        CMatrix::scalar(self.value(z))
    }

    fn kind(&self) -> &'static str {
        "blaschke"
    }

    fn is_inner(&self) -> bool {
        true
    }

    fn to_spec(&self) -> Value {
        json!({"type": "blaschke", "zeros": self.zeros.iter().map(|&w| cjson(w)).collect::<Vec<_>>()})
    }
}

/// Finite scalar Blaschke product with the given zero list, factors
/// `(z - w) / (1 - conj(w) z)`.
pub fn blaschke_product(zeros: Vec<C64>) -> Result<SchurFunction> {
    if zeros.is_empty() {
        return invalid("a Blaschke product needs at least one zero");
    }
    if let Some(w) = zeros.iter().find(|w| w.norm() >= 1.0) {
        return invalid(format!("Blaschke zero {w} outside the open disc"));
    }
    SchurFunction::new(Arc::new(Blaschke { zeros }))
}

// ---------------------------------------------------------------------------
// Blaschke-Potapov product

/// One elementary factor `(I - P) + beta_w(z) P` rotating `Ran P` through a
/// scalar Blaschke factor. Normalized so the factor is PSD on `Ran P` at the
/// origin: `beta_w(z) = (conj(w)/|w|) (w - z)/(1 - conj(w) z)` for nonzero
/// `w`, and `beta_0(z) = z`.
#[derive(Clone)]
pub struct PotapovFactor {
    w: C64,
    proj: CMatrix,
    complement: CMatrix,
}

impl PotapovFactor {
    pub fn new(w: C64, proj: CMatrix) -> Result<Self> {
        if w.norm() >= 1.0 {
            return invalid(format!("Potapov zero {w} outside the open disc"));
        }
        let n = proj.dim();
        let idempotency = proj.mul(&proj).sub(&proj).op_norm();
        if idempotency > 1e-12 || proj.anti_hermitian_norm() > 1e-12 {
            return invalid(format!(
                "Potapov projection must be a Hermitian idempotent (residual {idempotency:.3e})"
            ));
        }
        let complement = CMatrix::identity(n).sub(&proj);
        Ok(PotapovFactor { w, proj, complement })
    }

    fn beta(&self, z: C64) -> C64 {
        let w = self.w;
        if w.norm() == 0.0 {
            z
        } else {
            (w.conj() / w.norm()) * (w - z) / (1.0 - w.conj() * z)
        }
    }

    fn eval(&self, z: C64) -> CMatrix {
        self.complement.add(&self.proj.scale(self.beta(z)))
    }
}

pub(super) struct Potapov {
    pub n: usize,
    pub factors: Vec<PotapovFactor>,
    pub left: Option<CMatrix>,
    pub right: Option<CMatrix>,
}

impl SchurMap for Potapov {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_unchecked(&self, z: C64) -> CMatrix {
        let mut acc = match &self.left {
            Some(u) => u.clone(),
            None => CMatrix::identity(self.n),
        };
        for f in &self.factors {
            acc = acc.mul(&f.eval(z));
        }
        if let Some(v) = &self.right {
            acc = acc.mul(v);
        }
        acc
    }

    fn kind(&self) -> &'static str {
        "potapov"
    }

    fn is_inner(&self) -> bool {
        true
    }

    fn to_spec(&self) -> Value {
        let factors: Vec<Value> = self
            .factors
            .iter()
            .map(|f| json!({"w": cjson(f.w), "proj": serde_json::to_value(&f.proj).unwrap()}))
            .collect();
        let mut spec = json!({"type": "potapov", "n": self.n, "factors": factors});
        if let Some(u) = &self.left {
            spec["left"] = serde_json::to_value(u).unwrap();
        }
        if let Some(v) = &self.right {
            spec["right"] = serde_json::to_value(v).unwrap();
        }
        spec
    }
}

/// Ordered Blaschke-Potapov product, optionally conjugated by constant
/// unitaries: `U F_1(z) ... F_k(z) V`.
pub fn potapov_product(
    n: usize,
    factors: Vec<PotapovFactor>,
    left: Option<CMatrix>,
    right: Option<CMatrix>,
) -> Result<SchurFunction> {
    if factors.is_empty() {
        return invalid("a Potapov product needs at least one factor");
    }
    for f in &factors {
        if f.proj.dim() != n {
            return invalid(format!(
                "factor projection dimension {} does not match n = {n}",
                f.proj.dim()
            ));
        }
    }
    for u in [&left, &right].into_iter().flatten() {
        if u.dim() != n || !u.is_unitary(1e-12) {
            return invalid("flanking matrices must be unitary of matching dimension");
        }
    }
    SchurFunction::new(Arc::new(Potapov { n, factors, left, right }))
}

// ---------------------------------------------------------------------------
// atomic scalar inner function

pub(super) struct AtomicInner {
    pub point: C64,
    pub mass: f64,
}

impl SchurMap for AtomicInner {
    fn dim(&self) -> usize {
        1
    }

    fn eval_unchecked(&self, z: C64) -> CMatrix {
        let e = (z + self.point) / (z - self.point) * self.mass;
        CMatrix::scalar(e.exp())
    }

    fn kind(&self) -> &'static str {
        "atomic"
    }

    fn is_inner(&self) -> bool {
        true
    }

    fn exceptional_points(&self) -> Vec<C64> {
        vec![self.point]
    }

    fn to_spec(&self) -> Value {
        json!({"type": "atomic", "point": cjson(self.point), "mass": self.mass})
    }
}

/// Singular inner function `exp(s (z + p)/(z - p))` with mass `s > 0`
/// concentrated at the unimodular point `p`.
pub fn atomic_inner(point: C64, mass: f64) -> Result<SchurFunction> {
    if (point.norm() - 1.0).abs() > 1e-12 {
        return invalid(format!("atomic point must be unimodular, |p| = {}", point.norm()));
    }
    if mass <= 0.0 {
        return invalid(format!("atomic mass must be positive, got {mass}"));
    }
    SchurFunction::new(Arc::new(AtomicInner { point: point / point.norm(), mass }))
}

// ---------------------------------------------------------------------------
// scaling

pub(super) struct Scale {
    pub c: f64,
    pub inner: SchurFunction,
}

impl SchurMap for Scale {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval_unchecked(&self, z: C64) -> CMatrix {
        self.inner
            .eval(z)
            .expect("inner function evaluated on validated domain")
            .scale(C64::new(self.c, 0.0))
    }

    fn kind(&self) -> &'static str {
        "scale"
    }

    fn exceptional_points(&self) -> Vec<C64> {
        self.inner.exceptional_points()
    }

    fn to_spec(&self) -> Value {
        json!({"type": "scale", "c": self.c, "of": self.inner.to_json()})
    }
}

/// `c * b` with `0 < c < 1`.
pub fn scale(c: f64, b: &SchurFunction) -> Result<SchurFunction> {
    if !(0.0 < c && c < 1.0) {
        return invalid(format!("scale factor must lie in (0,1), got {c}"));
    }
    SchurFunction::new(Arc::new(Scale { c, inner: b.clone() }))
}

// ---------------------------------------------------------------------------
// direct sum

pub(super) struct DirectSum {
    pub parts: Vec<SchurFunction>,
    pub n: usize,
}

impl SchurMap for DirectSum {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_unchecked(&self, z: C64) -> CMatrix {
        let blocks: Vec<CMatrix> = self
            .parts
            .iter()
            .map(|p| p.eval(z).expect("part evaluated on validated domain"))
            .collect();
        CMatrix::from_fn(self.n, |i, j| {
            let mut off = 0;
            for b in &blocks {
                let d = b.dim();
                if i >= off && i < off + d && j >= off && j < off + d {
                    return b.get(i - off, j - off);
                }
                off += d;
            }
            C64::new(0.0, 0.0)
        })
    }

    fn kind(&self) -> &'static str {
        "direct_sum"
    }

    fn is_inner(&self) -> bool {
        self.parts.iter().all(|p| p.is_inner())
    }

    fn exceptional_points(&self) -> Vec<C64> {
        self.parts.iter().flat_map(|p| p.exceptional_points()).collect()
    }

    fn to_spec(&self) -> Value {
        json!({"type": "direct_sum", "parts": self.parts.iter().map(|p| p.to_json()).collect::<Vec<_>>()})
    }
}

/// Block-diagonal sum of Schur functions.
pub fn direct_sum(parts: &[SchurFunction]) -> Result<SchurFunction> {
    if parts.is_empty() {
        return invalid("direct sum needs at least one part");
    }
    let n = parts.iter().map(|p| p.dim()).sum();
    SchurFunction::new(Arc::new(DirectSum { parts: parts.to_vec(), n }))
}

// ---------------------------------------------------------------------------
// pointwise product

pub(super) struct Product {
    pub factors: Vec<SchurFunction>,
}

impl SchurMap for Product {
    fn dim(&self) -> usize {
        self.factors[0].dim()
    }

    fn eval_unchecked(&self, z: C64) -> CMatrix {
        let mut acc = self.factors[0]
            .eval(z)
            .expect("factor evaluated on validated domain");
        for f in &self.factors[1..] {
            acc = acc.mul(&f.eval(z).expect("factor evaluated on validated domain"));
        }
        acc
    }

    fn kind(&self) -> &'static str {
        "product"
    }

    fn is_inner(&self) -> bool {
        self.factors.iter().all(|f| f.is_inner())
    }

    fn exceptional_points(&self) -> Vec<C64> {
        self.factors.iter().flat_map(|f| f.exceptional_points()).collect()
    }

    fn to_spec(&self) -> Value {
        json!({"type": "product", "factors": self.factors.iter().map(|f| f.to_json()).collect::<Vec<_>>()})
    }
}

/// Pointwise matrix product of Schur functions of equal dimension.
pub fn product(factors: &[SchurFunction]) -> Result<SchurFunction> {
    if factors.is_empty() {
        return invalid("product needs at least one factor");
    }
    let n = factors[0].dim();
    if factors.iter().any(|f| f.dim() != n) {
        return invalid("product factors must share one dimension");
    }
    SchurFunction::new(Arc::new(Product { factors: factors.to_vec() }))
}

// ---------------------------------------------------------------------------
// scalar lift

pub(super) struct ScalarLift {
    pub theta: SchurFunction,
    pub slot: usize,
    pub rest: SchurFunction,
}

impl SchurMap for ScalarLift {
    fn dim(&self) -> usize {
        self.rest.dim() + 1
    }

    fn eval_unchecked(&self, z: C64) -> CMatrix {
        let n = self.dim();
        let th = self.theta.eval(z).expect("theta evaluated on validated domain");
        let rest = self.rest.eval(z).expect("rest evaluated on validated domain");
        // coordinates other than `slot` carry `rest` in order
        let embed = |i: usize| if i < self.slot { i } else { i - 1 };
        CMatrix::from_fn(n, |i, j| match (i == self.slot, j == self.slot) {
            (true, true) => th.get(0, 0),
            (false, false) => rest.get(embed(i), embed(j)),
            _ => C64::new(0.0, 0.0),
        })
    }

    fn kind(&self) -> &'static str {
        "lift"
    }

    fn is_inner(&self) -> bool {
        self.theta.is_inner() && self.rest.is_inner()
    }

    fn exceptional_points(&self) -> Vec<C64> {
        let mut pts = self.theta.exceptional_points();
        pts.extend(self.rest.exceptional_points());
        pts
    }

    fn to_spec(&self) -> Value {
        json!({
            "type": "lift",
            "theta": self.theta.to_json(),
            "slot": self.slot,
            "rest": self.rest.to_json(),
        })
    }
}

/// Place a scalar Schur function in diagonal slot `slot`, filling the
/// complementary coordinates from `rest`.
pub fn scalar_lift(theta: &SchurFunction, slot: usize, rest: &SchurFunction) -> Result<SchurFunction> {
    if theta.dim() != 1 {
        return invalid("lift requires a scalar function for the slot");
    }
    if slot > rest.dim() {
        return invalid(format!("slot {} exceeds target dimension {}", slot, rest.dim() + 1));
    }
    SchurFunction::new(Arc::new(ScalarLift {
        theta: theta.clone(),
        slot,
        rest: rest.clone(),
    }))
}

// ---------------------------------------------------------------------------
// the two-by-two boundary counterexample

pub(super) struct Counterexample {
    pub gamma: f64,
    pub beta: f64,
    pub eps: f64,
}

impl Counterexample {
    /// Half-plane side. Principal branch throughout (powers cut along the
    /// negative reals, well defined on the right half-plane).
    pub(super) fn half_plane(&self, z: C64) -> CMatrix {
        let h = 1.0 / z + z.powf(-self.gamma) + 1.0;
        let theta = (h - 1.0) / (h + 1.0);
        let s = self.eps * z.powf(self.beta) / (1.0 + z);
        CMatrix::from_fn(2, |i, j| if (i, j) == (0, 0) { theta } else { s })
    }
}

impl SchurMap for Counterexample {
    fn dim(&self) -> usize {
        2
    }

    fn eval_unchecked(&self, xi: C64) -> CMatrix {
        // conformal transplant from the disc to the right half-plane
        let z = (1.0 - xi) / (1.0 + xi);
        self.half_plane(z)
    }

    fn kind(&self) -> &'static str {
        "counterexample"
    }

    fn exceptional_points(&self) -> Vec<C64> {
        vec![C64::new(1.0, 0.0)]
    }

    fn to_spec(&self) -> Value {
        json!({"type": "counterexample", "gamma": self.gamma, "beta": self.beta, "eps": self.eps})
    }
}

/// Two-by-two function with an atom at 1 whose one-sided compressed
/// difference quotients blow up. Requires `0 < gamma < 1`, `0 < beta < 1`,
/// `2 beta > 2 - gamma`, and an `eps` small enough to pass the boundary
/// sampling certificate (checked on the half-plane imaginary axis).
pub fn counterexample(gamma: f64, beta: f64, eps: f64) -> Result<SchurFunction> {
    if !(0.0 < gamma && gamma < 1.0) {
        return invalid(format!("gamma must lie in (0,1), got {gamma}"));
    }
    if !(0.0 < beta && beta < 1.0) {
        return invalid(format!("beta must lie in (0,1), got {beta}"));
    }
    if 2.0 * beta <= 2.0 - gamma {
        return invalid(format!(
            "parameters must satisfy 2 beta > 2 - gamma, got 2*{beta} <= 2 - {gamma}"
        ));
    }
    if eps <= 0.0 {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    let map = Counterexample { gamma, beta, eps };
    // imaginary-axis certificate before the disc-grid gate
    for k in 0..400 {
        let x = 10f64.powf(-6.0 + 9.0 * k as f64 / 399.0);
        for sign in [-1.0, 1.0] {
            let norm = map.half_plane(C64::new(0.0, sign * x)).op_norm();
            if !(norm < 1.0) {
                return Err(crate::Error::NotContractive(format!(
                    "counterexample not contractive on the imaginary axis at x = {}: norm {norm}",
                    sign * x
                )));
            }
        }
    }
    SchurFunction::new(Arc::new(map))
}
