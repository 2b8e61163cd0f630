//! Name-indexed registry of construction variants.
//!
//! A JSON spec selects its builder through the `type` field; composite
//! builders recurse through the same entry point, so nested construction
//! trees deserialize naturally. Every parser goes through the validating
//! public constructors, so anything the registry returns has passed the
//! contractivity gates.

use std::collections::BTreeMap;

use once_cell::sync::Lazy;
use serde_json::Value;

use super::builders::*;
use super::SchurFunction;
use crate::linalg::CMatrix;
use crate::{C64, Error, Result};

type ParseFn = fn(&Value) -> Result<SchurFunction>;

pub struct Registry {
    parsers: BTreeMap<&'static str, ParseFn>,
}

impl Registry {
    pub fn names(&self) -> Vec<&'static str> {
        self.parsers.keys().copied().collect()
    }

    /// Dispatch on the `type` field.
    pub fn parse(&self, spec: &Value) -> Result<SchurFunction> {
        let kind = spec
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Spec("spec must carry a string `type` field".into()))?;
        let parser = self.parsers.get(kind).ok_or_else(|| {
            Error::Spec(format!(
                "unknown construction `{kind}`; known: {}",
                self.names().join(", ")
            ))
        })?;
        parser(spec)
    }
}

pub fn registry() -> &'static Registry {
    static REGISTRY: Lazy<Registry> = Lazy::new(|| {
        let mut parsers: BTreeMap<&'static str, ParseFn> = BTreeMap::new();
        parsers.insert("constant", parse_constant);
        parsers.insert("blaschke", parse_blaschke);
        parsers.insert("potapov", parse_potapov);
        parsers.insert("atomic", parse_atomic);
        parsers.insert("scale", parse_scale);
        parsers.insert("direct_sum", parse_direct_sum);
        parsers.insert("product", parse_product);
        parsers.insert("lift", parse_lift);
        parsers.insert("counterexample", parse_counterexample);
        Registry { parsers }
    });
    &REGISTRY
}

fn spec_err(msg: impl Into<String>) -> Error {
    Error::Spec(msg.into())
}

fn field<'a>(spec: &'a Value, name: &str) -> Result<&'a Value> {
    spec.get(name)
        .ok_or_else(|| spec_err(format!("missing field `{name}`")))
}

fn f64_field(spec: &Value, name: &str) -> Result<f64> {
    field(spec, name)?
        .as_f64()
        .ok_or_else(|| spec_err(format!("field `{name}` must be a number")))
}

fn usize_field(spec: &Value, name: &str) -> Result<usize> {
    field(spec, name)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| spec_err(format!("field `{name}` must be a non-negative integer")))
}

fn complex_value(v: &Value, name: &str) -> Result<C64> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| spec_err(format!("`{name}` must be a [re, im] pair")))?;
    match (arr[0].as_f64(), arr[1].as_f64()) {
        (Some(re), Some(im)) => Ok(C64::new(re, im)),
        _ => Err(spec_err(format!("`{name}` entries must be numbers"))),
    }
}

fn matrix_field(spec: &Value, name: &str) -> Result<CMatrix> {
    serde_json::from_value(field(spec, name)?.clone())
        .map_err(|e| spec_err(format!("field `{name}`: {e}")))
}

fn child(spec: &Value, name: &str) -> Result<SchurFunction> {
    SchurFunction::from_json(field(spec, name)?)
}

fn children(spec: &Value, name: &str) -> Result<Vec<SchurFunction>> {
    field(spec, name)?
        .as_array()
        .ok_or_else(|| spec_err(format!("field `{name}` must be an array")))?
        .iter()
        .map(SchurFunction::from_json)
        .collect()
}

fn parse_constant(spec: &Value) -> Result<SchurFunction> {
    constant(matrix_field(spec, "matrix")?)
}

fn parse_blaschke(spec: &Value) -> Result<SchurFunction> {
    let zeros = field(spec, "zeros")?
        .as_array()
        .ok_or_else(|| spec_err("field `zeros` must be an array"))?
        .iter()
        .map(|v| complex_value(v, "zeros entry"))
        .collect::<Result<Vec<_>>>()?;
    blaschke_product(zeros)
}

fn parse_potapov(spec: &Value) -> Result<SchurFunction> {
    let factors_raw = field(spec, "factors")?
        .as_array()
        .ok_or_else(|| spec_err("field `factors` must be an array"))?;
    let mut factors = Vec::with_capacity(factors_raw.len());
    let mut first_dim = None;
    for f in factors_raw {
        let w = complex_value(field(f, "w")?, "w")?;
        let proj = matrix_field(f, "proj")?;
        first_dim.get_or_insert(proj.dim());
        factors.push(PotapovFactor::new(w, proj)?);
    }
    let n = match spec.get("n") {
        Some(_) => usize_field(spec, "n")?,
        None => first_dim.ok_or_else(|| spec_err("empty Potapov factor list"))?,
    };
    let left = spec
        .get("left")
        .map(|_| matrix_field(spec, "left"))
        .transpose()?;
    let right = spec
        .get("right")
        .map(|_| matrix_field(spec, "right"))
        .transpose()?;
    potapov_product(n, factors, left, right)
}

fn parse_atomic(spec: &Value) -> Result<SchurFunction> {
    let point = complex_value(field(spec, "point")?, "point")?;
    let mass = f64_field(spec, "mass")?;
    atomic_inner(point, mass)
}

fn parse_scale(spec: &Value) -> Result<SchurFunction> {
    let c = f64_field(spec, "c")?;
    let inner = child(spec, "of")?;
    scale(c, &inner)
}

fn parse_direct_sum(spec: &Value) -> Result<SchurFunction> {
    direct_sum(&children(spec, "parts")?)
}

fn parse_product(spec: &Value) -> Result<SchurFunction> {
    product(&children(spec, "factors")?)
}

fn parse_lift(spec: &Value) -> Result<SchurFunction> {
    let theta = child(spec, "theta")?;
    let slot = usize_field(spec, "slot")?;
    let rest = child(spec, "rest")?;
    scalar_lift(&theta, slot, &rest)
}

fn parse_counterexample(spec: &Value) -> Result<SchurFunction> {
    counterexample(
        f64_field(spec, "gamma")?,
        f64_field(spec, "beta")?,
        f64_field(spec, "eps")?,
    )
}
