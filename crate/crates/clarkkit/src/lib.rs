//! Matrix-valued Schur functions on the unit disc and the measure families
//! attached to them.
//!
//! A purely contractive analytic `n x n` function `b` together with a unitary
//! matrix `alpha` generates a Herglotz function whose representing measure is
//! a finite non-negative matrix measure on the circle. This crate constructs
//! such functions from composable builders, evaluates the Herglotz transform
//! and its absolutely continuous density, locates atoms and computes their
//! matrix point masses through nontangential limits, tests Caratheodory
//! conditions and angular derivatives on subspaces, checks vector mutual
//! singularity between members of a family, and audits every computed
//! quantity against independent quadrature and closed-form oracles.
//!
//! Modules:
//! - [`linalg`]: small dense complex-matrix kernel (SVD, pseudo-inverse,
//!   range subspaces, projections).
//! - [`schur`]: builders for purely contractive matrix functions, selected
//!   at runtime by name through a registry.
//! - [`limits`]: Stolz approach paths and robust nontangential limit
//!   estimation with extrapolation and divergence detection.
//! - [`herglotz`]: the frame `(b, alpha)`, resolvent, defect operator and
//!   boundary density.
//! - [`atoms`]: atom location, Nevanlinna point masses, directional
//!   carriers, and full measure assembly.
//! - [`caratheodory`]: boundary condition tests, boundary reproducing
//!   kernels, angular derivatives on subspaces and their dualities.
//! - [`singularity`]: vector mutual singularity and the one-parameter
//!   unitary sweep demonstrator.
//! - [`oracle`]: independent verification engines (circle quadrature,
//!   closed-form scalar atoms, Hardy-norm estimates).
//! - [`selftest`]: the executable compendium of worked examples.

pub mod atoms;
pub mod caratheodory;
pub mod ensemble;
pub mod herglotz;
pub mod limits;
pub mod linalg;
pub mod oracle;
pub mod schur;
pub mod selftest;
pub mod singularity;

pub use atoms::{clark_measure, find_atoms, point_mass, MatrixMeasure};
pub use herglotz::ClarkFrame;
pub use limits::{LimitResult, StolzPath, Verdict};
pub use linalg::{CMatrix, Subspace};
pub use schur::SchurFunction;

use num_complex::Complex;

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;

/// Errors surfaced by construction and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("point {0} lies outside the open unit disc")]
    OutsideDisc(C64),
    #[error("contractivity check failed: {0}")]
    NotContractive(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("limit did not converge: {0}")]
    NotConvergent(String),
    #[error("malformed function spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
