//! Small dense complex-matrix kernel.
//!
//! Everything here is sized for matrices of dimension at most 16: the
//! algorithms are plain dense O(n^3) routines and the rank decisions are
//! relative to the largest singular value, since point-mass matrices can
//! differ by orders of magnitude in scale.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{invalid, C64, Error, Result};

/// Hard cap on matrix dimension; the dense routines are not meant to scale.
pub const MAX_DIM: usize = 16;

/// Default relative rank cutoff (singular values below `rtol * sigma_max`
/// are treated as zero).
pub const DEFAULT_RTOL: f64 = 1e-8;

/// A square complex matrix of small dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    m: DMatrix<C64>,
}

impl CMatrix {
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return invalid(format!("matrix must be square, got {}x{}", m.nrows(), m.ncols()));
        }
        if m.nrows() == 0 || m.nrows() > MAX_DIM {
            return invalid(format!("dimension {} outside 1..={}", m.nrows(), MAX_DIM));
        }
        Ok(CMatrix { m })
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CMatrix { m: DMatrix::from_fn(n, n, f) }
    }

    pub fn zeros(n: usize) -> Self {
        CMatrix { m: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        CMatrix { m: DMatrix::identity(n, n) }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        CMatrix::from_fn(n, |i, j| if i == j { entries[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn scalar(v: C64) -> Self {
        CMatrix::diag(&[v])
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.m
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix { m: self.m.adjoint() }
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        CMatrix { m: &self.m * &rhs.m }
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        CMatrix { m: &self.m + &rhs.m }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        CMatrix { m: &self.m - &rhs.m }
    }

    pub fn scale(&self, c: C64) -> CMatrix {
        CMatrix { m: self.m.map(|v| v * c) }
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.m * v
    }

    pub fn trace(&self) -> C64 {
        self.m.diagonal().sum()
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        if self.m.iter().all(|v| v.norm() == 0.0) {
            return 0.0;
        }
        self.m.clone().singular_values().max()
    }

    pub fn fro_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Smallest singular value.
    pub fn sigma_min(&self) -> f64 {
        self.m.clone().singular_values().min()
    }

    pub fn hermitian_part(&self) -> CMatrix {
        let adj = self.m.adjoint();
        CMatrix { m: (&self.m + adj).map(|v| v * 0.5) }
    }

    pub fn anti_hermitian_norm(&self) -> f64 {
        (&self.m - self.m.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.anti_hermitian_norm() <= tol * (1.0 + self.fro_norm())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let n = self.dim();
        (self.m.adjoint() * &self.m - DMatrix::<C64>::identity(n, n)).norm() < tol
    }

    /// Solve `self * x = rhs` by LU with a conditioning guard.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        let lu = self.m.clone().lu();
        match lu.solve(&rhs.m) {
            Some(x) => {
                let sv = self.m.clone().singular_values();
                let (smax, smin) = (sv.max(), sv.min());
                if smin <= smax * 1e-14 {
                    return Err(Error::Numerical(format!(
                        "solve on nearly singular matrix (sigma_min/sigma_max = {:.3e})",
                        smin / smax
                    )));
                }
                Ok(CMatrix { m: x })
            }
            None => Err(Error::Numerical("singular matrix in solve".into())),
        }
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.solve(&CMatrix::identity(self.dim()))
    }

    /// Eigendecomposition of a Hermitian matrix. The input is symmetrized
    /// first to suppress roundoff skew. Returns `(eigenvalues, vectors)`
    /// with vectors in columns, matching eigenvalue order.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let h = self.hermitian_part();
        let se = nalgebra::SymmetricEigen::new(h.m);
        (se.eigenvalues.iter().copied().collect(), se.eigenvectors)
    }

    /// PSD square root via Hermitian eigendecomposition, clamping negative
    /// eigenvalues at zero.
    pub fn sqrt_psd(&self) -> CMatrix {
        let (vals, vecs) = self.hermitian_eigen();
        let d = DMatrix::from_fn(vals.len(), vals.len(), |i, j| {
            if i == j {
                C64::new(vals[i].max(0.0).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        CMatrix { m: &vecs * d * vecs.adjoint() }
    }

    /// Check positive semidefiniteness after symmetrization: all eigenvalues
    /// at least `-tol * max(1, ||M||)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        let (vals, _) = self.hermitian_eigen();
        let scale = self.op_norm().max(1.0);
        vals.iter().all(|&v| v >= -tol * scale)
    }

    /// Number of singular values at or above `rtol * sigma_max`.
    pub fn rank(&self, rtol: f64) -> usize {
        let sv = self.m.clone().singular_values();
        let smax = sv.max();
        if smax == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s >= rtol * smax).count()
    }
}

/// Moore-Penrose inverse with a relative rank cutoff: singular values below
/// `rtol * sigma_max` are treated as zero. The zero matrix maps to itself.
pub fn pinv(m: &CMatrix, rtol: f64) -> CMatrix {
    let n = m.dim();
    let svd = m.m.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let vt = svd.v_t.expect("svd requested v_t");
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return CMatrix::zeros(n);
    }
    let sinv = DMatrix::from_fn(n, n, |i, j| {
        if i == j && svd.singular_values[i] >= rtol * smax {
            C64::new(1.0 / svd.singular_values[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    // M = U S V^*  =>  M^[-1] = V S^+ U^*
    CMatrix { m: vt.adjoint() * sinv * u.adjoint() }
}

/// A subspace of C^n given by an orthonormal column basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    /// n x dim, orthonormal columns. May have zero columns (trivial space).
    basis: DMatrix<C64>,
}

impl Subspace {
    /// Wrap a basis matrix, verifying orthonormality of the columns.
    pub fn from_orthonormal(basis: DMatrix<C64>) -> Result<Self> {
        let d = basis.ncols();
        if d > 0 {
            let g = basis.adjoint() * &basis;
            let err = (&g - DMatrix::<C64>::identity(d, d)).norm();
            if err > 1e-12 {
                return invalid(format!("basis columns not orthonormal (deviation {:.3e})", err));
            }
        }
        Ok(Subspace { basis })
    }

    /// Orthonormalize a spanning set by modified Gram-Schmidt, dropping
    /// dependent columns (relative tolerance on the residual norm).
    pub fn from_span(vectors: &[DVector<C64>], n: usize) -> Self {
        let mut cols: Vec<DVector<C64>> = Vec::new();
        let scale = vectors
            .iter()
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max)
            .max(1.0);
        for v in vectors {
            let mut w = v.clone();
            for c in &cols {
                let coeff = c.dotc(&w);
                w -= c.map(|x| x * coeff);
            }
            // repeat once for numerical orthogonality
            for c in &cols {
                let coeff = c.dotc(&w);
                w -= c.map(|x| x * coeff);
            }
            if w.norm() > 1e-10 * scale {
                let nw = w.norm();
                cols.push(w.map(|x| x / nw));
            }
        }
        let basis = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
        Subspace { basis }
    }

    pub fn trivial(n: usize) -> Self {
        Subspace { basis: DMatrix::zeros(n, 0) }
    }

    pub fn full(n: usize) -> Self {
        Subspace { basis: DMatrix::identity(n, n) }
    }

    pub fn span_of(v: &DVector<C64>) -> Result<Self> {
        let nv = v.norm();
        if nv == 0.0 {
            return invalid("cannot span a zero vector");
        }
        Ok(Subspace { basis: DMatrix::from_fn(v.len(), 1, |i, _| v[i] / nv) })
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    pub fn basis_vector(&self, j: usize) -> DVector<C64> {
        self.basis.column(j).into_owned()
    }

    /// Largest principal angle (radians) between two subspaces of the same
    /// dimension; `pi/2` when dimensions differ. Small angles go through the
    /// sine of the residual, which stays accurate where `acos` saturates.
    pub fn max_principal_angle(&self, other: &Subspace) -> f64 {
        if self.dim() != other.dim() {
            return std::f64::consts::FRAC_PI_2;
        }
        if self.dim() == 0 {
            return 0.0;
        }
        let residual = &self.basis - &other.basis * (other.basis.adjoint() * &self.basis);
        let sine = residual
            .svd(false, false)
            .singular_values
            .max()
            .clamp(0.0, 1.0);
        if sine < 0.7 {
            sine.asin()
        } else {
            let g = self.basis.adjoint() * &other.basis;
            g.singular_values().min().clamp(-1.0, 1.0).acos()
        }
    }

    /// Does `v` lie in the subspace (residual below `tol * ||v||`)?
    pub fn contains(&self, v: &DVector<C64>, tol: f64) -> bool {
        let nv = v.norm();
        if nv == 0.0 {
            return true;
        }
        let coeffs = self.basis.adjoint() * v;
        let res = v - &self.basis * coeffs;
        res.norm() <= tol * nv
    }
}

/// Orthonormal basis of the range: left singular vectors with singular value
/// at or above `rtol * sigma_max`. The zero matrix yields the trivial space.
pub fn range_basis(m: &CMatrix, rtol: f64) -> Subspace {
    let n = m.dim();
    let svd = m.m.clone().svd(true, false);
    let u = svd.u.expect("svd requested u");
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Subspace::trivial(n);
    }
    let keep: Vec<usize> = (0..n)
        .filter(|&i| svd.singular_values[i] >= rtol * smax)
        .collect();
    let basis = DMatrix::from_fn(n, keep.len(), |i, j| u[(i, keep[j])]);
    Subspace::from_orthonormal(basis).expect("singular vectors are orthonormal")
}

/// Orthogonal projection onto a subspace: `basis * basis^*`.
pub fn proj(e: &Subspace) -> CMatrix {
    let b = e.basis();
    CMatrix { m: b * b.adjoint() }
}

/// Serialized matrix layout: row-major real and imaginary parts.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let row = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| f(&self.m[(i, j)])).collect())
                .collect()
        };
        MatrixJson { n, re: row(|c| c.re), im: row(|c| c.im) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let n = raw.n;
        let ok = raw.re.len() == n
            && raw.im.len() == n
            && raw.re.iter().all(|r| r.len() == n)
            && raw.im.iter().all(|r| r.len() == n);
        if !ok {
            return Err(D::Error::custom("matrix rows do not match declared dimension"));
        }
        CMatrix::from_dmatrix(DMatrix::from_fn(n, n, |i, j| {
            C64::new(raw.re[i][j], raw.im[i][j])
        }))
        .map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct SubspaceJson {
            ambient: usize,
            dim: usize,
            basis_re: Vec<Vec<f64>>,
            basis_im: Vec<Vec<f64>>,
        }
        let (n, d) = (self.ambient_dim(), self.dim());
        let grab = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..d).map(|j| f(&self.basis[(i, j)])).collect())
                .collect()
        };
        SubspaceJson {
            ambient: n,
            dim: d,
            basis_re: grab(|c| c.re),
            basis_im: grab(|c| c.im),
        }
        .serialize(s)
    }
}
