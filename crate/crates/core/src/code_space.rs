// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! The encoding `H^S = H^A ⊗ H^B ⊕ K`.
//!
//! A decomposition is stored as an isometry `J : H^A ⊗ H^B → H^S`. Column
//! `a·d_B + b` of `J` is the image of `|a⟩ ⊗ |b⟩`, so `kron(I_A, C)` acts on
//! the code coordinates in the usual Kronecker order.

use serde::{Deserialize, Serialize};

use crate::linalg::{
    self, ensure_square, frobenius, hermitian_eigen, hermiticity_defect, identity, kron,
    orthonormal_complement, r, trace, zeros, CMatrix, FactorDims,
};
use crate::{Error, Result};

/// Tolerance for accepting a user-supplied isometry.
const ISOMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemDecomposition {
    d_a: usize,
    d_b: usize,
    iso: CMatrix,
}

impl SubsystemDecomposition {
    pub fn new(d_a: usize, d_b: usize, iso: CMatrix) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::DimensionMismatch(
                "subsystem dimensions must be positive".into(),
            ));
        }
        if iso.ncols() != d_a * d_b {
            return Err(Error::DimensionMismatch(format!(
                "isometry has {} columns, expected d_A*d_B = {}",
                iso.ncols(),
                d_a * d_b
            )));
        }
        if iso.nrows() < iso.ncols() {
            return Err(Error::Capacity {
                requested: iso.ncols(),
                available: iso.nrows(),
            });
        }
        let defect = frobenius(&(iso.adjoint() * &iso - identity(d_a * d_b)));
        if defect > ISOMETRY_TOL {
            return Err(Error::NonOrthogonal { defect });
        }
        Ok(SubsystemDecomposition { d_a, d_b, iso })
    }

    /// Code spanned by the first `d_A·d_B` canonical basis vectors.
    pub fn canonical(d_a: usize, d_b: usize, d_s: usize) -> Result<Self> {
        if d_a * d_b > d_s {
            return Err(Error::Capacity {
                requested: d_a * d_b,
                available: d_s,
            });
        }
        let iso = CMatrix::identity(d_s, d_a * d_b);
        Self::new(d_a, d_b, iso)
    }

    /// Code inside a tensor product `H^S = H^A ⊗ C^{d_S/d_A}` with `H^B`
    /// spanned by the first `d_B` levels of the second factor.
    pub fn tensor_factor(d_a: usize, d_b: usize, d_s: usize) -> Result<Self> {
        if d_a == 0 || !d_s.is_multiple_of(d_a) {
            return Err(Error::DimensionMismatch(format!(
                "d_A = {d_a} does not divide d_S = {d_s}"
            )));
        }
        let levels = d_s / d_a;
        if d_b > levels {
            return Err(Error::Capacity {
                requested: d_a * d_b,
                available: d_s,
            });
        }
        let mut iso = zeros(d_s, d_a * d_b);
        for a in 0..d_a {
            for b in 0..d_b {
                iso[(a * levels + b, a * d_b + b)] = r(1.0);
            }
        }
        Self::new(d_a, d_b, iso)
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d_s(&self) -> usize {
        self.iso.nrows()
    }

    pub fn d_k(&self) -> usize {
        self.d_s() - self.d_a * self.d_b
    }

    /// Largest gauge dimension that fits: `⌊d_S / d_A⌋`.
    pub fn max_gauge_dim(&self) -> usize {
        self.d_s() / self.d_a
    }

    pub fn isometry(&self) -> &CMatrix {
        &self.iso
    }

    /// `P^AB = J J†`.
    pub fn projector_ab(&self) -> CMatrix {
        &self.iso * self.iso.adjoint()
    }

    /// `P_K = I − P^AB`.
    pub fn projector_k(&self) -> CMatrix {
        identity(self.d_s()) - self.projector_ab()
    }

    /// Columns `J(|a⟩ ⊗ ·)` for a fixed `a`.
    pub fn a_block(&self, a: usize) -> CMatrix {
        self.iso.columns(a * self.d_b, self.d_b).into_owned()
    }

    /// `J (ρ ⊗ τ) J†`. Works for arbitrary operators, not only states.
    pub fn encode(&self, rho_a: &CMatrix, tau_b: &CMatrix) -> Result<CMatrix> {
        if rho_a.shape() != (self.d_a, self.d_a) || tau_b.shape() != (self.d_b, self.d_b) {
            return Err(Error::DimensionMismatch(format!(
                "encode expects {0}x{0} and {1}x{1} operators, got {2:?} and {3:?}",
                self.d_a,
                self.d_b,
                rho_a.shape(),
                tau_b.shape()
            )));
        }
        Ok(&self.iso * kron(rho_a, tau_b)? * self.iso.adjoint())
    }

    pub fn encode_state(
        &self,
        rho_a: &DensityMatrix,
        tau_b: &DensityMatrix,
    ) -> Result<DensityMatrix> {
        DensityMatrix::new(self.encode(rho_a.matrix(), tau_b.matrix())?)
    }

    /// `Tr_B{J† σ J}`: the logical operator carried by `σ`. Linear in `σ`.
    pub fn reduce_to_a(&self, sigma: &CMatrix) -> Result<CMatrix> {
        if sigma.shape() != (self.d_s(), self.d_s()) {
            return Err(Error::DimensionMismatch(format!(
                "reduce_to_a expects a {0}x{0} operator, got {1:?}",
                self.d_s(),
                sigma.shape()
            )));
        }
        let compressed = self.iso.adjoint() * sigma * &self.iso;
        let dims = FactorDims::new(vec![self.d_a, self.d_b])?;
        linalg::partial_trace(&compressed, &dims, &[0])
    }

    /// Adds `k` gauge levels. `new_vectors` is `d_S × (d_A·k)`; column
    /// `level·d_A + a` is the image of `|a⟩ ⊗ |d_B + level⟩`. Existing code
    /// vectors keep their images.
    pub fn expand_gauge(&self, new_vectors: &CMatrix, tol: f64) -> Result<Self> {
        if new_vectors.nrows() != self.d_s() || !new_vectors.ncols().is_multiple_of(self.d_a) {
            return Err(Error::DimensionMismatch(format!(
                "gauge vectors must be {}x(d_A*k), got {:?}",
                self.d_s(),
                new_vectors.shape()
            )));
        }
        let k = new_vectors.ncols() / self.d_a;
        if k == 0 {
            return Ok(self.clone());
        }
        let d_b_new = self.d_b + k;
        if self.d_a * d_b_new > self.d_s() {
            return Err(Error::Capacity {
                requested: self.d_a * d_b_new,
                available: self.d_s(),
            });
        }
        let overlap = frobenius(&(self.iso.adjoint() * new_vectors));
        let gram =
            frobenius(&(new_vectors.adjoint() * new_vectors - identity(new_vectors.ncols())));
        if overlap > tol || gram > tol {
            return Err(Error::NonOrthogonal {
                defect: overlap.max(gram),
            });
        }
        let mut iso = zeros(self.d_s(), self.d_a * d_b_new);
        for a in 0..self.d_a {
            for b in 0..d_b_new {
                let src = if b < self.d_b {
                    self.iso.column(a * self.d_b + b)
                } else {
                    new_vectors.column((b - self.d_b) * self.d_a + a)
                };
                iso.column_mut(a * d_b_new + b).copy_from(&src);
            }
        }
        Self::new(self.d_a, d_b_new, iso)
    }

    /// Grows the gauge factor to `d_b_new` levels, taking the new levels from
    /// the deterministic Gram–Schmidt completion of the code.
    pub fn extend_to(&self, d_b_new: usize) -> Result<Self> {
        if d_b_new < self.d_b {
            return Err(Error::InvalidInput(format!(
                "cannot shrink the gauge factor from {} to {d_b_new}",
                self.d_b
            )));
        }
        if self.d_a * d_b_new > self.d_s() {
            return Err(Error::Capacity {
                requested: self.d_a * d_b_new,
                available: self.d_s(),
            });
        }
        let extra = self.d_a * (d_b_new - self.d_b);
        let complement = orthonormal_complement(&self.iso);
        self.expand_gauge(&complement.columns(0, extra).into_owned(), 1e-9)
    }

    /// Decomposition with the largest gauge factor containing this one.
    pub fn maximal_extension(&self) -> Self {
        self.extend_to(self.max_gauge_dim())
            .expect("maximal extension always fits")
    }
}

/// Best fit of an operator, restricted to code inputs, by `I^A ⊗ C`.
///
/// `x` holds the images of the input code vectors (A-major columns,
/// `d_A·n_in` of them); `out_iso` is the target code isometry (A-major,
/// `d_A·n_out` columns). `inside` measures the part of `out_iso† x` that is
/// not of the form `I^A ⊗ C`, `leakage` the part of `x` outside the range of
/// `out_iso`.
#[derive(Debug, Clone)]
pub struct TrivialFit {
    pub c: CMatrix,
    pub inside: f64,
    pub leakage: f64,
}

impl TrivialFit {
    pub fn residual(&self) -> f64 {
        self.inside.hypot(self.leakage)
    }
}

pub fn fit_a_trivial(x: &CMatrix, out_iso: &CMatrix, d_a: usize) -> TrivialFit {
    let n_in = x.ncols() / d_a;
    let n_out = out_iso.ncols() / d_a;
    let y = out_iso.adjoint() * x;
    let mut cfit = zeros(n_out, n_in);
    for a in 0..d_a {
        cfit += y.view((a * n_out, a * n_in), (n_out, n_in));
    }
    cfit /= r(d_a as f64);
    let trivial = kron(&identity(d_a), &cfit).expect("code dimensions are small");
    let inside = frobenius(&(&y - trivial));
    let leakage = frobenius(&(x - out_iso * &y));
    TrivialFit {
        c: cfit,
        inside,
        leakage,
    }
}

/// A validated density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

/// Eigenvalues down to this floor are accepted as numerical noise.
pub const EIGENVALUE_FLOOR: f64 = -1e-8;

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        ensure_square(&mat)?;
        let herm = hermiticity_defect(&mat);
        if herm > 1e-8 {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
        }
        let min_eig = Self::min_eigenvalue_of(&mat);
        if min_eig < EIGENVALUE_FLOOR {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(DensityMatrix { mat })
    }

    pub fn pure(ket: &CMatrix) -> Result<Self> {
        let norm = ket.norm();
        if ket.ncols() != 1 || norm == 0.0 {
            return Err(Error::InvalidDensity(
                "pure state needs a nonzero column".into(),
            ));
        }
        let k = ket / r(norm);
        Self::new(&k * k.adjoint())
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix {
            mat: identity(n) * r(1.0 / n as f64),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        Self::min_eigenvalue_of(&self.mat)
    }

    fn min_eigenvalue_of(mat: &CMatrix) -> f64 {
        let (values, _) = hermitian_eigen(mat);
        values.last().copied().unwrap_or(0.0)
    }
}

/// Serializable form of a decomposition, used in scenario files and
/// certificates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub d_a: usize,
    pub d_b: usize,
    pub d_s: usize,
    pub isometry: crate::harness::scenario::MatrixJson,
}

impl From<&SubsystemDecomposition> for DecompositionRecord {
    fn from(dec: &SubsystemDecomposition) -> Self {
        DecompositionRecord {
            d_a: dec.d_a(),
            d_b: dec.d_b(),
            d_s: dec.d_s(),
            isometry: crate::harness::scenario::MatrixJson::from(dec.isometry()),
        }
    }
}
