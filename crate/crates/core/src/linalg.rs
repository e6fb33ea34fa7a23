// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix kernel.
//!
//! Conventions used throughout the crate:
//!
//! * tensor products use the standard Kronecker ordering, so block `(i, j)`
//!   of `kron(a, b)` is `a[(i, j)] * b`, and in a multi-factor space the first
//!   factor is the most significant index;
//! * [`vec`] stacks columns top-to-bottom, which gives
//!   `vec(L ρ R) = (Rᵀ ⊗ L) vec(ρ)`;
//! * [`matrix_exp`] uses scaling and squaring around a truncated Taylor
//!   series.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type CMatrix = DMatrix<C64>;

/// Largest matrix dimension accepted by [`kron`]; superoperators of 64-dimensional
/// systems fit.
pub const MAX_DIM: usize = 4096;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Column vector `|i⟩` in dimension `n`.
pub fn ket(n: usize, i: usize) -> CMatrix {
    let mut k = zeros(n, 1);
    k[(i, 0)] = r(1.0);
    k
}

/// `|i⟩⟨j|` in dimension `n`.
pub fn ket_bra(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(n, n);
    m[(i, j)] = r(1.0);
    m
}

pub fn diag_real(d: &[f64]) -> CMatrix {
    let mut m = zeros(d.len(), d.len());
    for (i, &x) in d.iter().enumerate() {
        m[(i, i)] = r(x);
    }
    m
}

/// Builds a matrix from row slices.
pub fn from_rows(rows: &[Vec<C64>]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    CMatrix::from_fn(n, m, |i, j| rows[i][j])
}

/// Pauli matrices.
pub mod pauli {
    use super::{c, r, CMatrix};

    pub fn i2() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[r(0.0), c(0.0, -1.0), c(0.0, 1.0), r(0.0)])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[r(1.0), r(0.0), r(0.0), r(-1.0)])
    }

    /// Lowering operator `|0⟩⟨1|`.
    pub fn lower() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(0.0), r(0.0)])
    }
}

/// Ordered tensor-factor dimensions annotating a matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorDims(Vec<usize>);

impl FactorDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "factor dimensions must be positive and non-empty, got {dims:?}"
            )));
        }
        Ok(FactorDims(dims))
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.nrows() * b.nrows();
    let cols = a.ncols() * b.ncols();
    if rows > MAX_DIM || cols > MAX_DIM {
        return Err(Error::DimensionOverflow {
            dim: rows.max(cols),
            max: MAX_DIM,
        });
    }
    Ok(a.kronecker(b))
}

pub fn trace(x: &CMatrix) -> C64 {
    x.diagonal().iter().sum()
}

pub fn dagger(x: &CMatrix) -> CMatrix {
    x.adjoint()
}

/// Frobenius norm.
pub fn frobenius(x: &CMatrix) -> f64 {
    x.norm()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// `‖u†u − I‖_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    frobenius(&(u.adjoint() * u - identity(n)))
}

/// `‖h − h†‖_F`.
pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    frobenius(&(h - h.adjoint()))
}

pub fn is_finite(x: &CMatrix) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn hermitian_part(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()) * r(0.5)
}

pub fn ensure_square(x: &CMatrix) -> Result<usize> {
    if x.nrows() != x.ncols() {
        return Err(Error::NotSquare {
            rows: x.nrows(),
            cols: x.ncols(),
        });
    }
    Ok(x.nrows())
}

pub fn ensure_hermitian(h: &CMatrix, what: &str, tol: f64) -> Result<()> {
    ensure_square(h)?;
    let defect = hermiticity_defect(h);
    if defect > tol {
        return Err(Error::NotHermitian {
            what: what.to_string(),
            defect,
        });
    }
    Ok(())
}

pub fn ensure_unitary(u: &CMatrix, what: &str, tol: f64) -> Result<()> {
    ensure_square(u)?;
    let defect = unitarity_defect(u);
    if defect > tol {
        return Err(Error::NotUnitary {
            what: what.to_string(),
            defect,
        });
    }
    Ok(())
}

/// Partial trace of `x` over every factor not listed in `keep`.
///
/// `keep` is interpreted as a set; the kept factors appear in their original
/// order in the result.
pub fn partial_trace(x: &CMatrix, dims: &FactorDims, keep: &[usize]) -> Result<CMatrix> {
    let n = ensure_square(x)?;
    if dims.total() != n {
        return Err(Error::DimensionMismatch(format!(
            "factor dims {:?} multiply to {}, matrix is {n}x{n}",
            dims.as_slice(),
            dims.total()
        )));
    }
    let d = dims.as_slice();
    if let Some(&bad) = keep.iter().find(|&&k| k >= d.len()) {
        return Err(Error::DimensionMismatch(format!(
            "kept factor {bad} out of range for {} factors",
            d.len()
        )));
    }
    let kept: Vec<bool> = (0..d.len()).map(|k| keep.contains(&k)).collect();
    let out_dim: usize = d
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(&x, _)| x)
        .product();

    // Row-major strides of the full index.
    let mut strides = vec![1usize; d.len()];
    for k in (0..d.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * d[k + 1];
    }
    let split = |idx: usize| -> (usize, usize) {
        // (index into kept space, index into traced space)
        let (mut kept_idx, mut traced_idx) = (0usize, 0usize);
        for k in 0..d.len() {
            let digit = (idx / strides[k]) % d[k];
            if kept[k] {
                kept_idx = kept_idx * d[k] + digit;
            } else {
                traced_idx = traced_idx * d[k] + digit;
            }
        }
        (kept_idx, traced_idx)
    };
    let parts: Vec<(usize, usize)> = (0..n).map(split).collect();

    let mut out = zeros(out_dim, out_dim);
    for i in 0..n {
        let (ki, ti) = parts[i];
        for j in 0..n {
            let (kj, tj) = parts[j];
            if ti == tj {
                out[(ki, kj)] += x[(i, j)];
            }
        }
    }
    Ok(out)
}

fn norm_one(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/2, the
/// Taylor series is summed until a term drops below `tol · 2^-s` relative to
/// the partial sum (never looser than machine precision allows), and the
/// result is squared `s` times.
pub fn matrix_exp(a: &CMatrix, tol: f64) -> Result<CMatrix> {
    let n = ensure_square(a)?;
    if !is_finite(a) {
        return Err(Error::NonFinite("matrix_exp input"));
    }
    let norm = norm_one(a);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scale = 2f64.powi(-s);
    let scaled = a * r(scale);
    let threshold = (tol * scale * 1e-3).max(1e-18);

    let mut sum = identity(n);
    let mut term = identity(n);
    for k in 1..=64 {
        term = &term * &scaled * r(1.0 / k as f64);
        sum += &term;
        if norm_one(&term) <= threshold * norm_one(&sum).max(1.0) {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    if !is_finite(&sum) {
        return Err(Error::NonFinite("matrix_exp"));
    }
    Ok(sum)
}

/// Ordered product of segment exponentials `exp(G_n t_n) ⋯ exp(G_1 t_1)`;
/// later segments act on the left.
///
/// Each segment exponential is formed as `exp(G t / substeps)^substeps`.
pub fn time_ordered_exp(schedule: &[(CMatrix, f64)], substeps: usize) -> Result<CMatrix> {
    let (first, _) = schedule.first().ok_or(Error::EmptySchedule)?;
    let n = ensure_square(first)?;
    let substeps = substeps.max(1);
    let mut out = identity(n);
    for (g, duration) in schedule {
        if ensure_square(g)? != n {
            return Err(Error::DimensionMismatch(
                "schedule generators differ in dimension".into(),
            ));
        }
        if !(*duration > 0.0) {
            return Err(Error::InvalidInput(format!(
                "segment durations must be positive, got {duration}"
            )));
        }
        let step = matrix_exp(&(g * r(duration / substeps as f64)), 1e-14)?;
        for _ in 0..substeps {
            out = &step * &out;
        }
    }
    Ok(out)
}

/// Time-ordered propagator of a piecewise-constant Hamiltonian,
/// `𝒯 exp(−i ∫ H)`. Each Hamiltonian is checked for Hermiticity to `1e-9`.
pub fn time_ordered_unitary(schedule: &[(CMatrix, f64)], substeps: usize) -> Result<CMatrix> {
    let generators = schedule
        .iter()
        .map(|(h, t)| {
            ensure_hermitian(h, "segment Hamiltonian", 1e-9)?;
            Ok((h * c(0.0, -1.0), *t))
        })
        .collect::<Result<Vec<_>>>()?;
    time_ordered_exp(&generators, substeps)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted in
/// descending order with eigenvectors as the matching columns.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    let eig = hermitian_part(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |row, col| eig.eigenvectors[(row, order[col])]);
    (values, vectors)
}

/// Thin SVD `m = W diag(σ) V†` with singular values in descending order.
pub fn svd_sorted(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return (zeros(m.nrows(), 0), Vec::new(), zeros(m.ncols(), 0));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").adjoint();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let w = CMatrix::from_fn(m.nrows(), k, |row, col| u[(row, order[col])]);
    let v = CMatrix::from_fn(m.ncols(), k, |row, col| v[(row, order[col])]);
    (w, sigma, v)
}

/// Orthonormal basis of the complement of the span of `basis`'s columns
/// (assumed orthonormal), obtained by Gram–Schmidt over the canonical basis
/// vectors in index order. Deterministic for a given input.
pub fn orthonormal_complement(basis: &CMatrix) -> CMatrix {
    let n = basis.nrows();
    let mut cols: Vec<DVector<C64>> = (0..basis.ncols())
        .map(|j| basis.column(j).into_owned())
        .collect();
    let start = cols.len();
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = DVector::<C64>::zeros(n);
        v[i] = r(1.0);
        for _ in 0..2 {
            for q in &cols {
                let overlap = q.dotc(&v);
                v -= q * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / r(norm));
        }
    }
    let extra = cols.len() - start;
    CMatrix::from_fn(n, extra, |row, col| cols[start + col][row])
}

/// Nearest unitary (polar factor) of a square matrix. Directions whose
/// singular value falls below `1e-10 · max(1, σ_max)` are completed
/// deterministically with [`orthonormal_complement`].
pub fn polar_unitary(m: &CMatrix) -> Result<CMatrix> {
    ensure_square(m)?;
    let (w, sigma, v) = svd_sorted(m);
    let cutoff = 1e-10 * sigma.first().copied().unwrap_or(0.0).max(1.0);
    let rank = sigma.iter().take_while(|&&s| s > cutoff).count();
    let w_r = w.columns(0, rank).into_owned();
    let v_r = v.columns(0, rank).into_owned();
    let mut u = &w_r * v_r.adjoint();
    if rank < m.nrows() {
        let wc = orthonormal_complement(&w_r);
        let vc = orthonormal_complement(&v_r);
        u += &wc * vc.adjoint();
    }
    Ok(u)
}

/// Unitary `u` minimizing `‖u·a − b‖_F`, with the achieved residual.
///
/// `u` is the polar factor of `b a†`, completed on its null space by
/// [`orthonormal_complement`], so rank-deficient problems still give a
/// deterministic answer.
pub fn procrustes_unitary(a: &CMatrix, b: &CMatrix) -> Result<(CMatrix, f64)> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "procrustes operands {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let u = polar_unitary(&(b * a.adjoint()))?;
    let residual = frobenius(&(&u * a - b));
    Ok((u, residual))
}

/// Column-stacking vectorization.
pub fn vec(x: &CMatrix) -> DVector<C64> {
    DVector::from_column_slice(x.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec(v: &DVector<C64>, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "cannot reshape a length-{} vector into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(rows, cols, v.as_slice()))
}

/// Matrix of `ρ ↦ left · ρ · right` acting on [`vec`]-ed operators:
/// `rightᵀ ⊗ left`.
pub fn superop_matrix(left: &CMatrix, right: &CMatrix) -> Result<CMatrix> {
    kron(&right.transpose(), left)
}

/// Orthonormal (Frobenius) basis of the real space of `n×n` Hermitian
/// matrices: `I/√n` followed by the generalized Gell-Mann matrices
/// (symmetric, antisymmetric, then diagonal).
pub fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(n * n);
    basis.push(identity(n) * r(1.0 / (n as f64).sqrt()));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..n {
        for l in (k + 1)..n {
            let mut sym = zeros(n, n);
            sym[(k, l)] = r(s);
            sym[(l, k)] = r(s);
            basis.push(sym);
            let mut anti = zeros(n, n);
            anti[(k, l)] = c(0.0, -s);
            anti[(l, k)] = c(0.0, s);
            basis.push(anti);
        }
    }
    for l in 1..n {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut d = zeros(n, n);
        for j in 0..l {
            d[(j, j)] = r(norm);
        }
        d[(l, l)] = r(-(l as f64) * norm);
        basis.push(d);
    }
    basis
}

/// Real-valued view `[re…, im…]` of a complex matrix in column-major order.
pub fn realify(x: &CMatrix) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(2 * n, |i, _| {
        if i < n {
            x.as_slice()[i].re
        } else {
            x.as_slice()[i - n].im
        }
    })
}

/// Minimum-norm least-squares solution of `a x ≈ b` through the SVD
/// pseudo-inverse; singular values below `rcond · σ_max` are dropped.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = rcond * smax.max(f64::MIN_POSITIVE);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut coeffs = u.transpose() * b;
    for (i, s) in svd.singular_values.iter().enumerate() {
        coeffs[i] = if *s > cutoff { coeffs[i] / s } else { 0.0 };
    }
    v_t.transpose() * coeffs
}

/// Horizontal concatenation of equally tall matrices.
pub fn hstack(parts: &[CMatrix]) -> CMatrix {
    let rows = parts.first().map_or(0, |m| m.nrows());
    let cols: usize = parts.iter().map(|m| m.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut offset = 0;
    for p in parts {
        out.view_mut((0, offset), (rows, p.ncols())).copy_from(p);
        offset += p.ncols();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::harness::random::{random_isometry, random_matrix, random_unitary};

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        a.shape() == b.shape() && frobenius(&(a - b)) <= tol
    }

    #[test]
    fn kron_examples() {
        assert!(close(
            &kron(&identity(2), &identity(2)).unwrap(),
            &identity(4),
            0.0
        ));
        let d = diag_real(&[1.0, 2.0]);
        assert!(close(
            &kron(&d, &identity(2)).unwrap(),
            &diag_real(&[1.0, 1.0, 2.0, 2.0]),
            0.0
        ));
        let k = kron(&pauli::x(), &ket_bra(2, 0, 0)).unwrap();
        let mut expected = zeros(4, 4);
        expected[(0, 2)] = r(1.0);
        expected[(2, 0)] = r(1.0);
        assert!(close(&k, &expected, 0.0));
    }

    #[test]
    fn kron_overflow() {
        let big = identity(65);
        assert!(matches!(
            kron(&big, &big),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let dims = FactorDims::new(vec![2, 2]).unwrap();
        let mixed = identity(4) * r(0.25);
        assert!(close(
            &partial_trace(&mixed, &dims, &[0]).unwrap(),
            &(identity(2) * r(0.5)),
            1e-15
        ));

        // |Φ+⟩⟨Φ+| reduces to I/2
        let mut phi = zeros(4, 1);
        phi[(0, 0)] = r(std::f64::consts::FRAC_1_SQRT_2);
        phi[(3, 0)] = r(std::f64::consts::FRAC_1_SQRT_2);
        let bell = &phi * phi.adjoint();
        assert!(close(
            &partial_trace(&bell, &dims, &[0]).unwrap(),
            &(identity(2) * r(0.5)),
            1e-15
        ));
    }

    #[test]
    fn partial_trace_of_product_matches_block_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_matrix(3, 3, &mut rng);
        let tau = random_matrix(2, 2, &mut rng);
        let x = kron(&rho, &tau).unwrap();
        // Oracle: sum the diagonal entries of each 2x2 block by hand.
        let mut oracle = zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                oracle[(i, j)] = x[(2 * i, 2 * j)] + x[(2 * i + 1, 2 * j + 1)];
            }
        }
        let dims = FactorDims::new(vec![3, 2]).unwrap();
        let reduced = partial_trace(&x, &dims, &[0]).unwrap();
        assert!(close(&reduced, &oracle, 1e-13));
        assert!(close(&reduced, &(&rho * trace(&tau)), 1e-12));
        // Tracing over every factor gives the scalar trace.
        let all = partial_trace(&x, &dims, &[]).unwrap();
        assert_abs_diff_eq!(all[(0, 0)].re, trace(&x).re, epsilon = 1e-12);
        // Keeping the second factor.
        let b = partial_trace(&x, &dims, &[1]).unwrap();
        assert!(close(&b, &(tau * trace(&rho)), 1e-12));
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let dims = FactorDims::new(vec![2, 3]).unwrap();
        assert!(matches!(
            partial_trace(&identity(4), &dims, &[0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(FactorDims::new(vec![2, 0]).is_err());
    }

    #[test]
    fn matrix_exp_examples() {
        assert!(close(
            &matrix_exp(&zeros(3, 3), 1e-12).unwrap(),
            &identity(3),
            0.0
        ));
        let a = pauli::x() * c(0.0, std::f64::consts::FRAC_PI_2);
        let expected = pauli::x() * c(0.0, 1.0);
        assert!(close(&matrix_exp(&a, 1e-12).unwrap(), &expected, 1e-13));
        let d = matrix_exp(&diag_real(&[1.0, 2.0]), 1e-12).unwrap();
        assert!(close(&d, &diag_real(&[1f64.exp(), 2f64.exp()]), 1e-12));
        assert!(matrix_exp(&zeros(2, 3), 1e-12).is_err());
    }

    #[test]
    fn matrix_exp_matches_independent_pade() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_matrix(5, 5, &mut rng) * r(2.0);
            let ours = matrix_exp(&a, 1e-14).unwrap();
            let reference = a.exp();
            assert!(frobenius(&(&ours - &reference)) <= 1e-9 * frobenius(&reference));
        }
    }

    #[test]
    fn time_ordered_examples() {
        let h = pauli::z();
        let single = time_ordered_unitary(&[(h.clone(), 0.7)], 1).unwrap();
        assert!(close(
            &single,
            &matrix_exp(&(&h * c(0.0, -0.7)), 1e-14).unwrap(),
            1e-13
        ));
        let twice = time_ordered_unitary(&[(h.clone(), 1.0), (h.clone(), 1.0)], 3).unwrap();
        assert!(close(
            &twice,
            &matrix_exp(&(&h * c(0.0, -2.0)), 1e-14).unwrap(),
            1e-12
        ));
        let half_pi = std::f64::consts::FRAC_PI_2;
        let ordered =
            time_ordered_unitary(&[(pauli::x(), half_pi), (pauli::z(), half_pi)], 1).unwrap();
        // exp(−iπZ/2)·exp(−iπX/2) = (−iZ)(−iX) = −ZX
        let expected = -(pauli::z() * pauli::x());
        assert!(close(&ordered, &expected, 1e-12));
        let reversed = -(pauli::x() * pauli::z());
        assert!(!close(&ordered, &reversed, 1e-3));
        assert!(matches!(
            time_ordered_exp(&[], 1),
            Err(Error::EmptySchedule)
        ));
        assert!(time_ordered_unitary(&[(pauli::lower(), 1.0)], 1).is_err());
    }

    #[test]
    fn procrustes_examples() {
        let (u, res) = procrustes_unitary(&identity(3), &identity(3)).unwrap();
        assert!(close(&u, &identity(3), 1e-14) && res < 1e-14);
        let (u, res) = procrustes_unitary(&identity(2), &pauli::x()).unwrap();
        assert!(close(&u, &pauli::x(), 1e-14) && res < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_isometry(4, 2, &mut rng);
        let v = random_unitary(4, &mut rng);
        let (u, res) = procrustes_unitary(&a, &(&v * &a)).unwrap();
        assert!(res <= 1e-10);
        assert!(unitarity_defect(&u) <= 1e-12);
    }

    #[test]
    fn procrustes_rank_deficient_is_deterministic() {
        let a = ket(3, 0);
        let b = ket(3, 2);
        let (u1, res) = procrustes_unitary(&a, &b).unwrap();
        let (u2, _) = procrustes_unitary(&a, &b).unwrap();
        assert!(res < 1e-14);
        assert_eq!(u1, u2);
        assert!(unitarity_defect(&u1) <= 1e-12);
        let (u0, _) = procrustes_unitary(&zeros(3, 2), &zeros(3, 2)).unwrap();
        assert!(close(&u0, &identity(3), 1e-14));
    }

    #[test]
    fn vec_and_superop() {
        assert!(close(
            &superop_matrix(&identity(2), &identity(2)).unwrap(),
            &identity(4),
            0.0
        ));
        let x = pauli::x();
        let s = superop_matrix(&x, &x).unwrap();
        let v0 = vec(&ket_bra(2, 0, 0));
        let v1 = vec(&ket_bra(2, 1, 1));
        assert!((s * v0 - v1).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_matrix(3, 3, &mut rng);
        assert_eq!(unvec(&vec(&m), 3, 3).unwrap(), m);
        // column stacking
        assert_eq!(vec(&m)[1], m[(1, 0)]);
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let basis = hermitian_basis(3);
        assert_eq!(basis.len(), 9);
        for (i, a) in basis.iter().enumerate() {
            assert!(hermiticity_defect(a) < 1e-15);
            for (j, b) in basis.iter().enumerate() {
                let ip = trace(&(a.adjoint() * b));
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip.re - expected).abs() < 1e-14 && ip.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lstsq_recovers_exact_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let x = DVector::from_vec(vec![0.5, -2.0]);
        let b = &a * &x;
        let sol = lstsq_min_norm(&a, &b, 1e-12);
        assert!((sol - x).norm() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn mixed_product_property(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_matrix(2, 3, &mut rng);
                let b = random_matrix(3, 2, &mut rng);
                let cm = random_matrix(3, 2, &mut rng);
                let d = random_matrix(2, 2, &mut rng);
                let lhs = kron(&a, &b).unwrap() * kron(&cm, &d).unwrap();
                let rhs = kron(&(&a * &cm), &(&b * &d)).unwrap();
                prop_assert!(frobenius(&(lhs - rhs)) <= 1e-12);
            }

            #[test]
            fn exp_inverse(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut a = random_matrix(4, 4, &mut rng);
                let n = frobenius(&a);
                a *= r(5.0 * ((seed % 100) as f64 / 100.0) / n);
                let prod = matrix_exp(&a, 1e-14).unwrap() * matrix_exp(&(-&a), 1e-14).unwrap();
                prop_assert!(frobenius(&(prod - identity(4))) <= 1e-10);
            }

            #[test]
            fn procrustes_always_unitary(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_matrix(4, 3, &mut rng);
                let mut b = random_matrix(4, 3, &mut rng);
                if seed % 3 == 0 {
                    b.column_mut(1).fill(r(0.0));
                    b.column_mut(2).fill(r(0.0));
                }
                let (u, _) = procrustes_unitary(&a, &b).unwrap();
                prop_assert!(unitarity_defect(&u) <= 1e-12);
            }

            #[test]
            fn superop_composition(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let l1 = random_matrix(3, 3, &mut rng);
                let r1 = random_matrix(3, 3, &mut rng);
                let l2 = random_matrix(3, 3, &mut rng);
                let r2 = random_matrix(3, 3, &mut rng);
                let lhs = superop_matrix(&l1, &r1).unwrap() * superop_matrix(&l2, &r2).unwrap();
                let rhs = superop_matrix(&(&l1 * &l2), &(&r2 * &r1)).unwrap();
                prop_assert!(frobenius(&(lhs - rhs)) <= 1e-11);
                let rho = random_matrix(3, 3, &mut rng);
                let lhs = superop_matrix(&l1, &r1).unwrap() * vec(&rho);
                prop_assert!((lhs - vec(&(&l1 * &rho * &r1))).norm() <= 1e-12);
            }

            #[test]
            fn partial_trace_linear_and_trace_preserving(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let dims = FactorDims::new(vec![2, 3, 2]).unwrap();
                let x = random_matrix(12, 12, &mut rng);
                let y = random_matrix(12, 12, &mut rng);
                for keep in [&[0usize][..], &[1], &[0, 2], &[1, 2]] {
                    let px = partial_trace(&x, &dims, keep).unwrap();
                    prop_assert!((trace(&px) - trace(&x)).norm() <= 1e-12);
                    let lin = partial_trace(&(&x + &y * r(2.0)), &dims, keep).unwrap();
                    let sum = px + partial_trace(&y, &dims, keep).unwrap() * r(2.0);
                    prop_assert!(frobenius(&(lin - sum)) <= 1e-12);
                }
            }
        }
    }
}
