// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Noise maps in Kraus form and the unitary-recovery certificate.
//!
//! A channel `{M_α}` is correctable on `H^A` when there is a unitary `U` and
//! operators `C_α : H^B → H^{B′}` with `U M_α J = J′ (I^A ⊗ C_α)`, where `J′`
//! embeds `H^A ⊗ H^{B′}` and extends `J`. [`build_recovery`] decides this from
//! the Gram blocks of the channel and, when it holds, constructs `U` and the
//! `C_α` explicitly.

use rayon::prelude::*;
use serde::Serialize;

use crate::code_space::{fit_a_trivial, DensityMatrix, SubsystemDecomposition};
use crate::linalg::{
    frobenius, hermitian_eigen, hstack, identity, kron, procrustes_unitary, r, svd_sorted, zeros,
    CMatrix,
};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    /// Builds a channel and checks `Σ M_α† M_α = I` to `tol`.
    pub fn new(ops: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let ch = Self::unchecked(ops)?;
        let defect = ch.completeness_defect();
        if defect > tol {
            return Err(Error::InvalidInput(format!(
                "Kraus operators are not trace preserving (defect {defect:.3e})"
            )));
        }
        Ok(ch)
    }

    /// Shape checks only. Used for partial Kraus sets such as those induced by
    /// an environment subspace.
    pub fn unchecked(ops: Vec<CMatrix>) -> Result<Self> {
        let n = ops.first().map(|m| m.nrows()).ok_or_else(|| {
            Error::InvalidInput("a channel needs at least one Kraus operator".into())
        })?;
        if let Some(bad) = ops.iter().position(|m| m.shape() != (n, n)) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator {bad} is {:?}, expected {n}x{n}",
                ops[bad].shape()
            )));
        }
        Ok(KrausChannel { ops })
    }

    pub fn identity(n: usize) -> Self {
        KrausChannel {
            ops: vec![identity(n)],
        }
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn completeness_defect(&self) -> f64 {
        let n = self.dim();
        let sum = self
            .ops
            .iter()
            .fold(zeros(n, n), |acc, m| acc + m.adjoint() * m);
        frobenius(&(sum - identity(n)))
    }

    /// `σ ↦ Σ M_α σ M_α†` on an arbitrary operator.
    pub fn apply(&self, sigma: &CMatrix) -> CMatrix {
        let n = self.dim();
        self.ops
            .iter()
            .fold(zeros(n, n), |acc, m| acc + m * sigma * m.adjoint())
    }

    /// The channel followed by conjugation with `v`.
    pub fn then_unitary(&self, v: &CMatrix) -> Self {
        KrausChannel {
            ops: self.ops.iter().map(|m| v * m).collect(),
        }
    }
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel acts on dimension {}, state has {}",
            ch.dim(),
            rho.dim()
        )));
    }
    DensityMatrix::new(ch.apply(rho.matrix()))
}

/// Initial state of an environment, or only the subspace it starts in.
#[derive(Debug, Clone)]
pub enum EnvironmentState {
    /// `Σ λ_μ |μ⟩⟨μ|`; column `μ` of `vectors` is `|μ⟩`.
    Mixed { weights: Vec<f64>, vectors: CMatrix },
    /// Any state supported on the span of the (orthonormal) columns.
    Subspace { basis: CMatrix },
}

impl EnvironmentState {
    pub fn mixed(weights: Vec<f64>, vectors: CMatrix) -> Result<Self> {
        if weights.len() != vectors.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} vectors",
                weights.len(),
                vectors.ncols()
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidInput(
                "environment weights must be non-negative and sum to 1".into(),
            ));
        }
        check_orthonormal(&vectors)?;
        Ok(EnvironmentState::Mixed { weights, vectors })
    }

    pub fn pure(ket: &CMatrix) -> Result<Self> {
        Self::mixed(vec![1.0], ket / r(ket.norm()))
    }

    pub fn maximally_mixed(d_e: usize) -> Self {
        EnvironmentState::Mixed {
            weights: vec![1.0 / d_e as f64; d_e],
            vectors: identity(d_e),
        }
    }

    pub fn subspace(basis: CMatrix) -> Result<Self> {
        check_orthonormal(&basis)?;
        Ok(EnvironmentState::Subspace { basis })
    }

    pub fn dim(&self) -> usize {
        match self {
            EnvironmentState::Mixed { vectors, .. } => vectors.nrows(),
            EnvironmentState::Subspace { basis } => basis.nrows(),
        }
    }

    /// Weighted vectors `(λ_ν, |ν⟩)` with zero weights dropped. A subspace is
    /// represented by the uniform mixture over its basis, which has the same
    /// support.
    pub fn components(&self) -> Vec<(f64, CMatrix)> {
        match self {
            EnvironmentState::Mixed { weights, vectors } => weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(i, &w)| (w, vectors.columns(i, 1).into_owned()))
                .collect(),
            EnvironmentState::Subspace { basis } => {
                let w = 1.0 / basis.ncols() as f64;
                (0..basis.ncols())
                    .map(|i| (w, basis.columns(i, 1).into_owned()))
                    .collect()
            }
        }
    }

    /// Density operator of the state (the uniform mixture for a subspace).
    pub fn density(&self) -> CMatrix {
        let d = self.dim();
        self.components()
            .into_iter()
            .fold(zeros(d, d), |acc, (w, v)| acc + &v * v.adjoint() * r(w))
    }

    /// Isometry onto the support.
    pub fn support(&self) -> CMatrix {
        match self {
            EnvironmentState::Subspace { basis } => basis.clone(),
            EnvironmentState::Mixed { .. } => hstack(
                &self
                    .components()
                    .into_iter()
                    .map(|(_, v)| v)
                    .collect::<Vec<_>>(),
            ),
        }
    }
}

fn check_orthonormal(vectors: &CMatrix) -> Result<()> {
    let defect = frobenius(&(vectors.adjoint() * vectors - identity(vectors.ncols())));
    if defect > 1e-9 {
        return Err(Error::NonOrthogonal { defect });
    }
    Ok(())
}

/// `M_{(μ,ν)} = √λ_ν ⟨μ| v |ν⟩` for a joint unitary on `H^S ⊗ H^E`
/// (system index major). `μ` runs over the canonical environment basis;
/// the order is lexicographic in `(μ, ν)`.
pub fn kraus_from_unitary(v: &CMatrix, d_s: usize, env: &EnvironmentState) -> Result<KrausChannel> {
    let d_e = env.dim();
    if v.shape() != (d_s * d_e, d_s * d_e) {
        return Err(Error::DimensionMismatch(format!(
            "joint unitary is {:?}, expected {1}x{1}",
            v.shape(),
            d_s * d_e
        )));
    }
    crate::linalg::ensure_unitary(v, "joint propagator", 1e-9)?;
    let comps = env.components();
    let eye = identity(d_s);
    let mut ops = Vec::with_capacity(d_e * comps.len());
    for mu in 0..d_e {
        let bra = kron(&eye, &crate::linalg::ket(d_e, mu).adjoint())?;
        let left = bra * v;
        for (w, nu) in &comps {
            let right = kron(&eye, nu)?;
            ops.push(&left * right * r(w.sqrt()));
        }
    }
    KrausChannel::unchecked(ops)
}

/// Compressed products `J† M_α† M_β J`, averaged over `A`.
#[derive(Debug, Clone)]
pub struct GramBlocks {
    n: usize,
    d_b: usize,
    blocks: Vec<CMatrix>,
    pub triviality_residual: f64,
}

impl GramBlocks {
    pub fn get(&self, alpha: usize, beta: usize) -> &CMatrix {
        &self.blocks[alpha * self.n + beta]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// The `n·d_B` square block matrix `G = [g_{αβ}]`.
    pub fn big_matrix(&self) -> CMatrix {
        let d = self.d_b;
        let mut g = zeros(self.n * d, self.n * d);
        for a in 0..self.n {
            for b in 0..self.n {
                g.view_mut((a * d, b * d), (d, d)).copy_from(self.get(a, b));
            }
        }
        g
    }
}

pub fn gram_blocks(ch: &KrausChannel, dec: &SubsystemDecomposition) -> Result<GramBlocks> {
    check_dims(ch, dec)?;
    let j = dec.isometry();
    let images: Vec<CMatrix> = ch.ops().iter().map(|m| m * j).collect();
    let n = ch.len();
    let fits: Vec<(CMatrix, f64)> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / n, idx % n);
            let x = images[a].adjoint() * &images[b];
            // x already lives on the code, so compare against the identity frame
            let fit = fit_a_trivial(&x, &identity(x.nrows()), dec.d_a());
            (fit.c, fit.inside)
        })
        .collect();
    let triviality_residual = fits.iter().map(|f| f.1).fold(0.0, f64::max);
    Ok(GramBlocks {
        n,
        d_b: dec.d_b(),
        blocks: fits.into_iter().map(|f| f.0).collect(),
        triviality_residual,
    })
}

fn check_dims(ch: &KrausChannel, dec: &SubsystemDecomposition) -> Result<()> {
    if ch.dim() != dec.d_s() {
        return Err(Error::DimensionMismatch(format!(
            "channel acts on dimension {}, decomposition has d_S = {}",
            ch.dim(),
            dec.d_s()
        )));
    }
    Ok(())
}

/// `U`, `{C_α}` and the output decomposition `J′` with
/// `U M_α J = J′ (I^A ⊗ C_α)`.
#[derive(Debug, Clone)]
pub struct RecoveryCertificate {
    pub u: CMatrix,
    pub c_ops: Vec<CMatrix>,
    pub output: SubsystemDecomposition,
    /// `max_α ‖M_α J − U† J′ (I^A ⊗ C_α)‖_F`.
    pub residual: f64,
    pub gram_residual: f64,
    /// Eigenvalue threshold used for the rank of `G`.
    pub rank_threshold: f64,
}

impl RecoveryCertificate {
    pub fn d_b_prime(&self) -> usize {
        self.output.d_b()
    }

    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary {
            d_b_prime: self.d_b_prime(),
            residual: self.residual,
            gram_residual: self.gram_residual,
            kraus_count: self.c_ops.len(),
            recovery: crate::harness::scenario::MatrixJson::from(&self.u),
        }
    }
}

/// Report-friendly view of a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateSummary {
    pub d_b_prime: usize,
    pub residual: f64,
    pub gram_residual: f64,
    pub kraus_count: usize,
    pub recovery: crate::harness::scenario::MatrixJson,
}

#[derive(Debug, Clone)]
pub enum RecoveryOutcome {
    Certified(RecoveryCertificate),
    NotCorrectable { residual: f64 },
}

impl RecoveryOutcome {
    pub fn certificate(&self) -> Option<&RecoveryCertificate> {
        match self {
            RecoveryOutcome::Certified(c) => Some(c),
            RecoveryOutcome::NotCorrectable { .. } => None,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.certificate().is_some()
    }

    /// Certificate residual, or the failing residual.
    pub fn residual(&self) -> f64 {
        match self {
            RecoveryOutcome::Certified(c) => c.residual,
            RecoveryOutcome::NotCorrectable { residual } => *residual,
        }
    }
}

/// Decides correctability of `H^A` and builds the recovery when it holds.
///
/// The Gram blocks must be `A`-trivial to `tol`. `G = C†C` is then factored
/// with eigenvalues above `tol` kept, `J` is extended to `J′` and `U` is the
/// Procrustes fit. A certificate whose residual exceeds `√tol` is rejected.
pub fn build_recovery(
    ch: &KrausChannel,
    dec: &SubsystemDecomposition,
    tol: f64,
) -> Result<RecoveryOutcome> {
    let gram = gram_blocks(ch, dec)?;
    if gram.triviality_residual > tol {
        return Ok(RecoveryOutcome::NotCorrectable {
            residual: gram.triviality_residual,
        });
    }
    let rank = factor_rank(&gram, tol);
    if dec.d_a() * rank > dec.d_s() {
        // more gauge levels needed than fit beside H^A
        return Ok(RecoveryOutcome::NotCorrectable {
            residual: gram.triviality_residual.max(tol),
        });
    }
    let cert = certify(ch, dec, &gram, tol, usize::MAX)?;
    if cert.residual > tol.sqrt() {
        return Ok(RecoveryOutcome::NotCorrectable {
            residual: cert.residual,
        });
    }
    Ok(RecoveryOutcome::Certified(cert))
}

/// Best-effort recovery for any channel: the `A`-averaged Gram blocks are
/// factored regardless of their residual, the gauge factor is truncated to
/// what fits, and `U` is the Procrustes fit. Agrees with [`build_recovery`]
/// on correctable channels.
pub fn fit_recovery(
    ch: &KrausChannel,
    dec: &SubsystemDecomposition,
    tol: f64,
) -> Result<RecoveryCertificate> {
    let gram = gram_blocks(ch, dec)?;
    certify(ch, dec, &gram, tol, dec.max_gauge_dim())
}

fn factor_rank(gram: &GramBlocks, tol: f64) -> usize {
    let (values, _) = hermitian_eigen(&gram.big_matrix());
    values.iter().filter(|&&v| v > tol).count()
}

fn certify(
    ch: &KrausChannel,
    dec: &SubsystemDecomposition,
    gram: &GramBlocks,
    tol: f64,
    max_rank: usize,
) -> Result<RecoveryCertificate> {
    let (d_a, d_b) = (dec.d_a(), dec.d_b());
    let n = ch.len();
    let (values, vectors) = hermitian_eigen(&gram.big_matrix());
    let rank = values
        .iter()
        .filter(|&&v| v > tol)
        .count()
        .min(max_rank)
        .min(dec.max_gauge_dim());
    let d_b_prime = rank.max(d_b);
    // rows of C are √λ_k v_k†, padded with zero rows up to d_B′
    let mut big_c = zeros(d_b_prime, n * d_b);
    for (k, value) in values.iter().enumerate().take(rank) {
        let row = vectors.column(k).adjoint() * r(value.sqrt());
        big_c.row_mut(k).copy_from(&row);
    }
    let c_ops: Vec<CMatrix> = (0..n)
        .map(|a| big_c.columns(a * d_b, d_b).into_owned())
        .collect();
    let output = dec.extend_to(d_b_prime)?;
    let jp = output.isometry();
    let eye_a = identity(d_a);
    let targets: Vec<CMatrix> = c_ops
        .iter()
        .map(|cop| Ok(jp * kron(&eye_a, cop)?))
        .collect::<Result<_>>()?;
    let sources: Vec<CMatrix> = ch.ops().iter().map(|m| m * dec.isometry()).collect();
    let (u, _) = procrustes_unitary(&hstack(&sources), &hstack(&targets))?;
    let residual = sources
        .iter()
        .zip(&targets)
        .map(|(s, t)| frobenius(&(&u * s - t)))
        .fold(0.0, f64::max);
    Ok(RecoveryCertificate {
        u,
        c_ops,
        output,
        residual,
        gram_residual: gram.triviality_residual,
        rank_threshold: tol,
    })
}

/// How far a given recovery `U` is from satisfying `U M_α J = J′ (I^A ⊗ C_α)`
/// for some output decomposition `J′`, together with the best such `J′`.
#[derive(Debug, Clone)]
pub struct Admissibility {
    pub residual: f64,
    pub output: Option<SubsystemDecomposition>,
    pub c_ops: Vec<CMatrix>,
}

pub fn admissibility_residual(
    ch: &KrausChannel,
    dec: &SubsystemDecomposition,
    u: &CMatrix,
    tol: f64,
) -> Result<Admissibility> {
    check_dims(ch, dec)?;
    if u.shape() != (dec.d_s(), dec.d_s()) {
        return Err(Error::DimensionMismatch(format!(
            "recovery is {:?}, expected {1}x{1}",
            u.shape(),
            dec.d_s()
        )));
    }
    let (d_a, d_b, n) = (dec.d_a(), dec.d_b(), ch.len());
    let images: Vec<CMatrix> = ch.ops().iter().map(|m| u * m * dec.isometry()).collect();
    // Z_a = [U M_α J(|a⟩ ⊗ ·)]_α
    let z: Vec<CMatrix> = (0..d_a)
        .map(|a| {
            hstack(
                &images
                    .iter()
                    .map(|y| y.columns(a * d_b, d_b).into_owned())
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let (w, s, _) = svd_sorted(&z[0]);
    let k = s.iter().filter(|&&x| x > tol.sqrt()).count();
    if k == 0 || d_a * k.max(d_b) > dec.d_s() {
        let residual = z.iter().map(frobenius).fold(0.0, f64::max);
        return Ok(Admissibility {
            residual: residual.max(tol * 10.0),
            output: None,
            c_ops: Vec::new(),
        });
    }
    let v0 = w.columns(0, k).into_owned();
    let big_c = v0.adjoint() * &z[0];
    let c_pinv = pseudo_inverse(&big_c, tol.sqrt());
    let parts: Vec<CMatrix> = z.iter().map(|za| za * &c_pinv).collect();
    let fit = z
        .iter()
        .zip(&parts)
        .map(|(za, ja)| frobenius(&(za - ja * &big_c)))
        .fold(0.0, f64::max);
    let mut iso = zeros(dec.d_s(), d_a * k);
    for (a, part) in parts.iter().enumerate() {
        iso.columns_mut(a * k, k).copy_from(part);
    }
    let ortho = frobenius(&(iso.adjoint() * &iso - identity(d_a * k)));
    let residual = fit.max(ortho);
    let output = SubsystemDecomposition::new(d_a, k, iso).ok();
    let c_ops = (0..n)
        .map(|a| big_c.columns(a * d_b, d_b).into_owned())
        .collect();
    Ok(Admissibility {
        residual,
        output,
        c_ops,
    })
}

fn pseudo_inverse(m: &CMatrix, cutoff: f64) -> CMatrix {
    let (w, s, v) = svd_sorted(m);
    let mut out = zeros(m.ncols(), m.nrows());
    for (i, &sv) in s.iter().enumerate() {
        if sv > cutoff {
            out += v.column(i) * w.column(i).adjoint() * r(1.0 / sv);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::instances::{correctable_channel, generic_channel};
    use crate::harness::random::{random_density, random_unitary};
    use crate::linalg::{ket, ket_bra, pauli};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_qubit_dec() -> SubsystemDecomposition {
        SubsystemDecomposition::canonical(2, 2, 4).unwrap()
    }

    #[test]
    fn kraus_from_decoupled_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let us = random_unitary(2, &mut rng);
        let v = kron(&us, &identity(2)).unwrap();
        let env = EnvironmentState::pure(&ket(2, 0)).unwrap();
        let ch = kraus_from_unitary(&v, 2, &env).unwrap();
        assert_eq!(ch.len(), 2);
        assert!(frobenius(&(&ch.ops()[0] - &us)) < 1e-12);
        assert!(frobenius(&ch.ops()[1]) < 1e-12);
    }

    #[test]
    fn kraus_from_controlled_flip() {
        let v = kron(&identity(2), &ket_bra(2, 0, 0)).unwrap()
            + kron(&pauli::x(), &ket_bra(2, 1, 1)).unwrap();
        let ch = kraus_from_unitary(&v, 2, &EnvironmentState::maximally_mixed(2)).unwrap();
        // (μ,ν) = (0,0), (0,1), (1,0), (1,1)
        let h = r(0.5f64.sqrt());
        assert!(frobenius(&(&ch.ops()[0] - identity(2) * h)) < 1e-12);
        assert!(frobenius(&ch.ops()[1]) < 1e-12);
        assert!(frobenius(&ch.ops()[2]) < 1e-12);
        assert!(frobenius(&(&ch.ops()[3] - pauli::x() * h)) < 1e-12);
        assert!(ch.completeness_defect() < 1e-12);
    }

    #[test]
    fn kraus_rejects_non_unitary() {
        let env = EnvironmentState::maximally_mixed(2);
        assert!(kraus_from_unitary(&(identity(4) * r(2.0)), 2, &env).is_err());
    }

    #[test]
    fn gram_examples() {
        let dec = two_qubit_dec();
        let g = gram_blocks(&KrausChannel::identity(4), &dec).unwrap();
        assert!(g.triviality_residual < 1e-15);
        assert!(frobenius(&(g.get(0, 0) - identity(2))) < 1e-15);

        let ops = vec![
            identity(4) * r(0.75f64.sqrt()),
            kron(&identity(2), &pauli::x()).unwrap() * r(0.5),
        ];
        let ch = KrausChannel::new(ops, 1e-12).unwrap();
        let g = gram_blocks(&ch, &dec).unwrap();
        assert!(g.triviality_residual < 1e-12);
        assert!(frobenius(&(g.get(0, 1) - pauli::x() * r(0.1875f64.sqrt()))) < 1e-12);
        assert!(frobenius(&(g.get(1, 0) - g.get(0, 1).adjoint())) < 1e-15);

        let ops = vec![
            identity(4) * r(0.75f64.sqrt()),
            kron(&pauli::x(), &identity(2)).unwrap() * r(0.5),
        ];
        let g = gram_blocks(&KrausChannel::new(ops, 1e-12).unwrap(), &dec).unwrap();
        assert!(g.triviality_residual > 0.4);
    }

    #[test]
    fn identity_channel_certificate() {
        let dec = two_qubit_dec();
        let out = build_recovery(&KrausChannel::identity(4), &dec, 1e-9).unwrap();
        let cert = out.certificate().unwrap();
        assert_eq!(cert.d_b_prime(), 2);
        assert!(cert.residual < 1e-10);
        assert!(frobenius(&(&cert.u - identity(4))) < 1e-10);
    }

    #[test]
    fn flip_on_gauge_needs_larger_gauge() {
        // qubits (1, 2); A = qubit 1, B = span{|0⟩} of qubit 2
        let dec = SubsystemDecomposition::tensor_factor(2, 1, 4).unwrap();
        let h = r(0.5f64.sqrt());
        let ops = vec![
            identity(4) * h,
            kron(&identity(2), &pauli::x()).unwrap() * h,
        ];
        let ch = KrausChannel::new(ops, 1e-12).unwrap();
        let cert = build_recovery(&ch, &dec, 1e-9).unwrap();
        let cert = cert.certificate().expect("correctable");
        assert_eq!(cert.d_b_prime(), 2);
        assert!(cert.residual < 1e-10);
        // U = I is admissible as well
        let adm = admissibility_residual(&ch, &dec, &identity(4), 1e-9).unwrap();
        assert!(adm.residual < 1e-10);
        assert_eq!(adm.output.unwrap().d_b(), 2);
        // Σ C_α† C_α = I_B
        let sum = cert
            .c_ops
            .iter()
            .fold(zeros(1, 1), |acc, c| acc + c.adjoint() * c);
        assert!(frobenius(&(sum - identity(1))) < 1e-12);
    }

    #[test]
    fn depolarizing_on_a_is_not_correctable() {
        let dec = SubsystemDecomposition::canonical(2, 1, 2).unwrap();
        let ops = vec![
            identity(2) * r(0.5),
            pauli::x() * r(0.5),
            pauli::y() * r(0.5),
            pauli::z() * r(0.5),
        ];
        let ch = KrausChannel::new(ops, 1e-12).unwrap();
        match build_recovery(&ch, &dec, 1e-9).unwrap() {
            RecoveryOutcome::NotCorrectable { residual } => assert!(residual > 0.1),
            RecoveryOutcome::Certified(_) => panic!("depolarizing noise certified"),
        }
    }

    #[test]
    fn apply_examples() {
        let h = r(0.5f64.sqrt());
        let ch = KrausChannel::new(vec![identity(2) * h, pauli::x() * h], 1e-12).unwrap();
        let rho = DensityMatrix::new(ket_bra(2, 0, 0)).unwrap();
        let out = apply_channel(&ch, &rho).unwrap();
        assert!(frobenius(&(out.matrix() - identity(2) * r(0.5))) < 1e-15);
        let same = apply_channel(&KrausChannel::identity(2), &rho).unwrap();
        assert_eq!(same, rho);
    }

    #[test]
    fn certificate_recovers_logical_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let inst = correctable_channel(6, 2, 1, 3, &mut rng).unwrap();
            let cert = build_recovery(&inst.channel, &inst.dec, 1e-9).unwrap();
            let cert = cert
                .certificate()
                .expect("constructed channel is correctable");
            let rho = random_density(2, &mut rng);
            let tau = random_density(1, &mut rng);
            let sigma = inst.dec.encode(&rho, &tau).unwrap();
            let out = &cert.u * inst.channel.apply(&sigma) * cert.u.adjoint();
            let back = cert.output.reduce_to_a(&out).unwrap();
            assert!(frobenius(&(back - rho)) < 1e-8);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn gram_zero_iff_certified(seed in any::<u64>(), d_a in 2usize..4, n in 1usize..5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let d_s = if d_a == 2 { 6 } else { 7 };
                let inst = correctable_channel(d_s, d_a, 1, n, &mut rng).unwrap();
                let g = gram_blocks(&inst.channel, &inst.dec).unwrap();
                prop_assert!(g.triviality_residual <= 1e-9);
                let out = build_recovery(&inst.channel, &inst.dec, 1e-9).unwrap();
                prop_assert!(out.is_certified());
                prop_assert!(out.residual() <= 1e-8);
            }

            #[test]
            fn generic_channels_fail(seed in any::<u64>(), n in 2usize..5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let inst = generic_channel(4, 2, 1, n, &mut rng).unwrap();
                let out = build_recovery(&inst.channel, &inst.dec, 1e-9).unwrap();
                prop_assert!(!out.is_certified());
                prop_assert!(out.residual() > 1e-3);
            }

            #[test]
            fn unitary_post_composition(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let inst = correctable_channel(6, 2, 1, 2, &mut rng).unwrap();
                let v = random_unitary(6, &mut rng);
                let base = build_recovery(&inst.channel, &inst.dec, 1e-9).unwrap();
                let moved = build_recovery(&inst.channel.then_unitary(&v), &inst.dec, 1e-9).unwrap();
                let (b, m) = (base.certificate().unwrap(), moved.certificate().unwrap());
                prop_assert_eq!(b.d_b_prime(), m.d_b_prime());
                prop_assert!((b.gram_residual - m.gram_residual).abs() <= 1e-9);
                // U V† is admissible for the moved channel
                let adm = admissibility_residual(&inst.channel.then_unitary(&v), &inst.dec, &(&b.u * v.adjoint()), 1e-9).unwrap();
                prop_assert!(adm.residual <= 1e-8);
            }

            #[test]
            fn kraus_completeness(seed in any::<u64>(), d_e in 1usize..4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let v = random_unitary(2 * d_e, &mut rng);
                let env = EnvironmentState::Mixed { weights: vec![1.0 / d_e as f64; d_e], vectors: random_unitary(d_e, &mut rng) };
                let ch = kraus_from_unitary(&v, 2, &env).unwrap();
                prop_assert!(ch.completeness_defect() <= 1e-10);
            }

            #[test]
            fn channel_preserves_trace(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let inst = generic_channel(4, 2, 1, 3, &mut rng).unwrap();
                let rho = random_density(4, &mut rng);
                let out = inst.channel.apply(&rho);
                prop_assert!((crate::linalg::trace(&out).re - 1.0).abs() <= 1e-12);
            }
        }
    }
}
