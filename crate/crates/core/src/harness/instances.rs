// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Random instances with a known answer.
//!
//! Correctable instances are built from the structure that makes them
//! correctable (an explicit recovery, or generators that are trivial on
//! `H^A` in a known frame), never by running the checks themselves.

use rand::Rng;

use crate::channels::KrausChannel;
use crate::code_space::SubsystemDecomposition;
use crate::hamiltonian::{HamiltonianModel, HamiltonianSegment, InteractionTerm};
use crate::linalg::{c, frobenius, identity, kron, orthonormal_complement, zeros, CMatrix};
use crate::markovian::{LindbladModel, LindbladSegment};
use crate::{Error, Result};

use super::random::{random_hermitian, random_isometry, random_matrix, random_unitary};

/// A channel with a decomposition and, when correctable, one recovery.
#[derive(Debug, Clone)]
pub struct ChannelInstance {
    pub channel: KrausChannel,
    pub dec: SubsystemDecomposition,
    /// Recovery unitary used in the construction; `None` for generic
    /// channels.
    pub recovery: Option<CMatrix>,
    /// Where `recovery` puts the logical state.
    pub output: Option<SubsystemDecomposition>,
}

fn random_decomposition<R: Rng + ?Sized>(
    d_s: usize,
    d_a: usize,
    d_b: usize,
    rng: &mut R,
) -> Result<SubsystemDecomposition> {
    if d_a * d_b > d_s {
        return Err(Error::Capacity {
            requested: d_a * d_b,
            available: d_s,
        });
    }
    SubsystemDecomposition::new(d_a, d_b, random_isometry(d_s, d_a * d_b, rng))
}

fn split_rows(m: &CMatrix, block: usize) -> Vec<CMatrix> {
    (0..m.nrows() / block)
        .map(|k| m.rows(k * block, block).into_owned())
        .collect()
}

/// Random channel with `n` Kraus operators for which `H^A` is correctable.
///
/// A random recovery `U`, output code `J′` with a random gauge dimension and
/// gauge maps `C_α` with `Σ C_α†C_α = I` fix the action on the code,
/// `M_α J = U† J′ (I ⊗ C_α)`; the action on the complement is a random
/// completion to an isometry.
pub fn correctable_channel<R: Rng + ?Sized>(
    d_s: usize,
    d_a: usize,
    d_b: usize,
    n: usize,
    rng: &mut R,
) -> Result<ChannelInstance> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "need at least one Kraus operator".into(),
        ));
    }
    let dec = random_decomposition(d_s, d_a, d_b, rng)?;
    let cap = d_s / d_a;
    let d_bp = rng.random_range(d_b..=cap);
    let output = random_decomposition(d_s, d_a, d_bp, rng)?;
    let gauge_maps = split_rows(&random_isometry(n * d_bp, d_b, rng), d_bp);
    let u = random_unitary(d_s, rng);
    let mut stacked = zeros(n * d_s, d_s);
    let mut on_code = zeros(n * d_s, d_a * d_b);
    for (alpha, ca) in gauge_maps.iter().enumerate() {
        let block = u.adjoint() * output.isometry() * kron(&identity(d_a), ca)?;
        on_code.rows_mut(alpha * d_s, d_s).copy_from(&block);
    }
    let d_k = d_s - d_a * d_b;
    let free = orthonormal_complement(&on_code);
    let on_complement = &free * random_isometry(free.ncols(), d_k, rng);
    let q = orthonormal_complement(dec.isometry());
    stacked += &on_code * dec.isometry().adjoint();
    stacked += on_complement * q.adjoint();
    let channel = KrausChannel::new(split_rows(&stacked, d_s), 1e-9)?;
    Ok(ChannelInstance {
        channel,
        dec,
        recovery: Some(u),
        output: Some(output),
    })
}

/// Haar-like random channel: a random isometry split into `n` blocks.
pub fn generic_channel<R: Rng + ?Sized>(
    d_s: usize,
    d_a: usize,
    d_b: usize,
    n: usize,
    rng: &mut R,
) -> Result<ChannelInstance> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "need at least one Kraus operator".into(),
        ));
    }
    let dec = random_decomposition(d_s, d_a, d_b, rng)?;
    let channel = KrausChannel::new(split_rows(&random_isometry(n * d_s, d_s, rng), d_s), 1e-9)?;
    Ok(ChannelInstance {
        channel,
        dec,
        recovery: None,
        output: None,
    })
}

/// A Lindblad model with a decomposition and the expected verdict.
#[derive(Debug, Clone)]
pub struct LindbladInstance {
    pub model: LindbladModel,
    pub dec: SubsystemDecomposition,
    pub correctable: bool,
}

fn scaled(m: CMatrix, norm: f64) -> CMatrix {
    let f = frobenius(&m);
    if f == 0.0 {
        m
    } else {
        m * c(norm / f, 0.0)
    }
}

/// Noiseless subsystem: `H = I^A ⊗ h`, `L_j = I^A ⊗ l_j` on
/// `H^S = H^A ⊗ H^B`.
pub fn noiseless_subsystem<R: Rng + ?Sized>(
    d_a: usize,
    d_b: usize,
    n_l: usize,
    duration: f64,
    rng: &mut R,
) -> Result<LindbladInstance> {
    let d_s = d_a * d_b;
    let dec = SubsystemDecomposition::canonical(d_a, d_b, d_s)?;
    let h = kron(&identity(d_a), &random_hermitian(d_b, rng))?;
    let l_ops = (0..n_l)
        .map(|_| kron(&identity(d_a), &scaled(random_matrix(d_b, d_b, rng), 0.5)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LindbladInstance {
        model: LindbladModel::constant(h, l_ops, duration)?,
        dec,
        correctable: true,
    })
}

/// Piecewise-constant model correctable by tracking, with `n_seg` segments.
///
/// On the code, `H = J(h_A ⊗ I + I ⊗ h_B)J†` drifts the logical state and
/// `L_j J = J(I ⊗ l_j)`. On the complement the generators are random.
pub fn tracked_drift<R: Rng + ?Sized>(
    d_s: usize,
    d_a: usize,
    d_b: usize,
    n_l: usize,
    n_seg: usize,
    duration: f64,
    rng: &mut R,
) -> Result<LindbladInstance> {
    let dec = random_decomposition(d_s, d_a, d_b, rng)?;
    let j = dec.isometry().clone();
    let q = orthonormal_complement(&j);
    let d_k = q.ncols();
    let mut segments = Vec::with_capacity(n_seg);
    for _ in 0..n_seg {
        let on_code = kron(&random_hermitian(d_a, rng), &identity(d_b))?
            + kron(&identity(d_a), &random_hermitian(d_b, rng))?;
        let h = &j * on_code * j.adjoint() + &q * random_hermitian(d_k, rng) * q.adjoint();
        let l_ops = (0..n_l)
            .map(|_| {
                let gauge = kron(&identity(d_a), &scaled(random_matrix(d_b, d_b, rng), 0.5))?;
                Ok(&j * gauge * j.adjoint()
                    + &q * scaled(random_matrix(d_k, d_k, rng), 0.5) * q.adjoint())
            })
            .collect::<Result<Vec<_>>>()?;
        segments.push(LindbladSegment {
            duration: duration / n_seg as f64,
            h,
            l_ops,
        });
    }
    Ok(LindbladInstance {
        model: LindbladModel::new(d_s, segments)?,
        dec,
        correctable: true,
    })
}

/// Cyclic shift on `C^d`, the generalized Pauli `X`.
pub fn shift(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        if i == (j + 1) % d {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// Adds `ε J(X^A ⊗ m)J†` to the first jump operator of every segment, with
/// a random unit-norm `m`. For `ε > 0` the result is no longer correctable.
pub fn perturb_lindblad<R: Rng + ?Sized>(
    inst: &LindbladInstance,
    eps: f64,
    rng: &mut R,
) -> Result<LindbladInstance> {
    let dec = &inst.dec;
    let j = dec.isometry();
    let mut segments = inst.model.segments().to_vec();
    for seg in &mut segments {
        let m = scaled(random_matrix(dec.d_b(), dec.d_b(), rng), 1.0);
        let term = j * kron(&shift(dec.d_a()), &m)? * j.adjoint() * c(eps, 0.0);
        match seg.l_ops.first_mut() {
            Some(l) => *l += term,
            None => seg.l_ops.push(term),
        }
    }
    Ok(LindbladInstance {
        model: LindbladModel::new(dec.d_s(), segments)?,
        dec: dec.clone(),
        correctable: eps == 0.0,
    })
}

/// A joint Hamiltonian with a decomposition and the expected verdict.
#[derive(Debug, Clone)]
pub struct HamiltonianInstance {
    pub model: HamiltonianModel,
    pub dec: SubsystemDecomposition,
    pub correctable: bool,
}

/// Model whose interaction acts trivially on `H^A` and keeps the code
/// invariant: `S_j = J(I ⊗ s_j)J† + Q s′_j Q†`. The system Hamiltonian has
/// the same block form plus a logical drift `h_A ⊗ I`.
pub fn gauge_coupled_hamiltonian<R: Rng + ?Sized>(
    d_s: usize,
    d_a: usize,
    d_b: usize,
    d_e: usize,
    n_terms: usize,
    rng: &mut R,
) -> Result<HamiltonianInstance> {
    let dec = random_decomposition(d_s, d_a, d_b, rng)?;
    let j = dec.isometry().clone();
    let q = orthonormal_complement(&j);
    let d_k = q.ncols();
    let on_code = kron(&random_hermitian(d_a, rng), &identity(d_b))?
        + kron(&identity(d_a), &random_hermitian(d_b, rng))?;
    let h_s = &j * on_code * j.adjoint() + &q * random_hermitian(d_k, rng) * q.adjoint();
    let terms = (0..n_terms)
        .map(|_| {
            let s = &j * kron(&identity(d_a), &random_hermitian(d_b, rng))? * j.adjoint()
                + &q * random_hermitian(d_k, rng) * q.adjoint();
            Ok(InteractionTerm {
                s,
                e: random_hermitian(d_e, rng),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let segment = HamiltonianSegment {
        duration: 1.0,
        h_s,
        h_e: random_hermitian(d_e, rng),
        terms,
    };
    Ok(HamiltonianInstance {
        model: HamiltonianModel::new(d_s, d_e, vec![segment])?,
        dec,
        correctable: true,
    })
}

/// Adds `ε J(X^A ⊗ I)J† ⊗ E` with a random traceless Hermitian `E`; for
/// `ε > 0` the logical qudit couples to the environment.
pub fn perturb_hamiltonian<R: Rng + ?Sized>(
    inst: &HamiltonianInstance,
    eps: f64,
    rng: &mut R,
) -> Result<HamiltonianInstance> {
    let dec = &inst.dec;
    let x = shift(dec.d_a());
    let s = dec.isometry()
        * kron(&(&x + x.adjoint()), &identity(dec.d_b()))?
        * dec.isometry().adjoint();
    let d_e = inst.model.d_e();
    let mut segments = inst.model.segments().to_vec();
    for seg in &mut segments {
        let e = random_hermitian(d_e, rng);
        let e = &e - identity(d_e) * (crate::linalg::trace(&e) / c(d_e as f64, 0.0));
        seg.terms.push(InteractionTerm {
            s: s.clone() * c(eps, 0.0),
            e: scaled(e, 1.0),
        });
    }
    Ok(HamiltonianInstance {
        model: HamiltonianModel::new(dec.d_s(), d_e, segments)?,
        dec: dec.clone(),
        correctable: eps == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constructed_recovery_works_on_code() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = correctable_channel(7, 2, 2, 3, &mut rng).unwrap();
        let u = inst.recovery.as_ref().unwrap();
        let out = inst.output.as_ref().unwrap();
        for m in inst.channel.ops() {
            let fit =
                crate::code_space::fit_a_trivial(&(u * m * inst.dec.isometry()), out.isometry(), 2);
            assert!(fit.residual() < 1e-10, "{}", fit.residual());
        }
    }

    #[test]
    fn generic_channel_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let inst = generic_channel(5, 2, 1, 4, &mut rng).unwrap();
        assert!(inst.channel.completeness_defect() < 1e-10);
    }

    #[test]
    fn shift_is_cyclic() {
        let x = shift(3);
        let x3 = &x * &x * &x;
        assert!(frobenius(&(x3 - identity(3))) < 1e-15);
    }

    #[test]
    fn perturbation_keeps_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let inst = gauge_coupled_hamiltonian(5, 2, 2, 2, 2, &mut rng).unwrap();
        let p = perturb_hamiltonian(&inst, 0.1, &mut rng).unwrap();
        assert!(!p.correctable);
        assert_eq!(p.model.segments()[0].terms.len(), 3);
    }
}
