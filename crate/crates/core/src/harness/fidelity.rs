// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Entanglement-fidelity oracle.
//!
//! The oracle evolves the encoded operators `J(|i⟩⟨j| ⊗ τ)J†` directly,
//! applies the recovery unitary and reduces to `H^A` through the output
//! decomposition. It shares no code with the correctability conditions, so
//! agreement between the two is an independent check.

use rayon::prelude::*;

use crate::code_space::SubsystemDecomposition;
use crate::hamiltonian::{propagators_on_grid, HamiltonianModel};
use crate::linalg::{c, ket_bra, kron, partial_trace, trace, CMatrix, FactorDims, C64};
use crate::markovian::{propagate_operator, FrameTrajectory, Integrator, LindbladModel};
use crate::schedule::TimeGrid;
use crate::{Error, Result};

/// `(1/d_A²) Σ_ij ⟨i| Tr_B′[J′† U Φ(J(|i⟩⟨j| ⊗ τ)J†) U† J′] |j⟩`.
pub fn entanglement_fidelity<F>(
    input: &SubsystemDecomposition,
    tau: &CMatrix,
    dynamics: F,
    recovery: &CMatrix,
    output: &SubsystemDecomposition,
) -> Result<f64>
where
    F: Fn(&CMatrix) -> Result<CMatrix>,
{
    let d_a = input.d_a();
    if output.d_a() != d_a {
        return Err(Error::DimensionMismatch(format!(
            "input d_A = {d_a}, output d_A = {}",
            output.d_a()
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d_a {
        for j in 0..d_a {
            let sigma = input.encode(&ket_bra(d_a, i, j), tau)?;
            let evolved = dynamics(&sigma)?;
            let recovered = recovery * evolved * recovery.adjoint();
            acc += output.reduce_to_a(&recovered)?[(i, j)];
        }
    }
    Ok(acc.re / (d_a * d_a) as f64)
}

/// `1 − Tr(P ρ)`: weight outside the subspace with projector `P`.
pub fn leakage(rho: &CMatrix, projector: &CMatrix) -> f64 {
    1.0 - trace(&(projector * rho)).re
}

/// Fidelity and leakage along a tracked Lindblad trajectory.
#[derive(Debug, Clone)]
pub struct MarkovSeries {
    pub t: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// Leakage of the recovered maximally mixed logical state from the
    /// current code space.
    pub leakage: Vec<f64>,
}

/// Evaluates the oracle at every sample of `traj`. The `d_A²` encoded
/// operators are propagated in parallel.
pub fn markov_fidelity_series(
    model: &LindbladModel,
    traj: &FrameTrajectory,
    tau: &CMatrix,
    grid: &TimeGrid,
    integrator: Integrator,
    max_step: f64,
) -> Result<MarkovSeries> {
    let input = &traj.decompositions[0];
    let d_a = input.d_a();
    let pairs: Vec<(usize, usize)> = (0..d_a)
        .flat_map(|i| (0..d_a).map(move |j| (i, j)))
        .collect();
    let evolved = pairs
        .par_iter()
        .map(|&(i, j)| {
            let sigma = input.encode(&ket_bra(d_a, i, j), tau)?;
            propagate_operator(model, &sigma, grid, integrator, max_step)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = traj.samples.len();
    if evolved.iter().any(|e| e.len() != n) {
        return Err(Error::DimensionMismatch(
            "trajectory and grid have different lengths".into(),
        ));
    }
    let mut out = MarkovSeries {
        t: Vec::with_capacity(n),
        fidelity: Vec::with_capacity(n),
        leakage: Vec::with_capacity(n),
    };
    for (k, sample) in traj.samples.iter().enumerate() {
        let dec = traj.decomposition_at(k);
        let u = &sample.u;
        let mut acc = C64::new(0.0, 0.0);
        let mut mixed = CMatrix::zeros(dec.d_s(), dec.d_s());
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let recovered = u * &evolved[p][k] * u.adjoint();
            acc += dec.reduce_to_a(&recovered)?[(i, j)];
            if i == j {
                mixed += recovered;
            }
        }
        out.t.push(sample.t);
        out.fidelity.push(acc.re / (d_a * d_a) as f64);
        out.leakage
            .push(leakage(&(mixed / c(d_a as f64, 0.0)), &dec.projector_ab()));
    }
    Ok(out)
}

/// `σ ↦ Tr_E[V (σ ⊗ ρ_E) V†]`.
pub fn reduced_dynamics(v: &CMatrix, sigma: &CMatrix, env_rho: &CMatrix) -> Result<CMatrix> {
    let d_s = sigma.nrows();
    let d_e = env_rho.nrows();
    let joint = kron(sigma, env_rho)?;
    let dims = FactorDims::new(vec![d_s, d_e])?;
    partial_trace(&(v * joint * v.adjoint()), &dims, &[0])
}

/// Worst-case fidelity over the given environment states, at every grid
/// point, for a system-only recovery `recovery[k]` into `output`.
#[allow(clippy::too_many_arguments)]
pub fn hamiltonian_fidelity_series(
    model: &HamiltonianModel,
    input: &SubsystemDecomposition,
    tau: &CMatrix,
    grid: &TimeGrid,
    recoveries: &[CMatrix],
    output: &SubsystemDecomposition,
    env_states: &[CMatrix],
    substeps: usize,
) -> Result<Vec<f64>> {
    let props = propagators_on_grid(model, grid, substeps)?;
    if recoveries.len() != props.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} recoveries for {} grid points",
            recoveries.len(),
            props.len()
        )));
    }
    if env_states.is_empty() {
        return Err(Error::InvalidInput("no environment states".into()));
    }
    props
        .par_iter()
        .zip(recoveries.par_iter())
        .map(|(v, u)| {
            env_states
                .iter()
                .map(|rho_e| {
                    entanglement_fidelity(input, tau, |s| reduced_dynamics(v, s, rho_e), u, output)
                })
                .try_fold(f64::INFINITY, |m, f| f.map(|f| m.min(f)))
        })
        .collect()
}
