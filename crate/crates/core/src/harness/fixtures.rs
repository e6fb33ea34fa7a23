// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Hand-built scenarios shipped in `scenarios/`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::instances::{correctable_channel, noiseless_subsystem};
use super::scenario::{
    ChannelSpec, CheckSpec, DecompositionSpec, EnvSpecJson, Expectation, FidelitySpec,
    HamiltonianSegmentSpec, HamiltonianSpec, Layout, LindbladSegmentSpec, LindbladSpec, MatrixJson,
    Scenario, ScenarioKind, SCHEMA_VERSION,
};
use crate::hamiltonian::WSupport;
use crate::linalg::{identity, ket, ket_bra, kron, pauli, r, zeros, CMatrix};
use crate::markovian::Integrator;
use crate::schedule::TimeGrid;
use crate::Result;

fn base(name: &str, description: &str, kind: ScenarioKind, dec: DecompositionSpec) -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: name.into(),
        description: description.into(),
        kind,
        decomposition: dec,
        channel: None,
        lindblad: None,
        hamiltonian: None,
        env: EnvSpecJson::Full,
        grid: None,
        integrator: Integrator::Rk4,
        max_step: 1e-3,
        checks: Vec::new(),
        fidelity: FidelitySpec::default(),
        tol: crate::DEFAULT_TOL,
        seed: 0,
    }
}

fn layout(d_a: usize, d_b: usize, d_s: usize, layout: Layout) -> DecompositionSpec {
    DecompositionSpec {
        d_a,
        d_b,
        d_s,
        layout: Some(layout),
        isometry: None,
    }
}

fn m(x: &CMatrix) -> MatrixJson {
    // adding +0 clears negative zeros
    MatrixJson::from(&x.map(|z| z + r(0.0)))
}

fn lindblad(segments: Vec<(f64, CMatrix, Vec<CMatrix>)>) -> LindbladSpec {
    LindbladSpec {
        segments: segments
            .into_iter()
            .map(|(duration, h, l_ops)| LindbladSegmentSpec {
                duration,
                h: m(&h),
                l_ops: l_ops.iter().map(m).collect(),
            })
            .collect(),
    }
}

fn joint(d_e: usize, segments: Vec<(f64, CMatrix)>) -> HamiltonianSpec {
    HamiltonianSpec {
        d_e,
        segments: segments
            .into_iter()
            .map(|(duration, h)| HamiltonianSegmentSpec {
                duration,
                h_s: None,
                h_e: None,
                terms: Vec::new(),
                joint: Some(m(&h)),
            })
            .collect(),
    }
}

fn expect(e: Expectation) -> Option<Expectation> {
    Some(e)
}

/// Generator `G` on qubit ⊗ environment qubit with
/// `exp(−iG t*) = I ⊗ |0⟩⟨0| + X ⊗ |1⟩⟨1|`.
pub fn controlled_flip_generator(t_star: f64) -> CMatrix {
    let g = (identity(2) - pauli::x()) * r(FRAC_PI_2 / t_star);
    kron(&g, &ket_bra(2, 1, 1)).expect("2x2 factors")
}

/// Noiseless subsystem with `d_A = d_B = 2` and no complement.
pub fn dfs_markov() -> Result<Scenario> {
    let inst = noiseless_subsystem(2, 2, 2, 1.0, &mut ChaCha8Rng::seed_from_u64(1))?;
    let mut sc = base(
        "dfs_markov",
        "H = I ⊗ h and L_j = I ⊗ l_j on a two-qubit system; the first qubit is noiseless",
        ScenarioKind::Markovian,
        DecompositionSpec::from_decomposition(&inst.dec),
    );
    sc.lindblad = Some(LindbladSpec::from_model(&inst.model));
    sc.grid = Some(TimeGrid::new(1.0, 1e-3)?);
    sc.tol = 1e-10;
    sc.seed = 1;
    sc.checks = vec![
        CheckSpec::MarkovTracking {
            expect: expect(Expectation::Correctable),
            allow_expansion: false,
            expect_gauge_events: Some(0),
        },
        CheckSpec::IntegratorAgreement {
            max_trace_distance: 1e-6,
        },
    ];
    Ok(sc)
}

/// Logical precession `H = ωZ/2` with `ω = 2` and no jump operators.
pub fn drift() -> Result<Scenario> {
    let mut sc = base(
        "drift",
        "a single logical qubit precessing about Z; the recovery unitary undoes the rotation",
        ScenarioKind::Markovian,
        layout(2, 1, 2, Layout::Canonical),
    );
    sc.lindblad = Some(lindblad(vec![(1.0, pauli::z(), vec![])]));
    sc.grid = Some(TimeGrid::new(1.0, 1e-2)?);
    sc.checks = vec![CheckSpec::MarkovTracking {
        expect: expect(Expectation::Correctable),
        allow_expansion: false,
        expect_gauge_events: Some(0),
    }];
    Ok(sc)
}

/// A logical qubit whose one-level gauge leaks into a second level halfway
/// through the schedule.
pub fn gauge_expansion() -> Result<Scenario> {
    let mut sc = base(
        "gauge_expansion",
        "logical Z drift, then gauge leakage I ⊗ |1⟩⟨0| that grows the gauge factor from 1 to 2 levels",
        ScenarioKind::Markovian,
        layout(2, 1, 4, Layout::TensorFactor),
    );
    let z = kron(&pauli::z(), &identity(2))?;
    let leak = kron(&identity(2), &ket_bra(2, 1, 0))?;
    sc.lindblad = Some(lindblad(vec![
        (0.5, z, vec![]),
        (0.5, zeros(4, 4), vec![leak]),
    ]));
    sc.grid = Some(TimeGrid::new(1.0, 1e-2)?);
    sc.checks = vec![CheckSpec::MarkovTracking {
        expect: expect(Expectation::Correctable),
        allow_expansion: true,
        expect_gauge_events: Some(1),
    }];
    Ok(sc)
}

/// Dephasing of the logical qubit; no recovery exists.
pub fn dephasing() -> Result<Scenario> {
    let mut sc = base(
        "dephasing",
        "logical dephasing L = √γ Z with γ = 0.5",
        ScenarioKind::Markovian,
        layout(2, 1, 2, Layout::Canonical),
    );
    sc.lindblad = Some(lindblad(vec![(
        1.0,
        zeros(2, 2),
        vec![pauli::z() * r(0.5f64.sqrt())],
    )]));
    sc.grid = Some(TimeGrid::new(1.0, 1e-2)?);
    sc.checks = vec![CheckSpec::MarkovTracking {
        expect: expect(Expectation::NotCorrectable),
        allow_expansion: true,
        expect_gauge_events: None,
    }];
    Ok(sc)
}

/// Two system qubits and one environment qubit. Qubit 1 carries the
/// logical information, the gauge is `|0⟩` of qubit 2, and the joint
/// propagator at `t* = 1` is `I ⊗ (I ⊗ |0⟩⟨0| + X ⊗ |1⟩⟨1|)`.
pub fn entangled_gauge() -> Result<Scenario> {
    let mut sc = base(
        "entangled_gauge",
        "qubit 2 flips conditioned on the environment; qubit 1 is untouched and U = I recovers it into a two-level gauge",
        ScenarioKind::Hamiltonian,
        layout(2, 1, 4, Layout::TensorFactor),
    );
    let t_star = 1.0;
    sc.hamiltonian = Some(joint(
        2,
        vec![(
            t_star,
            kron(&identity(2), &controlled_flip_generator(t_star))?,
        )],
    ));
    let plus = (ket(2, 0) + ket(2, 1)) * r(FRAC_PI_4.cos());
    sc.fidelity.env_states = vec![
        m(&(identity(2) * r(0.5))),
        m(&ket_bra(2, 0, 0)),
        m(&(&plus * plus.adjoint())),
    ];
    sc.checks = vec![CheckSpec::Moment {
        t: t_star,
        expect: expect(Expectation::Correctable),
        expect_d_b_prime: Some(2),
        identity_admissible: true,
    }];
    Ok(sc)
}

fn discrimination(name: &str, env: EnvSpecJson, verdict: Expectation) -> Result<Scenario> {
    let mut sc = base(
        name,
        "V = I ⊗ |0⟩⟨0| + X ⊗ |1⟩⟨1| on a logical qubit with no gauge; recoverable only when the environment starts in span{|0⟩}",
        ScenarioKind::Hamiltonian,
        layout(2, 1, 2, Layout::Canonical),
    );
    sc.hamiltonian = Some(joint(2, vec![(1.0, controlled_flip_generator(1.0))]));
    sc.env = env;
    sc.grid = Some(TimeGrid::new(1.0, 5e-2)?);
    sc.max_step = 1e-2;
    sc.tol = 1e-8;
    sc.checks = vec![
        CheckSpec::Moment {
            t: 1.0,
            expect: expect(verdict),
            expect_d_b_prime: None,
            identity_admissible: false,
        },
        CheckSpec::DoubleFrame {
            expect: expect(verdict),
            support: WSupport::B,
        },
    ];
    Ok(sc)
}

/// The controlled flip with an unrestricted environment.
pub fn discrimination_full() -> Result<Scenario> {
    discrimination(
        "discrimination_full",
        EnvSpecJson::Full,
        Expectation::NotCorrectable,
    )
}

/// The controlled flip with the environment restricted to `span{|0⟩}`.
pub fn discrimination_subspace() -> Result<Scenario> {
    discrimination(
        "discrimination_subspace",
        EnvSpecJson::Subspace {
            basis: m(&ket(2, 0)),
        },
        Expectation::Correctable,
    )
}

/// Interaction `H_I` on two logical qubits followed by `−H_I`: information
/// leaves for the environment and returns.
pub fn echo() -> Result<Scenario> {
    let mut sc = base(
        "echo",
        "H_I = (π/2) X ⊗ I ⊗ X^E for half the schedule, then −H_I; recoverable at the end but not halfway",
        ScenarioKind::Hamiltonian,
        layout(4, 1, 4, Layout::Canonical),
    );
    let h_i = kron(&kron(&pauli::x(), &identity(2))?, &pauli::x())? * r(FRAC_PI_2);
    sc.hamiltonian = Some(joint(2, vec![(0.5, h_i.clone()), (0.5, -h_i)]));
    sc.tol = 1e-10;
    sc.checks = vec![
        CheckSpec::Moment {
            t: 0.5,
            expect: expect(Expectation::NotCorrectable),
            expect_d_b_prime: None,
            identity_admissible: false,
        },
        CheckSpec::Moment {
            t: 1.0,
            expect: expect(Expectation::Correctable),
            expect_d_b_prime: Some(1),
            identity_admissible: true,
        },
    ];
    Ok(sc)
}

/// Seeded Kraus channel built to satisfy the recovery condition.
pub fn channel() -> Result<Scenario> {
    let inst = correctable_channel(6, 2, 1, 3, &mut ChaCha8Rng::seed_from_u64(7))?;
    let mut sc = base(
        "correctable_channel",
        "three Kraus operators on a six-level system that act as I ⊗ C_k on a logical qubit",
        ScenarioKind::Channel,
        DecompositionSpec::from_decomposition(&inst.dec),
    );
    sc.channel = Some(ChannelSpec::from_channel(&inst.channel));
    sc.seed = 7;
    sc.checks = vec![CheckSpec::KrausRecovery {
        expect: expect(Expectation::Correctable),
    }];
    Ok(sc)
}

/// Every bundled scenario, keyed by its file stem.
pub fn bundled() -> Result<Vec<Scenario>> {
    Ok(vec![
        dfs_markov()?,
        drift()?,
        gauge_expansion()?,
        dephasing()?,
        entangled_gauge()?,
        discrimination_full()?,
        discrimination_subspace()?,
        echo()?,
        channel()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, matrix_exp};

    #[test]
    fn controlled_flip_exponentiates() {
        let g = controlled_flip_generator(0.7);
        let v = matrix_exp(&(g * crate::linalg::c(0.0, -0.7)), 1e-15).unwrap();
        let expected = kron(&identity(2), &ket_bra(2, 0, 0)).unwrap()
            + kron(&pauli::x(), &ket_bra(2, 1, 1)).unwrap();
        assert!(frobenius(&(v - expected)) < 1e-12);
    }

    #[test]
    fn bundled_scenarios_load() {
        for sc in bundled().unwrap() {
            let name = sc.name.clone();
            let back = Scenario::from_json(&sc.to_json()).unwrap();
            back.load().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
