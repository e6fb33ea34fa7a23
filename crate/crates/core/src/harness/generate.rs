// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random scenarios tagged with their expected verdict.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instances::{
    correctable_channel, gauge_coupled_hamiltonian, generic_channel, noiseless_subsystem,
    perturb_hamiltonian, perturb_lindblad, tracked_drift,
};
use super::scenario::{
    ChannelSpec, CheckSpec, DecompositionSpec, EnvSpecJson, Expectation, FidelitySpec,
    HamiltonianSpec, LindbladSpec, Scenario, ScenarioKind, SCHEMA_VERSION,
};
use crate::markovian::Integrator;
use crate::schedule::TimeGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    /// `H = I ⊗ h`, `L_j = I ⊗ l_j` with no complement.
    NoiselessSubsystem,
    /// Logical drift, gauge noise and arbitrary action on the complement.
    TrackedDrift,
    /// Joint Hamiltonian whose interaction is trivial on `H^A`.
    GaugeCoupled,
    CorrectableChannel,
    GenericChannel,
}

#[derive(Debug, Clone, Copy)]
pub struct InstanceRequest {
    pub kind: InstanceKind,
    pub d_s: usize,
    pub d_a: usize,
    pub d_b: usize,
    /// Kraus operators, jump operators or interaction terms.
    pub n_ops: usize,
    /// Environment dimension for Hamiltonian instances.
    pub d_e: usize,
    /// Strength of the perturbation that breaks correctability.
    pub eps: f64,
    pub seed: u64,
}

impl Default for InstanceRequest {
    fn default() -> Self {
        InstanceRequest {
            kind: InstanceKind::TrackedDrift,
            d_s: 5,
            d_a: 2,
            d_b: 2,
            n_ops: 2,
            d_e: 2,
            eps: 0.0,
            seed: 0,
        }
    }
}

fn expectation(correctable: bool) -> Option<Expectation> {
    Some(if correctable {
        Expectation::Correctable
    } else {
        Expectation::NotCorrectable
    })
}

/// Deterministic in `req.seed`.
pub fn random_scenario(req: &InstanceRequest) -> Result<Scenario> {
    if !(req.eps >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "eps must be non-negative, got {}",
            req.eps
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let kind = serde_json::to_value(req.kind).expect("serializable");
    let name = format!("{}_{}", kind.as_str().unwrap_or("instance"), req.seed);
    let grid = TimeGrid::new(1.0, 0.01)?;
    let mut scenario = Scenario {
        schema_version: SCHEMA_VERSION,
        name,
        description: String::new(),
        kind: ScenarioKind::Markovian,
        decomposition: DecompositionSpec {
            d_a: req.d_a,
            d_b: req.d_b,
            d_s: req.d_s,
            layout: None,
            isometry: None,
        },
        channel: None,
        lindblad: None,
        hamiltonian: None,
        env: EnvSpecJson::Full,
        grid: Some(grid),
        integrator: Integrator::Rk4,
        max_step: 1e-3,
        checks: Vec::new(),
        fidelity: FidelitySpec::default(),
        tol: crate::DEFAULT_TOL,
        seed: req.seed,
    };
    match req.kind {
        InstanceKind::NoiselessSubsystem | InstanceKind::TrackedDrift => {
            let mut inst = if req.kind == InstanceKind::NoiselessSubsystem {
                noiseless_subsystem(req.d_a, req.d_b, req.n_ops, 1.0, &mut rng)?
            } else {
                tracked_drift(req.d_s, req.d_a, req.d_b, req.n_ops, 2, 1.0, &mut rng)?
            };
            if req.eps > 0.0 {
                inst = perturb_lindblad(&inst, req.eps, &mut rng)?;
            }
            scenario.description = "random Lindblad instance".into();
            scenario.decomposition = DecompositionSpec::from_decomposition(&inst.dec);
            scenario.lindblad = Some(LindbladSpec::from_model(&inst.model));
            scenario.checks = vec![CheckSpec::MarkovTracking {
                expect: expectation(inst.correctable),
                allow_expansion: false,
                expect_gauge_events: None,
            }];
            scenario.tol = 1e-8;
        }
        InstanceKind::GaugeCoupled => {
            let mut inst =
                gauge_coupled_hamiltonian(req.d_s, req.d_a, req.d_b, req.d_e, req.n_ops, &mut rng)?;
            if req.eps > 0.0 {
                inst = perturb_hamiltonian(&inst, req.eps, &mut rng)?;
            }
            scenario.description = "random system-environment Hamiltonian".into();
            scenario.kind = ScenarioKind::Hamiltonian;
            scenario.decomposition = DecompositionSpec::from_decomposition(&inst.dec);
            scenario.hamiltonian = Some(HamiltonianSpec::from_model(&inst.model));
            scenario.checks = vec![CheckSpec::SystemFrame {
                expect: expectation(inst.correctable),
            }];
            scenario.fidelity.random_env_states = 10;
        }
        InstanceKind::CorrectableChannel | InstanceKind::GenericChannel => {
            if req.eps > 0.0 {
                return Err(Error::InvalidInput(
                    "perturbation applies to Lindblad and Hamiltonian instances".into(),
                ));
            }
            let correctable = req.kind == InstanceKind::CorrectableChannel;
            let inst = if correctable {
                correctable_channel(req.d_s, req.d_a, req.d_b, req.n_ops, &mut rng)?
            } else {
                generic_channel(req.d_s, req.d_a, req.d_b, req.n_ops, &mut rng)?
            };
            scenario.description = "random Kraus channel".into();
            scenario.kind = ScenarioKind::Channel;
            scenario.decomposition = DecompositionSpec::from_decomposition(&inst.dec);
            scenario.channel = Some(ChannelSpec::from_channel(&inst.channel));
            scenario.grid = None;
            scenario.checks = vec![CheckSpec::KrausRecovery {
                expect: expectation(correctable),
            }];
        }
    }
    Ok(scenario)
}
