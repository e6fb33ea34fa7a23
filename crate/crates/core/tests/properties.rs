// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Cross-module properties of the Hamiltonian checks.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oqec::channels::{build_recovery, kraus_from_unitary, EnvironmentState};
use oqec::code_space::SubsystemDecomposition;
use oqec::hamiltonian::{
    check_at_time, check_recovery_at_time, full_propagator, track_system_frame, EnvSpec,
    EnvSubspace, HamiltonianModel,
};
use oqec::harness::fixtures::controlled_flip_generator;
use oqec::harness::instances::{gauge_coupled_hamiltonian, perturb_hamiltonian};
use oqec::harness::random::{random_density, random_unitary};
use oqec::linalg::{identity, ket, ket_bra, kron};
use oqec::schedule::TimeGrid;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn verdict_invariant_under_environment_relabeling(seed in any::<u64>(), perturb in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inst = gauge_coupled_hamiltonian(5, 2, 2, 2, 2, &mut rng).unwrap();
        if perturb {
            inst = perturb_hamiltonian(&inst, 0.3, &mut rng).unwrap();
        }
        let v_e = random_unitary(2, &mut rng);
        let relabeled = inst.model.relabel_environment(&v_e).unwrap();
        let a = check_at_time(&inst.model, &inst.dec, &EnvSpec::Full, 0.7, 1e-9, 16).unwrap();
        let b = check_at_time(&relabeled, &inst.dec, &EnvSpec::Full, 0.7, 1e-9, 16).unwrap();
        prop_assert_eq!(a.outcome.is_certified(), b.outcome.is_certified());
        prop_assert_eq!(a.outcome.is_certified(), !perturb);
        if let (Some(x), Some(y)) = (a.outcome.certificate(), b.outcome.certificate()) {
            prop_assert_eq!(x.d_b_prime(), y.d_b_prime());
        }
    }

    #[test]
    fn moment_check_agrees_with_full_rank_environment_states(seed in any::<u64>(), perturb in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inst = gauge_coupled_hamiltonian(4, 2, 1, 2, 2, &mut rng).unwrap();
        if perturb {
            inst = perturb_hamiltonian(&inst, 0.3, &mut rng).unwrap();
        }
        let moment = check_at_time(&inst.model, &inst.dec, &EnvSpec::Full, 0.5, 1e-9, 16).unwrap();
        let rho_e = random_density(2, &mut rng);
        let (values, vectors) = oqec::linalg::hermitian_eigen(&rho_e);
        let state = EnvironmentState::mixed(values, vectors).unwrap();
        let channel = kraus_from_unitary(&moment.propagator, 4, &state).unwrap();
        let direct = build_recovery(&channel, &inst.dec, 1e-9).unwrap();
        prop_assert_eq!(moment.outcome.is_certified(), direct.is_certified());
    }

    #[test]
    fn continuous_correctability_implies_correctability_at_each_moment(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = gauge_coupled_hamiltonian(5, 2, 2, 2, 2, &mut rng).unwrap();
        let grid = TimeGrid::new(1.0, 0.25).unwrap();
        let traj = track_system_frame(&inst.model, &inst.dec, &grid, 1e-8).unwrap();
        prop_assert!(traj.verdict.is_correctable());
        for s in &traj.samples {
            let adm = check_recovery_at_time(&inst.model, &inst.dec, &EnvSpec::Full, s.t, &s.u, 1e-9, 64).unwrap();
            prop_assert!(adm.residual <= 1e-6, "t = {}: residual {}", s.t, adm.residual);
        }
    }
}

#[test]
fn restricted_environment_only_matters_for_the_restricted_check() {
    let model =
        HamiltonianModel::from_joint(2, 2, vec![(controlled_flip_generator(1.0), 1.0)]).unwrap();
    let dec = SubsystemDecomposition::canonical(2, 1, 2).unwrap();
    let v = full_propagator(&model, 1.0, 8).unwrap();
    let expected = kron(&identity(2), &ket_bra(2, 0, 0)).unwrap()
        + kron(&oqec::linalg::pauli::x(), &ket_bra(2, 1, 1)).unwrap();
    assert!(oqec::linalg::frobenius(&(v - expected)) < 1e-10);
    for (basis, certified) in [(ket(2, 0), true), (ket(2, 1), true)] {
        let env = EnvSpec::Subspace(EnvSubspace::new(basis).unwrap());
        let m = check_at_time(&model, &dec, &env, 1.0, 1e-9, 8).unwrap();
        assert_eq!(m.outcome.is_certified(), certified);
    }
    assert!(!check_at_time(&model, &dec, &EnvSpec::Full, 1.0, 1e-9, 8)
        .unwrap()
        .outcome
        .is_certified());
}
