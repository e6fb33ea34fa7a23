// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria with pinned tolerances and runtime limits. Every
//! criterion prints one PASS or FAIL line; the test fails if any does.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oqec::channels::{build_recovery, fit_recovery, gram_blocks};
use oqec::code_space::SubsystemDecomposition;
use oqec::hamiltonian::{
    check_at_time, check_recovery_at_time, full_propagator, EnvSpec, HamiltonianModel,
};
use oqec::harness::fidelity::{entanglement_fidelity, markov_fidelity_series, reduced_dynamics};
use oqec::harness::fixtures;
use oqec::harness::instances::{
    correctable_channel, generic_channel, noiseless_subsystem, perturb_lindblad,
};
use oqec::harness::random::{random_density, random_hermitian, random_matrix};
use oqec::harness::runner::trace_distance;
use oqec::harness::scenario::{LoadedScenario, Model, Scenario};
use oqec::linalg::{c, frobenius, identity, ket, ket_bra, matrix_exp, pauli, r};
use oqec::markovian::{
    propagate_operator, track_recovery_unitary, FrameTrajectory, Integrator, LindbladModel,
    TrackOptions,
};
use oqec::schedule::TimeGrid;
use oqec::CMatrix;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn load(sc: oqec::Result<Scenario>) -> LoadedScenario {
    sc.and_then(Scenario::load).expect("bundled scenario loads")
}

fn lindblad(sc: &LoadedScenario) -> &LindbladModel {
    match &sc.model {
        Model::Markovian(m) => m,
        _ => panic!("expected a Lindblad model"),
    }
}

fn hamiltonian(sc: &LoadedScenario) -> (&HamiltonianModel, &EnvSpec) {
    match &sc.model {
        Model::Hamiltonian { model, env } => (model, env),
        _ => panic!("expected a Hamiltonian model"),
    }
}

fn min_fidelity(model: &LindbladModel, traj: &FrameTrajectory, grid: &TimeGrid) -> f64 {
    let d_b = traj.decompositions[0].d_b();
    let tau = identity(d_b) * r(1.0 / d_b as f64);
    let series = markov_fidelity_series(model, traj, &tau, grid, Integrator::Rk4, 1e-3)
        .expect("fidelity series");
    series
        .fidelity
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn joint_fidelity(
    v: &CMatrix,
    dec: &SubsystemDecomposition,
    env: &CMatrix,
    u: &CMatrix,
    output: &SubsystemDecomposition,
) -> f64 {
    let tau = identity(dec.d_b()) * r(1.0 / dec.d_b() as f64);
    entanglement_fidelity(dec, &tau, |x| reduced_dynamics(v, x, env), u, output).unwrap()
}

const F_MIN: f64 = 1.0 - 1e-6;

fn channel_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_gram, mut worst_cert, mut worst_reduction) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..100 {
        let d_a = if k % 2 == 0 { 2 } else { 3 };
        let d_b = rng.random_range(1..=8 / d_a);
        let d_s = rng.random_range(d_a * d_b..=8);
        let n = rng.random_range(1..=4);
        let inst = correctable_channel(d_s, d_a, d_b, n, &mut rng).map_err(|e| e.to_string())?;
        let gram = gram_blocks(&inst.channel, &inst.dec).map_err(|e| e.to_string())?;
        worst_gram = worst_gram.max(gram.triviality_residual);
        let outcome = build_recovery(&inst.channel, &inst.dec, 1e-9).map_err(|e| e.to_string())?;
        let cert = outcome.certificate().ok_or_else(|| {
            format!(
                "instance {k}: no certificate, residual {:.3e}",
                outcome.residual()
            )
        })?;
        worst_cert = worst_cert.max(cert.residual);
        let rho = random_density(d_a, &mut rng);
        let tau = random_density(d_b, &mut rng);
        let sigma = inst.dec.encode(&rho, &tau).map_err(|e| e.to_string())?;
        let out = &cert.u * inst.channel.apply(&sigma) * cert.u.adjoint();
        let back = cert.output.reduce_to_a(&out).map_err(|e| e.to_string())?;
        worst_reduction = worst_reduction.max(frobenius(&(back - &rho)));
    }
    ensure(worst_gram <= 1e-9, || {
        format!("gram residual {worst_gram:.3e} > 1e-9")
    })?;
    ensure(worst_cert <= 1e-8, || {
        format!("certificate residual {worst_cert:.3e} > 1e-8")
    })?;
    ensure(worst_reduction <= 1e-8, || {
        format!("reduction error {worst_reduction:.3e} > 1e-8")
    })?;

    let (mut least_residual, mut worst_fidelity) = (f64::INFINITY, 0.0f64);
    for k in 0..100 {
        let d_a = if k % 2 == 0 { 2 } else { 3 };
        let d_b = rng.random_range(1..=8 / d_a);
        let d_s = rng.random_range(d_a * d_b..=8);
        let n = rng.random_range(2..=4);
        let inst = generic_channel(d_s, d_a, d_b, n, &mut rng).map_err(|e| e.to_string())?;
        let outcome = build_recovery(&inst.channel, &inst.dec, 1e-9).map_err(|e| e.to_string())?;
        ensure(!outcome.is_certified(), || {
            format!("generic channel {k} certified")
        })?;
        least_residual = least_residual.min(outcome.residual());
        let fit = fit_recovery(&inst.channel, &inst.dec, 1e-9).map_err(|e| e.to_string())?;
        let tau = identity(d_b) * r(1.0 / d_b as f64);
        let f = entanglement_fidelity(
            &inst.dec,
            &tau,
            |x| Ok(inst.channel.apply(x)),
            &fit.u,
            &fit.output,
        )
        .map_err(|e| e.to_string())?;
        worst_fidelity = worst_fidelity.max(f);
    }
    ensure(least_residual > 1e-3, || {
        format!("generic residual {least_residual:.3e} <= 1e-3")
    })?;
    ensure(worst_fidelity < 0.999, || {
        format!("generic fidelity {worst_fidelity:.6} >= 0.999")
    })?;
    Ok(format!(
        "gram {worst_gram:.1e}, certificate {worst_cert:.1e}, reduction {worst_reduction:.1e}; \
         generic residual >= {least_residual:.2e}, fidelity <= {worst_fidelity:.4}"
    ))
}

fn noiseless_fixture() -> Outcome {
    let sc = load(fixtures::dfs_markov());
    let model = lindblad(&sc);
    let grid = TimeGrid::new(1.0, 1e-3).unwrap();
    let opts = TrackOptions {
        tol: 1e-10,
        max_step: 1e-3,
        allow_expansion: false,
    };
    let traj = track_recovery_unitary(model, &sc.dec, &grid, &opts).map_err(|e| e.to_string())?;
    let worst = traj
        .samples
        .iter()
        .map(|s| s.residuals.r1.max(s.residuals.r2).max(s.residuals.r3))
        .fold(0.0f64, f64::max);
    ensure(traj.samples.len() == 1001, || {
        format!("{} grid points", traj.samples.len())
    })?;
    ensure(worst <= 1e-10, || format!("residual {worst:.3e} > 1e-10"))?;
    let f = min_fidelity(model, &traj, &grid);
    ensure(f >= F_MIN, || format!("fidelity {f:.9}"))?;
    Ok(format!("max residual {worst:.1e}, min fidelity {f:.12}"))
}

fn drift_tracking() -> Outcome {
    let sc = load(fixtures::drift());
    let model = lindblad(&sc);
    let grid = sc.grid.unwrap();
    let traj = track_recovery_unitary(model, &sc.dec, &grid, &TrackOptions::default())
        .map_err(|e| e.to_string())?;
    let omega = 2.0;
    let expected = matrix_exp(&(pauli::z() * c(0.0, omega / 2.0)), 1e-15).unwrap();
    let last = traj.samples.last().unwrap();
    let err = (&last.u - expected).camax();
    ensure((last.t - 1.0).abs() < 1e-12, || {
        format!("last grid point {}", last.t)
    })?;
    ensure(err <= 1e-6, || format!("U(1) off by {err:.3e}"))?;
    let f = min_fidelity(model, &traj, &grid);
    ensure(f >= F_MIN, || format!("fidelity {f:.9}"))?;
    Ok(format!("U(1) error {err:.1e}, min fidelity {f:.12}"))
}

fn gauge_expansion() -> Outcome {
    let sc = load(fixtures::gauge_expansion());
    let model = lindblad(&sc);
    let grid = sc.grid.unwrap();
    let traj = track_recovery_unitary(model, &sc.dec, &grid, &TrackOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(traj.gauge_events.len() == 1, || {
        format!("{} gauge events", traj.gauge_events.len())
    })?;
    let ev = &traj.gauge_events[0];
    ensure((ev.d_b_before, ev.d_b_after) == (1, 2), || {
        format!("gauge grew {} -> {}", ev.d_b_before, ev.d_b_after)
    })?;
    let post = traj
        .samples
        .iter()
        .filter(|s| s.dec_index >= 1)
        .map(|s| s.residuals.max())
        .fold(0.0f64, f64::max);
    ensure(post <= 1e-8, || {
        format!("post-expansion residual {post:.3e}")
    })?;
    let f = min_fidelity(model, &traj, &grid);
    ensure(f >= F_MIN, || format!("fidelity {f:.9}"))?;
    Ok(format!(
        "event at t = {}, post residual {post:.1e}, min fidelity {f:.12}",
        ev.t
    ))
}

fn entangled_gauge() -> Outcome {
    let sc = load(fixtures::entangled_gauge());
    let (model, _) = hamiltonian(&sc);
    let moment =
        check_at_time(model, &sc.dec, &EnvSpec::Full, 1.0, 1e-9, 16).map_err(|e| e.to_string())?;
    let cert = moment
        .outcome
        .certificate()
        .ok_or_else(|| format!("no certificate, residual {:.3e}", moment.outcome.residual()))?;
    ensure(cert.d_b_prime() == 2, || {
        format!("d_B' = {}", cert.d_b_prime())
    })?;
    ensure(cert.residual <= 1e-8, || {
        format!("certificate residual {:.3e}", cert.residual)
    })?;
    let adm = check_recovery_at_time(model, &sc.dec, &EnvSpec::Full, 1.0, &identity(4), 1e-9, 16)
        .map_err(|e| e.to_string())?;
    ensure(adm.residual <= 1e-8, || {
        format!("U = I residual {:.3e}", adm.residual)
    })?;
    let output = adm.output.ok_or("U = I has no output decomposition")?;
    let v = full_propagator(model, 1.0, 16).map_err(|e| e.to_string())?;
    let plus = (ket(2, 0) + ket(2, 1)) * r(0.5f64.sqrt());
    let envs = [
        identity(2) * r(0.5),
        ket_bra(2, 0, 0),
        &plus * plus.adjoint(),
    ];
    let worst = envs
        .iter()
        .map(|e| joint_fidelity(&v, &sc.dec, e, &identity(4), &output))
        .fold(1.0f64, f64::min);
    ensure(worst >= F_MIN, || format!("fidelity {worst:.9}"))?;
    Ok(format!(
        "d_B' = 2, residual {:.1e}, min fidelity {worst:.12}",
        cert.residual
    ))
}

fn discrimination() -> Outcome {
    let full = load(fixtures::discrimination_full());
    let (model, env) = hamiltonian(&full);
    let m = check_at_time(model, &full.dec, env, 1.0, 1e-9, 16).map_err(|e| e.to_string())?;
    ensure(!m.outcome.is_certified(), || {
        "full environment certified".into()
    })?;
    ensure(m.outcome.residual() > 0.3, || {
        format!("full residual {:.3e}", m.outcome.residual())
    })?;

    let sub = load(fixtures::discrimination_subspace());
    let (model, env) = hamiltonian(&sub);
    let m = check_at_time(model, &sub.dec, env, 1.0, 1e-9, 16).map_err(|e| e.to_string())?;
    let cert = m
        .outcome
        .certificate()
        .ok_or("subspace environment not certified")?;
    ensure(cert.residual <= 1e-10, || {
        format!("subspace residual {:.3e}", cert.residual)
    })?;
    let inside = joint_fidelity(
        &m.propagator,
        &sub.dec,
        &ket_bra(2, 0, 0),
        &cert.u,
        &cert.output,
    );
    ensure(inside >= F_MIN, || format!("fidelity inside {inside:.9}"))?;
    let outside = joint_fidelity(
        &m.propagator,
        &sub.dec,
        &ket_bra(2, 1, 1),
        &cert.u,
        &cert.output,
    );
    ensure(outside < 1.0 - 1e-3, || {
        format!("fidelity outside {outside:.9}")
    })?;
    Ok(format!(
        "full residual {:.3}, subspace residual {:.1e}, fidelity inside {inside:.12} outside {outside:.3}",
        full_residual(&full),
        cert.residual
    ))
}

fn full_residual(sc: &LoadedScenario) -> f64 {
    let (model, env) = hamiltonian(sc);
    check_at_time(model, &sc.dec, env, 1.0, 1e-9, 16)
        .unwrap()
        .outcome
        .residual()
}

fn echo() -> Outcome {
    let sc = load(fixtures::echo());
    let (model, env) = hamiltonian(&sc);
    let half = check_at_time(model, &sc.dec, env, 0.5, 1e-9, 16).map_err(|e| e.to_string())?;
    ensure(!half.outcome.is_certified(), || "certified at t/2".into())?;
    let end = check_at_time(model, &sc.dec, env, 1.0, 1e-9, 16).map_err(|e| e.to_string())?;
    let cert = end.outcome.certificate().ok_or("not certified at t")?;
    ensure(cert.residual <= 1e-10, || {
        format!("residual at t {:.3e}", cert.residual)
    })?;
    let v_err = (&end.propagator - identity(8)).camax();
    ensure(v_err <= 1e-10, || {
        format!("V(t) differs from I by {v_err:.3e}")
    })?;
    Ok(format!(
        "t/2 residual {:.3}, t residual {:.1e}, |V(t) - I| {v_err:.1e}",
        half.outcome.residual(),
        cert.residual
    ))
}

fn integrator_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let grid = TimeGrid::new(1.0, 1e-3).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let d = rng.random_range(2..=6);
        let h = random_hermitian(d, &mut rng);
        let n_l = rng.random_range(1..=3);
        let l_ops: Vec<CMatrix> = (0..n_l)
            .map(|_| random_matrix(d, d, &mut rng) * r(0.5))
            .collect();
        let model = LindbladModel::constant(h, l_ops, 1.0).map_err(|e| e.to_string())?;
        let rho = random_density(d, &mut rng);
        let a = propagate_operator(&model, &rho, &grid, Integrator::Rk4, 1e-3)
            .map_err(|e| e.to_string())?;
        let b = propagate_operator(&model, &rho, &grid, Integrator::SegmentExpm, 1e-3)
            .map_err(|e| e.to_string())?;
        worst = worst.max(trace_distance(a.last().unwrap(), b.last().unwrap()));
    }
    ensure(worst <= 1e-6, || format!("trace distance {worst:.3e}"))?;
    Ok(format!("max trace distance {worst:.1e}"))
}

fn perturbation_scaling() -> Outcome {
    let base = noiseless_subsystem(2, 2, 2, 1.0, &mut ChaCha8Rng::seed_from_u64(1))
        .map_err(|e| e.to_string())?;
    let grid = TimeGrid::new(1.0, 1e-2).unwrap();
    let opts = TrackOptions {
        tol: 1e-10,
        max_step: 1e-3,
        allow_expansion: false,
    };
    let mut r1 = Vec::new();
    for eps in [1e-4, 1e-3, 1e-2] {
        let inst = perturb_lindblad(&base, eps, &mut ChaCha8Rng::seed_from_u64(109))
            .map_err(|e| e.to_string())?;
        let traj = track_recovery_unitary(&inst.model, &inst.dec, &grid, &opts)
            .map_err(|e| e.to_string())?;
        r1.push(
            traj.samples
                .iter()
                .map(|s| s.residuals.r1)
                .fold(0.0f64, f64::max),
        );
    }
    ensure(r1[0] < r1[1] && r1[1] < r1[2], || {
        format!("r1 not increasing: {r1:?}")
    })?;
    for w in r1.windows(2) {
        let ratio = w[1] / w[0];
        ensure((10.0 / 3.0..=30.0).contains(&ratio), || {
            format!("r1 ratio {ratio:.3} per decade")
        })?;
    }
    Ok(format!(
        "max r1 = {:.3e}, {:.3e}, {:.3e}",
        r1[0], r1[1], r1[2]
    ))
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion {
            id: 1,
            title: "channel round trip",
            limit: Duration::from_secs(10),
            run: channel_round_trip,
        },
        Criterion {
            id: 2,
            title: "noiseless Lindblad fixture",
            limit: Duration::from_secs(5),
            run: noiseless_fixture,
        },
        Criterion {
            id: 3,
            title: "drift tracking",
            limit: Duration::from_secs(2),
            run: drift_tracking,
        },
        Criterion {
            id: 4,
            title: "gauge expansion",
            limit: Duration::from_secs(5),
            run: gauge_expansion,
        },
        Criterion {
            id: 5,
            title: "environment-entangled gauge",
            limit: Duration::from_secs(2),
            run: entangled_gauge,
        },
        Criterion {
            id: 6,
            title: "environment-subspace discrimination",
            limit: Duration::from_secs(1),
            run: discrimination,
        },
        Criterion {
            id: 7,
            title: "echo",
            limit: Duration::from_secs(2),
            run: echo,
        },
        Criterion {
            id: 8,
            title: "integrator agreement",
            limit: Duration::from_secs(20),
            run: integrator_agreement,
        },
        Criterion {
            id: 9,
            title: "perturbation scaling",
            limit: Duration::from_secs(10),
            run: perturbation_scaling,
        },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= c.limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; runtime over {:?}", c.limit))
            }
        });
        match outcome {
            Ok(detail) => println!(
                "PASS {}. {}: {detail} [{:.3} s, limit {:?}]",
                c.id,
                c.title,
                elapsed.as_secs_f64(),
                c.limit
            ),
            Err(reason) => {
                println!(
                    "FAIL {}. {}: {reason} [{:.3} s, limit {:?}]",
                    c.id,
                    c.title,
                    elapsed.as_secs_f64(),
                    c.limit
                );
                failed.push(c.id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
