// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Executes the checks of a scenario and assembles the report.
//!
//! Every verdict from a condition check is paired with the fidelity oracle
//! evaluated on the recovery that check produced.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::fidelity::{
    entanglement_fidelity, hamiltonian_fidelity_series, leakage, markov_fidelity_series,
    reduced_dynamics,
};
use super::random::random_pure;
use super::report::{CheckReport, Report, Series, Summary};
use super::scenario::{CheckSpec, Expectation, LoadedScenario, Model, Scenario};
use crate::channels::{build_recovery, fit_recovery, KrausChannel};
use crate::code_space::{DensityMatrix, SubsystemDecomposition};
use crate::hamiltonian::{
    check_at_time, check_recovery_at_time, full_propagator, propagators_on_grid,
    track_double_frame, track_system_frame, DoubleFrameOptions, DoubleFrameVerdict, EnvSpec,
    HamiltonianModel, WSupport,
};
use crate::linalg::{c, hermitian_eigen, identity, trace, CMatrix};
use crate::markovian::{
    propagate_operator, track_recovery_unitary, Integrator, LindbladModel, TrackOptions, Verdict,
};
use crate::schedule::TimeGrid;
use crate::{Error, Result};

/// Command-line overrides of scenario settings.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, mut scenario: Scenario) -> Scenario {
        if let Some(tol) = self.tol {
            scenario.tol = tol;
        }
        if let Some(seed) = self.seed {
            scenario.seed = seed;
        }
        scenario
    }
}

/// Parses, loads and runs a scenario file. Parse and validation failures
/// are returned as errors; failures inside a check are recorded in the
/// report with status `error`.
pub fn run_path(path: &Path, overrides: &Overrides) -> Result<Report> {
    let scenario = overrides.apply(Scenario::from_path(path)?);
    Ok(run_scenario(&scenario.load()?))
}

pub fn run_scenario(sc: &LoadedScenario) -> Report {
    let spec = &sc.spec;
    let mut report = Report::new(&spec.name, spec.kind, spec.seed, spec.tol);
    let ctx = match Context::new(sc) {
        Ok(ctx) => ctx,
        Err(e) => {
            for check in &spec.checks {
                report.push(CheckReport::error(check.name(), e.to_string()));
            }
            return report;
        }
    };
    for (k, check) in spec.checks.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(k as u64));
        let outcome = ctx.run(check, &mut rng);
        report.push(outcome.unwrap_or_else(|e| CheckReport::error(check.name(), e.to_string())));
    }
    report
}

struct Context<'a> {
    sc: &'a LoadedScenario,
    tol: f64,
    tau: CMatrix,
}

impl<'a> Context<'a> {
    fn new(sc: &'a LoadedScenario) -> Result<Self> {
        let d_b = sc.dec.d_b();
        let tau = match &sc.spec.fidelity.gauge_state {
            Some(m) => {
                let m = m.to_matrix("fidelity.gauge_state")?;
                if m.shape() != (d_b, d_b) {
                    return Err(Error::parse(
                        "fidelity.gauge_state",
                        format!("expected a {d_b}x{d_b} density matrix"),
                    ));
                }
                DensityMatrix::new(m)
                    .map_err(|e| Error::parse("fidelity.gauge_state", e.to_string()))?
                    .into_matrix()
            }
            None => DensityMatrix::maximally_mixed(d_b).into_matrix(),
        };
        Ok(Context {
            sc,
            tol: sc.spec.tol,
            tau,
        })
    }

    fn grid(&self) -> Result<&TimeGrid> {
        self.sc
            .grid
            .as_ref()
            .ok_or_else(|| Error::parse("grid", "required by the requested checks"))
    }

    fn min_fidelity(&self) -> f64 {
        self.sc.spec.fidelity.min_fidelity
    }

    fn run(&self, check: &CheckSpec, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
        let dec = &self.sc.dec;
        match (check, &self.sc.model) {
            (CheckSpec::KrausRecovery { expect }, Model::Channel(ch)) => {
                self.kraus_recovery(ch, dec, *expect)
            }
            (
                CheckSpec::MarkovTracking {
                    expect,
                    allow_expansion,
                    expect_gauge_events,
                },
                Model::Markovian(model),
            ) => self.markov_tracking(model, dec, *expect, *allow_expansion, *expect_gauge_events),
            (CheckSpec::IntegratorAgreement { max_trace_distance }, Model::Markovian(model)) => {
                self.integrator_agreement(model, dec, *max_trace_distance)
            }
            (CheckSpec::SystemFrame { expect }, Model::Hamiltonian { model, env }) => {
                self.system_frame(model, env, dec, *expect, rng)
            }
            (CheckSpec::DoubleFrame { expect, support }, Model::Hamiltonian { model, env }) => {
                self.double_frame(model, env, dec, *expect, *support, rng)
            }
            (
                CheckSpec::Moment {
                    t,
                    expect,
                    expect_d_b_prime,
                    identity_admissible,
                },
                Model::Hamiltonian { model, env },
            ) => self.moment(
                model,
                env,
                dec,
                *t,
                *expect,
                *expect_d_b_prime,
                *identity_admissible,
                rng,
            ),
            (check, _) => Err(Error::InvalidInput(format!(
                "check `{}` does not apply to this model",
                check.name()
            ))),
        }
    }

    fn kraus_recovery(
        &self,
        ch: &KrausChannel,
        dec: &SubsystemDecomposition,
        expect: Option<Expectation>,
    ) -> Result<CheckReport> {
        let outcome = build_recovery(ch, dec, self.tol)?;
        let (cert, certified) = match outcome.certificate() {
            Some(cert) => (cert.clone(), true),
            None => (fit_recovery(ch, dec, self.tol)?, false),
        };
        let fidelity =
            entanglement_fidelity(dec, &self.tau, |s| Ok(ch.apply(s)), &cert.u, &cert.output)?;
        let mut rep = CheckReport::new("kraus_recovery", verdict_name(certified));
        rep.residual = Summary::of(&[outcome.residual()]);
        rep.fidelity_min = Some(fidelity);
        rep.d_b_final = Some(cert.d_b_prime());
        rep.certificate = Some(serde_json::to_value(cert.summary()).expect("serializable"));
        if !certified {
            rep.notes
                .push("recovery shown is the best-effort fit".into());
        }
        self.judge(&mut rep, expect, certified, Some(fidelity));
        Ok(rep)
    }

    fn markov_tracking(
        &self,
        model: &LindbladModel,
        dec: &SubsystemDecomposition,
        expect: Option<Expectation>,
        allow_expansion: bool,
        expect_gauge_events: Option<usize>,
    ) -> Result<CheckReport> {
        let grid = self.grid()?;
        let opts = TrackOptions {
            tol: self.tol,
            max_step: self.sc.spec.max_step,
            allow_expansion,
        };
        let traj = track_recovery_unitary(model, dec, grid, &opts)?;
        let oracle = markov_fidelity_series(
            model,
            &traj,
            &self.tau,
            grid,
            self.sc.spec.integrator,
            self.sc.spec.max_step,
        )?;
        let mut series = Series::new(&[
            "t",
            "r1",
            "r2",
            "r3",
            "nontrivial",
            "leakage_residual",
            "d_b",
            "fidelity",
            "leakage",
        ]);
        for (k, s) in traj.samples.iter().enumerate() {
            series.push(vec![
                s.t,
                s.residuals.r1,
                s.residuals.r2,
                s.residuals.r3,
                s.residuals.nontrivial,
                s.residuals.leakage,
                traj.decomposition_at(k).d_b() as f64,
                oracle.fidelity[k],
                oracle.leakage[k],
            ]);
        }
        let residuals: Vec<f64> = traj.samples.iter().map(|s| s.residuals.max()).collect();
        let correctable = traj.verdict.is_correctable();
        let fidelity_min = min_of(&oracle.fidelity);
        let mut rep = CheckReport::new("markov_tracking", verdict_name(correctable));
        rep.residual = Summary::of(&residuals);
        if let Verdict::NotCorrectable {
            first_failure_t, ..
        } = traj.verdict
        {
            rep.first_failure_t = Some(first_failure_t);
        }
        rep.fidelity_min = Some(fidelity_min);
        rep.leakage_max = Some(max_of(&oracle.leakage));
        rep.gauge_events = traj
            .gauge_events
            .iter()
            .map(|e| serde_json::to_value(e).expect("serializable"))
            .collect();
        rep.d_b_final = Some(traj.final_d_b());
        rep.notes
            .push(format!("max re-unitarization drift {:.3e}", traj.max_drift));
        rep.series = Some(series);
        self.judge(&mut rep, expect, correctable, Some(fidelity_min));
        if let Some(n) = expect_gauge_events {
            if traj.gauge_events.len() != n {
                rep.fail(format!(
                    "expected {n} gauge events, got {}",
                    traj.gauge_events.len()
                ));
            }
        }
        Ok(rep)
    }

    fn integrator_agreement(
        &self,
        model: &LindbladModel,
        dec: &SubsystemDecomposition,
        max_trace_distance: f64,
    ) -> Result<CheckReport> {
        let grid = self.grid()?;
        let d_a = dec.d_a();
        let rho0 = dec.encode(&(identity(d_a) * c(1.0 / d_a as f64, 0.0)), &self.tau)?;
        let step = self.sc.spec.max_step;
        let rk = propagate_operator(model, &rho0, grid, Integrator::Rk4, step)?;
        let ex = propagate_operator(model, &rho0, grid, Integrator::SegmentExpm, step)?;
        let mut series = Series::new(&["t", "trace_distance"]);
        let mut distances = Vec::with_capacity(rk.len());
        for ((t, a), b) in grid.points().into_iter().zip(&rk).zip(&ex) {
            let d = trace_distance(a, b);
            series.push(vec![t, d]);
            distances.push(d);
        }
        let worst = max_of(&distances);
        let agree = worst <= max_trace_distance;
        let mut rep = CheckReport::new(
            "integrator_agreement",
            if agree { "agree" } else { "disagree" },
        );
        rep.residual = Summary::of(&distances);
        rep.series = Some(series);
        if !agree {
            rep.fail(format!(
                "trace distance {worst:.3e} exceeds {max_trace_distance:.1e}"
            ));
        }
        Ok(rep)
    }

    /// Environment states for the oracle: the uniform state on the allowed
    /// subspace, any listed states and the requested number of random pure
    /// states inside the subspace.
    fn env_states(&self, env: &EnvSpec, d_e: usize, rng: &mut ChaCha8Rng) -> Result<Vec<CMatrix>> {
        let mut states = vec![env.environment_state(d_e).density()];
        for (i, m) in self.sc.spec.fidelity.env_states.iter().enumerate() {
            let loc = format!("fidelity.env_states[{i}]");
            let m = m.to_matrix(&loc)?;
            if m.shape() != (d_e, d_e) {
                return Err(Error::parse(
                    loc,
                    format!("expected a {d_e}x{d_e} density matrix"),
                ));
            }
            states.push(
                DensityMatrix::new(m)
                    .map_err(|e| Error::parse(loc, e.to_string()))?
                    .into_matrix(),
            );
        }
        let support = env.isometry(d_e);
        for _ in 0..self.sc.spec.fidelity.random_env_states {
            let ket = &support * random_pure(support.ncols(), rng);
            states.push(&ket * ket.adjoint());
        }
        Ok(states)
    }

    fn system_frame(
        &self,
        model: &HamiltonianModel,
        env: &EnvSpec,
        dec: &SubsystemDecomposition,
        expect: Option<Expectation>,
        rng: &mut ChaCha8Rng,
    ) -> Result<CheckReport> {
        let grid = self.grid()?;
        let traj = track_system_frame(model, dec, grid, self.tol)?;
        let recoveries: Vec<CMatrix> = traj.samples.iter().map(|s| s.u.clone()).collect();
        let states = self.env_states(env, model.d_e(), rng)?;
        let fidelity =
            hamiltonian_fidelity_series(model, dec, &self.tau, grid, &recoveries, dec, &states, 1)?;
        let mut series = Series::new(&["t", "r_s", "r_h", "fidelity"]);
        for (s, f) in traj.samples.iter().zip(&fidelity) {
            series.push(vec![s.t, s.r_s, s.r_h, *f]);
        }
        let residuals: Vec<f64> = traj.samples.iter().map(|s| s.r_s.max(s.r_h)).collect();
        let correctable = traj.verdict.is_correctable();
        let fidelity_min = min_of(&fidelity);
        let mut rep = CheckReport::new("system_frame", verdict_name(correctable));
        rep.residual = Summary::of(&residuals);
        if let Verdict::NotCorrectable {
            first_failure_t, ..
        } = traj.verdict
        {
            rep.first_failure_t = Some(first_failure_t);
        }
        rep.fidelity_min = Some(fidelity_min);
        rep.notes.push(format!(
            "oracle minimum over {} environment states",
            states.len()
        ));
        rep.series = Some(series);
        self.judge(&mut rep, expect, correctable, Some(fidelity_min));
        Ok(rep)
    }

    fn double_frame(
        &self,
        model: &HamiltonianModel,
        env: &EnvSpec,
        dec: &SubsystemDecomposition,
        expect: Option<Expectation>,
        support: WSupport,
        rng: &mut ChaCha8Rng,
    ) -> Result<CheckReport> {
        let grid = self.grid()?;
        let opts = DoubleFrameOptions {
            env: env.clone(),
            support,
            tol: self.tol,
            max_step: self.sc.spec.max_step,
        };
        let traj = track_double_frame(model, dec, grid, &opts)?;
        let recoveries: Vec<CMatrix> = traj.samples.iter().map(|s| s.u.clone()).collect();
        let states = self.env_states(env, model.d_e(), rng)?;
        let fidelity = hamiltonian_fidelity_series(
            model,
            dec,
            &self.tau,
            grid,
            &recoveries,
            &traj.output,
            &states,
            1,
        )?;
        let mut series = Series::new(&[
            "t",
            "hprime_residual",
            "projection_residual",
            "frame_condition_residual",
            "d_b_prime",
            "fidelity",
        ]);
        for (s, f) in traj.samples.iter().zip(&fidelity) {
            series.push(vec![
                s.t,
                s.hprime_residual,
                s.projection_residual,
                s.frame_condition_residual,
                traj.d_b_prime as f64,
                *f,
            ]);
        }
        let residuals: Vec<f64> = traj
            .samples
            .iter()
            .map(|s| s.frame_condition_residual.max(s.hprime_residual))
            .collect();
        let recoverable = traj.verdict.is_recoverable();
        let fidelity_min = min_of(&fidelity);
        let mut rep = CheckReport::new(
            "double_frame",
            if recoverable {
                "recoverable"
            } else {
                "not_found_at_resolution"
            },
        );
        rep.residual = Summary::of(&residuals);
        if let DoubleFrameVerdict::NotFoundAtResolution {
            first_failure_t, ..
        } = traj.verdict
        {
            rep.first_failure_t = Some(first_failure_t);
            rep.notes
                .push("no frames found at this step size; this does not prove none exist".into());
        }
        rep.fidelity_min = Some(fidelity_min);
        rep.d_b_final = Some(traj.d_b_prime);
        rep.series = Some(series);
        self.judge(&mut rep, expect, recoverable, Some(fidelity_min));
        Ok(rep)
    }

    #[allow(clippy::too_many_arguments)]
    fn moment(
        &self,
        model: &HamiltonianModel,
        env: &EnvSpec,
        dec: &SubsystemDecomposition,
        t: f64,
        expect: Option<Expectation>,
        expect_d_b_prime: Option<usize>,
        identity_admissible: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<CheckReport> {
        let check = check_at_time(model, dec, env, t, self.tol, 1)?;
        let v = full_propagator(model, t, 1)?;
        let states = self.env_states(env, model.d_e(), rng)?;
        let certified = check.outcome.is_certified();
        let cert = match check.outcome.certificate() {
            Some(cert) => cert.clone(),
            None => fit_recovery(&check.channel, dec, self.tol)?,
        };
        let fidelity_with = |u: &CMatrix, output: &SubsystemDecomposition| -> Result<f64> {
            states.iter().try_fold(f64::INFINITY, |m, rho_e| {
                let f = entanglement_fidelity(
                    dec,
                    &self.tau,
                    |s| reduced_dynamics(&v, s, rho_e),
                    u,
                    output,
                )?;
                Ok(m.min(f))
            })
        };
        let mut fidelity_min = fidelity_with(&cert.u, &cert.output)?;
        let mut rep = CheckReport::new("moment", verdict_name(certified));
        rep.residual = Summary::of(&[check.outcome.residual()]);
        rep.d_b_final = Some(cert.d_b_prime());
        rep.certificate = Some(serde_json::to_value(cert.summary()).expect("serializable"));
        rep.notes.push(format!(
            "oracle minimum over {} environment states at t = {t}",
            states.len()
        ));
        if !certified {
            rep.notes
                .push("recovery shown is the best-effort fit".into());
        }
        if identity_admissible {
            let adm =
                check_recovery_at_time(model, dec, env, t, &identity(dec.d_s()), self.tol, 1)?;
            rep.notes
                .push(format!("identity recovery residual {:.3e}", adm.residual));
            match &adm.output {
                Some(out) if adm.residual <= self.tol.sqrt() => {
                    fidelity_min = fidelity_min.min(fidelity_with(&identity(dec.d_s()), out)?);
                }
                _ => rep.fail(format!(
                    "identity recovery is not admissible (residual {:.3e})",
                    adm.residual
                )),
            }
        }
        rep.fidelity_min = Some(fidelity_min);
        self.judge(&mut rep, expect, certified, Some(fidelity_min));
        if let Some(n) = expect_d_b_prime {
            if certified && cert.d_b_prime() != n {
                rep.fail(format!("expected d_B′ = {n}, got {}", cert.d_b_prime()));
            }
        }
        Ok(rep)
    }

    /// Compares the verdict with the expectation and with the oracle.
    fn judge(
        &self,
        rep: &mut CheckReport,
        expect: Option<Expectation>,
        positive: bool,
        fidelity: Option<f64>,
    ) {
        rep.expected = expect;
        if let Some(e) = expect {
            if (e == Expectation::Correctable) != positive {
                rep.fail(format!("expected {e:?}, got {}", rep.verdict));
            }
        }
        if let Some(f) = fidelity {
            if positive && f < self.min_fidelity() {
                rep.fail(format!(
                    "oracle fidelity {f:.9} below {} for a positive verdict",
                    self.min_fidelity()
                ));
            }
        }
    }
}

fn verdict_name(positive: bool) -> &'static str {
    if positive {
        "correctable"
    } else {
        "not_correctable"
    }
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `½ ‖a − b‖₁` for Hermitian `a`, `b`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(&crate::linalg::hermitian_part(&(a - b)));
    0.5 * values.iter().map(|v| v.abs()).sum::<f64>()
}

/// Uncorrected evolution of the encoded maximally mixed logical state:
/// trace, purity, leakage from the initial code and entanglement fidelity
/// with no recovery.
pub fn evolve(sc: &LoadedScenario) -> Result<Series> {
    let ctx = Context::new(sc)?;
    let dec = &sc.dec;
    let d_a = dec.d_a();
    let rho0 = dec.encode(&(identity(d_a) * c(1.0 / d_a as f64, 0.0)), &ctx.tau)?;
    let pab = dec.projector_ab();
    let eye = identity(dec.d_s());
    let mut series = Series::new(&["t", "trace", "purity", "leakage", "fidelity"]);
    let mut push = |t: f64, rho: &CMatrix, f: f64| {
        series.push(vec![
            t,
            trace(rho).re,
            trace(&(rho * rho)).re,
            leakage(rho, &pab),
            f,
        ]);
    };
    match &sc.model {
        Model::Channel(ch) => {
            let f = entanglement_fidelity(dec, &ctx.tau, |s| Ok(ch.apply(s)), &eye, dec)?;
            push(1.0, &ch.apply(&rho0), f);
        }
        Model::Markovian(model) => {
            let grid = ctx.grid()?;
            let step = sc.spec.max_step;
            let states = propagate_operator(model, &rho0, grid, sc.spec.integrator, step)?;
            let mut blocks = Vec::with_capacity(d_a * d_a);
            for i in 0..d_a {
                for j in 0..d_a {
                    let sigma = dec.encode(&crate::linalg::ket_bra(d_a, i, j), &ctx.tau)?;
                    blocks.push(propagate_operator(
                        model,
                        &sigma,
                        grid,
                        sc.spec.integrator,
                        step,
                    )?);
                }
            }
            for (k, t) in grid.points().into_iter().enumerate() {
                let mut acc = c(0.0, 0.0);
                for i in 0..d_a {
                    for j in 0..d_a {
                        acc += dec.reduce_to_a(&blocks[i * d_a + j][k])?[(i, j)];
                    }
                }
                push(t, &states[k], acc.re / (d_a * d_a) as f64);
            }
        }
        Model::Hamiltonian { model, env } => {
            let grid = ctx.grid()?;
            let rho_e = env.environment_state(model.d_e()).density();
            for (v, t) in propagators_on_grid(model, grid, 1)?
                .iter()
                .zip(grid.points())
            {
                let rho = reduced_dynamics(v, &rho0, &rho_e)?;
                let f = entanglement_fidelity(
                    dec,
                    &ctx.tau,
                    |s| reduced_dynamics(v, s, &rho_e),
                    &eye,
                    dec,
                )?;
                push(t, &rho, f);
            }
        }
    }
    Ok(series)
}
