// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Joint system–environment Hamiltonians.
//!
//! Three questions are answered here:
//!
//! * [`track_system_frame`]: is `H^A` unitarily correctable by the frame that
//!   follows the system Hamiltonian, whatever the environment does?
//! * [`track_double_frame`]: is it recoverable with a gauge factor grown to
//!   `H^{B′}`, tracking a system frame `U(t)` and a gauge–environment frame
//!   `W(t)` together, possibly for environments initialized inside a
//!   subspace?
//! * [`check_at_time`]: is it recoverable at one instant `T`, regardless of
//!   what happened before?
//!
//! Joint operators use the ordering `H^S ⊗ H^E` (system index major).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::channels::{
    admissibility_residual, build_recovery, kraus_from_unitary, Admissibility, EnvironmentState,
    KrausChannel, RecoveryOutcome,
};
use crate::code_space::{fit_a_trivial, SubsystemDecomposition};
use crate::linalg::{
    c, ensure_hermitian, frobenius, hermitian_basis, identity, kron, lstsq_min_norm, matrix_exp,
    polar_unitary, r, realify, time_ordered_unitary, zeros, CMatrix,
};
use crate::markovian::{Verdict, MAX_STEP_DRIFT};
use crate::schedule::{SegmentClock, TimeGrid};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct InteractionTerm {
    pub s: CMatrix,
    pub e: CMatrix,
}

#[derive(Debug, Clone)]
pub struct HamiltonianSegment {
    pub duration: f64,
    pub h_s: CMatrix,
    pub h_e: CMatrix,
    pub terms: Vec<InteractionTerm>,
}

impl HamiltonianSegment {
    /// `H_S ⊗ I + I ⊗ H_E + Σ S_j ⊗ E_j`.
    pub fn joint(&self) -> Result<CMatrix> {
        let (d_s, d_e) = (self.h_s.nrows(), self.h_e.nrows());
        let mut h = kron(&self.h_s, &identity(d_e))? + kron(&identity(d_s), &self.h_e)?;
        for term in &self.terms {
            h += kron(&term.s, &term.e)?;
        }
        Ok(h)
    }

    /// `H_I = Σ_k S′_k ⊗ G_k` over an orthonormal Hermitian basis `{G_k}` of
    /// the environment. The component along `I^E` is returned separately
    /// since it acts on the system alone.
    pub fn canonical_interaction(&self) -> Result<(CMatrix, Vec<CMatrix>)> {
        let (d_s, d_e) = (self.h_s.nrows(), self.h_e.nrows());
        let mut h_i = zeros(d_s * d_e, d_s * d_e);
        for term in &self.terms {
            h_i += kron(&term.s, &term.e)?;
        }
        let basis = hermitian_basis(d_e);
        let mut parts = basis.iter().map(|g| {
            CMatrix::from_fn(d_s, d_s, |s, t| {
                let mut acc = c(0.0, 0.0);
                for e in 0..d_e {
                    for f in 0..d_e {
                        acc += h_i[(s * d_e + e, t * d_e + f)] * g[(f, e)];
                    }
                }
                acc
            })
        });
        let local =
            parts.next().expect("basis starts with the identity") * r(1.0 / (d_e as f64).sqrt());
        Ok((local, parts.collect()))
    }
}

/// Piecewise-constant joint Hamiltonian.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    d_s: usize,
    d_e: usize,
    segments: Vec<HamiltonianSegment>,
    clock: SegmentClock,
}

impl HamiltonianModel {
    pub fn new(d_s: usize, d_e: usize, segments: Vec<HamiltonianSegment>) -> Result<Self> {
        let clock = SegmentClock::new(segments.iter().map(|s| s.duration))?;
        for (k, seg) in segments.iter().enumerate() {
            check_part(&seg.h_s, d_s, &format!("segment {k} system Hamiltonian"))?;
            check_part(
                &seg.h_e,
                d_e,
                &format!("segment {k} environment Hamiltonian"),
            )?;
            for (j, term) in seg.terms.iter().enumerate() {
                check_part(&term.s, d_s, &format!("segment {k} S_{j}"))?;
                check_part(&term.e, d_e, &format!("segment {k} E_{j}"))?;
            }
        }
        Ok(HamiltonianModel {
            d_s,
            d_e,
            segments,
            clock,
        })
    }

    /// A model given directly by joint generators, with no split into parts.
    /// The joint operator is stored as a sum of `|s⟩⟨s′| ⊗ E_{ss′}`-type terms
    /// through a Hermitian operator basis of the system.
    pub fn from_joint(d_s: usize, d_e: usize, joint: Vec<(CMatrix, f64)>) -> Result<Self> {
        let basis = hermitian_basis(d_s);
        let segments = joint
            .into_iter()
            .map(|(h, duration)| {
                if h.shape() != (d_s * d_e, d_s * d_e) {
                    return Err(Error::DimensionMismatch(format!(
                        "joint generator is {:?}, expected {1}x{1}",
                        h.shape(),
                        d_s * d_e
                    )));
                }
                ensure_hermitian(&h, "joint Hamiltonian", 1e-9)?;
                let terms = basis
                    .iter()
                    .map(|g| {
                        // E = Tr_S[(G ⊗ I) H], Hermitian because G and H are
                        let e = CMatrix::from_fn(d_e, d_e, |e, f| {
                            let mut acc = c(0.0, 0.0);
                            for s in 0..d_s {
                                for t in 0..d_s {
                                    acc += g[(t, s)] * h[(s * d_e + e, t * d_e + f)];
                                }
                            }
                            acc
                        });
                        InteractionTerm {
                            s: g.clone(),
                            e: crate::linalg::hermitian_part(&e),
                        }
                    })
                    .filter(|t| frobenius(&t.e) > 0.0)
                    .collect();
                Ok(HamiltonianSegment {
                    duration,
                    h_s: zeros(d_s, d_s),
                    h_e: zeros(d_e, d_e),
                    terms,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(d_s, d_e, segments)
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn d_e(&self) -> usize {
        self.d_e
    }

    pub fn segments(&self) -> &[HamiltonianSegment] {
        &self.segments
    }

    pub fn total_time(&self) -> f64 {
        self.clock.total()
    }

    pub fn segment_at(&self, t: f64) -> Result<&HamiltonianSegment> {
        Ok(&self.segments[self.clock.index_at(t)?])
    }

    /// Conjugates every environment operator by `v_e`.
    pub fn relabel_environment(&self, v_e: &CMatrix) -> Result<Self> {
        let conj = |m: &CMatrix| v_e * m * v_e.adjoint();
        let segments = self
            .segments
            .iter()
            .map(|seg| HamiltonianSegment {
                duration: seg.duration,
                h_s: seg.h_s.clone(),
                h_e: conj(&seg.h_e),
                terms: seg
                    .terms
                    .iter()
                    .map(|t| InteractionTerm {
                        s: t.s.clone(),
                        e: conj(&t.e),
                    })
                    .collect(),
            })
            .collect();
        Self::new(self.d_s, self.d_e, segments)
    }
}

fn check_part(m: &CMatrix, dim: usize, what: &str) -> Result<()> {
    if m.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {:?}, expected {dim}x{dim}",
            m.shape()
        )));
    }
    ensure_hermitian(m, what, 1e-9)
}

/// `H_SE(t)`.
pub fn assemble_hse(model: &HamiltonianModel, t: f64) -> Result<CMatrix> {
    model.segment_at(t)?.joint()
}

/// `V_SE(T) = 𝒯 exp(−i ∫₀ᵀ H_SE)`. Each constant piece is exponentiated in
/// `substeps` equal parts.
pub fn full_propagator(model: &HamiltonianModel, t_end: f64, substeps: usize) -> Result<CMatrix> {
    let n = model.d_s * model.d_e;
    let pieces = model.clock.split(0.0, t_end)?;
    if pieces.is_empty() {
        return Ok(identity(n));
    }
    let schedule = pieces
        .into_iter()
        .map(|(idx, len)| Ok((model.segments[idx].joint()?, len)))
        .collect::<Result<Vec<_>>>()?;
    time_ordered_unitary(&schedule, substeps)
}

/// `V_SE(t)` at every grid point, built incrementally.
pub fn propagators_on_grid(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    substeps: usize,
) -> Result<Vec<CMatrix>> {
    let points = grid.points();
    let mut out = Vec::with_capacity(points.len());
    let mut v = identity(model.d_s * model.d_e);
    let mut prev = 0.0;
    for &t in &points {
        let pieces = model.clock.split(prev, t)?;
        if !pieces.is_empty() {
            let schedule = pieces
                .into_iter()
                .map(|(idx, len)| Ok((model.segments[idx].joint()?, len)))
                .collect::<Result<Vec<_>>>()?;
            v = time_ordered_unitary(&schedule, substeps)? * v;
        }
        out.push(v.clone());
        prev = t;
    }
    Ok(out)
}

/// Subspace `H^{E₀}` the environment starts in.
#[derive(Debug, Clone)]
pub struct EnvSubspace {
    iso: CMatrix,
}

impl EnvSubspace {
    pub fn new(iso: CMatrix) -> Result<Self> {
        let defect = frobenius(&(iso.adjoint() * &iso - identity(iso.ncols())));
        if defect > 1e-9 || iso.ncols() == 0 {
            return Err(Error::NonOrthogonal { defect });
        }
        Ok(EnvSubspace { iso })
    }

    pub fn isometry(&self) -> &CMatrix {
        &self.iso
    }
}

#[derive(Debug, Clone)]
pub enum EnvSpec {
    /// No restriction on the initial environment state.
    Full,
    Subspace(EnvSubspace),
}

impl EnvSpec {
    pub fn isometry(&self, d_e: usize) -> CMatrix {
        match self {
            EnvSpec::Full => identity(d_e),
            EnvSpec::Subspace(s) => s.iso.clone(),
        }
    }

    /// The uniform mixture over the allowed subspace.
    pub fn environment_state(&self, d_e: usize) -> EnvironmentState {
        match self {
            EnvSpec::Full => EnvironmentState::maximally_mixed(d_e),
            EnvSpec::Subspace(s) => EnvironmentState::Subspace {
                basis: s.iso.clone(),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SystemFrameSample {
    pub t: f64,
    pub u: CMatrix,
    /// Interaction condition, root-sum-square over the canonical terms.
    pub r_s: f64,
    /// `(H̃_S + H′) J` against `I^A ⊗ D`; zero for the canonical `H′`.
    pub r_h: f64,
}

#[derive(Debug, Clone)]
pub struct SystemFrameTrajectory {
    pub samples: Vec<SystemFrameSample>,
    pub verdict: Verdict,
}

impl SystemFrameTrajectory {
    pub fn max_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.r_s.max(s.r_h))
            .fold(0.0, f64::max)
    }
}

/// Unitary correctability in the frame `U†(t) = 𝒯 exp(−i ∫ H_S)` with
/// `H′ = −H̃_S`. The part of `H_I` along `I^E` counts as system Hamiltonian.
pub fn track_system_frame(
    model: &HamiltonianModel,
    dec: &SubsystemDecomposition,
    grid: &TimeGrid,
    tol: f64,
) -> Result<SystemFrameTrajectory> {
    if dec.d_s() != model.d_s {
        return Err(Error::DimensionMismatch(format!(
            "model has d_S = {}, decomposition has {}",
            model.d_s,
            dec.d_s()
        )));
    }
    let canon: Vec<(CMatrix, Vec<CMatrix>)> = model
        .segments
        .iter()
        .map(HamiltonianSegment::canonical_interaction)
        .collect::<Result<_>>()?;
    let j = dec.isometry();
    let mut u_dag = identity(model.d_s);
    let mut samples = Vec::new();
    let mut verdict = Verdict::Correctable;
    let mut prev = 0.0;
    for t in grid.points() {
        for (idx, len) in model.clock.split(prev, t)? {
            let h = &model.segments[idx].h_s + &canon[idx].0;
            u_dag = matrix_exp(&(h * c(0.0, -len)), 1e-15)? * u_dag;
        }
        prev = t;
        let u = u_dag.adjoint();
        let idx = model.clock.index_at(t)?;
        let h_tilde = &u * (&model.segments[idx].h_s + &canon[idx].0) * &u_dag;
        let hprime = -&h_tilde;
        let r_h = fit_a_trivial(&((h_tilde + hprime) * j), j, dec.d_a()).residual();
        let r_s = canon[idx]
            .1
            .iter()
            .map(|s| {
                let fit = fit_a_trivial(&(&u * s * &u_dag * j), j, dec.d_a());
                fit.residual().powi(2)
            })
            .sum::<f64>()
            .sqrt();
        let worst = r_s.max(r_h);
        if verdict.is_correctable() && worst > tol {
            verdict = Verdict::NotCorrectable {
                first_failure_t: t,
                residual: worst,
            };
        }
        samples.push(SystemFrameSample { t, u, r_s, r_h });
    }
    Ok(SystemFrameTrajectory { samples, verdict })
}

/// Which gauge factor the environment-side frame `W` may act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WSupport {
    /// The largest gauge factor `H^{B′}` that fits beside `H^A`.
    BPrime,
    /// The original gauge factor; recovery then lands back in `H^A ⊗ H^B`.
    B,
}

/// Fixed subspaces of the two-frame construction.
#[derive(Debug, Clone)]
pub struct FrameSpaces {
    d_a: usize,
    d_e: usize,
    /// `H^A ⊗ H^{B′}` inside `H^S`.
    pub output: SubsystemDecomposition,
    /// `J_out = J′ ⊗ I^E`.
    j_out: CMatrix,
    /// `J_in = J ⊗ J_{E₀}`: range of `P^{ABE₀}`.
    j_in: CMatrix,
    p_perp: CMatrix,
    basis: Vec<CMatrix>,
}

impl FrameSpaces {
    pub fn new(
        dec: &SubsystemDecomposition,
        d_e: usize,
        env: &EnvSpec,
        support: WSupport,
    ) -> Result<Self> {
        let output = match support {
            WSupport::BPrime => dec.maximal_extension(),
            WSupport::B => dec.clone(),
        };
        let iso_e = env.isometry(d_e);
        if iso_e.nrows() != d_e {
            return Err(Error::DimensionMismatch(format!(
                "environment subspace lives in dimension {}, model has d_E = {d_e}",
                iso_e.nrows()
            )));
        }
        let j_out = kron(output.isometry(), &identity(d_e))?;
        let j_in = kron(dec.isometry(), &iso_e)?;
        let n = dec.d_s() * d_e;
        let p_perp = identity(n) - &j_in * j_in.adjoint();
        let eye_e = identity(d_e);
        let basis = hermitian_basis(dec.d_s())
            .iter()
            .map(|g| kron(g, &eye_e))
            .collect::<Result<_>>()?;
        Ok(FrameSpaces {
            d_a: dec.d_a(),
            d_e,
            output,
            j_out,
            j_in,
            p_perp,
            basis,
        })
    }

    pub fn d_b_prime(&self) -> usize {
        self.output.d_b()
    }

    /// Dimension of `H^{B′} ⊗ H^E`, where `W` acts.
    pub fn w_dim(&self) -> usize {
        self.output.d_b() * self.d_e
    }

    /// `I^A ⊗ w ⊕ I` on the joint space.
    pub fn embed_w(&self, w: &CMatrix) -> Result<CMatrix> {
        let n = self.j_out.nrows();
        let inner = kron(&identity(self.d_a), w)?;
        Ok(&self.j_out * inner * self.j_out.adjoint() + identity(n)
            - &self.j_out * self.j_out.adjoint())
    }

    /// `x − J_out (I^A ⊗ C(x))` for `x` on `J_in`, and `C(x)`.
    fn off_form(&self, x: &CMatrix) -> (CMatrix, CMatrix) {
        let fit = fit_a_trivial(x, &self.j_out, self.d_a);
        let trivial = kron(&identity(self.d_a), &fit.c).expect("small");
        (x - &self.j_out * trivial, fit.c)
    }
}

#[derive(Debug, Clone)]
pub struct HprimeSolution {
    /// `H′` on `H^S`.
    pub hprime: CMatrix,
    /// `F^{B′E}` restricted to the input block.
    pub f: CMatrix,
    pub residual: f64,
    coeffs: DVector<f64>,
}

/// Least-squares `H′` for `(X + W (H′ ⊗ I) W†) P^{ABE₀} = I^A ⊗ F`.
///
/// `frame_h` is the joint Hamiltonian in both frames and `w_full` the
/// embedded environment-side frame. The unknown `H′` is expanded in an
/// orthonormal Hermitian basis; among minimizers the one closest to
/// `previous` is returned.
pub fn solve_hprime(
    spaces: &FrameSpaces,
    frame_h: &CMatrix,
    w_full: &CMatrix,
    previous: Option<&HprimeSolution>,
    tol: f64,
) -> Result<HprimeSolution> {
    let n = spaces.j_in.nrows();
    if frame_h.shape() != (n, n) || w_full.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "frame operators must be {n}x{n}, got {:?} and {:?}",
            frame_h.shape(),
            w_full.shape()
        )));
    }
    let wd = w_full.adjoint();
    let rhs = realify(&spaces.off_form(&(frame_h * &spaces.j_in)).0);
    let cols: Vec<DVector<f64>> = spaces
        .basis
        .iter()
        .map(|g| realify(&spaces.off_form(&(w_full * g * &wd * &spaces.j_in)).0))
        .collect();
    let a = DMatrix::from_columns(&cols);
    let prev = previous
        .map(|p| p.coeffs.clone())
        .unwrap_or_else(|| DVector::zeros(cols.len()));
    let target = -(&rhs) - &a * &prev;
    let coeffs = prev + lstsq_min_norm(&a, &target, tol.max(1e-12));
    let d_s = spaces.output.d_s();
    let hprime = spaces
        .basis
        .iter()
        .zip(hermitian_basis(d_s))
        .zip(coeffs.iter())
        .fold(zeros(d_s, d_s), |acc, ((_, g), &x)| acc + g * r(x));
    let y = frame_h + w_full * kron(&hprime, &identity(spaces.d_e))? * &wd;
    let (off, f) = spaces.off_form(&(&y * &spaces.j_in));
    Ok(HprimeSolution {
        hprime,
        f,
        residual: frobenius(&off),
        coeffs,
    })
}

#[derive(Debug, Clone)]
pub struct HppSolution {
    /// `H″` on `H^{B′} ⊗ H^E`.
    pub small: CMatrix,
    /// `I^A ⊗ H″ ⊕ 0` on the joint space.
    pub embedded: CMatrix,
    /// Distance of the unrestricted choice from the admissible support.
    pub projection_residual: f64,
    /// How far `(Y + H″) P^{ABE₀}` is from `I^A ⊗ D` with `D` inside the
    /// input block.
    pub frame_condition_residual: f64,
}

/// `H″ = −Y + P_⊥ Y P_⊥` projected onto operators `I^A ⊗ h` on
/// `H^A ⊗ H^{B′} ⊗ H^E`, where `Y = X + Ĥ′`.
pub fn choose_hpp(spaces: &FrameSpaces, frame_h_plus: &CMatrix) -> Result<HppSolution> {
    let raw = -frame_h_plus + &spaces.p_perp * frame_h_plus * &spaces.p_perp;
    let compressed = spaces.j_out.adjoint() * &raw * &spaces.j_out;
    let m = spaces.w_dim();
    let mut small = zeros(m, m);
    for a in 0..spaces.d_a {
        small += compressed.view((a * m, a * m), (m, m));
    }
    small /= r(spaces.d_a as f64);
    let small = crate::linalg::hermitian_part(&small);
    let embedded = &spaces.j_out * kron(&identity(spaces.d_a), &small)? * spaces.j_out.adjoint();
    let projection_residual = frobenius(&(&raw - &embedded));
    let x = (frame_h_plus + &embedded) * &spaces.j_in;
    let frame_condition_residual = fit_a_trivial(&x, &spaces.j_in, spaces.d_a).residual();
    Ok(HppSolution {
        small,
        embedded,
        projection_residual,
        frame_condition_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DoubleFrameVerdict {
    /// Every step's residual stayed within tolerance.
    Recoverable,
    /// No admissible frames were found at this step size. This does not
    /// prove that none exist.
    NotFoundAtResolution { first_failure_t: f64, residual: f64 },
}

impl DoubleFrameVerdict {
    pub fn is_recoverable(&self) -> bool {
        matches!(self, DoubleFrameVerdict::Recoverable)
    }
}

#[derive(Debug, Clone)]
pub struct DoubleFrameSample {
    pub t: f64,
    pub u: CMatrix,
    pub w: CMatrix,
    pub hprime: CMatrix,
    pub hpp: CMatrix,
    pub hprime_residual: f64,
    pub projection_residual: f64,
    pub frame_condition_residual: f64,
}

#[derive(Debug, Clone)]
pub struct DoubleFrameTrajectory {
    pub samples: Vec<DoubleFrameSample>,
    pub d_b_prime: usize,
    /// `H^A ⊗ H^{B′}`, where the recovered state lives.
    pub output: SubsystemDecomposition,
    pub verdict: DoubleFrameVerdict,
    pub max_drift: f64,
}

impl DoubleFrameTrajectory {
    pub fn max_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.frame_condition_residual)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct DoubleFrameOptions {
    pub env: EnvSpec,
    pub support: WSupport,
    pub tol: f64,
    pub max_step: f64,
}

struct Stage {
    hprime: HprimeSolution,
    hpp: HppSolution,
}

/// `exp(−i h dt) x`.
fn propagate_by(h: &CMatrix, dt: f64, x: &CMatrix) -> Result<CMatrix> {
    Ok(matrix_exp(&(h * c(0.0, -dt)), 1e-14)? * x)
}

fn stage(
    spaces: &FrameSpaces,
    h_joint: &CMatrix,
    u: &CMatrix,
    w: &CMatrix,
    previous: Option<&HprimeSolution>,
    tol: f64,
) -> Result<Stage> {
    let d_e = spaces.d_e;
    let u_full = kron(u, &identity(d_e))?;
    let w_full = spaces.embed_w(w)?;
    let t_full = &w_full * &u_full;
    let x = &t_full * h_joint * t_full.adjoint();
    let hprime = solve_hprime(spaces, &x, &w_full, previous, tol)?;
    let y = x + &w_full * kron(&hprime.hprime, &identity(d_e))? * w_full.adjoint();
    let hpp = choose_hpp(spaces, &y)?;
    Ok(Stage { hprime, hpp })
}

/// Integrates `i dU/dt = H′ U` and `i dW/dt = H″ W` with the exponential
/// midpoint rule, solving for `H′` and `H″` at both stages, and records the residual of the
/// recoverability condition at each grid point.
pub fn track_double_frame(
    model: &HamiltonianModel,
    dec: &SubsystemDecomposition,
    grid: &TimeGrid,
    opts: &DoubleFrameOptions,
) -> Result<DoubleFrameTrajectory> {
    if dec.d_s() != model.d_s {
        return Err(Error::DimensionMismatch(format!(
            "model has d_S = {}, decomposition has {}",
            model.d_s,
            dec.d_s()
        )));
    }
    let spaces = FrameSpaces::new(dec, model.d_e, &opts.env, opts.support)?;
    let joints: Vec<CMatrix> = model
        .segments
        .iter()
        .map(HamiltonianSegment::joint)
        .collect::<Result<_>>()?;
    let mut u = identity(model.d_s);
    let mut w = identity(spaces.w_dim());
    let mut last: Option<HprimeSolution> = None;
    let mut samples = Vec::new();
    let mut verdict = DoubleFrameVerdict::Recoverable;
    let mut max_drift = 0.0f64;
    let mut prev_t = 0.0;
    for t in grid.points() {
        for (idx, len) in model.clock.split(prev_t, t)? {
            let h = &joints[idx];
            let steps = (len / opts.max_step).ceil().max(1.0) as usize;
            let dt = len / steps as f64;
            for _ in 0..steps {
                let k1 = stage(&spaces, h, &u, &w, last.as_ref(), opts.tol)?;
                let u_mid = propagate_by(&k1.hprime.hprime, dt / 2.0, &u)?;
                let w_mid = propagate_by(&k1.hpp.small, dt / 2.0, &w)?;
                let km = stage(&spaces, h, &u_mid, &w_mid, Some(&k1.hprime), opts.tol)?;
                let u_raw = propagate_by(&km.hprime.hprime, dt, &u)?;
                let w_raw = propagate_by(&km.hpp.small, dt, &w)?;
                let u_fix = polar_unitary(&u_raw)?;
                let w_fix = polar_unitary(&w_raw)?;
                let drift = frobenius(&(&u_raw - &u_fix)).max(frobenius(&(&w_raw - &w_fix)));
                if drift > MAX_STEP_DRIFT {
                    return Err(Error::StepTooLarge { t, drift });
                }
                max_drift = max_drift.max(drift);
                u = u_fix;
                w = w_fix;
                last = Some(km.hprime);
            }
        }
        prev_t = t;
        let idx = model.clock.index_at(t)?;
        let here = stage(&spaces, &joints[idx], &u, &w, last.as_ref(), opts.tol)?;
        let residual = here.hpp.frame_condition_residual.max(here.hprime.residual);
        if verdict.is_recoverable() && residual > opts.tol {
            verdict = DoubleFrameVerdict::NotFoundAtResolution {
                first_failure_t: t,
                residual,
            };
        }
        samples.push(DoubleFrameSample {
            t,
            u: u.clone(),
            w: w.clone(),
            hprime: here.hprime.hprime.clone(),
            hpp: here.hpp.small.clone(),
            hprime_residual: here.hprime.residual,
            projection_residual: here.hpp.projection_residual,
            frame_condition_residual: here.hpp.frame_condition_residual,
        });
        last = Some(here.hprime);
    }
    Ok(DoubleFrameTrajectory {
        samples,
        d_b_prime: spaces.d_b_prime(),
        output: spaces.output.clone(),
        verdict,
        max_drift,
    })
}

/// Result of a single-instant check.
#[derive(Debug, Clone)]
pub struct MomentCheck {
    pub propagator: CMatrix,
    pub channel: KrausChannel,
    pub outcome: RecoveryOutcome,
}

/// Kraus operators `√(1/d_{E₀}) ⟨μ| V |ν⟩` induced on the system by a joint
/// unitary, with `ν` over an orthonormal basis of `H^{E₀}`.
pub fn induced_channel(v: &CMatrix, d_s: usize, env: &EnvSpec, d_e: usize) -> Result<KrausChannel> {
    kraus_from_unitary(v, d_s, &env.environment_state(d_e))
}

/// Recoverability at time `T` by a system-only unitary.
pub fn check_at_time(
    model: &HamiltonianModel,
    dec: &SubsystemDecomposition,
    env: &EnvSpec,
    t_end: f64,
    tol: f64,
    substeps: usize,
) -> Result<MomentCheck> {
    let v = full_propagator(model, t_end, substeps)?;
    let channel = induced_channel(&v, model.d_s, env, model.d_e)?;
    let outcome = build_recovery(&channel, dec, tol)?;
    Ok(MomentCheck {
        propagator: v,
        channel,
        outcome,
    })
}

/// Whether a given system unitary `u` recovers `H^A` at time `T`, and into
/// which output decomposition.
pub fn check_recovery_at_time(
    model: &HamiltonianModel,
    dec: &SubsystemDecomposition,
    env: &EnvSpec,
    t_end: f64,
    u: &CMatrix,
    tol: f64,
    substeps: usize,
) -> Result<Admissibility> {
    let v = full_propagator(model, t_end, substeps)?;
    let channel = induced_channel(&v, model.d_s, env, model.d_e)?;
    admissibility_residual(&channel, dec, u, tol)
}
