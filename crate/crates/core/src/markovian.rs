// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Markovian dynamics and recovery by a rotating frame.
//!
//! Generators use the standard GKLS sign,
//! `dρ/dt = −i[H, ρ] + Σ_j (L_j ρ L_j† − ½{L_j†L_j, ρ})`.
//!
//! In the frame `Õ = U O U†` with `i dU/dt = H′ U`, the encoded information
//! is noiseless when, with `P` the code projector,
//!
//! * `L̃_j P = (I^A ⊗ C_j) P`, the jump operators act trivially on `A` and keep
//!   the code inside the code,
//! * `P (H̃ + H′) P = I^A ⊗ D`,
//! * `P (H̃ + H′ + (i/2) Σ L̃_j†L̃_j) P_K = 0`.
//!
//! [`choose_hprime`] picks the `H′` that satisfies the last two identically,
//! which leaves the jump-operator condition as the actual test. When a jump
//! operator starts to push code states into `K` without touching `A`, the
//! tracker grows the gauge factor instead of failing.

use std::collections::HashMap;

use serde::Serialize;

use crate::code_space::{fit_a_trivial, DensityMatrix, SubsystemDecomposition};
use crate::linalg::{
    c, ensure_hermitian, frobenius, identity, matrix_exp, polar_unitary, r, superop_matrix,
    svd_sorted, trace, unvec, vec as vectorize, zeros, CMatrix,
};
use crate::schedule::{SegmentClock, TimeGrid};
use crate::{Error, Result};

/// Largest allowed per-step correction when re-unitarizing `U`.
pub const MAX_STEP_DRIFT: f64 = 1e-6;
/// Largest allowed trace change over a propagation.
pub const MAX_TRACE_DRIFT: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct LindbladSegment {
    pub duration: f64,
    pub h: CMatrix,
    pub l_ops: Vec<CMatrix>,
}

impl LindbladSegment {
    /// `Σ_j L_j† L_j`.
    pub fn l_sum(&self) -> CMatrix {
        let n = self.h.nrows();
        self.l_ops
            .iter()
            .fold(zeros(n, n), |acc, l| acc + l.adjoint() * l)
    }
}

/// Piecewise-constant GKLS generator.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    dim: usize,
    segments: Vec<LindbladSegment>,
    clock: SegmentClock,
}

impl LindbladModel {
    pub fn new(dim: usize, segments: Vec<LindbladSegment>) -> Result<Self> {
        let clock = SegmentClock::new(segments.iter().map(|s| s.duration))?;
        for (k, seg) in segments.iter().enumerate() {
            if seg.h.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!(
                    "segment {k}: H is {:?}, expected {dim}x{dim}",
                    seg.h.shape()
                )));
            }
            ensure_hermitian(&seg.h, &format!("segment {k} Hamiltonian"), 1e-9)?;
            if let Some(j) = seg.l_ops.iter().position(|l| l.shape() != (dim, dim)) {
                return Err(Error::DimensionMismatch(format!(
                    "segment {k}: L_{j} is {:?}, expected {dim}x{dim}",
                    seg.l_ops[j].shape()
                )));
            }
        }
        Ok(LindbladModel {
            dim,
            segments,
            clock,
        })
    }

    /// Single segment with constant operators.
    pub fn constant(h: CMatrix, l_ops: Vec<CMatrix>, duration: f64) -> Result<Self> {
        let dim = h.nrows();
        Self::new(dim, vec![LindbladSegment { duration, h, l_ops }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> &[LindbladSegment] {
        &self.segments
    }

    pub fn total_time(&self) -> f64 {
        self.clock.total()
    }

    pub fn clock(&self) -> &SegmentClock {
        &self.clock
    }

    pub fn segment_at(&self, t: f64) -> Result<&LindbladSegment> {
        Ok(&self.segments[self.clock.index_at(t)?])
    }

    /// The same model with every jump operator replaced by `Σ_k u_{jk} L_k`.
    pub fn mix_jump_operators(&self, mixing: &CMatrix) -> Result<Self> {
        let segments = self
            .segments
            .iter()
            .map(|seg| {
                let n = seg.l_ops.len();
                if mixing.shape() != (n, n) {
                    return Err(Error::DimensionMismatch(format!(
                        "mixing matrix is {:?} for {n} jump operators",
                        mixing.shape()
                    )));
                }
                let l_ops = (0..n)
                    .map(|j| {
                        (0..n).fold(zeros(self.dim, self.dim), |acc, k| {
                            acc + &seg.l_ops[k] * mixing[(j, k)]
                        })
                    })
                    .collect();
                Ok(LindbladSegment {
                    duration: seg.duration,
                    h: seg.h.clone(),
                    l_ops,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(self.dim, segments)
    }
}

fn gkls(h: &CMatrix, l_ops: &[CMatrix], l_sum: &CMatrix, rho: &CMatrix) -> CMatrix {
    let mi = c(0.0, -1.0);
    let mut out = (h * rho - rho * h) * mi;
    for l in l_ops {
        out += l * rho * l.adjoint();
    }
    out - (l_sum * rho + rho * l_sum) * r(0.5)
}

/// `𝓛(t) ρ`.
pub fn liouvillian_apply(model: &LindbladModel, t: f64, rho: &CMatrix) -> Result<CMatrix> {
    let seg = model.segment_at(t)?;
    if rho.shape() != (model.dim, model.dim) {
        return Err(Error::DimensionMismatch(format!(
            "state is {:?}, model dimension is {}",
            rho.shape(),
            model.dim
        )));
    }
    Ok(gkls(&seg.h, &seg.l_ops, &seg.l_sum(), rho))
}

/// Matrix of the segment generator on column-stacked operators.
pub fn liouvillian_superop(seg: &LindbladSegment) -> Result<CMatrix> {
    let n = seg.h.nrows();
    let eye = identity(n);
    let l_sum = seg.l_sum();
    let mut sup = (superop_matrix(&seg.h, &eye)? - superop_matrix(&eye, &seg.h)?) * c(0.0, -1.0);
    for l in &seg.l_ops {
        sup += superop_matrix(l, &l.adjoint())?;
    }
    sup -= (superop_matrix(&l_sum, &eye)? + superop_matrix(&eye, &l_sum)?) * r(0.5);
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Classical fourth-order Runge–Kutta.
    Rk4,
    /// Exact exponential of each segment's vectorized generator.
    SegmentExpm,
}

/// Evolves a state and returns it at every grid point. The state is
/// re-validated at each point.
pub fn propagate(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    integrator: Integrator,
    max_step: f64,
) -> Result<Vec<DensityMatrix>> {
    propagate_operator(model, rho0.matrix(), grid, integrator, max_step)?
        .into_iter()
        .map(DensityMatrix::new)
        .collect()
}

/// Like [`propagate`] for an arbitrary operator, which the linear dynamics
/// act on just as well. Aborts when the trace drifts by more than
/// [`MAX_TRACE_DRIFT`].
pub fn propagate_operator(
    model: &LindbladModel,
    x0: &CMatrix,
    grid: &TimeGrid,
    integrator: Integrator,
    max_step: f64,
) -> Result<Vec<CMatrix>> {
    if x0.shape() != (model.dim, model.dim) {
        return Err(Error::DimensionMismatch(format!(
            "initial operator is {:?}, model dimension is {}",
            x0.shape(),
            model.dim
        )));
    }
    if !(max_step > 0.0) {
        return Err(Error::InvalidInput(format!(
            "step must be positive, got {max_step}"
        )));
    }
    let points = grid.points();
    let tr0 = trace(x0);
    let mut x = x0.clone();
    let mut out = Vec::with_capacity(points.len());
    let mut cache: HashMap<(usize, u64), CMatrix> = HashMap::new();
    let l_sums: Vec<CMatrix> = model.segments.iter().map(LindbladSegment::l_sum).collect();
    let mut prev = 0.0;
    for &t in &points {
        for (idx, len) in model.clock.split(prev, t)? {
            let seg = &model.segments[idx];
            match integrator {
                Integrator::Rk4 => {
                    let steps = (len / max_step).ceil().max(1.0) as usize;
                    let h = len / steps as f64;
                    let f = |y: &CMatrix| gkls(&seg.h, &seg.l_ops, &l_sums[idx], y);
                    for _ in 0..steps {
                        x = rk4_step(&x, h, f);
                    }
                }
                Integrator::SegmentExpm => {
                    let key = (idx, len.to_bits());
                    if let std::collections::hash_map::Entry::Vacant(slot) = cache.entry(key) {
                        let gen = liouvillian_superop(seg)? * r(len);
                        slot.insert(matrix_exp(&gen, 1e-14)?);
                    }
                    let v = &cache[&key] * vectorize(&x);
                    x = unvec(&v, model.dim, model.dim)?;
                }
            }
        }
        let drift = (trace(&x) - tr0).norm();
        if drift > MAX_TRACE_DRIFT * tr0.norm().max(1.0) || !crate::linalg::is_finite(&x) {
            return Err(Error::TraceDrift { t, drift });
        }
        out.push(x.clone());
        prev = t;
    }
    Ok(out)
}

fn rk4_step(y: &CMatrix, h: f64, f: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let k1 = f(y);
    let k2 = f(&(y + &k1 * r(h / 2.0)));
    let k3 = f(&(y + &k2 * r(h / 2.0)));
    let k4 = f(&(y + &k3 * r(h)));
    y + (k1 + (k2 + k3) * r(2.0) + k4) * r(h / 6.0)
}

/// Rotating-frame generator: `H̃ + H′` and the `L̃_j`.
#[derive(Debug, Clone)]
pub struct FrameGenerator {
    pub h: CMatrix,
    pub l_ops: Vec<CMatrix>,
}

impl FrameGenerator {
    pub fn l_sum(&self) -> CMatrix {
        let n = self.h.nrows();
        self.l_ops
            .iter()
            .fold(zeros(n, n), |acc, l| acc + l.adjoint() * l)
    }
}

/// `Õ = u O u†` for the Hamiltonian and each jump operator at `t`; the
/// returned Hamiltonian is `H̃ + hprime`.
pub fn frame_transform(
    model: &LindbladModel,
    t: f64,
    u: &CMatrix,
    hprime: &CMatrix,
) -> Result<FrameGenerator> {
    let seg = model.segment_at(t)?;
    let ud = u.adjoint();
    Ok(FrameGenerator {
        h: u * &seg.h * &ud + hprime,
        l_ops: seg.l_ops.iter().map(|l| u * l * &ud).collect(),
    })
}

/// `H′ = −H̃ − (i/2) P Σ̃ + (i/2) Σ̃ P` with `Σ̃ = Σ L̃_j†L̃_j`.
pub fn choose_hprime(h_tilde: &CMatrix, l_tilde: &[CMatrix], projector: &CMatrix) -> CMatrix {
    let n = h_tilde.nrows();
    let sum = l_tilde
        .iter()
        .fold(zeros(n, n), |acc, l| acc + l.adjoint() * l);
    let half_i = c(0.0, 0.5);
    -h_tilde - (projector * &sum) * half_i + (&sum * projector) * half_i
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct MarkovResiduals {
    /// Jump-operator condition, root-sum-square over `j`.
    pub r1: f64,
    /// `P (H̃ + H′) P` against `I^A ⊗ D`.
    pub r2: f64,
    /// `‖P (H̃ + H′ + (i/2) Σ L̃†L̃) P_K‖_F`.
    pub r3: f64,
    /// Part of `r1` acting non-trivially on `A` inside the code.
    pub nontrivial: f64,
    /// Part of `r1` leaking from the code into `K`.
    pub leakage: f64,
}

impl MarkovResiduals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }
}

pub fn markov_residuals(
    model: &LindbladModel,
    t: f64,
    dec: &SubsystemDecomposition,
    u: &CMatrix,
    hprime: &CMatrix,
) -> Result<MarkovResiduals> {
    let frame = frame_transform(model, t, u, hprime)?;
    Ok(frame_residuals(&frame, dec))
}

pub fn frame_residuals(frame: &FrameGenerator, dec: &SubsystemDecomposition) -> MarkovResiduals {
    let j = dec.isometry();
    let (mut inside2, mut leak2) = (0.0, 0.0);
    for l in &frame.l_ops {
        let fit = fit_a_trivial(&(l * j), j, dec.d_a());
        inside2 += fit.inside * fit.inside;
        leak2 += fit.leakage * fit.leakage;
    }
    let r2 = fit_a_trivial(&(&frame.h * j), j, dec.d_a()).inside;
    let p = dec.projector_ab();
    let pk = dec.projector_k();
    let r3 = frobenius(&(&p * (&frame.h + frame.l_sum() * c(0.0, 0.5)) * pk));
    MarkovResiduals {
        r1: (inside2 + leak2).sqrt(),
        r2,
        r3,
        nontrivial: inside2.sqrt(),
        leakage: leak2.sqrt(),
    }
}

/// Outcome of inspecting the leakage part of the jump-operator condition.
#[derive(Debug, Clone)]
pub enum GaugeProposal {
    /// Nothing leaks.
    None,
    /// New gauge vectors for [`SubsystemDecomposition::expand_gauge`]:
    /// column `level·d_A + a`.
    Expand(CMatrix),
    /// The jump operators act on `A`, inside the code or through the way
    /// they leak.
    NotCorrectable { residual: f64 },
}

/// Splits the jump-operator residual into action on `A` and leakage into `K`
/// and, when only leakage is present and it factors as `I^A ⊗ (new levels)`,
/// proposes the gauge vectors spanning it.
pub fn detect_gauge_expansion(
    l_tilde: &[CMatrix],
    dec: &SubsystemDecomposition,
    tol: f64,
) -> Result<GaugeProposal> {
    let j = dec.isometry();
    let (d_a, d_b) = (dec.d_a(), dec.d_b());
    let mut nontrivial = 0.0f64;
    for l in l_tilde {
        nontrivial = nontrivial.max(fit_a_trivial(&(l * j), j, d_a).inside);
    }
    if nontrivial > tol {
        return Ok(GaugeProposal::NotCorrectable {
            residual: nontrivial,
        });
    }
    let pk = dec.projector_k();
    let leaks: Vec<CMatrix> = l_tilde.iter().map(|l| &pk * l * j).collect();
    let z: Vec<CMatrix> = (0..d_a)
        .map(|a| {
            crate::linalg::hstack(
                &leaks
                    .iter()
                    .map(|x| x.columns(a * d_b, d_b).into_owned())
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let total: f64 = z.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
    if total <= tol {
        return Ok(GaugeProposal::None);
    }
    // Z_a = V_a S W† with one shared S W†, and [V_0 … V_{d_A−1}] orthonormal
    let (w0, s, v) = svd_sorted(&z[0]);
    let k = s.iter().filter(|&&x| x > tol).count();
    if k == 0 {
        return Ok(GaugeProposal::NotCorrectable { residual: total });
    }
    let scale = s[0].max(1.0);
    let vk = v.columns(0, k).into_owned();
    let inv_s = CMatrix::from_fn(k, k, |i, jj| if i == jj { r(1.0 / s[i]) } else { r(0.0) });
    let sw = CMatrix::from_fn(k, k, |i, jj| if i == jj { r(s[i]) } else { r(0.0) }) * vk.adjoint();
    let mut parts = vec![w0.columns(0, k).into_owned()];
    let mut mismatch = 0.0f64;
    for za in z.iter().skip(1) {
        let va = za * &vk * &inv_s;
        mismatch = mismatch.max(frobenius(&(za - &va * &sw)));
        parts.push(va);
    }
    let joint = crate::linalg::hstack(&parts);
    let ortho = frobenius(&(joint.adjoint() * &joint - identity(d_a * k)));
    if mismatch > 1e-6 * scale || ortho > 1e-6 {
        return Ok(GaugeProposal::NotCorrectable {
            residual: mismatch.max(ortho * scale),
        });
    }
    if d_a * (d_b + k) > dec.d_s() {
        return Err(Error::Capacity {
            requested: d_a * (d_b + k),
            available: dec.d_s(),
        });
    }
    let (pw, _, pv) = svd_sorted(&joint);
    let joint = pw * pv.adjoint();
    let mut vectors = zeros(dec.d_s(), d_a * k);
    for a in 0..d_a {
        for level in 0..k {
            vectors
                .column_mut(level * d_a + a)
                .copy_from(&joint.column(a * k + level));
        }
    }
    Ok(GaugeProposal::Expand(vectors))
}

#[derive(Debug, Clone, Serialize)]
pub struct GaugeEvent {
    pub t: f64,
    pub d_b_before: usize,
    pub d_b_after: usize,
    #[serde(skip)]
    pub vectors: CMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Correctable,
    NotCorrectable { first_failure_t: f64, residual: f64 },
}

impl Verdict {
    pub fn is_correctable(&self) -> bool {
        matches!(self, Verdict::Correctable)
    }
}

#[derive(Debug, Clone)]
pub struct FrameSample {
    pub t: f64,
    pub u: CMatrix,
    pub hprime: CMatrix,
    pub residuals: MarkovResiduals,
    /// Index into [`FrameTrajectory::decompositions`].
    pub dec_index: usize,
}

#[derive(Debug, Clone)]
pub struct FrameTrajectory {
    pub samples: Vec<FrameSample>,
    pub gauge_events: Vec<GaugeEvent>,
    /// Initial decomposition followed by one entry per gauge event.
    pub decompositions: Vec<SubsystemDecomposition>,
    pub verdict: Verdict,
    /// Largest correction applied by re-unitarization.
    pub max_drift: f64,
}

impl FrameTrajectory {
    pub fn decomposition_at(&self, k: usize) -> &SubsystemDecomposition {
        &self.decompositions[self.samples[k].dec_index]
    }

    pub fn max_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.residuals.max())
            .fold(0.0, f64::max)
    }

    pub fn final_d_b(&self) -> usize {
        self.decompositions.last().expect("non-empty").d_b()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrackOptions {
    pub tol: f64,
    pub max_step: f64,
    pub allow_expansion: bool,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            tol: crate::DEFAULT_TOL,
            max_step: 1e-3,
            allow_expansion: true,
        }
    }
}

/// `dU/dt = i U H − ½ P U Σ + ½ U Σ U† P U`, the recovery-unitary equation
/// for the canonical `H′`.
fn frame_rhs(u: &CMatrix, h: &CMatrix, l_sum: &CMatrix, p: &CMatrix) -> CMatrix {
    let us = u * l_sum;
    u * h * c(0.0, 1.0) - p * &us * r(0.5) + &us * u.adjoint() * p * u * r(0.5)
}

/// Integrates the recovery unitary over the grid, checking the frame
/// conditions at every grid point and growing the gauge factor when
/// allowed.
pub fn track_recovery_unitary(
    model: &LindbladModel,
    dec: &SubsystemDecomposition,
    grid: &TimeGrid,
    opts: &TrackOptions,
) -> Result<FrameTrajectory> {
    if dec.d_s() != model.dim {
        return Err(Error::DimensionMismatch(format!(
            "model dimension {} but d_S = {}",
            model.dim,
            dec.d_s()
        )));
    }
    let points = grid.points();
    let mut u = identity(model.dim);
    let mut decs = vec![dec.clone()];
    let mut events = Vec::new();
    let mut samples = Vec::with_capacity(points.len());
    let mut verdict = Verdict::Correctable;
    let mut max_drift = 0.0f64;
    let l_sums: Vec<CMatrix> = model.segments.iter().map(LindbladSegment::l_sum).collect();
    let mut prev = 0.0;
    for &t in &points {
        let p = decs.last().unwrap().projector_ab();
        for (idx, len) in model.clock.split(prev, t)? {
            let seg = &model.segments[idx];
            let steps = (len / opts.max_step).ceil().max(1.0) as usize;
            let h = len / steps as f64;
            for _ in 0..steps {
                let raw = rk4_step(&u, h, |y| frame_rhs(y, &seg.h, &l_sums[idx], &p));
                let fixed = polar_unitary(&raw)?;
                let drift = frobenius(&(&raw - &fixed));
                if drift > MAX_STEP_DRIFT {
                    return Err(Error::StepTooLarge { t, drift });
                }
                max_drift = max_drift.max(drift);
                u = fixed;
            }
        }
        prev = t;

        let seg = model.segment_at(t)?;
        let ud = u.adjoint();
        let h_tilde = &u * &seg.h * &ud;
        let l_tilde: Vec<CMatrix> = seg.l_ops.iter().map(|l| &u * l * &ud).collect();
        let mut current = decs.last().unwrap().clone();
        let mut residuals = residuals_for(&h_tilde, &l_tilde, &current);
        if opts.allow_expansion && residuals.leakage > opts.tol && residuals.nontrivial <= opts.tol
        {
            match detect_gauge_expansion(&l_tilde, &current, opts.tol) {
                Ok(GaugeProposal::Expand(vectors)) => {
                    let grown = current.expand_gauge(&vectors, 1e-6)?;
                    events.push(GaugeEvent {
                        t,
                        d_b_before: current.d_b(),
                        d_b_after: grown.d_b(),
                        vectors,
                    });
                    decs.push(grown.clone());
                    current = grown;
                    residuals = residuals_for(&h_tilde, &l_tilde, &current);
                }
                Ok(_) | Err(Error::Capacity { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        if verdict.is_correctable() && residuals.max() > opts.tol {
            verdict = Verdict::NotCorrectable {
                first_failure_t: t,
                residual: residuals.max(),
            };
        }
        samples.push(FrameSample {
            t,
            hprime: choose_hprime(&h_tilde, &l_tilde, &current.projector_ab()),
            u: u.clone(),
            residuals,
            dec_index: decs.len() - 1,
        });
    }
    Ok(FrameTrajectory {
        samples,
        gauge_events: events,
        decompositions: decs,
        verdict,
        max_drift,
    })
}

fn residuals_for(
    h_tilde: &CMatrix,
    l_tilde: &[CMatrix],
    dec: &SubsystemDecomposition,
) -> MarkovResiduals {
    let hprime = choose_hprime(h_tilde, l_tilde, &dec.projector_ab());
    let frame = FrameGenerator {
        h: h_tilde + hprime,
        l_ops: l_tilde.to_vec(),
    };
    frame_residuals(&frame, dec)
}

/// `𝓛 = −i[H_eff, ·] + 𝒟 + 𝒮` relative to a code projector. The identity
/// holds exactly on operators supported on the code.
#[derive(Debug, Clone)]
pub struct GeneratorSplit {
    pub h_eff: CMatrix,
    /// `ρ ↦ Σ L ρ L†` on column-stacked operators.
    pub dissipator: CMatrix,
    /// `ρ ↦ −½ P Σ P ρ − ½ ρ P Σ P` on column-stacked operators.
    pub s_part: CMatrix,
}

impl GeneratorSplit {
    /// Sum of the three parts applied to `rho`.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let n = rho.nrows();
        let eye = identity(n);
        let ham = (superop_matrix(&self.h_eff, &eye)? - superop_matrix(&eye, &self.h_eff)?)
            * c(0.0, -1.0);
        let v = (ham + &self.dissipator + &self.s_part) * vectorize(rho);
        unvec(&v, n, n)
    }
}

pub fn generator_split(model: &LindbladModel, t: f64, pab: &CMatrix) -> Result<GeneratorSplit> {
    let seg = model.segment_at(t)?;
    let n = model.dim;
    if pab.shape() != (n, n) || frobenius(&(pab * pab - pab)) > 1e-9 {
        return Err(Error::InvalidInput(
            "code projector is not a projector".into(),
        ));
    }
    let sum = seg.l_sum();
    let half_i = c(0.0, 0.5);
    let h_eff = &seg.h + (pab * &sum) * half_i - (&sum * pab) * half_i;
    let mut dissipator = zeros(n * n, n * n);
    for l in &seg.l_ops {
        dissipator += superop_matrix(l, &l.adjoint())?;
    }
    let psp = pab * &sum * pab;
    let eye = identity(n);
    let s_part = (superop_matrix(&psp, &eye)? + superop_matrix(&eye, &psp)?) * r(-0.5);
    Ok(GeneratorSplit {
        h_eff,
        dissipator,
        s_part,
    })
}
