// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario file schema.
//!
//! A scenario is a JSON document naming a decomposition, a model, the
//! environment, a time grid and the checks to run. Complex matrices are
//! row-major nested arrays of `[re, im]` pairs. See `docs/scenario-schema.md`
//! for the full field reference.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::code_space::SubsystemDecomposition;
use crate::hamiltonian::{
    EnvSpec, EnvSubspace, HamiltonianModel, HamiltonianSegment, InteractionTerm, WSupport,
};
use crate::linalg::{c, CMatrix};
use crate::markovian::{Integrator, LindbladModel, LindbladSegment};
use crate::schedule::TimeGrid;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Complex matrix as row-major nested `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson(
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| [m[(i, j)].re, m[(i, j)].im])
                        .collect()
                })
                .collect(),
        )
    }
}

impl MatrixJson {
    pub fn to_matrix(&self, location: &str) -> Result<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, |row| row.len());
        if let Some(bad) = self.0.iter().position(|row| row.len() != cols) {
            return Err(Error::parse(
                location,
                format!(
                    "row {bad} has {} entries, expected {cols}",
                    self.0[bad].len()
                ),
            ));
        }
        let m = CMatrix::from_fn(rows, cols, |i, j| c(self.0[i][j][0], self.0[i][j][1]));
        if !crate::linalg::is_finite(&m) {
            return Err(Error::parse(location, "non-finite entry"));
        }
        Ok(m)
    }

    fn square(&self, location: &str, dim: usize) -> Result<CMatrix> {
        let m = self.to_matrix(location)?;
        if m.shape() != (dim, dim) {
            return Err(Error::parse(
                location,
                format!(
                    "expected a {dim}x{dim} matrix, got {}x{}",
                    m.nrows(),
                    m.ncols()
                ),
            ));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Channel,
    Markovian,
    Hamiltonian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// First `d_A·d_B` basis vectors.
    Canonical,
    /// `H^S = H^A ⊗ C^{d_S/d_A}`, gauge levels first in the second factor.
    TensorFactor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionSpec {
    pub d_a: usize,
    pub d_b: usize,
    pub d_s: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Layout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isometry: Option<MatrixJson>,
}

impl DecompositionSpec {
    pub fn build(&self) -> Result<SubsystemDecomposition> {
        match (&self.isometry, self.layout) {
            (Some(_), Some(_)) => Err(Error::parse(
                "decomposition",
                "give either `layout` or `isometry`, not both",
            )),
            (Some(iso), None) => {
                let m = iso.to_matrix("decomposition.isometry")?;
                if m.nrows() != self.d_s {
                    return Err(Error::parse(
                        "decomposition.isometry",
                        format!("has {} rows, d_s is {}", m.nrows(), self.d_s),
                    ));
                }
                SubsystemDecomposition::new(self.d_a, self.d_b, m)
                    .map_err(|e| Error::parse("decomposition.isometry", e.to_string()))
            }
            (None, layout) => match layout.unwrap_or(Layout::Canonical) {
                Layout::Canonical => {
                    SubsystemDecomposition::canonical(self.d_a, self.d_b, self.d_s)
                }
                Layout::TensorFactor => {
                    SubsystemDecomposition::tensor_factor(self.d_a, self.d_b, self.d_s)
                }
            }
            .map_err(|e| Error::parse("decomposition", e.to_string())),
        }
    }

    pub fn from_decomposition(dec: &SubsystemDecomposition) -> Self {
        DecompositionSpec {
            d_a: dec.d_a(),
            d_b: dec.d_b(),
            d_s: dec.d_s(),
            layout: None,
            isometry: Some(MatrixJson::from(dec.isometry())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kraus: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladSegmentSpec {
    pub duration: f64,
    pub h: MatrixJson,
    #[serde(default)]
    pub l_ops: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladSpec {
    pub segments: Vec<LindbladSegmentSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub s: MatrixJson,
    pub e: MatrixJson,
}

/// A segment is given either by its parts or by the joint generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSegmentSpec {
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_s: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_e: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<MatrixJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub d_e: usize,
    pub segments: Vec<HamiltonianSegmentSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpecJson {
    Full,
    Subspace { basis: MatrixJson },
}

impl EnvSpecJson {
    pub fn build(&self, d_e: usize) -> Result<EnvSpec> {
        match self {
            EnvSpecJson::Full => Ok(EnvSpec::Full),
            EnvSpecJson::Subspace { basis } => {
                let m = basis.to_matrix("env.basis")?;
                if m.nrows() != d_e {
                    return Err(Error::parse(
                        "env.basis",
                        format!("has {} rows, d_e is {d_e}", m.nrows()),
                    ));
                }
                EnvSubspace::new(m)
                    .map(EnvSpec::Subspace)
                    .map_err(|e| Error::parse("env.basis", e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Correctable,
    NotCorrectable,
}

/// One requested check.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// Kraus-channel recovery certificate.
    KrausRecovery {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    /// Rotating-frame tracking of a Lindblad model.
    MarkovTracking {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
        #[serde(default = "yes")]
        allow_expansion: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_gauge_events: Option<usize>,
    },
    /// RK4 against exact per-segment exponentials.
    IntegratorAgreement {
        #[serde(default = "agreement_tol")]
        max_trace_distance: f64,
    },
    /// Frame following the system Hamiltonian.
    SystemFrame {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    /// System frame plus gauge–environment frame.
    DoubleFrame {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
        #[serde(default = "b_prime")]
        support: WSupport,
    },
    /// Recoverability at a single instant.
    Moment {
        t: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_d_b_prime: Option<usize>,
        /// Also require `U = I` to be an admissible recovery.
        #[serde(default)]
        identity_admissible: bool,
    },
}

fn yes() -> bool {
    true
}

fn agreement_tol() -> f64 {
    1e-6
}

fn b_prime() -> WSupport {
    WSupport::BPrime
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::KrausRecovery { .. } => "kraus_recovery",
            CheckSpec::MarkovTracking { .. } => "markov_tracking",
            CheckSpec::IntegratorAgreement { .. } => "integrator_agreement",
            CheckSpec::SystemFrame { .. } => "system_frame",
            CheckSpec::DoubleFrame { .. } => "double_frame",
            CheckSpec::Moment { .. } => "moment",
        }
    }

    fn allowed_for(&self, kind: ScenarioKind) -> bool {
        matches!(
            (self, kind),
            (CheckSpec::KrausRecovery { .. }, ScenarioKind::Channel)
                | (CheckSpec::MarkovTracking { .. }, ScenarioKind::Markovian)
                | (
                    CheckSpec::IntegratorAgreement { .. },
                    ScenarioKind::Markovian
                )
                | (CheckSpec::SystemFrame { .. }, ScenarioKind::Hamiltonian)
                | (CheckSpec::DoubleFrame { .. }, ScenarioKind::Hamiltonian)
                | (CheckSpec::Moment { .. }, ScenarioKind::Hamiltonian)
        )
    }
}

/// Settings of the fidelity oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidelitySpec {
    /// Smallest acceptable entanglement fidelity for checks that pass.
    #[serde(default = "min_fidelity")]
    pub min_fidelity: f64,
    /// Gauge state; the maximally mixed state when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge_state: Option<MatrixJson>,
    /// Environment states for Hamiltonian checks. When empty the uniform
    /// mixture over the allowed environment subspace is used.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub env_states: Vec<MatrixJson>,
    /// Number of extra random pure environment states, drawn from the seed
    /// inside the allowed environment subspace.
    #[serde(default)]
    pub random_env_states: usize,
}

fn min_fidelity() -> f64 {
    1.0 - 1e-6
}

impl Default for FidelitySpec {
    fn default() -> Self {
        FidelitySpec {
            min_fidelity: min_fidelity(),
            gauge_state: None,
            env_states: Vec::new(),
            random_env_states: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub kind: ScenarioKind,
    pub decomposition: DecompositionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblad: Option<LindbladSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(default = "full_env")]
    pub env: EnvSpecJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<TimeGrid>,
    #[serde(default = "rk4")]
    pub integrator: Integrator,
    #[serde(default = "default_step")]
    pub max_step: f64,
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub fidelity: FidelitySpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
}

fn full_env() -> EnvSpecJson {
    EnvSpecJson::Full
}

fn rk4() -> Integrator {
    Integrator::Rk4
}

fn default_step() -> f64 {
    1e-3
}

fn default_tol() -> f64 {
    crate::DEFAULT_TOL
}

impl ChannelSpec {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        ChannelSpec {
            kraus: ch.ops().iter().map(MatrixJson::from).collect(),
        }
    }
}

impl LindbladSpec {
    pub fn from_model(model: &LindbladModel) -> Self {
        LindbladSpec {
            segments: model
                .segments()
                .iter()
                .map(|s| LindbladSegmentSpec {
                    duration: s.duration,
                    h: MatrixJson::from(&s.h),
                    l_ops: s.l_ops.iter().map(MatrixJson::from).collect(),
                })
                .collect(),
        }
    }
}

impl HamiltonianSpec {
    pub fn from_model(model: &HamiltonianModel) -> Self {
        HamiltonianSpec {
            d_e: model.d_e(),
            segments: model
                .segments()
                .iter()
                .map(|s| HamiltonianSegmentSpec {
                    duration: s.duration,
                    h_s: Some(MatrixJson::from(&s.h_s)),
                    h_e: Some(MatrixJson::from(&s.h_e)),
                    terms: s
                        .terms
                        .iter()
                        .map(|t| TermSpec {
                            s: MatrixJson::from(&t.s),
                            e: MatrixJson::from(&t.e),
                        })
                        .collect(),
                    joint: None,
                })
                .collect(),
        }
    }
}

/// A scenario with every matrix parsed and validated.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub spec: Scenario,
    pub dec: SubsystemDecomposition,
    pub model: Model,
    pub grid: Option<TimeGrid>,
}

#[derive(Debug, Clone)]
pub enum Model {
    Channel(KrausChannel),
    Markovian(LindbladModel),
    Hamiltonian {
        model: HamiltonianModel,
        env: EnvSpec,
    },
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse { location, message } => Error::Parse {
                location: format!("{}: {location}", path.display()),
                message,
            },
            other => other,
        })
    }

    /// Indented JSON with each matrix row on one line.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("scenario serializes");
        let mut out = String::new();
        write_compact_rows(&value, 0, &mut out);
        out
    }

    /// Parses every matrix and checks the scenario for consistency.
    pub fn load(self) -> Result<LoadedScenario> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::parse(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::parse("tol", "must be positive"));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::parse("max_step", "must be positive"));
        }
        if let Some(i) = self.checks.iter().position(|c| !c.allowed_for(self.kind)) {
            return Err(Error::parse(
                format!("checks[{i}]"),
                format!(
                    "check `{}` does not apply to a {:?} scenario",
                    self.checks[i].name(),
                    self.kind
                ),
            ));
        }
        let dec = self.decomposition.build()?;
        let d_s = dec.d_s();
        let model = match self.kind {
            ScenarioKind::Channel => {
                let spec = self
                    .channel
                    .as_ref()
                    .ok_or_else(|| Error::parse("channel", "missing for a channel scenario"))?;
                let ops = spec
                    .kraus
                    .iter()
                    .enumerate()
                    .map(|(i, m)| m.square(&format!("channel.kraus[{i}]"), d_s))
                    .collect::<Result<Vec<_>>>()?;
                Model::Channel(
                    KrausChannel::new(ops, 1e-8)
                        .map_err(|e| Error::parse("channel.kraus", e.to_string()))?,
                )
            }
            ScenarioKind::Markovian => {
                let spec = self
                    .lindblad
                    .as_ref()
                    .ok_or_else(|| Error::parse("lindblad", "missing for a markovian scenario"))?;
                let segments = spec
                    .segments
                    .iter()
                    .enumerate()
                    .map(|(k, s)| {
                        let loc = format!("lindblad.segments[{k}]");
                        Ok(LindbladSegment {
                            duration: s.duration,
                            h: s.h.square(&format!("{loc}.h"), d_s)?,
                            l_ops: s
                                .l_ops
                                .iter()
                                .enumerate()
                                .map(|(j, l)| l.square(&format!("{loc}.l_ops[{j}]"), d_s))
                                .collect::<Result<_>>()?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Model::Markovian(
                    LindbladModel::new(d_s, segments)
                        .map_err(|e| Error::parse("lindblad.segments", e.to_string()))?,
                )
            }
            ScenarioKind::Hamiltonian => {
                let spec = self.hamiltonian.as_ref().ok_or_else(|| {
                    Error::parse("hamiltonian", "missing for a hamiltonian scenario")
                })?;
                let model = build_hamiltonian(spec, d_s)?;
                let env = self.env.build(spec.d_e)?;
                Model::Hamiltonian { model, env }
            }
        };
        let grid = match self.grid {
            Some(g) => Some(
                TimeGrid::new(g.t_max, g.dt).map_err(|e| Error::parse("grid", e.to_string()))?,
            ),
            None => None,
        };
        let needs_grid = self.checks.iter().any(|c| {
            matches!(
                c,
                CheckSpec::MarkovTracking { .. }
                    | CheckSpec::IntegratorAgreement { .. }
                    | CheckSpec::SystemFrame { .. }
                    | CheckSpec::DoubleFrame { .. }
            )
        });
        if needs_grid && grid.is_none() {
            return Err(Error::parse("grid", "required by the requested checks"));
        }
        Ok(LoadedScenario {
            spec: self,
            dec,
            model,
            grid,
        })
    }
}

fn depth(v: &serde_json::Value) -> usize {
    match v {
        serde_json::Value::Array(items) => 1 + items.iter().map(depth).max().unwrap_or(0),
        serde_json::Value::Object(_) => usize::MAX / 2,
        _ => 0,
    }
}

fn write_compact_rows(v: &serde_json::Value, indent: usize, out: &mut String) {
    use serde_json::Value;
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Array(items) if !items.is_empty() && depth(v) > 2 => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_compact_rows(item, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("string key"));
                out.push_str(": ");
                write_compact_rows(item, indent + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        _ => out.push_str(&serde_json::to_string(v).expect("json value")),
    }
}

fn build_hamiltonian(spec: &HamiltonianSpec, d_s: usize) -> Result<HamiltonianModel> {
    let d_e = spec.d_e;
    let mut segments = Vec::with_capacity(spec.segments.len());
    for (k, s) in spec.segments.iter().enumerate() {
        let loc = format!("hamiltonian.segments[{k}]");
        let seg = match &s.joint {
            Some(joint) => {
                if s.h_s.is_some() || s.h_e.is_some() || !s.terms.is_empty() {
                    return Err(Error::parse(
                        loc,
                        "give either `joint` or the parts `h_s`, `h_e`, `terms`",
                    ));
                }
                let h = joint.square(&format!("{loc}.joint"), d_s * d_e)?;
                HamiltonianModel::from_joint(d_s, d_e, vec![(h, s.duration)])
                    .map_err(|e| Error::parse(format!("{loc}.joint"), e.to_string()))?
                    .segments()[0]
                    .clone()
            }
            None => HamiltonianSegment {
                duration: s.duration,
                h_s: match &s.h_s {
                    Some(m) => m.square(&format!("{loc}.h_s"), d_s)?,
                    None => crate::linalg::zeros(d_s, d_s),
                },
                h_e: match &s.h_e {
                    Some(m) => m.square(&format!("{loc}.h_e"), d_e)?,
                    None => crate::linalg::zeros(d_e, d_e),
                },
                terms: s
                    .terms
                    .iter()
                    .enumerate()
                    .map(|(j, t)| {
                        Ok(InteractionTerm {
                            s: t.s.square(&format!("{loc}.terms[{j}].s"), d_s)?,
                            e: t.e.square(&format!("{loc}.terms[{j}].e"), d_e)?,
                        })
                    })
                    .collect::<Result<_>>()?,
            },
        };
        segments.push(seg);
    }
    HamiltonianModel::new(d_s, d_e, segments)
        .map_err(|e| Error::parse("hamiltonian.segments", e.to_string()))
}
