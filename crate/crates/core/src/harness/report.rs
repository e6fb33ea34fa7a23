// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Report JSON and CSV time series.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scenario::{Expectation, ScenarioKind};
use crate::Result;

/// Conventions used by every computation, stamped into each report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub gkls: String,
    pub dissipative_frame_term: String,
    pub propagator: String,
    pub vectorization: String,
    pub tensor_order: String,
    pub code_columns: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            gkls: "dρ/dt = −i[H, ρ] + Σ_j (L_j ρ L_j† − ½{L_j†L_j, ρ})".into(),
            dissipative_frame_term: "+ (i/2) P Σ̃ P_K, with Σ̃ = Σ_j L̃_j†L̃_j".into(),
            propagator: "V(t) = 𝒯 exp(−i ∫ H); frames i dU/dt = H′ U".into(),
            vectorization: "column stacking, vec(AXB) = (Bᵀ ⊗ A) vec(X)".into(),
            tensor_order: "system ⊗ environment, system index major".into(),
            code_columns: "isometry column a·d_B + b images |a⟩ ⊗ |b⟩".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    Failed,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Passed => 0,
            Status::Failed => 1,
            Status::Error => 2,
        }
    }

    /// The worse of two statuses.
    pub fn combine(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Error, _) | (_, Error) => Error,
            (Failed, _) | (_, Failed) => Failed,
            _ => Passed,
        }
    }
}

/// Named columns of equally long numeric rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Series {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:.17e}")))
                .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn csv_error(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => crate::Error::Io(io),
        other => crate::Error::InvalidInput(format!("csv: {other:?}")),
    }
}

/// Max and mean of a residual series.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Summary::default();
        }
        Summary {
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: values.iter().sum::<f64>() / values.len() as f64,
        }
    }
}

/// Outcome of one requested check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    /// `correctable`, `not_correctable`, `recoverable`,
    /// `not_found_at_resolution`, `agree`, `disagree` or `error`.
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expectation>,
    pub status: Status,
    pub residual: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leakage_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gauge_events: Vec<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_b_final: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Series>,
}

impl CheckReport {
    pub fn new(check: &str, verdict: &str) -> Self {
        CheckReport {
            check: check.into(),
            verdict: verdict.into(),
            expected: None,
            status: Status::Passed,
            residual: Summary::default(),
            first_failure_t: None,
            fidelity_min: None,
            leakage_max: None,
            gauge_events: Vec::new(),
            d_b_final: None,
            certificate: None,
            notes: Vec::new(),
            series: None,
        }
    }

    pub fn error(check: &str, message: String) -> Self {
        let mut r = CheckReport::new(check, "error");
        r.status = Status::Error;
        r.notes.push(message);
        r
    }

    /// Records a failed assertion.
    pub fn fail(&mut self, note: String) {
        self.status = self.status.combine(Status::Failed);
        self.notes.push(note);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub tol: f64,
    pub conventions: Conventions,
    pub checks: Vec<CheckReport>,
    pub status: Status,
}

impl Report {
    pub fn new(scenario: &str, kind: ScenarioKind, seed: u64, tol: f64) -> Self {
        Report {
            tool: "oqec".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            scenario: scenario.into(),
            kind,
            seed,
            tol,
            conventions: Conventions::default(),
            checks: Vec::new(),
            status: Status::Passed,
        }
    }

    pub fn push(&mut self, check: CheckReport) {
        self.status = self.status.combine(check.status);
        self.checks.push(check);
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    /// Writes `<dir>/<scenario>_<index>_<check>.csv` for every check with a
    /// series, returning the paths written.
    pub fn write_csv_dir(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (k, check) in self.checks.iter().enumerate() {
            if let Some(series) = &check.series {
                let path = dir.join(format!("{}_{k}_{}.csv", self.scenario, check.check));
                series.write_csv_file(&path)?;
                written.push(path);
            }
        }
        Ok(written)
    }

    /// Human-readable summary, one line per check.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{} {} | scenario {} ({:?}) | status {:?}\n",
            self.tool, self.version, self.scenario, self.kind, self.status
        );
        for c in &self.checks {
            out.push_str(&format!(
                "  {:<22} {:<24} {:<8} residual max {:.3e} mean {:.3e}",
                c.check,
                c.verdict,
                format!("{:?}", c.status).to_lowercase(),
                c.residual.max,
                c.residual.mean
            ));
            if let Some(f) = c.fidelity_min {
                out.push_str(&format!(" | fidelity min {f:.9}"));
            }
            if !c.gauge_events.is_empty() {
                out.push_str(&format!(" | gauge events {}", c.gauge_events.len()));
            }
            out.push('\n');
            for note in &c.notes {
                out.push_str(&format!("      {note}\n"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_combines_to_worst() {
        assert_eq!(Status::Passed.combine(Status::Failed), Status::Failed);
        assert_eq!(Status::Failed.combine(Status::Error), Status::Error);
        assert_eq!(Status::Passed.combine(Status::Passed), Status::Passed);
        assert_eq!(Status::Error.exit_code(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let mut s = Series::new(&["t", "r1"]);
        s.push(vec![0.0, 1e-17]);
        s.push(vec![0.5, 0.25]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<Vec<f64>> = rdr
            .records()
            .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows, s.rows);
    }

    #[test]
    fn report_round_trip() {
        let mut r = Report::new("x", ScenarioKind::Markovian, 3, 1e-9);
        let mut c = CheckReport::new("markov_tracking", "correctable");
        c.residual = Summary::of(&[0.0, 2.0]);
        r.push(c);
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back.checks[0].residual.mean, 1.0);
        assert_eq!(back.conventions, Conventions::default());
    }

    #[test]
    fn summary_of_values() {
        let s = Summary::of(&[1.0, 3.0]);
        assert_eq!((s.max, s.mean), (3.0, 2.0));
    }
}
