//! Structured results: one row per verified identity, serializable to JSON.
//!
//! Identities are tagged with short stable names (`ybe`, `re`, `red`,
//! `greq`, `greqd`, `sol1`, `sol2`, `dress`, `tracer`, `comrel`, ...) so
//! report rows can be grepped across runs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default tolerance for single-equation axioms.
pub const TOL_AXIOM: f64 = 1e-12;
/// Default tolerance for composite identities (longer products).
pub const TOL_COMPOSITE: f64 = 1e-10;

/// An extracted proportionality scalar, keyed by the spectral argument it
/// was extracted at.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ScalarRecord {
    pub arg: Complex64,
    pub value: Complex64,
}

/// One verified identity: residual maximized over the sampled points.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckRow {
    pub suite: String,
    pub identity: String,
    pub model: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scalars: Vec<ScalarRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRow {
    pub fn new(suite: &str, identity: &str, model: &str, tolerance: f64) -> Self {
        CheckRow {
            suite: suite.to_string(),
            identity: identity.to_string(),
            model: model.to_string(),
            samples: 0,
            max_residual: 0.0,
            tolerance,
            pass: true,
            scalars: Vec::new(),
            note: None,
        }
    }

    /// Fold one sampled residual into the row.
    pub fn record(&mut self, residual: f64) {
        self.samples += 1;
        if residual > self.max_residual {
            self.max_residual = residual;
        }
        self.pass = self.max_residual <= self.tolerance && self.max_residual.is_finite();
    }

    pub fn record_scalar(&mut self, arg: Complex64, value: Complex64) {
        self.scalars.push(ScalarRecord { arg, value });
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Crossing data actually certified for a model. The scalar `v_squared`
/// records V^2 = v_squared * 1 (either sign of unity occurs in practice).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelConstants {
    pub local_dim: usize,
    pub eta: Complex64,
    pub rho: Complex64,
    pub v: Vec<Vec<Complex64>>,
    pub m: Vec<Vec<Complex64>>,
    pub v_squared: Complex64,
    pub v_squared_residual: f64,
    pub vtv_equals_m_residual: f64,
}

/// Residual report for a batch of identity checks on one model.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AxiomReport {
    pub model: String,
    pub seed: u64,
    pub rows: Vec<CheckRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ModelConstants>,
}

impl AxiomReport {
    pub fn new(model: &str, seed: u64) -> Self {
        AxiomReport {
            model: model.to_string(),
            seed,
            rows: Vec::new(),
            constants: None,
        }
    }

    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.max_residual))
    }

    pub fn row(&self, identity: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.identity == identity)
    }

    /// First failing row, if any.
    pub fn first_failure(&self) -> Option<&CheckRow> {
        self.rows.iter().find(|r| !r.pass)
    }

    /// Rows sorted by (suite, identity) for deterministic emission.
    pub fn sorted(mut self) -> Self {
        self.rows
            .sort_by(|a, b| (&a.suite, &a.identity).cmp(&(&b.suite, &b.identity)));
        self
    }
}
