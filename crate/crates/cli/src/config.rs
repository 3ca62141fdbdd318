//! Declarative run configuration.
//!
//! A config is a single JSON document:
//!
//! ```json
//! {
//!   "model":     { "name": "rational_gl2", "eta": [0.8, 0.15] },
//!   "boundary":  { "kind": "diagonal", "xi": [1.1, 0.4] },
//!   "sites":     1,
//!   "thetas":    [[0.12, -0.07]],
//!   "cards":     { "n_max": 2, "m_max": 2 },
//!   "sampling":  { "count": 20, "box_half_width": 2.0, "seed": 42 },
//!   "tolerances": { "axiom": 1e-12, "composite": 1e-10 },
//!   "suites":    ["all"]
//! }
//! ```
//!
//! `model.name` is `rational_gl2` (requires `eta`) or `six_vertex`
//! (requires `q_param`). `boundary.kind` is `diagonal` (requires `xi`) or
//! `identity`. `suites` entries: `axioms`, `fused`, `reflection`,
//! `traces`, `classical`, `delta`, or `all`. Every field except `model`
//! has a default. Complex numbers are `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qtrace_core::CoreError;

pub const DIMENSION_GUARD_LIMIT: usize = 1 << 10;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_param: Option<Complex64>,
    /// Diagnostic override of the crossing shift; the axiom suite then
    /// reports which relations the replacement breaks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_override: Option<Complex64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BoundaryConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Complex64>,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            kind: "diagonal".into(),
            xi: Some(Complex64::new(1.1, 0.4)),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct CardConfig {
    pub n_max: usize,
    pub m_max: usize,
}

impl Default for CardConfig {
    fn default() -> Self {
        CardConfig { n_max: 2, m_max: 2 }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct SamplingConfig {
    pub count: usize,
    pub box_half_width: f64,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            count: 20,
            box_half_width: 2.0,
            seed: 42,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ToleranceConfig {
    pub axiom: f64,
    pub composite: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            axiom: 1e-12,
            composite: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Axioms,
    Fused,
    Reflection,
    Traces,
    Classical,
    Delta,
}

impl Suite {
    pub fn all() -> Vec<Suite> {
        vec![
            Suite::Axioms,
            Suite::Fused,
            Suite::Reflection,
            Suite::Traces,
            Suite::Classical,
            Suite::Delta,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Fused => "fused",
            Suite::Reflection => "reflection",
            Suite::Traces => "traces",
            Suite::Classical => "classical",
            Suite::Delta => "delta",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SuiteConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default = "default_sites")]
    pub sites: usize,
    #[serde(default)]
    pub thetas: Vec<Complex64>,
    #[serde(default)]
    pub cards: CardConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default = "default_suites")]
    pub suites: Vec<String>,
}

fn default_sites() -> usize {
    1
}

fn default_suites() -> Vec<String> {
    vec!["all".into()]
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self, CoreError> {
        let mut cfg: SuiteConfig =
            serde_json::from_str(text).map_err(|e| CoreError::Config(e.to_string()))?;
        if cfg.thetas.is_empty() && cfg.sites > 0 {
            cfg.thetas = (0..cfg.sites)
                .map(|k| Complex64::new(0.12 + 0.1 * k as f64, -0.07))
                .collect();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        match self.model.name.as_str() {
            "rational_gl2" => {
                if self.model.eta.is_none() {
                    return Err(CoreError::Config("rational_gl2 requires `eta`".into()));
                }
            }
            "six_vertex" => {
                if self.model.q_param.is_none() {
                    return Err(CoreError::Config("six_vertex requires `q_param`".into()));
                }
            }
            other => {
                return Err(CoreError::Config(format!("unknown model `{other}`")));
            }
        }
        match self.boundary.kind.as_str() {
            "diagonal" => {
                if self.boundary.xi.is_none() {
                    return Err(CoreError::Config("diagonal boundary requires `xi`".into()));
                }
            }
            "identity" => {}
            other => {
                return Err(CoreError::Config(format!("unknown boundary `{other}`")));
            }
        }
        if self.thetas.len() != self.sites {
            return Err(CoreError::Config(format!(
                "{} sites but {} inhomogeneities",
                self.sites,
                self.thetas.len()
            )));
        }
        for s in &self.suites {
            if s != "all" && !Suite::all().iter().any(|k| k.name() == s) {
                return Err(CoreError::Config(format!("unknown suite `{s}`")));
            }
        }
        // Guard the total dimension of the largest object any suite builds:
        // n_max + m_max auxiliary legs plus the quantum chain, local dim 2.
        let exponent = self.cards.n_max + self.cards.m_max + self.sites;
        let total = 1usize << exponent.min(63);
        if total > DIMENSION_GUARD_LIMIT {
            return Err(CoreError::DimensionGuard {
                total,
                limit: DIMENSION_GUARD_LIMIT,
            });
        }
        Ok(())
    }

    pub fn selected_suites(&self) -> Vec<Suite> {
        if self.suites.iter().any(|s| s == "all") {
            return Suite::all();
        }
        let mut picked: Vec<Suite> = Suite::all()
            .into_iter()
            .filter(|k| self.suites.iter().any(|s| s == k.name()))
            .collect();
        picked.sort();
        picked.dedup();
        picked
    }
}
