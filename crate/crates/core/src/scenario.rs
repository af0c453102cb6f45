//! Scenario files: a system plus an initial history and run settings.
//!
//! ```json
//! {
//!   "name": "two patches",
//!   "n": 2, "m": 1,
//!   "d": [3.0, 2.0],
//!   "a": [[0.0, 1.0], [1.0, 0.0]],
//!   "beta": [[1.0], [3.0]],
//!   "tau": [[5.0], [10.0]],
//!   "history": { "kind": "constant", "value": [1.0, 1.0] },
//!   "t_end": 500.0
//! }
//! ```
//!
//! `name`, `history` (default: constant ones), `t_end` (default 500), `dt`
//! (default `min(0.01, τ_min/50)`) and `enforce_mortality_form` (default
//! `true`) are optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{PatchSystem, PatchSystemRepr};
use crate::sim::{default_dt, HistorySpec, DEFAULT_T_END};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    n: usize,
    m: usize,
    d: Vec<f64>,
    a: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
    tau: Vec<Vec<f64>>,
    #[serde(default = "default_true")]
    enforce_mortality_form: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    history: Option<HistorySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub system: PatchSystem,
    pub history: HistorySpec,
    pub t_end: f64,
    pub dt: f64,
}

/// Failure to turn text into a scenario.
#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconsistent scenario: {0}")]
    Shape(#[from] crate::error::Error),
}

impl Scenario {
    pub fn new(name: impl Into<String>, system: PatchSystem) -> Self {
        let history = HistorySpec::constant(vec![1.0; system.n()]);
        let dt = default_dt(&system);
        Self { name: name.into(), system, history, t_end: DEFAULT_T_END, dt }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        let repr = PatchSystemRepr {
            n: file.n,
            m: file.m,
            d: file.d,
            a: file.a,
            beta: file.beta,
            tau: file.tau,
            enforce_mortality_form: file.enforce_mortality_form,
        };
        let system = PatchSystem::try_from(repr)?;
        let mut sc = Scenario::new(file.name.unwrap_or_else(|| "scenario".into()), system);
        if let Some(h) = file.history {
            sc.history = h;
        }
        if let Some(t) = file.t_end {
            sc.t_end = t;
        }
        if let Some(dt) = file.dt {
            sc.dt = dt;
        }
        Ok(sc)
    }

    pub fn load(path: &Path) -> std::result::Result<Self, ScenarioError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let repr = PatchSystemRepr::from(self.system.clone());
        let file = ScenarioFile {
            name: Some(self.name.clone()),
            n: repr.n,
            m: repr.m,
            d: repr.d,
            a: repr.a,
            beta: repr.beta,
            tau: repr.tau,
            enforce_mortality_form: repr.enforce_mortality_form,
            history: Some(self.history.clone()),
            t_end: Some(self.t_end),
            dt: Some(self.dt),
        };
        serde_json::to_string_pretty(&file).expect("scenario serialises")
    }

    /// Integrates the delay system with the scenario's settings.
    pub fn simulate(&self) -> Result<crate::sim::Trajectory> {
        crate::sim::integrate_dde(&self.system, &self.history, self.t_end, self.dt)
    }
}
