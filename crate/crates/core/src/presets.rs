//! Built-in figure scenarios and the reproduction pipeline.
//!
//! Every preset starts from the constant history `φ ≡ 1`. The three-patch
//! presets run to a long horizon because one of their patches sits exactly
//! at its own threshold (`β_3 = d_3`) and decays only like `1/t`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifier::{classify_dynamics, ClassificationReport, GasCertificate, PerPatch, ZeroVerdict};
use crate::error::Result;
use crate::model::{PatchSystem, PatchSystemRepr};
use crate::scenario::Scenario;
use crate::sim::{label_patch, tail_stats, HistorySpec, PatchTail, TailLabel, CONVERGENCE_TOL, DEFAULT_WINDOW_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FigureId {
    #[serde(rename = "1a")]
    F1a,
    #[serde(rename = "1b")]
    F1b,
    #[serde(rename = "2a")]
    F2a,
    #[serde(rename = "2b")]
    F2b,
    #[serde(rename = "3a")]
    F3a,
    #[serde(rename = "3b")]
    F3b,
}

impl FigureId {
    pub const ALL: [FigureId; 6] = [FigureId::F1a, FigureId::F1b, FigureId::F2a, FigureId::F2b, FigureId::F3a, FigureId::F3b];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::F1a => "1a",
            FigureId::F1b => "1b",
            FigureId::F2a => "2a",
            FigureId::F2b => "2b",
            FigureId::F3a => "3a",
            FigureId::F3b => "3b",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown figure id {s:?}; expected one of 1a, 1b, 2a, 2b, 3a, 3b"))
    }
}

/// A preset scenario with the labels its tail must show.
#[derive(Debug, Clone)]
pub struct Preset {
    pub id: FigureId,
    pub scenario: Scenario,
    /// Allowed labels per patch; `None` leaves a patch unconstrained.
    pub expected: Vec<Option<Vec<TailLabel>>>,
}

fn pair(a12: f64, a21: f64, d: [f64; 2], beta: [f64; 2], tau: [f64; 2]) -> PatchSystem {
    PatchSystem::single_delay(d.to_vec(), vec![vec![0.0, a12], vec![a21, 0.0]], beta.to_vec(), tau.to_vec())
        .expect("preset shapes are consistent")
}

fn triple(extra: f64) -> PatchSystem {
    let a = vec![vec![0.0, extra, 1.0], vec![1.0, 0.0, 1.0], vec![extra, extra, 0.0]];
    PatchSystem::single_delay(vec![2.0, 1.0, 3.0], a, vec![5.0, 10.0, 3.0], vec![3.0, 8.0, 6.0])
        .expect("preset shapes are consistent")
}

pub fn preset(id: FigureId) -> Preset {
    use TailLabel::*;
    let persistent = || Some(vec![ConvergedToPositive, SustainedOscillation]);
    // anything but extinction
    let not_extinct = || Some(vec![ConvergedToPositive, SustainedOscillation, Undetermined]);
    let (system, t_end, dt, expected) = match id {
        FigureId::F1a => (pair(1.0, 1.0, [3.0, 2.0], [1.0, 3.0], [5.0, 10.0]), 500.0, None, vec![
            Some(vec![ConvergedToPositive]),
            Some(vec![ConvergedToPositive]),
        ]),
        FigureId::F1b => (pair(0.0, 1.0, [3.0, 2.0], [1.0, 3.0], [5.0, 10.0]), 500.0, None, vec![
            Some(vec![ConvergedToZero]),
            persistent(),
        ]),
        FigureId::F2a => (triple(0.0), 12_000.0, Some(0.05), vec![
            Some(vec![ConvergedToPositive]),
            Some(vec![SustainedOscillation]),
            Some(vec![ConvergedToZero]),
        ]),
        FigureId::F2b => (triple(0.1), 500.0, None, vec![not_extinct(), not_extinct(), not_extinct()]),
        FigureId::F3a => (pair(1.0, 1.0, [2.0, 2.0], [3.0, 15.0], [1.0, 2.0]), 500.0, None, vec![
            Some(vec![ConvergedToPositive]),
            Some(vec![ConvergedToPositive]),
        ]),
        FigureId::F3b => (pair(1.0, 1.0, [2.0, 2.0], [3.0, 15.0], [1.0, 3.5]), 500.0, None, vec![
            None,
            Some(vec![SustainedOscillation]),
        ]),
    };
    let mut scenario = Scenario::new(format!("figure {id}"), system);
    scenario.t_end = t_end;
    if let Some(dt) = dt {
        scenario.dt = dt;
    }
    Preset { id, scenario, expected }
}

/// Classification summary stored in a manifest entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub spectral_bound: f64,
    pub irreducible: bool,
    pub verdict_zero: ZeroVerdict,
    pub per_patch: PerPatch,
    pub x_star: Option<Vec<f64>>,
    pub gas_certificate: GasCertificate,
}

impl From<&ClassificationReport> for VerdictSummary {
    fn from(r: &ClassificationReport) -> Self {
        Self {
            spectral_bound: r.spectral.bound,
            irreducible: r.irreducible,
            verdict_zero: r.verdict_zero,
            per_patch: r.per_patch.clone(),
            x_star: r.equilibrium.as_ref().map(|e| e.x_star.clone()),
            gas_certificate: r.gas_certificate,
        }
    }
}

/// One figure's record in `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub figure: FigureId,
    /// CSV file name, relative to the manifest.
    pub csv: String,
    pub parameters: PatchSystemRepr,
    pub history: HistorySpec,
    pub t_end: f64,
    pub dt: f64,
    pub verdict: VerdictSummary,
    pub tail_window: (f64, f64),
    pub tails: Vec<PatchTail>,
    pub observed: Vec<TailLabel>,
    pub expected: Vec<Option<Vec<TailLabel>>>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub figures: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn all_match(&self) -> bool {
        self.figures.iter().all(|f| f.matches)
    }
}

/// Classifies and simulates one preset, writing `<id>.csv` into `dir`.
pub fn reproduce(id: FigureId, dir: &Path) -> Result<ManifestEntry> {
    let p = preset(id);
    let report = classify_dynamics(&p.scenario.system)?;
    let traj = p.scenario.simulate()?;
    let stats = tail_stats(&traj, DEFAULT_WINDOW_FRACTION)?;
    let x_star = report.equilibrium.as_ref().map(|e| e.x_star.clone());
    let observed: Vec<TailLabel> = stats
        .patches
        .iter()
        .enumerate()
        .map(|(i, t)| label_patch(t, x_star.as_ref().map(|x| x[i]), CONVERGENCE_TOL))
        .collect();
    let matches = observed
        .iter()
        .zip(&p.expected)
        .all(|(obs, allowed)| allowed.as_ref().is_none_or(|set| set.contains(obs)));

    let csv = format!("{id}.csv");
    let file = std::fs::File::create(dir.join(&csv)).map_err(io_err)?;
    traj.write_csv(std::io::BufWriter::new(file)).map_err(io_err)?;

    Ok(ManifestEntry {
        figure: id,
        csv,
        parameters: PatchSystemRepr::from(p.scenario.system.clone()),
        history: p.scenario.history.clone(),
        t_end: p.scenario.t_end,
        dt: p.scenario.dt,
        verdict: VerdictSummary::from(&report),
        tail_window: stats.window,
        tails: stats.patches,
        observed,
        expected: p.expected,
        matches,
    })
}

fn io_err(e: std::io::Error) -> crate::error::Error {
    crate::error::Error::Precondition(format!("cannot write output: {e}"))
}
