//! Delay sweeps: one simulation per value of a single delay.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::solve_positive_equilibrium;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::sim::{default_dt, label_patch, tail_stats, TailLabel, CONVERGENCE_TOL, DEFAULT_WINDOW_FRACTION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub label: TailLabel,
    pub relative_amplitude: f64,
    pub tail_min: f64,
    pub tail_max: f64,
}

/// `steps` evenly spaced values from `from` to `to` inclusive; a single
/// value when `from == to` or `steps == 1`.
pub fn delay_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if !(from > 0.0 && to >= from && from.is_finite() && to.is_finite()) {
        return Err(Error::Precondition(format!("need 0 < from <= to, got [{from}, {to}]")));
    }
    if steps == 0 {
        return Err(Error::Precondition("steps must be at least 1".into()));
    }
    if from == to || steps == 1 {
        return Ok(vec![from]);
    }
    let h = (to - from) / (steps - 1) as f64;
    Ok((0..steps).map(|k| if k + 1 == steps { to } else { from + h * k as f64 }).collect())
}

/// Simulates `scenario` with `τ_{patch, k}` set to each grid value and labels
/// the tail of `patch` (zero-based indices). Rows come back ordered by `τ`.
///
/// The step is re-derived from each modified system so that it stays below a
/// tenth of the smallest delay.
pub fn sweep_delay(scenario: &Scenario, patch: usize, k: usize, taus: &[f64]) -> Result<Vec<SweepRow>> {
    let sys = &scenario.system;
    if patch >= sys.n() || k >= sys.m() {
        return Err(Error::Precondition(format!("no delay at ({patch}, {k}) in a {}x{} table", sys.n(), sys.m())));
    }
    // equilibria do not depend on the delays
    let x_star = solve_positive_equilibrium(sys)?.map(|c| c.x_star[patch]);
    let mut rows = taus
        .par_iter()
        .map(|&tau| {
            let modified = sys.with_delay(patch, k, tau)?;
            let dt = scenario.dt.min(default_dt(&modified));
            let traj = crate::sim::integrate_dde(&modified, &scenario.history, scenario.t_end, dt)?;
            let tail = tail_stats(&traj, DEFAULT_WINDOW_FRACTION)?.patches[patch];
            Ok(SweepRow {
                tau,
                label: label_patch(&tail, x_star, CONVERGENCE_TOL),
                relative_amplitude: tail.relative_amplitude,
                tail_min: tail.tail_min,
                tail_max: tail.tail_max,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    Ok(rows)
}
