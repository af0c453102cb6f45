//! Fixed-step integration of the delay system (method of steps with dense
//! history) and of its undelayed counterpart, plus tail statistics.
//!
//! The integrator is classic RK4. Delayed values `x_i(t - τ_ik)` are read
//! from a piecewise cubic Hermite interpolant built on the stored nodes,
//! using the right-hand side evaluated at each node as its derivative. Since
//! the step never exceeds a tenth of the smallest delay, every lookup falls
//! in an interval whose two end nodes are already complete.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PatchSystem;

pub const DEFAULT_T_END: f64 = 500.0;
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.2;
pub const OSCILLATION_THRESHOLD: f64 = 0.05;
pub const CONVERGENCE_TOL: f64 = 1e-3;
/// Negative values above this magnitude abort the integration.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// `min(0.01, τ_min / 50)`.
pub fn default_dt(sys: &PatchSystem) -> f64 {
    (sys.tau_min() / 50.0).min(0.01)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Admissibility {
    /// Non-negative everywhere on `[-τ, 0]`.
    NonNegative,
    /// Non-negative and strictly positive at `0` on every patch.
    PositiveAtZero,
}

/// Initial history on `[-τ_max, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HistorySpec {
    Constant { value: Vec<f64> },
    /// Piecewise-linear through `(times[j], values[j])`; `times` increasing,
    /// starting at or before `-τ_max` and ending at `0`.
    Sampled { times: Vec<f64>, values: Vec<Vec<f64>> },
}

impl HistorySpec {
    pub fn constant(value: Vec<f64>) -> Self {
        HistorySpec::Constant { value }
    }

    pub fn dim(&self) -> usize {
        match self {
            HistorySpec::Constant { value } => value.len(),
            HistorySpec::Sampled { values, .. } => values.first().map_or(0, Vec::len),
        }
    }

    pub fn at_zero(&self) -> Vec<f64> {
        match self {
            HistorySpec::Constant { value } => value.clone(),
            HistorySpec::Sampled { values, .. } => values.last().cloned().unwrap_or_default(),
        }
    }

    /// `φ_i(s)` for `s <= 0`.
    pub fn value(&self, i: usize, s: f64) -> f64 {
        match self {
            HistorySpec::Constant { value } => value[i],
            HistorySpec::Sampled { times, values } => {
                let j = times.partition_point(|&t| t <= s);
                if j == 0 {
                    values[0][i]
                } else if j >= times.len() {
                    values[times.len() - 1][i]
                } else {
                    let (t0, t1) = (times[j - 1], times[j]);
                    let w = (s - t0) / (t1 - t0);
                    values[j - 1][i] * (1.0 - w) + values[j][i] * w
                }
            }
        }
    }

    /// Checks shape, coverage and sign; returns the admissibility class.
    pub fn validate(&self, n: usize, tau_max: f64) -> Result<Admissibility> {
        if self.dim() != n {
            return Err(Error::InadmissibleHistory(format!("history has {} components, system has {n}", self.dim())));
        }
        let all_values: Box<dyn Iterator<Item = &f64>> = match self {
            HistorySpec::Constant { value } => Box::new(value.iter()),
            HistorySpec::Sampled { times, values } => {
                if times.len() != values.len() || times.is_empty() {
                    return Err(Error::InadmissibleHistory("times and values must be non-empty and of equal length".into()));
                }
                if values.iter().any(|v| v.len() != n) {
                    return Err(Error::InadmissibleHistory("every sample needs one value per patch".into()));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InadmissibleHistory("sample times must be strictly increasing".into()));
                }
                if times[0] > -tau_max + 1e-12 || times[times.len() - 1].abs() > 1e-12 {
                    return Err(Error::InadmissibleHistory(format!(
                        "samples must cover [-{tau_max}, 0], got [{}, {}]",
                        times[0],
                        times[times.len() - 1]
                    )));
                }
                Box::new(values.iter().flatten())
            }
        };
        let mut all_values = all_values.peekable();
        if all_values.any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InadmissibleHistory("history values must be finite and non-negative".into()));
        }
        Ok(if self.at_zero().iter().all(|&v| v > 0.0) {
            Admissibility::PositiveAtZero
        } else {
            Admissibility::NonNegative
        })
    }
}

/// Numerical solution on a uniform grid over `[0, t_end]`, with a dense
/// interpolant reaching back to `-τ_max`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    n: usize,
    step: f64,
    states: Vec<f64>,
    derivs: Vec<f64>,
    history: HistorySpec,
    tau_max: f64,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of grid nodes, including `t = 0`.
    pub fn len(&self) -> usize {
        self.states.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.n..(k + 1) * self.n]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn derivative(&self, k: usize) -> &[f64] {
        &self.derivs[k * self.n..(k + 1) * self.n]
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    /// Values of one patch at every grid node.
    pub fn series(&self, patch: usize) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().skip(patch).step_by(self.n).copied()
    }

    /// Dense interpolant on `[-τ_max, t_end]`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        if t < -self.tau_max - 1e-12 || t > self.t_end() + 1e-12 {
            return Err(Error::Precondition(format!(
                "t = {t} outside [-{}, {}]",
                self.tau_max,
                self.t_end()
            )));
        }
        let view = DenseView { n: self.n, h: self.step, states: &self.states, derivs: &self.derivs, history: &self.history };
        Ok((0..self.n).map(|i| view.value(i, t.min(self.t_end()))).collect())
    }

    /// CSV with header `t,x1,...,xn` and one row per node, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut header = String::from("t");
        for i in 1..=self.n {
            header.push_str(&format!(",x{i}"));
        }
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for k in 0..self.len() {
            line.clear();
            line.push_str(&format!("{:.16e}", self.time(k)));
            for v in self.state(k) {
                line.push_str(&format!(",{v:.16e}"));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

struct DenseView<'a> {
    n: usize,
    h: f64,
    states: &'a [f64],
    derivs: &'a [f64],
    history: &'a HistorySpec,
}

impl DenseView<'_> {
    #[inline]
    fn value(&self, i: usize, s: f64) -> f64 {
        if s <= 0.0 {
            return self.history.value(i, s);
        }
        let last = self.states.len() / self.n - 1;
        let k = ((s / self.h) as usize).min(last.saturating_sub(1));
        let theta = (s - k as f64 * self.h) / self.h;
        if k + 1 > last {
            return self.states[k * self.n + i];
        }
        let (y0, y1) = (self.states[k * self.n + i], self.states[(k + 1) * self.n + i]);
        let (f0, f1) = (self.derivs[k * self.n + i], self.derivs[(k + 1) * self.n + i]);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + theta) * self.h * f0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * self.h * f1
    }
}

fn check_state(x: &mut [f64], time: f64) -> Result<()> {
    for (i, v) in x.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { time });
        }
        if *v < 0.0 {
            if *v > -NEGATIVITY_TOL {
                *v = 0.0;
            } else {
                return Err(Error::Negativity { patch: i, value: *v, time });
            }
        }
    }
    Ok(())
}

fn grid(t_end: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Precondition(format!("t_end must be positive, got {t_end}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Precondition(format!("dt must be positive, got {dt}")));
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, t_end / steps as f64))
}

/// Integrates the delay system from `history` over `[0, t_end]`.
pub fn integrate_dde(sys: &PatchSystem, history: &HistorySpec, t_end: f64, dt: f64) -> Result<Trajectory> {
    let n = sys.n();
    let tau_max = sys.tau_max();
    history.validate(n, tau_max)?;
    let limit = sys.tau_min() / 10.0;
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let (steps, h) = grid(t_end, dt)?;

    let tau = sys.tau();
    let mut states = Vec::with_capacity((steps + 1) * n);
    let mut derivs = Vec::with_capacity((steps + 1) * n);
    states.extend(history.at_zero());

    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut stage = vec![0.0; n];
    let mut x = history.at_zero();

    let eval = |states: &[f64], derivs: &[f64], t: f64, xs: &[f64], out: &mut [f64]| {
        let view = DenseView { n, h, states, derivs, history };
        sys.rhs_with(xs, |i, k| view.value(i, t - tau[(i, k)]), out);
    };

    for step in 0..steps {
        let t = step as f64 * h;
        eval(&states, &derivs, t, &x, &mut k1);
        derivs.extend_from_slice(&k1);

        for i in 0..n {
            stage[i] = x[i] + 0.5 * h * k1[i];
        }
        eval(&states, &derivs, t + 0.5 * h, &stage, &mut k2);
        for i in 0..n {
            stage[i] = x[i] + 0.5 * h * k2[i];
        }
        eval(&states, &derivs, t + 0.5 * h, &stage, &mut k3);
        for i in 0..n {
            stage[i] = x[i] + h * k3[i];
        }
        eval(&states, &derivs, t + h, &stage, &mut k4);

        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check_state(&mut x, t + h)?;
        states.extend_from_slice(&x);
    }
    eval(&states, &derivs, steps as f64 * h, &x, &mut k1);
    derivs.extend_from_slice(&k1);

    Ok(Trajectory { n, step: h, states, derivs, history: history.clone(), tau_max })
}

fn rk4_ode_step(sys: &PatchSystem, x: &mut [f64], h: f64, scratch: &mut [Vec<f64>; 5]) {
    let n = x.len();
    let [k1, k2, k3, k4, stage] = scratch;
    sys.rhs_with(x, |i, _| x[i], k1);
    for i in 0..n {
        stage[i] = x[i] + 0.5 * h * k1[i];
    }
    sys.rhs_with(stage, |i, _| stage[i], k2);
    for i in 0..n {
        stage[i] = x[i] + 0.5 * h * k2[i];
    }
    sys.rhs_with(stage, |i, _| stage[i], k3);
    for i in 0..n {
        stage[i] = x[i] + h * k3[i];
    }
    sys.rhs_with(stage, |i, _| stage[i], k4);
    for i in 0..n {
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Integrates the undelayed system `x' = f(x)` from `x0`.
pub fn integrate_ode(sys: &PatchSystem, x0: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    let n = sys.n();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { what: "x0", expected: n, got: x0.len() });
    }
    if let Some(&v) = x0.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::NegativeInput(v));
    }
    let (steps, h) = grid(t_end, dt)?;
    let mut states = Vec::with_capacity((steps + 1) * n);
    let mut derivs = Vec::with_capacity((steps + 1) * n);
    let mut x = x0.to_vec();
    let mut scratch: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    let mut f = vec![0.0; n];
    states.extend_from_slice(&x);
    for step in 0..steps {
        sys.rhs_with(&x, |i, _| x[i], &mut f);
        derivs.extend_from_slice(&f);
        rk4_ode_step(sys, &mut x, h, &mut scratch);
        check_state(&mut x, (step + 1) as f64 * h)?;
        states.extend_from_slice(&x);
    }
    sys.rhs_with(&x, |i, _| x[i], &mut f);
    derivs.extend_from_slice(&f);
    Ok(Trajectory { n, step: h, states, derivs, history: HistorySpec::constant(x0.to_vec()), tau_max: 0.0 })
}

/// Result of running the undelayed flow until it comes to rest.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowLimit {
    pub state: Vec<f64>,
    pub time: f64,
    pub converged: bool,
}

/// RK4 on `x' = f(x)` until two samples one time unit apart differ by less
/// than `tol` in the max norm, or `max_time` elapses.
pub fn ode_flow_to_rest(sys: &PatchSystem, x0: &[f64], dt: f64, tol: f64, max_time: f64) -> Result<FlowLimit> {
    let n = sys.n();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { what: "x0", expected: n, got: x0.len() });
    }
    let per_sample = (1.0 / dt).ceil().max(1.0) as usize;
    let h = 1.0 / per_sample as f64;
    let mut x = x0.to_vec();
    let mut prev = x.clone();
    let mut scratch: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    let mut time = 0.0;
    while time < max_time {
        for _ in 0..per_sample {
            rk4_ode_step(sys, &mut x, h, &mut scratch);
        }
        time += 1.0;
        check_state(&mut x, time)?;
        let change = x.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if change < tol {
            return Ok(FlowLimit { state: x, time, converged: true });
        }
        prev.copy_from_slice(&x);
    }
    Ok(FlowLimit { state: x, time, converged: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchTail {
    pub tail_min: f64,
    pub tail_max: f64,
    pub tail_mean: f64,
    /// `(max - min) / mean`, zero when the mean vanishes.
    pub relative_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailStats {
    pub window: (f64, f64),
    pub patches: Vec<PatchTail>,
}

/// Statistics over the last `window_fraction` of the horizon.
pub fn tail_stats(traj: &Trajectory, window_fraction: f64) -> Result<TailStats> {
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(Error::Precondition(format!("window fraction must lie in (0, 1), got {window_fraction}")));
    }
    let t_end = traj.t_end();
    let t_start = t_end * (1.0 - window_fraction);
    let first = (0..traj.len()).find(|&k| traj.time(k) >= t_start - 1e-12).unwrap_or(traj.len());
    let count = traj.len() - first;
    if count == 0 || traj.len() < 2 {
        return Err(Error::Precondition("tail window contains no grid nodes".into()));
    }
    let patches = (0..traj.dim())
        .map(|i| {
            let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for k in first..traj.len() {
                let v = traj.state(k)[i];
                lo = lo.min(v);
                hi = hi.max(v);
                sum += v;
            }
            let mean = sum / count as f64;
            let relative_amplitude = if mean > 0.0 { (hi - lo) / mean } else { 0.0 };
            PatchTail { tail_min: lo, tail_max: hi, tail_mean: mean, relative_amplitude }
        })
        .collect();
    Ok(TailStats { window: (traj.time(first), t_end), patches })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TailLabel {
    ConvergedToZero,
    ConvergedToPositive,
    SustainedOscillation,
    Undetermined,
}

/// Labels one patch from its tail statistics.
pub fn label_patch(tail: &PatchTail, x_star: Option<f64>, tol: f64) -> TailLabel {
    if tail.tail_max < tol {
        return TailLabel::ConvergedToZero;
    }
    let near_target = x_star.is_none_or(|target| (tail.tail_mean - target).abs() <= 0.01 * target);
    if tail.relative_amplitude < tol && tail.tail_mean > tol && near_target {
        TailLabel::ConvergedToPositive
    } else if tail.relative_amplitude >= OSCILLATION_THRESHOLD {
        TailLabel::SustainedOscillation
    } else {
        TailLabel::Undetermined
    }
}

/// Qualitative per-patch labels over the default tail window.
pub fn classify_tail(traj: &Trajectory, x_star: Option<&[f64]>, tol: f64) -> Result<Vec<TailLabel>> {
    let stats = tail_stats(traj, DEFAULT_WINDOW_FRACTION)?;
    Ok(stats
        .patches
        .iter()
        .enumerate()
        .map(|(i, p)| label_patch(p, x_star.map(|x| x[i]), tol))
        .collect())
}
