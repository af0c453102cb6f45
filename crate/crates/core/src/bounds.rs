//! Explicit asymptotic bounds on solutions.
//!
//! Three sources are available:
//!
//! * the dissipativity bound `(D - A)^{-1} β e^{-1}`, an upper bound on every
//!   `limsup x_i(t)`, valid for all admissible systems;
//! * closed-form bounds from the range `e^α <= γ_i <= e^β` of the growth
//!   ratios, valid when `0 < α < β` and `β > 1`;
//! * permanence constants `(m, L)` built from a positive vector `c` with
//!   `Mc > 0`, giving `c_i m <= liminf x_i <= limsup x_i <= c_i L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::linear_solve;
use crate::model::{gamma_coefficients, PatchSystem};

/// Relative margin that keeps `L` strictly above `max 1/c_i`.
const L_MARGIN: f64 = 1e-9;

/// `(D - A)^{-1} β e^{-1}`.
pub fn dissipativity_bound(sys: &PatchSystem) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = sys.birth_totals().iter().map(|b| b / std::f64::consts::E).collect();
    linear_solve(&sys.dispersal_matrix(), &rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormBounds {
    pub alpha_lo: f64,
    pub beta_hi: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `lower = min{α, exp(α + β - 1 - e^{β-1})}`, `upper = e^{β-1}`; `None`
/// unless `0 < α < β` and `β > 1`.
pub fn closed_form_bounds(alpha_lo: f64, beta_hi: f64) -> Option<ClosedFormBounds> {
    if !(alpha_lo > 0.0 && alpha_lo < beta_hi && beta_hi > 1.0 && beta_hi.is_finite()) {
        return None;
    }
    let upper = (beta_hi - 1.0).exp();
    let lower = alpha_lo.min((alpha_lo + beta_hi - 1.0 - upper).exp());
    Some(ClosedFormBounds { alpha_lo, beta_hi, lower, upper })
}

/// `(min ln γ_i, max ln γ_i)` when every `γ_i` is defined and above one and
/// the resulting range satisfies `α < β`, `β > 1`.
pub fn gamma_exponent_range(sys: &PatchSystem) -> Option<(f64, f64)> {
    let gammas: Option<Vec<f64>> = gamma_coefficients(sys).into_iter().collect();
    let logs: Vec<f64> = gammas?.into_iter().map(f64::ln).collect();
    if logs.iter().any(|l| !(*l > 0.0)) {
        return None;
    }
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo < hi && hi > 1.0).then_some((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermanenceConstants {
    /// Normalised so that `min c_i = 1`.
    pub c: Vec<f64>,
    /// `γ̄_i = β_i c_i / (d_i c_i - Σ_j a_ij c_j)`.
    pub scaled_gammas: Vec<f64>,
    pub m_const: f64,
    pub l_const: f64,
}

impl PermanenceConstants {
    /// Per-patch `(c_i m, c_i L)`.
    pub fn patch_bounds(&self) -> Vec<(f64, f64)> {
        self.c.iter().map(|ci| (ci * self.m_const, ci * self.l_const)).collect()
    }

    /// Re-checks `c_i m < 1`, `e^{c_i m} <= γ̄_i`, `h_i(m) <= h_i(L)`,
    /// `L > 1/c_i` and `L >= γ̄_i / e`.
    pub fn satisfies_constraints(&self) -> bool {
        let (m, l) = (self.m_const, self.l_const);
        m > 0.0
            && self.c.iter().zip(&self.scaled_gammas).all(|(&ci, &g)| {
                ci * m < 1.0
                    && (ci * m).exp() <= g * (1.0 + 1e-12)
                    && scaled_ricker(ci, m) <= scaled_ricker(ci, l) * (1.0 + 1e-12)
                    && l * ci > 1.0
                    && l >= g / std::f64::consts::E
            })
    }
}

/// `h_i(x) = x e^{-c_i x}`.
fn scaled_ricker(ci: f64, x: f64) -> f64 {
    x * (-ci * x).exp()
}

/// Root of `h_i(x) = e^{ln_target}` on `(0, 1/c_i)`, where the target is
/// below the peak value. Bisection runs on `u = ln x` over
/// `[ln_target, -ln c_i]`, comparing `u - c_i e^u` with `ln_target`, so
/// targets far below the smallest double are still resolved.
fn rising_branch_log_root(ci: f64, ln_target: f64) -> f64 {
    let (mut lo, mut hi) = (ln_target, -ci.ln());
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid - ci * mid.exp() <= ln_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    lo
}

/// Constants `(m, L)` for a vector `c > 0` with `Mc > 0`.
///
/// `L` is the least value with `L >= max γ̄_i / e` and `L > max 1/c_i`; `m`
/// is the largest value below every `ln γ̄_i / c_i` with `h_i(m) <= h_i(L)`.
pub fn permanence_constants(sys: &PatchSystem, c: &[f64]) -> Result<PermanenceConstants> {
    let n = sys.n();
    if c.len() != n {
        return Err(Error::DimensionMismatch { what: "c", expected: n, got: c.len() });
    }
    if c.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Precondition("c must be strictly positive".into()));
    }
    let cmin = c.iter().copied().fold(f64::INFINITY, f64::min);
    let c: Vec<f64> = c.iter().map(|v| v / cmin).collect();

    let beta = sys.birth_totals();
    let mut scaled = Vec::with_capacity(n);
    for i in 0..n {
        let outflow: f64 = (0..n).map(|j| sys.a()[(i, j)] * c[j]).sum();
        let denom = sys.d()[i] * c[i] - outflow;
        if !(denom > 0.0) {
            return Err(Error::Precondition(format!("scaled loss on patch {i} is not positive")));
        }
        let g = beta[i] * c[i] / denom;
        if !(g > 1.0) {
            return Err(Error::Precondition(format!("scaled growth ratio on patch {i} is {g}, not above 1")));
        }
        scaled.push(g);
    }

    let inv_c_max = c.iter().map(|v| 1.0 / v).fold(0.0, f64::max);
    let g_max = scaled.iter().copied().fold(0.0, f64::max);
    let l_const = (g_max / std::f64::consts::E).max(inv_c_max * (1.0 + L_MARGIN));

    let mut ln_m = f64::INFINITY;
    for i in 0..n {
        ln_m = ln_m.min((scaled[i].ln() / c[i]).ln());
        ln_m = ln_m.min(rising_branch_log_root(c[i], l_const.ln() - c[i] * l_const));
    }
    let m_const = ln_m.exp();
    if !(m_const > f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!("lower permanence constant e^{ln_m} is below double precision")));
    }

    let pc = PermanenceConstants { c, scaled_gammas: scaled, m_const, l_const };
    debug_assert!(pc.satisfies_constraints(), "{pc:?}");
    Ok(pc)
}

/// Iterates `s_{k+1} = min{m, min_j γ_j s_k e^{-c_j s_k}}` from `s0`,
/// returning `s_0, ..., s_{k_max}`. The sequence is non-decreasing and tends
/// to `m` whenever `c_j m < 1` and `e^{c_j m} <= γ_j`.
pub fn lower_bound_sequence(gammas: &[f64], cs: &[f64], m_const: f64, s0: f64, k_max: usize) -> Result<Vec<f64>> {
    if gammas.len() != cs.len() {
        return Err(Error::DimensionMismatch { what: "cs", expected: gammas.len(), got: cs.len() });
    }
    if !(s0 > 0.0 && s0 <= m_const) {
        return Err(Error::Precondition(format!("need 0 < s0 <= m, got s0 = {s0}, m = {m_const}")));
    }
    for (&g, &ci) in gammas.iter().zip(cs) {
        if !(ci > 0.0 && ci * m_const < 1.0 && (ci * m_const).exp() <= g * (1.0 + 1e-12)) {
            return Err(Error::Precondition(format!("constants violate c m < 1 or e^(c m) <= γ for (γ, c) = ({g}, {ci})")));
        }
    }
    let mut seq = Vec::with_capacity(k_max + 1);
    let mut s = s0;
    seq.push(s);
    for _ in 0..k_max {
        let image = gammas
            .iter()
            .zip(cs)
            .map(|(&g, &ci)| g * scaled_ricker(ci, s))
            .fold(f64::INFINITY, f64::min);
        s = m_const.min(image);
        seq.push(s);
    }
    Ok(seq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundSource {
    Dissipativity,
    ClosedForm,
    Permanence,
}

/// All bounds that apply to a system, combined per patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBounds {
    pub dissipativity: Vec<f64>,
    pub closed_form: Option<ClosedFormBounds>,
    pub permanence: Option<PermanenceConstants>,
    /// Tightest upper bound per patch.
    pub upper: Vec<f64>,
    pub upper_source: Vec<BoundSource>,
    /// Tightest lower bound per patch (zero when nothing applies).
    pub lower: Vec<f64>,
    pub lower_source: Vec<Option<BoundSource>>,
}

impl AsymptoticBounds {
    pub fn collect(sys: &PatchSystem, c: Option<&[f64]>) -> Result<Self> {
        let n = sys.n();
        let dissipativity = dissipativity_bound(sys)?;
        let closed_form = gamma_exponent_range(sys).and_then(|(a, b)| closed_form_bounds(a, b));
        let permanence = match c {
            Some(c) => permanence_constants(sys, c).ok(),
            None => None,
        };

        let mut upper = dissipativity.clone();
        let mut upper_source = vec![BoundSource::Dissipativity; n];
        let mut lower = vec![0.0; n];
        let mut lower_source = vec![None; n];
        let mut offer = |i: usize, lo: f64, hi: f64, src: BoundSource| {
            if hi < upper[i] {
                upper[i] = hi;
                upper_source[i] = src;
            }
            if lo > lower[i] {
                lower[i] = lo;
                lower_source[i] = Some(src);
            }
        };
        if let Some(cf) = &closed_form {
            for i in 0..n {
                offer(i, cf.lower, cf.upper, BoundSource::ClosedForm);
            }
        }
        if let Some(pc) = &permanence {
            for (i, (lo, hi)) in pc.patch_bounds().into_iter().enumerate() {
                offer(i, lo, hi, BoundSource::Permanence);
            }
        }
        Ok(Self { dissipativity, closed_form, permanence, upper, upper_source, lower, lower_source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn example_pair() -> PatchSystem {
        PatchSystem::single_delay(vec![3.0, 2.0], vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 3.0], vec![5.0, 10.0])
            .unwrap()
    }

    #[test]
    fn dissipativity_examples() {
        let u = dissipativity_bound(&example_pair()).unwrap();
        assert!((u[0] - 1.0 / E).abs() < 1e-12 && (u[1] - 2.0 / E).abs() < 1e-12);
        let s = PatchSystem::single_delay(vec![2.0], vec![vec![0.0]], vec![3.0], vec![1.0]).unwrap();
        assert!((dissipativity_bound(&s).unwrap()[0] - 3.0 / (2.0 * E)).abs() < 1e-15);
        let diag = PatchSystem::single_delay(vec![2.0, 4.0], vec![vec![0.0; 2]; 2], vec![3.0, 5.0], vec![1.0, 1.0]).unwrap();
        let u = dissipativity_bound(&diag).unwrap();
        assert!((u[0] - 3.0 / (2.0 * E)).abs() < 1e-15 && (u[1] - 5.0 / (4.0 * E)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_values() {
        let b = closed_form_bounds(1.0, 2.0).unwrap();
        // e^{2-e}, evaluated independently
        assert!((b.lower - 0.487_589_298_719_261).abs() < 1e-13);
        assert!((b.upper - E).abs() < 1e-15);
        assert!((closed_form_bounds(0.5, 1.0001).unwrap().upper - 1.0001).abs() < 1e-7);
        assert!(closed_form_bounds(2.0, 2.0).is_none());
        assert!(closed_form_bounds(0.5, 0.9).is_none());
    }

    #[test]
    fn exponent_range() {
        // decoupled, d = 1, β = γ
        let sys = PatchSystem::single_delay(vec![1.0, 1.0], vec![vec![0.0; 2]; 2], vec![1.2f64.exp(), 1.5f64.exp()], vec![1.0, 1.0])
            .unwrap();
        let (a, b) = gamma_exponent_range(&sys).unwrap();
        assert!((a - 1.2).abs() < 1e-12 && (b - 1.5).abs() < 1e-12);
        assert!(gamma_exponent_range(&example_pair()).is_none());
        let equal = PatchSystem::single_delay(vec![1.0, 1.0], vec![vec![0.0; 2]; 2], vec![5.0, 5.0], vec![1.0, 1.0]).unwrap();
        assert!(gamma_exponent_range(&equal).is_none());
    }

    #[test]
    fn scalar_permanence_constants() {
        let sys = PatchSystem::single_delay(vec![1.0], vec![vec![0.0]], vec![E * E], vec![1.0]).unwrap();
        let pc = permanence_constants(&sys, &[1.0]).unwrap();
        assert!((pc.l_const - E).abs() < 1e-12);
        // m e^{-m} = e^{1-e}
        assert!((pc.m_const - 0.224_528_298_082_958_4).abs() < 1e-12, "{}", pc.m_const);
        assert!(pc.satisfies_constraints());
    }

    #[test]
    fn example_pair_permanence() {
        let pc = permanence_constants(&example_pair(), &[1.0, 2.5]).unwrap();
        assert!(pc.m_const.is_finite() && pc.l_const.is_finite() && pc.m_const > 0.0);
        assert!(pc.patch_bounds().iter().all(|(lo, hi)| lo < hi));
        assert!(pc.satisfies_constraints());
    }

    #[test]
    fn permanence_rejects_bad_c() {
        assert!(permanence_constants(&example_pair(), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn sequence_behaviour() {
        let g = [E * E];
        let c = [1.0];
        let seq = lower_bound_sequence(&g, &c, 0.18, 0.01, 200).unwrap();
        assert!(seq.windows(2).all(|w| w[1] >= w[0]));
        assert!(seq[1] > seq[0]);
        assert!((seq[seq.len() - 1] - 0.18).abs() < 1e-12);
        let fixed = lower_bound_sequence(&g, &c, 0.18, 0.18, 10).unwrap();
        assert!(fixed.iter().all(|&s| s == 0.18));
        assert!(lower_bound_sequence(&g, &c, 0.18, 0.2, 10).is_err());
    }

    #[test]
    fn collected_bounds_order() {
        let sys = example_pair();
        let b = AsymptoticBounds::collect(&sys, Some(&[1.0, 2.5])).unwrap();
        assert!(b.closed_form.is_none() && b.permanence.is_some());
        for i in 0..2 {
            assert!(0.0 < b.lower[i] && b.lower[i] <= b.upper[i]);
        }
    }
}
