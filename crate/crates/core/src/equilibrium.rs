//! Positive equilibria of the undelayed system `x' = f(x)` and their
//! certificates.
//!
//! Equilibria of the delay system are the same points, since a constant
//! history makes every delayed term equal to the current state.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bounds::dissipativity_bound;
use crate::error::{Error, Result};
use crate::matrix::{find_positive_c_ladder, is_nonsingular_m_matrix, linear_solve, spectral_bound_of};
use crate::model::{rhs_ode, ricker_derivative, PatchSystem};
use crate::sim::ode_flow_to_rest;

const NEWTON_MAX_ITER: usize = 200;
const MAX_HALVINGS: usize = 60;
const FLOW_TOL: f64 = 1e-10;
const FLOW_MAX_TIME: f64 = 1e6;

/// Residual acceptance threshold `1e-10 · (1 + ‖x‖∞)`.
pub fn residual_tolerance(x: &[f64]) -> f64 {
    1e-10 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub x_star: Vec<f64>,
    /// `‖f(x*)‖∞`.
    pub residual: f64,
    /// `s(Df(x*))`.
    pub jacobian_spectral_bound: f64,
    /// `-Df(x*) x* > 0` componentwise.
    pub saturated: bool,
    pub neg_jacobian_is_nsm: bool,
    /// Sign of `det(-Df(x*))`; `0` when the determinant vanishes.
    pub index: i8,
    pub max_component: f64,
    /// Every component is at most 2.
    pub a2_window: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    RobustlyStable,
    PotentiallyDelayUnstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayRobustnessVerdict {
    #[serde(with = "crate::rows")]
    pub n_hat: DMatrix<f64>,
    /// `λ_i = d_i - β_i |h'(x*_i)|`.
    pub diagonal_lambdas: Vec<f64>,
    pub verdict: Verdict,
}

/// `Df(x) = A - D + diag(β_i h'(x_i))`.
pub fn jacobian(sys: &PatchSystem, x: &[f64]) -> Result<DMatrix<f64>> {
    let n = sys.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch { what: "state", expected: n, got: x.len() });
    }
    if let Some(&v) = x.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::NegativeInput(v));
    }
    let beta = sys.birth_totals();
    let mut j = sys.a().clone();
    for i in 0..n {
        j[(i, i)] += -sys.d()[i] + beta[i] * ricker_derivative(x[i]);
    }
    Ok(j)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `F_i(x) = f_i(x) / x_i`: same positive roots as `f`, none at the origin.
fn scaled_residual(sys: &PatchSystem, x: &[f64]) -> Result<Vec<f64>> {
    Ok(rhs_ode(sys, x)?.iter().zip(x).map(|(f, xi)| f / xi).collect())
}

/// Damped Newton from `x0 > 0`. Each step is halved until the iterate is
/// strictly positive and the residual decreases.
///
/// Iterates on `F(x) = diag(x)^{-1} f(x)` so that the trivial root cannot
/// attract; acceptance needs both `‖f‖∞` and `‖F‖∞` below tolerance.
pub fn newton_from(sys: &PatchSystem, x0: &[f64]) -> Result<Vec<f64>> {
    let n = sys.n();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { what: "x0", expected: n, got: x0.len() });
    }
    if x0.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Precondition("Newton start must be strictly positive".into()));
    }
    // small f alone also holds next to the trivial root, so F must vanish too
    let accept = |x: &[f64], g: &[f64], slack: f64| -> Result<bool> {
        let tol = slack * residual_tolerance(x);
        Ok(sup_norm(&rhs_ode(sys, x)?) <= tol && sup_norm(g) <= tol)
    };
    let mut x = x0.to_vec();
    let mut g = scaled_residual(sys, &x)?;
    let mut res = sup_norm(&g);
    for _ in 0..NEWTON_MAX_ITER {
        if accept(&x, &g, 1e-2)? {
            return Ok(x);
        }
        let mut dg = jacobian(sys, &x)?;
        for i in 0..n {
            for j in 0..n {
                dg[(i, j)] /= x[i];
            }
            dg[(i, i)] -= g[i] / x[i];
        }
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let step = linear_solve(&dg, &neg_g)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + lambda * s).collect();
            if trial.iter().all(|v| *v > 0.0) {
                let gt = scaled_residual(sys, &trial)?;
                let rt = sup_norm(&gt);
                if rt < res {
                    x = trial;
                    g = gt;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // stalled at rounding level
            break;
        }
    }
    if accept(&x, &g, 1.0)? {
        Ok(x)
    } else {
        Err(Error::NonConvergence { method: "damped Newton", iterations: NEWTON_MAX_ITER })
    }
}

/// Largest `ε` in `{0.5, 0.1, 0.01, 0.001, ...}` with `f(εc) > 0`.
pub fn sub_equilibrium_scale(sys: &PatchSystem, c: &[f64]) -> Result<f64> {
    let mut eps = 0.5;
    let mut next = 0.1;
    for _ in 0..30 {
        let x: Vec<f64> = c.iter().map(|v| eps * v).collect();
        if rhs_ode(sys, &x)?.iter().all(|v| *v > 0.0) {
            return Ok(eps);
        }
        eps = next;
        next *= 0.1;
    }
    Err(Error::Precondition("no ε with f(εc) > 0 found".into()))
}

/// Result of running the undelayed flow from below and from above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub converged: bool,
}

/// Runs the flow from the sub-equilibrium point `εc` and from twice the
/// dissipativity bound, until one-unit samples change by less than `1e-10`.
pub fn monotone_bracket_flow(sys: &PatchSystem, c: &[f64]) -> Result<Bracket> {
    let n = sys.n();
    if c.len() != n {
        return Err(Error::DimensionMismatch { what: "c", expected: n, got: c.len() });
    }
    let mc = sys.community_matrix().entries() * DVector::from_column_slice(c);
    if c.iter().any(|v| !(*v > 0.0)) || mc.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Precondition("bracket flow needs c > 0 with Mc > 0".into()));
    }
    let eps = sub_equilibrium_scale(sys, c)?;
    let start_lo: Vec<f64> = c.iter().map(|v| eps * v).collect();
    let start_hi: Vec<f64> = dissipativity_bound(sys)?.iter().map(|v| 2.0 * v).collect();

    // |h'| <= 1, so this bounds every row sum of |Df|
    let rate = sys
        .d()
        .iter()
        .zip(sys.birth_totals())
        .enumerate()
        .map(|(i, (d, b))| d + b + sys.a().row(i).iter().sum::<f64>())
        .fold(0.0, f64::max);
    let dt = (0.5 / rate.max(1.0)).min(0.01);

    let lo = ode_flow_to_rest(sys, &start_lo, dt, FLOW_TOL, FLOW_MAX_TIME)?;
    let hi = ode_flow_to_rest(sys, &start_hi, dt, FLOW_TOL, FLOW_MAX_TIME)?;
    Ok(Bracket { lower: lo.state, upper: hi.state, converged: lo.converged && hi.converged })
}

/// Checks saturation and regularity of a positive root.
pub fn certify_saturated(sys: &PatchSystem, x_star: &[f64]) -> Result<EquilibriumCertificate> {
    let n = sys.n();
    if x_star.len() != n {
        return Err(Error::DimensionMismatch { what: "x_star", expected: n, got: x_star.len() });
    }
    if x_star.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Precondition("equilibrium must be strictly positive".into()));
    }
    let residual = sup_norm(&rhs_ode(sys, x_star)?);
    if residual > residual_tolerance(x_star) {
        return Err(Error::Precondition(format!("residual {residual:e} exceeds tolerance")));
    }
    let j = jacobian(sys, x_star)?;
    let neg_j = -&j;
    let push = &neg_j * DVector::from_column_slice(x_star);
    let saturated = push.iter().all(|v| *v > 0.0);
    let nsm = is_nonsingular_m_matrix(&neg_j);
    let det = neg_j.clone().lu().determinant();
    let index = if det > 0.0 {
        1
    } else if det < 0.0 {
        -1
    } else {
        0
    };
    let max_component = x_star.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(EquilibriumCertificate {
        x_star: x_star.to_vec(),
        residual,
        jacobian_spectral_bound: spectral_bound_of(&j)?,
        saturated,
        neg_jacobian_is_nsm: nsm,
        index,
        max_component,
        a2_window: max_component <= 2.0,
    })
}

/// The positive equilibrium, when a positive `c` with `Mc > 0` exists.
///
/// Newton is started from `εc` and from the dissipativity bound; the first
/// root that certifies wins. If both starts fail, the monotone flow limit is
/// polished and certified instead.
pub fn solve_positive_equilibrium(sys: &PatchSystem) -> Result<Option<EquilibriumCertificate>> {
    let Some((c, _)) = find_positive_c_ladder(&sys.community_matrix()) else {
        return Ok(None);
    };
    solve_with_c(sys, &c).map(Some)
}

pub(crate) fn solve_with_c(sys: &PatchSystem, c: &[f64]) -> Result<EquilibriumCertificate> {
    let eps = sub_equilibrium_scale(sys, c)?;
    let starts = [c.iter().map(|v| eps * v).collect::<Vec<_>>(), dissipativity_bound(sys)?];
    for start in &starts {
        if let Ok(x) = newton_from(sys, start) {
            if let Ok(cert) = certify_saturated(sys, &x) {
                return Ok(cert);
            }
        }
    }
    let bracket = monotone_bracket_flow(sys, c)?;
    let x = newton_from(sys, &bracket.lower)?;
    certify_saturated(sys, &x)
}

/// Builds `N̂` with `N̂_ii = d_i - β_i |h'(x*_i)|` and `N̂_ij = -a_ij`.
pub fn delay_robustness(sys: &PatchSystem, x_star: &[f64]) -> Result<DelayRobustnessVerdict> {
    let n = sys.n();
    if x_star.len() != n {
        return Err(Error::DimensionMismatch { what: "x_star", expected: n, got: x_star.len() });
    }
    let beta = sys.birth_totals();
    let lambdas: Vec<f64> = (0..n).map(|i| sys.d()[i] - beta[i] * ricker_derivative(x_star[i]).abs()).collect();
    let mut n_hat = -sys.a().clone();
    for i in 0..n {
        n_hat[(i, i)] = lambdas[i];
    }
    let verdict = if is_nonsingular_m_matrix(&n_hat) {
        Verdict::RobustlyStable
    } else {
        Verdict::PotentiallyDelayUnstable
    };
    Ok(DelayRobustnessVerdict { n_hat, diagonal_lambdas: lambdas, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar() -> PatchSystem {
        PatchSystem::single_delay(vec![2.0], vec![vec![0.0]], vec![3.0], vec![1.0]).unwrap()
    }

    fn example_pair() -> PatchSystem {
        PatchSystem::single_delay(vec![3.0, 2.0], vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 3.0], vec![5.0, 10.0])
            .unwrap()
    }

    fn oscillating_pair() -> PatchSystem {
        PatchSystem::single_delay(vec![2.0, 2.0], vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![3.0, 15.0], vec![1.0, 2.0])
            .unwrap()
    }

    #[test]
    fn jacobian_at_zero_is_community_matrix() {
        let sys = example_pair();
        assert_eq!(jacobian(&sys, &[0.0, 0.0]).unwrap(), *sys.community_matrix().entries());
    }

    #[test]
    fn scalar_jacobian_at_root() {
        let x = 1.5f64.ln();
        let j = jacobian(&scalar(), &[x]).unwrap();
        assert!((j[(0, 0)] + 2.0 * x).abs() < 1e-14);
    }

    #[test]
    fn scalar_equilibrium() {
        let cert = solve_positive_equilibrium(&scalar()).unwrap().unwrap();
        assert!((cert.x_star[0] - 1.5f64.ln()).abs() < 1e-12, "{cert:?}");
        assert_eq!(cert.index, 1);
        assert!(cert.saturated && cert.neg_jacobian_is_nsm && cert.a2_window);
        let b = monotone_bracket_flow(&scalar(), &[1.0]).unwrap();
        assert!(b.converged);
        assert!((b.lower[0] - 1.5f64.ln()).abs() < 1e-8 && (b.upper[0] - 1.5f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn example_pair_equilibrium_and_bracket() {
        let sys = example_pair();
        let cert = solve_positive_equilibrium(&sys).unwrap().unwrap();
        assert!(cert.x_star.iter().all(|v| *v > 0.0 && *v <= 2.0));
        let b = monotone_bracket_flow(&sys, &[1.0, 2.5]).unwrap();
        for i in 0..2 {
            assert!((b.lower[i] - cert.x_star[i]).abs() < 1e-6);
            assert!((b.upper[i] - cert.x_star[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn no_equilibrium_without_positive_c() {
        let sys = PatchSystem::single_delay(vec![2.0, 1.0], vec![vec![0.0, 0.0], vec![0.5, 0.0]], vec![1.0, 3.0], vec![1.0, 1.0])
            .unwrap()
            .with_mortality_form(false);
        assert!(solve_positive_equilibrium(&sys).unwrap().is_none());
    }

    #[test]
    fn bracket_rejects_bad_c() {
        let sys = PatchSystem::single_delay(vec![2.0], vec![vec![0.0]], vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(monotone_bracket_flow(&sys, &[1.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn certificate_rejects_zero() {
        assert!(certify_saturated(&scalar(), &[0.0]).is_err());
    }

    #[test]
    fn oscillating_pair_leaves_window() {
        let sys = oscillating_pair();
        let cert = solve_positive_equilibrium(&sys).unwrap().unwrap();
        assert!(!cert.a2_window && cert.x_star[1] > 2.0);
        let v = delay_robustness(&sys, &cert.x_star).unwrap();
        assert_eq!(v.verdict, Verdict::PotentiallyDelayUnstable);
    }

    #[test]
    fn robustness_verdicts() {
        let x = 1.5f64.ln();
        let v = delay_robustness(&scalar(), &[x]).unwrap();
        assert!((v.diagonal_lambdas[0] - 2.0 * x).abs() < 1e-12);
        assert_eq!(v.verdict, Verdict::RobustlyStable);
        let sys = example_pair();
        let cert = solve_positive_equilibrium(&sys).unwrap().unwrap();
        let v = delay_robustness(&sys, &cert.x_star).unwrap();
        assert_eq!(v.verdict, Verdict::RobustlyStable);
        assert_eq!(v.n_hat[(0, 1)], -1.0);
    }
}
