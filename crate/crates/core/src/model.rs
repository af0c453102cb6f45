//! Model parameters of the patch-structured Nicholson system
//!
//! ```text
//! x_i'(t) = -d_i x_i(t) + Σ_j a_ij x_j(t) + Σ_k β_ik h(x_i(t - τ_ik)),   h(x) = x e^{-x}
//! ```
//!
//! together with structural validation and the Ricker nonlinearity `h`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix;

/// Ricker birth response `h(x) = x e^{-x}`.
pub fn ricker(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::NegativeInput(x));
    }
    Ok(x * (-x).exp())
}

/// `h'(x) = (1 - x) e^{-x}`.
pub fn ricker_derivative(x: f64) -> f64 {
    (1.0 - x) * (-x).exp()
}

#[inline]
pub(crate) fn h(x: f64) -> f64 {
    x * (-x).exp()
}

/// Full parameter set of an `n`-patch system with `m` delayed birth terms per patch.
///
/// Construction only checks shapes. The structural rules (zero diagonal,
/// positive total birth rate, positive mortality) are reported by
/// [`validate_system`] so that bad scenario files can be diagnosed rather
/// than rejected outright.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PatchSystemRepr", into = "PatchSystemRepr")]
pub struct PatchSystem {
    n: usize,
    m: usize,
    d: Vec<f64>,
    a: DMatrix<f64>,
    beta: DMatrix<f64>,
    tau: DMatrix<f64>,
    enforce_mortality_form: bool,
}

impl PatchSystem {
    /// Builds a system from row-major nested vectors.
    pub fn new(
        d: Vec<f64>,
        a: Vec<Vec<f64>>,
        beta: Vec<Vec<f64>>,
        tau: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = d.len();
        let m = beta.first().map_or(0, Vec::len);
        Self::from_matrices(
            d,
            rows_to_matrix("a", &a, n, n)?,
            rows_to_matrix("beta", &beta, n, m)?,
            rows_to_matrix("tau", &tau, n, m)?,
        )
    }

    pub fn from_matrices(
        d: Vec<f64>,
        a: DMatrix<f64>,
        beta: DMatrix<f64>,
        tau: DMatrix<f64>,
    ) -> Result<Self> {
        let n = d.len();
        if n == 0 {
            return Err(Error::Precondition("a system needs at least one patch".into()));
        }
        check_shape("a", &a, n, n)?;
        let m = beta.ncols();
        if m == 0 {
            return Err(Error::Precondition("a system needs at least one delay term".into()));
        }
        check_shape("beta", &beta, n, m)?;
        check_shape("tau", &tau, n, m)?;
        Ok(Self {
            n,
            m,
            d,
            a,
            beta,
            tau,
            enforce_mortality_form: true,
        })
    }

    /// One delay per patch: `beta[i]` with delay `tau[i]`.
    pub fn single_delay(d: Vec<f64>, a: Vec<Vec<f64>>, beta: Vec<f64>, tau: Vec<f64>) -> Result<Self> {
        let beta = beta.into_iter().map(|b| vec![b]).collect();
        let tau = tau.into_iter().map(|t| vec![t]).collect();
        Self::new(d, a, beta, tau)
    }

    /// Switches between the mortality form `d_i = m_i + Σ_j a_ji` (default)
    /// and the relaxed requirement that `D - A` is a non-singular M-matrix.
    pub fn with_mortality_form(mut self, enforce: bool) -> Self {
        self.enforce_mortality_form = enforce;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn tau(&self) -> &DMatrix<f64> {
        &self.tau
    }

    pub fn enforce_mortality_form(&self) -> bool {
        self.enforce_mortality_form
    }

    /// Total birth coefficient `β_i = Σ_k β_ik` per patch.
    pub fn birth_totals(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.beta.row(i).sum()).collect()
    }

    /// Mortality rates `m_i = d_i - Σ_j a_ji` (column sums of the migration matrix).
    pub fn mortalities(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.d[i] - self.a.column(i).sum()).collect()
    }

    pub fn tau_max(&self) -> f64 {
        self.tau.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn tau_min(&self) -> f64 {
        self.tau.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `D - A`.
    pub fn dispersal_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.d)) - &self.a
    }

    /// Community matrix `M = A + B - D` with `B = diag(β_i)`.
    pub fn community_matrix(&self) -> matrix::CommunityMatrix {
        let mut m = self.a.clone();
        for (i, b) in self.birth_totals().into_iter().enumerate() {
            m[(i, i)] += b - self.d[i];
        }
        matrix::CommunityMatrix::from_system_entries(m)
    }

    /// Copy of the system with delay `tau[patch][k]` replaced.
    pub fn with_delay(&self, patch: usize, k: usize, value: f64) -> Result<Self> {
        if patch >= self.n || k >= self.m {
            return Err(Error::Precondition(format!(
                "delay index ({patch}, {k}) out of range for a {}x{} delay table",
                self.n, self.m
            )));
        }
        let mut out = self.clone();
        out.tau[(patch, k)] = value;
        Ok(out)
    }

    /// Component-wise right-hand side of the delay system, reading delayed
    /// values through `delayed(i, k) = x_i(t - τ_ik)`.
    pub(crate) fn rhs_with<F>(&self, x_now: &[f64], mut delayed: F, out: &mut [f64])
    where
        F: FnMut(usize, usize) -> f64,
    {
        for i in 0..self.n {
            let mut acc = -self.d[i] * x_now[i];
            for j in 0..self.n {
                acc += self.a[(i, j)] * x_now[j];
            }
            for k in 0..self.m {
                let b = self.beta[(i, k)];
                if b != 0.0 {
                    acc += b * h(delayed(i, k));
                }
            }
            out[i] = acc;
        }
    }
}

fn check_shape(what: &'static str, mat: &DMatrix<f64>, rows: usize, cols: usize) -> Result<()> {
    if mat.nrows() != rows {
        return Err(Error::DimensionMismatch { what, expected: rows, got: mat.nrows() });
    }
    if mat.ncols() != cols {
        return Err(Error::DimensionMismatch { what, expected: cols, got: mat.ncols() });
    }
    Ok(())
}

fn rows_to_matrix(what: &'static str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nrows {
        return Err(Error::DimensionMismatch { what, expected: nrows, got: rows.len() });
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch { what, expected: ncols, got: bad.len() });
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn matrix_to_rows(mat: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..mat.nrows())
        .map(|i| mat.row(i).iter().copied().collect())
        .collect()
}

/// On-disk layout of a [`PatchSystem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSystemRepr {
    pub n: usize,
    pub m: usize,
    pub d: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub tau: Vec<Vec<f64>>,
    #[serde(default = "default_true")]
    pub enforce_mortality_form: bool,
}

fn default_true() -> bool {
    true
}

impl TryFrom<PatchSystemRepr> for PatchSystem {
    type Error = Error;

    fn try_from(r: PatchSystemRepr) -> Result<Self> {
        if r.d.len() != r.n {
            return Err(Error::DimensionMismatch { what: "d", expected: r.n, got: r.d.len() });
        }
        let a = rows_to_matrix("a", &r.a, r.n, r.n)?;
        let beta = rows_to_matrix("beta", &r.beta, r.n, r.m)?;
        let tau = rows_to_matrix("tau", &r.tau, r.n, r.m)?;
        Ok(PatchSystem::from_matrices(r.d, a, beta, tau)?.with_mortality_form(r.enforce_mortality_form))
    }
}

impl From<PatchSystem> for PatchSystemRepr {
    fn from(s: PatchSystem) -> Self {
        PatchSystemRepr {
            n: s.n,
            m: s.m,
            a: matrix_to_rows(&s.a),
            beta: matrix_to_rows(&s.beta),
            tau: matrix_to_rows(&s.tau),
            d: s.d,
            enforce_mortality_form: s.enforce_mortality_form,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub derived_mortalities: Vec<f64>,
    pub tau_max: f64,
}

/// Checks every structural rule and collects all violations.
pub fn validate_system(sys: &PatchSystem) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |rule: &str, message: String| {
        violations.push(Violation { rule: rule.to_string(), message });
    };
    let n = sys.n;

    let all_values = sys.d.iter().chain(sys.a.iter()).chain(sys.beta.iter()).chain(sys.tau.iter());
    if all_values.clone().any(|v| !v.is_finite()) {
        push("finite", "all parameters must be finite numbers".into());
    }
    for (i, &d) in sys.d.iter().enumerate() {
        if !(d > 0.0) {
            push("decay-positive", format!("d[{i}] = {d} must be positive"));
        }
    }
    for i in 0..n {
        if sys.a[(i, i)] != 0.0 {
            push("zero-diagonal", format!("a[{i}][{i}] = {} must be zero", sys.a[(i, i)]));
        }
        for j in 0..n {
            if sys.a[(i, j)] < 0.0 {
                push("migration-nonnegative", format!("a[{i}][{j}] = {} is negative", sys.a[(i, j)]));
            }
        }
        for k in 0..sys.m {
            if sys.beta[(i, k)] < 0.0 {
                push("birth-nonnegative", format!("beta[{i}][{k}] = {} is negative", sys.beta[(i, k)]));
            }
            if !(sys.tau[(i, k)] > 0.0) {
                push("delay-positive", format!("tau[{i}][{k}] = {} must be positive", sys.tau[(i, k)]));
            }
        }
    }
    for (i, b) in sys.birth_totals().into_iter().enumerate() {
        if !(b > 0.0) {
            push(
                "birth-total-positive",
                format!("patch {i} has total birth coefficient {b}; at least one delayed birth term is required"),
            );
        }
    }

    let mortalities = sys.mortalities();
    if sys.enforce_mortality_form {
        for (i, &mi) in mortalities.iter().enumerate() {
            if !(mi > 0.0) {
                push(
                    "mortality-positive",
                    format!("m[{i}] = d[{i}] - sum_j a[j][{i}] = {mi} must be positive"),
                );
            }
        }
    } else if !matrix::is_nonsingular_m_matrix(&sys.dispersal_matrix()) {
        push(
            "dispersal-nonsingular-m-matrix",
            "D - A must be a non-singular M-matrix when the mortality form is not enforced".into(),
        );
    }

    ValidationReport {
        ok: violations.is_empty(),
        violations,
        derived_mortalities: mortalities,
        tau_max: sys.tau_max(),
    }
}

/// `γ_i = β_i / (d_i - Σ_j a_ij)`, or `None` when the denominator is not positive.
pub fn gamma_coefficients(sys: &PatchSystem) -> Vec<Option<f64>> {
    sys.birth_totals()
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            let denom = sys.d[i] - sys.a.row(i).sum();
            (denom > 0.0).then(|| b / denom)
        })
        .collect()
}

/// Right-hand side of the delay system. Row `i` of `x_delayed` holds
/// `x_i(t - τ_ik)` for `k = 0..m`.
pub fn rhs_dde(sys: &PatchSystem, x_now: &[f64], x_delayed: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x_now.len() != sys.n {
        return Err(Error::DimensionMismatch { what: "x_now", expected: sys.n, got: x_now.len() });
    }
    check_shape("x_delayed", x_delayed, sys.n, sys.m)?;
    if let Some(&v) = x_delayed.iter().find(|v| **v < 0.0) {
        return Err(Error::NegativeInput(v));
    }
    let mut out = vec![0.0; sys.n];
    sys.rhs_with(x_now, |i, k| x_delayed[(i, k)], &mut out);
    Ok(out)
}

/// Right-hand side `f(x)` of the undelayed system.
pub fn rhs_ode(sys: &PatchSystem, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != sys.n {
        return Err(Error::DimensionMismatch { what: "x", expected: sys.n, got: x.len() });
    }
    let mut out = vec![0.0; sys.n];
    sys.rhs_with(x, |i, _| x[i], &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn example_22() -> PatchSystem {
        PatchSystem::single_delay(
            vec![3.0, 2.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![1.0, 3.0],
            vec![5.0, 10.0],
        )
        .unwrap()
    }

    #[test]
    fn example_22_validates_with_mortalities() {
        let report = validate_system(&example_22());
        assert!(report.ok, "{:?}", report.violations);
        assert_eq!(report.derived_mortalities, vec![2.0, 1.0]);
        assert_eq!(report.tau_max, 10.0);
    }

    #[test]
    fn zero_birth_patch_is_reported() {
        let sys = PatchSystem::single_delay(
            vec![3.0, 2.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0.0, 3.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let report = validate_system(&sys);
        assert!(!report.ok);
        assert!(report.violations.iter().any(|v| v.rule == "birth-total-positive"));
    }

    #[test]
    fn relaxed_mode_rejects_non_m_matrix_dispersal() {
        // D - A = [[1,-2],[-2,1]] has eigenvalues -1 and 3.
        let sys = PatchSystem::single_delay(
            vec![1.0, 1.0],
            vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
        )
        .unwrap()
        .with_mortality_form(false);
        let report = validate_system(&sys);
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].rule, "dispersal-nonsingular-m-matrix");
    }

    #[test]
    fn nonzero_diagonal_is_reported() {
        let sys = PatchSystem::single_delay(vec![3.0], vec![vec![0.5]], vec![1.0], vec![1.0]).unwrap();
        assert!(validate_system(&sys).violations.iter().any(|v| v.rule == "zero-diagonal"));
    }

    #[test]
    fn ricker_values() {
        assert_eq!(ricker(0.0).unwrap(), 0.0);
        assert!((ricker(1.0).unwrap() - 0.367_879_4).abs() < 1e-7);
        assert!((ricker(2.0).unwrap() - 0.270_670_6).abs() < 1e-7);
        assert!(matches!(ricker(-0.1), Err(Error::NegativeInput(_))));
    }

    #[test]
    fn ricker_derivative_values() {
        assert_eq!(ricker_derivative(1.0), 0.0);
        assert_eq!(ricker_derivative(0.0), 1.0);
        assert!((ricker_derivative(2.0) + 0.135_335_3).abs() < 1e-7);
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_coefficients(&example_22());
        assert_eq!(g[0], Some(0.5));
        let fig3 = PatchSystem::single_delay(
            vec![2.0, 2.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![3.0, 15.0],
            vec![1.0, 2.0],
        )
        .unwrap();
        assert_eq!(gamma_coefficients(&fig3), vec![Some(3.0), Some(15.0)]);

        let degenerate = PatchSystem::single_delay(
            vec![1.0, 2.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert_eq!(gamma_coefficients(&degenerate)[0], None);
    }

    #[test]
    fn rhs_examples() {
        let scalar = PatchSystem::single_delay(vec![2.0], vec![vec![0.0]], vec![3.0], vec![1.0]).unwrap();
        let v = rhs_dde(&scalar, &[1.0], &DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert!((v[0] - (-0.896_361_6)).abs() < 1e-7);
        assert!((v[0] - (-2.0 + 3.0 / E)).abs() < 1e-15);

        let zero = rhs_ode(&example_22(), &[0.0, 0.0]).unwrap();
        assert_eq!(zero, vec![0.0, 0.0]);

        let at_eq = rhs_ode(&scalar, &[1.5f64.ln()]).unwrap();
        assert!(at_eq[0].abs() < 1e-15);

        // inflow at the boundary of the cone
        let f = rhs_ode(&example_22(), &[0.0, 0.7]).unwrap();
        assert!(f[0] >= 0.0);
    }

    #[test]
    fn rhs_dimension_checks() {
        let sys = example_22();
        assert!(rhs_ode(&sys, &[1.0]).is_err());
        assert!(rhs_dde(&sys, &[1.0, 1.0], &DMatrix::zeros(2, 2)).is_err());
        assert!(rhs_dde(&sys, &[1.0, 1.0], &DMatrix::from_element(2, 1, -1.0)).is_err());
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let text = r#"{"n":2,"m":1,"d":[3,2],"a":[[0,1],[1,0]],"beta":[[1],[3]],"tau":[[5],[10]]}"#;
        let sys: PatchSystem = serde_json::from_str(text).unwrap();
        assert_eq!(sys, example_22());
        assert!(sys.enforce_mortality_form());
        let back: PatchSystem = serde_json::from_str(&serde_json::to_string(&sys).unwrap()).unwrap();
        assert_eq!(back, sys);

        let bad = r#"{"n":2,"m":1,"d":[3],"a":[[0,1],[1,0]],"beta":[[1],[3]],"tau":[[5],[10]]}"#;
        assert!(serde_json::from_str::<PatchSystem>(bad).is_err());
    }
}
