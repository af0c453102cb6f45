//! Dense phase-one simplex for linear feasibility problems
//! `{x >= 0 : a_r · x (<=|>=|=) b_r}`, with Bland's rule for termination.

use nalgebra::{DMatrix, DVector};

use super::CommunityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Self {
        Self { coeffs, sense, rhs }
    }
}

const PIVOT_TOL: f64 = 1e-11;

/// Returns a non-negative point satisfying every constraint, or `None` when
/// the minimum total infeasibility stays positive.
pub fn feasible_point(num_vars: usize, constraints: &[Constraint]) -> Option<Vec<f64>> {
    let rows = constraints.len();
    if rows == 0 {
        return Some(vec![0.0; num_vars]);
    }

    // normalise to non-negative right-hand sides
    let normalised: Vec<Constraint> = constraints
        .iter()
        .map(|c| {
            assert_eq!(c.coeffs.len(), num_vars, "constraint width must match the variable count");
            if c.rhs < 0.0 {
                let sense = match c.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                Constraint::new(c.coeffs.iter().map(|v| -v).collect(), sense, -c.rhs)
            } else {
                c.clone()
            }
        })
        .collect();

    let n_slack = normalised.iter().filter(|c| c.sense != Sense::Eq).count();
    let n_art = normalised.iter().filter(|c| c.sense != Sense::Le).count();
    let cols = num_vars + n_slack + n_art;
    let art_start = num_vars + n_slack;

    let mut tab = DMatrix::<f64>::zeros(rows, cols);
    let mut rhs = DVector::<f64>::zeros(rows);
    let mut basis = vec![0usize; rows];
    let (mut next_slack, mut next_art) = (num_vars, art_start);
    for (r, c) in normalised.iter().enumerate() {
        for (j, &v) in c.coeffs.iter().enumerate() {
            tab[(r, j)] = v;
        }
        rhs[r] = c.rhs;
        match c.sense {
            Sense::Le => {
                tab[(r, next_slack)] = 1.0;
                basis[r] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                tab[(r, next_slack)] = -1.0;
                next_slack += 1;
                tab[(r, next_art)] = 1.0;
                basis[r] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                tab[(r, next_art)] = 1.0;
                basis[r] = next_art;
                next_art += 1;
            }
        }
    }

    // reduced costs of the phase-one objective Σ artificials
    let mut cost = DVector::<f64>::zeros(cols);
    let mut objective = 0.0;
    for r in 0..rows {
        if basis[r] >= art_start {
            for j in 0..cols {
                cost[j] -= tab[(r, j)];
            }
            objective += rhs[r];
        }
    }
    for &b in &basis {
        cost[b] = 0.0;
    }

    let scale = rhs.amax().max(1.0);
    let max_pivots = 50 * (rows + cols);
    for _ in 0..max_pivots {
        let Some(enter) = (0..cols).find(|&j| cost[j] < -PIVOT_TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            let a = tab[(r, enter)];
            if a > PIVOT_TOL {
                let ratio = rhs[r] / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-14 * scale
                            || (ratio <= lratio + 1e-14 * scale && basis[r] < basis[lr])
                        {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        // phase one is bounded below by zero, so an unbounded column is a
        // numerical artefact; treat it as optimal
        let Some((lr, _)) = leave else { break };

        let piv = tab[(lr, enter)];
        for j in 0..cols {
            tab[(lr, j)] /= piv;
        }
        rhs[lr] /= piv;
        for r in 0..rows {
            if r != lr {
                let f = tab[(r, enter)];
                if f != 0.0 {
                    for j in 0..cols {
                        tab[(r, j)] -= f * tab[(lr, j)];
                    }
                    rhs[r] -= f * rhs[lr];
                    if rhs[r] < 0.0 && rhs[r] > -1e-12 * scale {
                        rhs[r] = 0.0;
                    }
                }
            }
        }
        let f = cost[enter];
        for j in 0..cols {
            cost[j] -= f * tab[(lr, j)];
        }
        objective += f * rhs[lr];
        basis[lr] = enter;
    }

    if objective > 1e-9 * scale {
        return None;
    }
    let mut x = vec![0.0; num_vars];
    for (r, &b) in basis.iter().enumerate() {
        if b < num_vars {
            x[b] = rhs[r].max(0.0);
        }
    }
    Some(x)
}

/// Upper normalisation bound for the components of `c`.
pub const C_MAX: f64 = 1e6;

/// Strict-positivity margins tried in order by [`find_positive_c_ladder`].
pub const EPS_LADDER: [f64; 3] = [1e-2, 1e-4, 1e-8];

/// Finds `c` with `1 <= c_i <= 10^6` and `(Mc)_i >= eps · max(1, ‖M‖∞)`.
pub fn find_positive_c(m: &CommunityMatrix, eps: f64) -> Option<Vec<f64>> {
    let e = m.entries();
    let n = e.nrows();
    let norm_inf = (0..n).map(|i| e.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let margin = eps * norm_inf.max(1.0);

    // c = 1 + y with 0 <= y <= C_MAX - 1
    let mut constraints = Vec::with_capacity(2 * n);
    for i in 0..n {
        let row: Vec<f64> = e.row(i).iter().copied().collect();
        let row_sum: f64 = row.iter().sum();
        constraints.push(Constraint::new(row, Sense::Ge, margin - row_sum));
    }
    for j in 0..n {
        let mut unit = vec![0.0; n];
        unit[j] = 1.0;
        constraints.push(Constraint::new(unit, Sense::Le, C_MAX - 1.0));
    }

    let y = feasible_point(n, &constraints)?;
    let c: Vec<f64> = y.iter().map(|v| 1.0 + v).collect();
    let mc = e * DVector::from_column_slice(&c);
    mc.iter().all(|&v| v > 0.0 && v >= margin * (1.0 - 1e-6)).then_some(c)
}

/// Runs [`find_positive_c`] over [`EPS_LADDER`] and returns the first hit
/// with the margin that produced it.
pub fn find_positive_c_ladder(m: &CommunityMatrix) -> Option<(Vec<f64>, f64)> {
    EPS_LADDER.iter().find_map(|&eps| find_positive_c(m, eps).map(|c| (c, eps)))
}
