//! Spectral bound of cooperative matrices.
//!
//! Each irreducible diagonal block `M_ll` is shifted to `M_ll + αI` with
//! `α = max(0, max_i -(M_ll)_ii) + 1`. The shifted block is non-negative
//! with a positive diagonal, hence primitive, and its Perron root is found
//! by power iteration. The Collatz–Wielandt quotients
//!
//! ```text
//! min_i (Ax)_i / x_i  <=  ρ(A)  <=  max_i (Ax)_i / x_i        (x > 0)
//! ```
//!
//! bracket the root at every step, which gives a rigorous stopping rule.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::scc::{strongly_connected_blocks, FrobeniusForm};
use super::CommunityMatrix;
use crate::error::{Error, Result};

const BRACKET_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    /// `s(M) = max Re λ`.
    pub bound: f64,
    pub achieving_block: usize,
    pub per_block_bounds: Vec<f64>,
    /// Positive right Perron vector (max-normalised), irreducible case only.
    pub right_vector: Option<Vec<f64>>,
    /// Positive left Perron vector (max-normalised), irreducible case only.
    pub left_vector: Option<Vec<f64>>,
    pub iterations: usize,
}

struct Perron {
    root: f64,
    vector: Vec<f64>,
    iterations: usize,
}

/// Perron root of a non-negative primitive matrix.
fn perron_root(a: &DMatrix<f64>) -> Result<Perron> {
    let n = a.nrows();
    let mut x = DVector::from_element(n, 1.0);
    let mut y = DVector::zeros(n);
    for it in 1..=MAX_ITERATIONS {
        a.mul_to(&x, &mut y);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let q = y[i] / x[i];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        let norm = y.amax();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NonConvergence { method: "power iteration", iterations: it });
        }
        x.copy_from(&y);
        x /= norm;
        if hi - lo <= BRACKET_TOL * hi.abs().max(1.0) {
            return Ok(Perron { root: 0.5 * (lo + hi), vector: x.iter().copied().collect(), iterations: it });
        }
    }
    Err(Error::NonConvergence { method: "power iteration", iterations: MAX_ITERATIONS })
}

fn shift_for(block: &DMatrix<f64>) -> f64 {
    let worst = (0..block.nrows()).map(|i| -block[(i, i)]).fold(0.0, f64::max);
    worst + 1.0
}

/// Spectral bound of a single irreducible block plus its right Perron vector.
fn block_bound(block: &DMatrix<f64>) -> Result<(f64, Vec<f64>, usize)> {
    if block.nrows() == 1 {
        return Ok((block[(0, 0)], vec![1.0], 0));
    }
    let alpha = shift_for(block);
    let shifted = block + DMatrix::identity(block.nrows(), block.nrows()) * alpha;
    let p = perron_root(&shifted)?;
    Ok((p.root - alpha, p.vector, p.iterations))
}

/// `s(M)` with per-block detail and, when `M` is irreducible, both Perron vectors.
pub fn spectral_bound(m: &CommunityMatrix) -> Result<SpectralResult> {
    let form = strongly_connected_blocks(m);
    spectral_bound_with_form(m, &form)
}

pub(crate) fn spectral_bound_with_form(m: &CommunityMatrix, form: &FrobeniusForm) -> Result<SpectralResult> {
    let mut per_block = Vec::with_capacity(form.block_count());
    let mut iterations = 0;
    let mut right = None;
    for block in &form.blocks {
        let (s, v, its) = block_bound(block)?;
        per_block.push(s);
        iterations += its;
        if form.block_count() == 1 {
            right = Some(v);
        }
    }

    // first block attaining the maximum
    let (achieving_block, bound) = per_block
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });

    let mut left = None;
    if right.is_some() {
        // a single block lists the patches in ascending order already
        let entries = m.entries();
        let n = entries.nrows();
        if n == 1 {
            left = Some(vec![1.0]);
        } else {
            let alpha = shift_for(entries);
            let shifted_t = entries.transpose() + DMatrix::identity(n, n) * alpha;
            let p = perron_root(&shifted_t)?;
            iterations += p.iterations;
            left = Some(p.vector);
        }
    }

    Ok(SpectralResult {
        bound,
        achieving_block,
        per_block_bounds: per_block,
        right_vector: right,
        left_vector: left,
        iterations,
    })
}

/// Spectral bound of an arbitrary cooperative matrix.
pub fn spectral_bound_of(entries: &DMatrix<f64>) -> Result<f64> {
    Ok(spectral_bound(&CommunityMatrix::new(entries.clone())?)?.bound)
}

/// Non-singular M-matrix test: non-positive off-diagonal entries and
/// `s(-N) < 0`.
pub fn is_nonsingular_m_matrix(n_mat: &DMatrix<f64>) -> bool {
    if !n_mat.is_square() || n_mat.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let n = n_mat.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && n_mat[(i, j)] > 0.0 {
                return false;
            }
        }
    }
    let neg = -n_mat;
    match spectral_bound_of(&neg) {
        Ok(s) => s < -1e-12 * n_mat.amax().max(1.0),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(n: usize, data: &[f64]) -> CommunityMatrix {
        CommunityMatrix::new(DMatrix::from_row_slice(n, n, data)).unwrap()
    }

    #[test]
    fn three_patch_reducible_bound_is_nine() {
        let m = cm(3, &[3.0, 0.0, 1.0, 1.0, 9.0, 1.0, 0.0, 0.0, 0.0]);
        let s = spectral_bound(&m).unwrap();
        assert!((s.bound - 9.0).abs() < 1e-9);
        assert_eq!(s.per_block_bounds, vec![9.0, 3.0, 0.0]);
        assert_eq!(s.achieving_block, 0);
        assert!(s.right_vector.is_none());
    }

    #[test]
    fn irreducible_two_by_two_bound() {
        let m = cm(2, &[-2.0, 1.0, 1.0, 1.0]);
        let s = spectral_bound(&m).unwrap();
        let expected = (-1.0 + 13f64.sqrt()) / 2.0;
        assert!((s.bound - expected).abs() < 1e-9, "{} vs {}", s.bound, expected);
        let v = s.right_vector.unwrap();
        let w = s.left_vector.unwrap();
        assert!(v.iter().chain(w.iter()).all(|&x| x > 0.0));
        let e = m.entries();
        let mv = e * DVector::from_column_slice(&v);
        let mtw = e.transpose() * DVector::from_column_slice(&w);
        for i in 0..2 {
            assert!((mv[i] - s.bound * v[i]).abs() < 1e-8);
            assert!((mtw[i] - s.bound * w[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn diagonal_bound() {
        let m = cm(3, &[-1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(spectral_bound(&m).unwrap().bound, 2.0);
    }

    #[test]
    fn m_matrix_examples() {
        let dm_a = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 2.0]);
        assert!(is_nonsingular_m_matrix(&dm_a));
        assert!(!is_nonsingular_m_matrix(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])));
        // -M with s(M) = 0 is a singular M-matrix
        let neg_m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(!is_nonsingular_m_matrix(&neg_m));
        assert!(!is_nonsingular_m_matrix(&DMatrix::from_row_slice(2, 2, &[1.0, -2.0, -2.0, 1.0])));
    }
}
