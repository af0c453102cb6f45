//! Independent eigenvalue oracle for small matrices: the characteristic
//! polynomial by cofactor expansion, then Durand–Kerner simultaneous
//! iteration with a Newton polish. Used to cross-check the power-iteration
//! spectral bound; not meant for production sizes.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_ORACLE_DIM: usize = 8;

/// Coefficients (lowest degree first) of `det(λI - M)`.
pub fn characteristic_polynomial(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    // det[mask] = determinant of rows 0..popcount(mask) restricted to the
    // columns in `mask`, expanded along its last row
    let mut det: Vec<Vec<f64>> = vec![Vec::new(); 1 << n];
    det[0] = vec![1.0];
    for mask in 1usize..(1 << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc = vec![0.0; row + 2];
        let mut pos = 0;
        for col in 0..n {
            if mask & (1 << col) == 0 {
                continue;
            }
            let sign = if (row + pos).is_multiple_of(2) { 1.0 } else { -1.0 };
            let minor = &det[mask & !(1 << col)];
            // entry (λ δ_rc - m_rc)
            let constant = -m[(row, col)];
            for (k, &coef) in minor.iter().enumerate() {
                acc[k] += sign * constant * coef;
                if row == col {
                    acc[k + 1] += sign * coef;
                }
            }
            pos += 1;
        }
        det[mask] = acc;
    }
    det[(1 << n) - 1].clone()
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn at_rounding_level(coeffs: &[f64], z: Complex64) -> bool {
    let (p, _) = horner(coeffs, z);
    let scale: f64 = coeffs.iter().rev().fold(0.0, |acc, c| acc * z.norm() + c.abs());
    p.norm() <= 16.0 * coeffs.len() as f64 * f64::EPSILON * scale
}

/// All eigenvalues of `m` (`n <= 8`).
pub fn eigen_oracle(m: &DMatrix<f64>, tol: f64) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if !m.is_square() {
        return Err(Error::DimensionMismatch { what: "square matrix", expected: n, got: m.ncols() });
    }
    if n == 0 || n > MAX_ORACLE_DIM {
        return Err(Error::Precondition(format!("eigen oracle supports 1..={MAX_ORACLE_DIM} rows, got {n}")));
    }
    let coeffs = characteristic_polynomial(m);
    debug_assert_eq!(coeffs.len(), n + 1);
    debug_assert_eq!(coeffs[n], 1.0);

    let radius = 1.0 + coeffs[..n].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.9 * radius, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect();

    let max_iter = 20_000;
    let mut converged = false;
    for _ in 0..max_iter {
        let mut delta = 0.0f64;
        for i in 0..n {
            let (p, _) = horner(&coeffs, roots[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-300, 0.0);
            }
            let step = p / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        // a root cluster can keep the steps above `tol` while every residual
        // already sits at rounding level
        if delta <= tol * radius || roots.iter().all(|&z| at_rounding_level(&coeffs, z)) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { method: "Durand-Kerner", iterations: max_iter });
    }

    for r in &mut roots {
        for _ in 0..4 {
            let (p, dp) = horner(&coeffs, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.re.is_finite() || step.norm() > 1e-6 * radius {
                break;
            }
            *r -= step;
        }
    }
    Ok(roots)
}

/// Largest real part reported by [`eigen_oracle`].
pub fn oracle_spectral_bound(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigen_oracle(m, 1e-14)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}
