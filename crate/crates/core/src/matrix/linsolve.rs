use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;

/// Solves `N x = b` by Gaussian elimination with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when the best available pivot is
/// below `1e-12` relative to the largest entry of `N` (or absolute, for
/// matrices with entries below one).
pub fn linear_solve(n_mat: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let n = n_mat.nrows();
    if n_mat.ncols() != n {
        return Err(Error::DimensionMismatch { what: "square matrix", expected: n, got: n_mat.ncols() });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { what: "right-hand side", expected: n, got: b.len() });
    }
    let scale = n_mat.amax().max(1.0);
    let mut a = n_mat.clone();
    let mut x = b.to_vec();

    for col in 0..n {
        let (piv_row, piv_val) = (col..n)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_val < PIVOT_TOL * scale {
            return Err(Error::SingularMatrix { pivot: piv_val, column: col });
        }
        if piv_row != col {
            a.swap_rows(piv_row, col);
            x.swap(piv_row, col);
        }
        let p = a[(col, col)];
        for r in col + 1..n {
            let factor = a[(r, col)] / p;
            if factor == 0.0 {
                continue;
            }
            a[(r, col)] = 0.0;
            for c in col + 1..n {
                a[(r, c)] -= factor * a[(col, c)];
            }
            x[r] -= factor * x[col];
        }
    }

    for row in (0..n).rev() {
        let mut acc = x[row];
        for c in row + 1..n {
            acc -= a[(row, c)] * x[c];
        }
        x[row] = acc / a[(row, row)];
    }
    Ok(x)
}
