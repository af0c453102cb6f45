//! Cooperative-matrix algebra: Frobenius normal form, spectral bound,
//! M-matrix tests, positive-vector feasibility and small dense solves.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod linsolve;
pub mod oracle;
mod scc;
pub mod simplex;
mod spectral;

pub use linsolve::linear_solve;
pub use oracle::eigen_oracle;
pub use scc::{is_irreducible, strongly_connected_blocks, FrobeniusForm};
pub use simplex::{find_positive_c, find_positive_c_ladder};
pub use spectral::{is_nonsingular_m_matrix, spectral_bound, spectral_bound_of, SpectralResult};
pub(crate) use spectral::spectral_bound_with_form;

/// A square matrix with non-negative off-diagonal entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityMatrix {
    #[serde(with = "crate::rows")]
    entries: DMatrix<f64>,
    /// Whether the matrix was assembled as `A + B - D` from a patch system.
    from_system: bool,
}

impl CommunityMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                what: "square matrix",
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..n {
                let v = entries[(i, j)];
                if !v.is_finite() || (i != j && v < 0.0) {
                    return Err(Error::Precondition(format!(
                        "matrix is not cooperative: entry ({i}, {j}) = {v}"
                    )));
                }
            }
        }
        Ok(Self { entries, from_system: false })
    }

    pub(crate) fn from_system_entries(entries: DMatrix<f64>) -> Self {
        Self { entries, from_system: true }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_from_system(&self) -> bool {
        self.from_system
    }
}
