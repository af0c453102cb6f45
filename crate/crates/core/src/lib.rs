//! Analysis and simulation of patch-structured Nicholson blowfly systems
//!
//! ```text
//! x_i'(t) = -d_i x_i(t) + Σ_j a_ij x_j(t) + Σ_k β_ik x_i(t - τ_ik) e^{-x_i(t - τ_ik)}
//! ```
//!
//! The crate decides extinction versus persistence from the spectral bound
//! of the community matrix `M = A + B - D`, finds and certifies the positive
//! equilibrium, computes explicit asymptotic bounds and integrates the delay
//! system.
//!
//! ```
//! use nicholson::{classify_dynamics, PatchSystem, ZeroVerdict};
//!
//! let sys = PatchSystem::single_delay(
//!     vec![3.0, 2.0],
//!     vec![vec![0.0, 1.0], vec![1.0, 0.0]],
//!     vec![1.0, 3.0],
//!     vec![5.0, 10.0],
//! )
//! .unwrap();
//! let report = classify_dynamics(&sys).unwrap();
//! assert_eq!(report.verdict_zero, ZeroVerdict::ZeroUnstable);
//! assert!(report.equilibrium.is_some());
//! ```

pub mod bounds;
pub mod classifier;
pub mod equilibrium;
pub mod error;
pub mod matrix;
pub mod model;
pub mod presets;
mod rows;
pub mod scenario;
pub mod sim;
pub mod sweep;

pub use bounds::{dissipativity_bound, AsymptoticBounds, PermanenceConstants};
pub use classifier::{classify_dynamics, ClassificationReport, GasCertificate, PerPatch, ZeroVerdict};
pub use equilibrium::{solve_positive_equilibrium, EquilibriumCertificate};
pub use error::{Error, Result};
pub use matrix::{spectral_bound, CommunityMatrix};
pub use model::{validate_system, PatchSystem};
pub use scenario::Scenario;
pub use sim::{integrate_dde, integrate_ode, HistorySpec, TailLabel, Trajectory};

// Compiles and runs the guide's and README's code blocks with the doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/threshold.md")]
    mod threshold {}
    #[doc = include_str!("../../../book/src/equilibrium.md")]
    mod equilibrium {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
