//! Threshold classification of a patch system with attached evidence.
//!
//! The pipeline is: spectral bound of `M = A + B - D` → extinction or
//! persistence of the total population → per-patch persistence from the
//! Frobenius form → positive vector `c` with `Mc > 0` → positive
//! equilibrium → global stability certificates → asymptotic bounds.

use serde::{Deserialize, Serialize};

use crate::bounds::AsymptoticBounds;
use crate::equilibrium::{delay_robustness, solve_with_c, DelayRobustnessVerdict, EquilibriumCertificate};
use crate::error::{Error, Result};
use crate::matrix::{find_positive_c_ladder, spectral_bound_with_form, strongly_connected_blocks, FrobeniusForm, SpectralResult};
use crate::model::{gamma_coefficients, PatchSystem};

/// `s(M)` below this counts as non-positive.
pub const ZERO_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroVerdict {
    GloballyStableZero,
    ZeroUnstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TotalPopulation {
    UniformlyPersistent,
    NotPersistent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerPatch {
    AllPatchesPersistent,
    /// Zero-based patch indices of the block `Ω`.
    PersistentOnBlock(Vec<usize>),
    Extinct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatchStatus {
    Persistent,
    Extinct,
    /// Not decided by theory; consult simulation.
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GasCertificate {
    /// `1 < γ_i <= e²` on every patch.
    A2,
    /// A positive `c` exists and `x*_i <= 2` on every patch.
    A2PrimeXStarLe2,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GasConditions {
    pub a2: bool,
    pub x_star_le_2: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub spectral: SpectralResult,
    pub irreducible: bool,
    pub frobenius: FrobeniusForm,
    pub verdict_zero: ZeroVerdict,
    /// `|s(M)| <= 1e-10`.
    pub critical: bool,
    pub total_population: TotalPopulation,
    pub per_patch: PerPatch,
    pub patch_status: Vec<PatchStatus>,
    pub gammas: Vec<Option<f64>>,
    /// Positive `c` with `Mc > 0`, when one exists.
    pub a1prime: Option<Vec<f64>>,
    pub a1prime_margin: Option<f64>,
    pub equilibrium: Option<EquilibriumCertificate>,
    pub delay_robustness: Option<DelayRobustnessVerdict>,
    pub gas_certificate: GasCertificate,
    pub gas_conditions: GasConditions,
    pub bounds: AsymptoticBounds,
}

impl ClassificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// `true` iff every `γ_i` is defined and lies in `(1, e²]`.
pub fn a2_check(sys: &PatchSystem) -> bool {
    let e2 = std::f64::consts::E.powi(2);
    gamma_coefficients(sys).iter().all(|g| matches!(g, Some(v) if *v > 1.0 && *v <= e2))
}

/// Patch set of the diagonal block attaining `s(M)`, lowest block index on ties.
pub fn persistent_block(form: &FrobeniusForm, spectral: &SpectralResult) -> Result<Vec<usize>> {
    if !(spectral.bound >= ZERO_THRESHOLD) {
        return Err(Error::Precondition(format!("no persistent block when s(M) = {}", spectral.bound)));
    }
    let mut members = form.members[spectral.achieving_block].clone();
    members.sort_unstable();
    Ok(members)
}

pub fn classify_dynamics(sys: &PatchSystem) -> Result<ClassificationReport> {
    let n = sys.n();
    let m = sys.community_matrix();
    let frobenius = strongly_connected_blocks(&m);
    let spectral = spectral_bound_with_form(&m, &frobenius)?;
    let irreducible = frobenius.block_count() == 1;
    let critical = spectral.bound.abs() <= ZERO_THRESHOLD;
    let gammas = gamma_coefficients(sys);
    let a2 = a2_check(sys);

    if spectral.bound < ZERO_THRESHOLD {
        return Ok(ClassificationReport {
            spectral,
            irreducible,
            frobenius,
            verdict_zero: ZeroVerdict::GloballyStableZero,
            critical,
            total_population: TotalPopulation::NotPersistent,
            per_patch: PerPatch::Extinct,
            patch_status: vec![PatchStatus::Extinct; n],
            gammas,
            a1prime: None,
            a1prime_margin: None,
            equilibrium: None,
            delay_robustness: None,
            gas_certificate: GasCertificate::None,
            gas_conditions: GasConditions { a2, x_star_le_2: false },
            bounds: AsymptoticBounds::collect(sys, None)?,
        });
    }

    let positive_c = find_positive_c_ladder(&m);
    let per_patch = if irreducible || positive_c.is_some() {
        PerPatch::AllPatchesPersistent
    } else {
        PerPatch::PersistentOnBlock(persistent_block(&frobenius, &spectral)?)
    };
    let patch_status = match &per_patch {
        PerPatch::PersistentOnBlock(omega) => (0..n)
            .map(|i| if omega.contains(&i) { PatchStatus::Persistent } else { PatchStatus::Undetermined })
            .collect(),
        _ => vec![PatchStatus::Persistent; n],
    };

    let (a1prime, a1prime_margin) = match positive_c {
        Some((c, eps)) => (Some(c), Some(eps)),
        None => (None, None),
    };
    let equilibrium = match &a1prime {
        Some(c) => Some(solve_with_c(sys, c)?),
        None => None,
    };
    let delay_robustness = match &equilibrium {
        Some(cert) => Some(delay_robustness(sys, &cert.x_star)?),
        None => None,
    };

    let x_star_le_2 = equilibrium.as_ref().is_some_and(|e| e.a2_window);
    let gas_certificate = if a2 && equilibrium.is_some() {
        GasCertificate::A2
    } else if x_star_le_2 {
        GasCertificate::A2PrimeXStarLe2
    } else {
        GasCertificate::None
    };

    // scaled permanence bounds from c when its scaled losses are positive,
    // otherwise from x*, which always satisfies them
    let bounds_c = match (&a1prime, &equilibrium) {
        (Some(c), Some(eq)) => {
            if crate::bounds::permanence_constants(sys, c).is_ok() {
                Some(c.clone())
            } else {
                Some(eq.x_star.clone())
            }
        }
        _ => None,
    };
    let bounds = AsymptoticBounds::collect(sys, bounds_c.as_deref())?;

    Ok(ClassificationReport {
        spectral,
        irreducible,
        frobenius,
        verdict_zero: ZeroVerdict::ZeroUnstable,
        critical,
        total_population: TotalPopulation::UniformlyPersistent,
        per_patch,
        patch_status,
        gammas,
        a1prime,
        a1prime_margin,
        equilibrium,
        delay_robustness,
        gas_certificate,
        gas_conditions: GasConditions { a2, x_star_le_2 },
        bounds,
    })
}
