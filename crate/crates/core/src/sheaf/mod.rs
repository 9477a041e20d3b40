//! Contextuality layer: measurement scenarios, empirical models and the
//! global-section decision.

pub mod format;
pub mod lp;
pub mod model;
pub mod rational;
pub mod scenario;
pub mod section;

pub use format::{parse_model, print_model};
pub use model::{
    check_compatibility, is_exactly_compatible, marginalize, marginalize_exact, CompatibilityReport, EmpiricalModel,
    OverlapDeviation, Provenance,
};
pub use scenario::{chsh_scenario, restrict, Assignment, Scenario};
pub use section::{
    chsh_family_value, global_section, verify_witness, Certificate, ChshVariant, LpStats, SectionResult, SolverMode,
    Verdict,
};

use crate::error::Result;
use crate::linalg::DensityOperator;
use crate::measure::{outcome_probs, ChshAngles};

/// Empirical model of the CHSH scenario induced by measuring `rho` at the
/// four setting pairs of `angles`.
pub fn induce_model(rho: &DensityOperator, angles: &ChshAngles) -> Result<EmpiricalModel> {
    let tables = angles
        .pairs()
        .iter()
        .map(|pair| outcome_probs(rho, pair).map(|t| t.flatten().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    EmpiricalModel::from_f64(chsh_scenario(), tables, Provenance::Analytic)
}
