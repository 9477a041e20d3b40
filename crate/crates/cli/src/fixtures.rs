//! Canonical model files shipped with the tool.

use std::path::{Path, PathBuf};

use num_rational::BigRational;
use stochbell::gates::phi_plus;
use stochbell::linalg::{DensityOperator, Ket};
use stochbell::measure::ChshAngles;
use stochbell::sheaf::{chsh_scenario, induce_model, print_model, EmpiricalModel, Provenance};

use crate::error::{CliError, CliResult};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Perfect correlation in three contexts, anticorrelation in `(a', b')`.
pub fn pr_box() -> EmpiricalModel {
    let corr = vec![q(1, 2), q(0, 1), q(0, 1), q(1, 2)];
    let anti = vec![q(0, 1), q(1, 2), q(1, 2), q(0, 1)];
    EmpiricalModel::from_rationals(chsh_scenario(), vec![corr.clone(), corr.clone(), corr, anti], Provenance::Analytic)
        .expect("PR box is a valid model")
}

/// `|Φ+>` at the Tsirelson angles.
pub fn phi_plus_tsirelson() -> EmpiricalModel {
    induce_model(&phi_plus(), &ChshAngles::tsirelson()).expect("two-beam state")
}

/// `|HH>` at the Tsirelson angles.
pub fn product() -> EmpiricalModel {
    let rho = DensityOperator::pure_with_factors(&Ket::basis(4, 0), &[2, 2]).expect("4-dim ket");
    induce_model(&rho, &ChshAngles::tsirelson()).expect("two-beam state")
}

/// Point mass on the global assignment `a=+1, a'=-1, b=+1, b'=-1`.
pub fn deterministic() -> EmpiricalModel {
    let s = chsh_scenario();
    let target = s.assignment_index(&stochbell::sheaf::Assignment {
        settings: (0..4).collect(),
        outcomes: vec![0, 1, 0, 1],
    });
    let global: Vec<BigRational> = (0..16).map(|g| if g == target { q(1, 1) } else { q(0, 1) }).collect();
    EmpiricalModel::from_global(&s, &global, Provenance::Analytic).expect("point mass")
}

/// File name and model of every fixture.
pub fn all() -> Vec<(&'static str, EmpiricalModel)> {
    vec![
        ("pr_box.model", pr_box()),
        ("phi_plus_tsirelson.model", phi_plus_tsirelson()),
        ("product.model", product()),
        ("deterministic.model", deterministic()),
    ]
}

pub fn emit_fixtures(dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    all()
        .into_iter()
        .map(|(name, model)| {
            let path = dir.join(name);
            std::fs::write(&path, print_model(&model)).map_err(|e| CliError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
