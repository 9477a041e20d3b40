//! `check-model`: compatibility and global-section verdict for a model file.

use std::fmt::Write as _;
use std::path::Path;

use stochbell::sheaf::section::working_tolerance;
use stochbell::sheaf::{
    check_compatibility, global_section, parse_model, CompatibilityReport, EmpiricalModel, SectionResult, SolverMode,
};

use crate::error::{CliError, CliResult};
use crate::run::{summarize_section, CertificateSummary};

#[derive(Clone, Debug)]
pub struct ModelCheck {
    pub model: EmpiricalModel,
    pub compatibility: CompatibilityReport,
    pub section: SectionResult,
}

pub fn load_model(path: &Path) -> CliResult<EmpiricalModel> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_model(&text).map_err(|e| match e {
        stochbell::Error::Parse { line, column, message } => CliError::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message,
        },
        other => other.into(),
    })
}

pub fn check_model(path: &Path, mode: SolverMode) -> CliResult<ModelCheck> {
    let model = load_model(path)?;
    let compatibility = check_compatibility(&model, working_tolerance(&model));
    if !compatibility.passed {
        return Err(stochbell::Error::IncompatibleModel {
            max_deviation: compatibility.max_deviation,
            tolerance: compatibility.tolerance,
        }
        .into());
    }
    let section = global_section(&model, mode)?;
    Ok(ModelCheck {
        model,
        compatibility,
        section,
    })
}

impl ModelCheck {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let s = self.model.scenario();
        writeln!(
            out,
            "compatibility  pass (max deviation {:.3e}, tolerance {:.1e})",
            self.compatibility.max_deviation, self.compatibility.tolerance
        )
        .unwrap();
        let summary = summarize_section(&self.section);
        writeln!(out, "solver         {}", summary.mode).unwrap();
        writeln!(out, "verdict        {}", summary.verdict).unwrap();
        match &summary.certificate {
            Some(CertificateSummary::Chsh { minus_on, sign, value, bound }) => {
                writeln!(out, "certificate    CHSH variant (minus on {minus_on}, sign {sign:+}) = {value} > {bound}").unwrap();
            }
            Some(CertificateSummary::Farkas { coefficients, value }) => {
                writeln!(out, "certificate    Farkas functional, value {value:e}").unwrap();
                for (label, y) in coefficients.iter().filter(|(_, y)| *y != 0.0) {
                    writeln!(out, "  {y:>+.6} * {label}").unwrap();
                }
            }
            None => {}
        }
        if let Some(w) = &self.section.witness {
            let all: Vec<usize> = (0..s.settings().len()).collect();
            writeln!(out, "witness").unwrap();
            for (g, p) in w.iter().enumerate().filter(|(_, p)| **p > 0.0) {
                writeln!(out, "  {p:.12}  {}", s.describe(&s.assignment(&all, g))).unwrap();
            }
        }
        out
    }
}
