//! Parameter sweeps: one pipeline run per grid value, evaluated in
//! parallel and reported in grid order.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use stochbell::process::SourceDistribution;
use stochbell::sheaf::Certificate;

use crate::config::{ExperimentConfig, Preparation, Statistics};
use crate::error::{CliError, CliResult};
use crate::run::{run, RunReport};

pub const CSV_HEADER: &str = "# stochbell-sweep v1";

/// Column names, in order.
pub const CSV_COLUMNS: [&str; 16] = [
    "index",
    "parameter",
    "value",
    "success_probability",
    "e_ab",
    "e_ab_prime",
    "e_a_prime_b",
    "e_a_prime_b_prime",
    "s",
    "family_max",
    "compatibility_max_deviation",
    "verdict",
    "solver_mode",
    "certificate_value",
    "preprocessing_radius",
    "lp_iterations",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parameter {
    Visibility,
    Shots,
    Theta,
    ThetaPrime,
    Phi,
    PhiPrime,
    Concentration,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::Visibility => "visibility",
            Parameter::Shots => "shots",
            Parameter::Theta => "theta",
            Parameter::ThetaPrime => "theta_prime",
            Parameter::Phi => "phi",
            Parameter::PhiPrime => "phi_prime",
            Parameter::Concentration => "concentration",
        }
    }
}

impl FromStr for Parameter {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "visibility" => Parameter::Visibility,
            "shots" => Parameter::Shots,
            "theta" => Parameter::Theta,
            "theta_prime" => Parameter::ThetaPrime,
            "phi" => Parameter::Phi,
            "phi_prime" => Parameter::PhiPrime,
            "concentration" => Parameter::Concentration,
            other => return Err(CliError::UnknownParameter(other.to_string())),
        })
    }
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_range(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |msg: &str| CliError::config("grid", format!("{spec:?}: {msg}"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("expected start:stop:step"))?;
    let [start, stop, step] = parts[..] else {
        return Err(bad("expected start:stop:step"));
    };
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err(bad("need finite start <= stop and step > 0"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    if count >= 1_000_000 {
        return Err(bad("more than a million grid points"));
    }
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

/// Parses a comma-separated value list.
pub fn parse_values(spec: &str) -> CliResult<Vec<f64>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config("grid", format!("invalid value {s:?}")))
        })
        .collect()
}

/// `config` with `parameter` set to `value` (angles in the config's unit).
pub fn apply(config: &ExperimentConfig, parameter: Parameter, value: f64, field: &str) -> CliResult<ExperimentConfig> {
    let mut cfg = config.clone();
    let unit = cfg.angle_unit;
    match parameter {
        Parameter::Visibility => {
            if cfg.conditioning.is_some() {
                return Err(CliError::config("conditioning", "visibility sweeps replace the preparation; remove conditioning"));
            }
            if !(0.0..=1.0).contains(&value) {
                return Err(CliError::config(field, format!("visibility {value} is outside [0, 1]")));
            }
            cfg.preparation = Preparation::VisibilityPreset { visibility: value };
        }
        Parameter::Shots => {
            if !(value >= 1.0 && value.fract() == 0.0 && value < u64::MAX as f64) {
                return Err(CliError::config(field, format!("shots {value} is not a positive integer")));
            }
            cfg.statistics = Statistics::Shots(value as u64);
        }
        Parameter::Theta => cfg.angles.theta = unit.angle(value, field)?,
        Parameter::ThetaPrime => cfg.angles.theta_prime = unit.angle(value, field)?,
        Parameter::Phi => cfg.angles.phi = unit.angle(value, field)?,
        Parameter::PhiPrime => cfg.angles.phi_prime = unit.angle(value, field)?,
        Parameter::Concentration => match &mut cfg.source.distribution {
            SourceDistribution::VonMisesLinear { concentration, .. } => {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(CliError::config(field, format!("concentration {value} must be >= 0")));
                }
                *concentration = value;
            }
            _ => return Err(CliError::config("source.kind", "concentration sweeps need a von_mises_linear source")),
        },
    }
    Ok(cfg)
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub value: f64,
    pub report: RunReport,
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    pub parameter: Parameter,
    pub rows: Vec<SweepRow>,
}

pub fn sweep(config: &ExperimentConfig, parameter: Parameter, grid: &[f64]) -> CliResult<SweepTable> {
    if grid.is_empty() {
        return Err(CliError::config("grid", "empty grid"));
    }
    let configs = grid
        .iter()
        .enumerate()
        .map(|(i, &v)| apply(config, parameter, v, &format!("grid[{i}]")))
        .collect::<CliResult<Vec<_>>>()?;
    let results: Vec<CliResult<RunReport>> = configs.par_iter().map(run).collect();
    let rows = grid
        .iter()
        .zip(results)
        .map(|(&value, r)| r.map(|report| SweepRow { value, report }))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SweepTable { parameter, rows })
}

/// Shortest round-trip text; scientific notation outside `[1e-4, 1e15)`.
pub fn csv_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{CSV_HEADER}").unwrap();
        writeln!(out, "{}", CSV_COLUMNS.join(",")).unwrap();
        for (i, row) in self.rows.iter().enumerate() {
            let r = &row.report;
            let e: Vec<String> = r.contexts.iter().map(|c| csv_number(c.correlation)).collect();
            let certificate = match &r.section_result.certificate {
                Some(Certificate::Chsh { value, .. }) | Some(Certificate::Farkas { value, .. }) => csv_number(*value),
                None => String::new(),
            };
            writeln!(
                out,
                "{i},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.parameter.name(),
                csv_number(row.value),
                csv_number(r.state.success_probability.global),
                e.join(","),
                csv_number(r.chsh.s),
                csv_number(r.chsh.family_max),
                csv_number(r.compatibility.max_deviation),
                r.section.verdict,
                r.section.mode,
                certificate,
                csv_number(r.section.preprocessing_radius),
                r.section.iterations,
            )
            .unwrap();
        }
        out
    }

    /// Human-readable table.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:>14} {:>16} {:>16} {:>12}", self.parameter.name(), "S", "max |S|", "verdict").unwrap();
        for row in &self.rows {
            let r = &row.report;
            writeln!(out, "{:>14} {:>16.12} {:>16.12} {:>12}", row.value, r.chsh.s, r.chsh.family_max, r.section.verdict).unwrap();
        }
        out
    }
}
