//! The end-to-end pipeline behind `stochbell run`.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;
use stochbell::gates::bell_unitary;
use stochbell::linalg::DensityOperator;
use stochbell::measure::monte_carlo_model;
use stochbell::process::rng::derive_seed;
use stochbell::process::{bell_like_with_visibility, condition, ensemble_state, JonesSource};
use stochbell::sheaf::section::working_tolerance;
use stochbell::sheaf::{
    check_compatibility, chsh_family_value, global_section, induce_model, print_model, Certificate, CompatibilityReport,
    EmpiricalModel, SectionResult,
};

use crate::config::{ExperimentConfig, Preparation, Statistics};
use crate::error::{CliError, CliResult};

pub const REPORT_HEADER: &str = "stochbell-report v1";

#[derive(Clone, Debug, Serialize)]
pub struct ContextProbability {
    pub context: String,
    pub probability: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuccessProbability {
    /// Trace of the flag effect on the prepared state.
    pub global: f64,
    /// Probability that the flag fires in the runs used for each context.
    /// The flag is read before the analyzers, so every entry equals
    /// `global`.
    pub per_context: Vec<ContextProbability>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateSummary {
    pub eigenvalues: Vec<f64>,
    pub purity: f64,
    pub success_probability: SuccessProbability,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContextReport {
    pub context: String,
    pub alice_radians: f64,
    pub bob_radians: f64,
    /// `[p(+,+), p(+,−), p(−,+), p(−,−)]`.
    pub table: Vec<f64>,
    pub correlation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapSummary {
    pub contexts: [String; 2],
    pub shared: Vec<String>,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatibilitySummary {
    pub tolerance: f64,
    pub max_deviation: f64,
    pub passed: bool,
    pub overlaps: Vec<OverlapSummary>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateSummary {
    Chsh {
        /// Context carrying the minus sign.
        minus_on: String,
        sign: i8,
        value: f64,
        bound: f64,
    },
    Farkas {
        coefficients: Vec<(String, f64)>,
        value: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionSummary {
    pub mode: String,
    pub verdict: &'static str,
    pub witness: Option<Vec<f64>>,
    pub certificate: Option<CertificateSummary>,
    pub iterations: usize,
    pub max_residual: f64,
    pub preprocessing_radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChshSummary {
    /// `E(θ,φ) + E(θ,φ') + E(θ',φ) − E(θ',φ')` from the model's tables.
    pub s: f64,
    /// Largest `|S|` over the eight sign variants.
    pub family_max: f64,
    pub family_variant: String,
}

/// Everything `run` computes. Serializing it omits timing, so the JSON is a
/// pure function of the configuration.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub format: &'static str,
    pub seed: u64,
    pub statistics: String,
    pub state: StateSummary,
    pub contexts: Vec<ContextReport>,
    pub chsh: ChshSummary,
    pub compatibility: CompatibilitySummary,
    pub section: SectionSummary,
    #[serde(skip)]
    pub timing: Duration,
    #[serde(skip)]
    pub model: EmpiricalModel,
    #[serde(skip)]
    pub section_result: SectionResult,
    #[serde(skip)]
    pub compatibility_report: CompatibilityReport,
}

impl RunReport {
    pub fn is_feasible(&self) -> bool {
        self.section_result.is_feasible()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable summary for standard output.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        writeln!(w, "statistics        {}", self.statistics).unwrap();
        let eig: Vec<String> = self.state.eigenvalues.iter().map(|x| format!("{x:.6}")).collect();
        writeln!(w, "eigenvalues       {}", eig.join(" ")).unwrap();
        writeln!(w, "purity            {:.12}", self.state.purity).unwrap();
        writeln!(w, "success prob.     {:.12}", self.state.success_probability.global).unwrap();
        writeln!(w).unwrap();
        writeln!(w, "{:<10} {:>12} {:>12} {:>12} {:>12} {:>12}", "context", "p(++)", "p(+-)", "p(-+)", "p(--)", "E").unwrap();
        for c in &self.contexts {
            write!(w, "{:<10}", c.context).unwrap();
            for p in &c.table {
                write!(w, " {p:>12.9}").unwrap();
            }
            writeln!(w, " {:>12.9}", c.correlation).unwrap();
        }
        writeln!(w).unwrap();
        writeln!(w, "S                 {:.12}", self.chsh.s).unwrap();
        writeln!(w, "max |S| variant   {:.12} ({})", self.chsh.family_max, self.chsh.family_variant).unwrap();
        writeln!(
            w,
            "compatibility     {} (max deviation {:.3e}, tolerance {:.1e})",
            if self.compatibility.passed { "pass" } else { "fail" },
            self.compatibility.max_deviation,
            self.compatibility.tolerance
        )
        .unwrap();
        writeln!(w, "solver            {}", self.section.mode).unwrap();
        writeln!(w, "verdict           {}", self.section.verdict).unwrap();
        match &self.section.certificate {
            Some(CertificateSummary::Chsh { minus_on, sign, value, bound }) => {
                writeln!(w, "certificate       CHSH variant (minus on {minus_on}, sign {sign:+}) = {value:.12} > {bound}").unwrap()
            }
            Some(CertificateSummary::Farkas { value, coefficients }) => {
                writeln!(w, "certificate       Farkas functional over {} cells, value {value:.3e}", coefficients.len()).unwrap()
            }
            None => {}
        }
        if let Some(witness) = &self.section.witness {
            let support = witness.iter().filter(|&&p| p > 0.0).count();
            writeln!(w, "witness           {support} global assignments in support").unwrap();
        }
        writeln!(w, "elapsed           {:.3} s", self.timing.as_secs_f64()).unwrap();
        out
    }
}

/// Prepared state on A⊗B (after conditioning) and the flag success
/// probability.
pub fn prepare_state(config: &ExperimentConfig) -> CliResult<(DensityOperator, f64)> {
    let src = || {
        JonesSource::new(config.source.distribution.clone(), derive_seed(config.seed, "source")).map_err(CliError::from)
    };
    let n = config.source.realizations;
    let prepared = match &config.preparation {
        Preparation::VisibilityPreset { visibility } => bell_like_with_visibility(*visibility)?,
        Preparation::HadamardCnot { ancilla } => ensemble_state(&src()?, &bell_unitary(), ancilla, n)?,
        Preparation::Explicit { unitary, ancilla } => {
            let network = unitary.clone().with_factors(&config.prepared_dims())?;
            ensemble_state(&src()?, &network, ancilla, n)?
        }
    };
    match &config.conditioning {
        Some(cond) => Ok(condition(&prepared, &cond.effect)?),
        None => Ok((prepared, 1.0)),
    }
}

pub fn build_model(config: &ExperimentConfig, rho: &DensityOperator) -> CliResult<EmpiricalModel> {
    Ok(match config.statistics {
        Statistics::Analytic => induce_model(rho, &config.angles)?,
        Statistics::Shots(n) => monte_carlo_model(rho, &config.angles, n, derive_seed(config.seed, "statistics"))?,
    })
}

fn context_label(model: &EmpiricalModel, ctx: usize) -> String {
    let s = model.scenario();
    let names: Vec<&str> = s.contexts()[ctx].iter().map(|&i| s.settings()[i].as_str()).collect();
    names.join(",")
}

/// `Σ o o' p(o, o')` for a table in `[++, +−, −+, −−]` order.
pub fn correlator(table: &[f64]) -> f64 {
    table[0] - table[1] - table[2] + table[3]
}

pub fn summarize_compatibility(model: &EmpiricalModel, report: &CompatibilityReport) -> CompatibilitySummary {
    let s = model.scenario();
    CompatibilitySummary {
        tolerance: report.tolerance,
        max_deviation: report.max_deviation,
        passed: report.passed,
        overlaps: report
            .overlaps
            .iter()
            .map(|o| OverlapSummary {
                contexts: [context_label(model, o.first), context_label(model, o.second)],
                shared: o.shared.iter().map(|&i| s.settings()[i].clone()).collect(),
                max_deviation: o.max_deviation,
            })
            .collect(),
    }
}

pub fn summarize_section(res: &SectionResult) -> SectionSummary {
    SectionSummary {
        mode: res.mode.name(),
        verdict: res.verdict.as_str(),
        witness: res.witness.clone(),
        certificate: res.certificate.as_ref().map(|c| match c {
            Certificate::Chsh { variant, value, bound } => CertificateSummary::Chsh {
                minus_on: format!("{},{}", variant.minus_labels.0, variant.minus_labels.1),
                sign: variant.sign,
                value: *value,
                bound: *bound,
            },
            Certificate::Farkas { coefficients, value } => CertificateSummary::Farkas {
                coefficients: coefficients.clone(),
                value: *value,
            },
        }),
        iterations: res.stats.iterations,
        max_residual: res.stats.max_residual,
        preprocessing_radius: res.stats.preprocessing_radius,
    }
}

pub fn run(config: &ExperimentConfig) -> CliResult<RunReport> {
    let start = Instant::now();
    let (rho, success) = prepare_state(config)?;
    let model = build_model(config, &rho)?;

    let contexts: Vec<ContextReport> = config
        .angles
        .pairs()
        .iter()
        .enumerate()
        .map(|(k, pair)| ContextReport {
            context: context_label(&model, k),
            alice_radians: pair.alice.radians(),
            bob_radians: pair.bob.radians(),
            table: model.table(k).to_vec(),
            correlation: correlator(model.table(k)),
        })
        .collect();
    let e: Vec<f64> = contexts.iter().map(|c| c.correlation).collect();
    let s = e[0] + e[1] + e[2] - e[3];
    let (family_max, variant) = chsh_family_value(&model)?;

    let compat = check_compatibility(&model, working_tolerance(&model));
    let section = global_section(&model, config.solver)?;

    Ok(RunReport {
        format: REPORT_HEADER,
        seed: config.seed,
        statistics: config.statistics.name(),
        state: StateSummary {
            eigenvalues: rho.eigenvalues(),
            purity: rho.purity(),
            success_probability: SuccessProbability {
                global: success,
                per_context: contexts
                    .iter()
                    .map(|c| ContextProbability {
                        context: c.context.clone(),
                        probability: success,
                    })
                    .collect(),
            },
        },
        chsh: ChshSummary {
            s,
            family_max,
            family_variant: format!(
                "minus on {},{} sign {:+}",
                variant.minus_labels.0, variant.minus_labels.1, variant.sign
            ),
        },
        compatibility: summarize_compatibility(&model, &compat),
        section: summarize_section(&section),
        contexts,
        timing: start.elapsed(),
        model,
        section_result: section,
        compatibility_report: compat,
    })
}

/// Writes the files requested in `config.outputs`.
pub fn write_outputs(config: &ExperimentConfig, report: &RunReport) -> CliResult<()> {
    if let Some(path) = &config.outputs.model {
        std::fs::write(path, print_model(&report.model)).map_err(|e| CliError::io(path, e))?;
    }
    if let Some(path) = &config.outputs.report {
        std::fs::write(path, report.to_json()).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use stochbell::linalg::Ket;
    use stochbell::linalg::Operator;

    #[test]
    fn ideal_run_violates() {
        let r = run(&ExperimentConfig::ideal()).unwrap();
        assert!((r.chsh.s - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(!r.is_feasible());
        assert_eq!(r.state.success_probability.global, 1.0);
    }

    #[test]
    fn product_preparation_glues() {
        let mut cfg = ExperimentConfig::ideal();
        cfg.preparation = Preparation::Explicit {
            unitary: Operator::identity(&[4]),
            ancilla: Ket::basis(2, 0),
        };
        let r = run(&cfg).unwrap();
        assert!(r.chsh.s.abs() <= 2.0 + 1e-12);
        assert!(r.is_feasible());
    }

    #[test]
    fn half_visibility_gives_root_two() {
        let mut cfg = ExperimentConfig::ideal();
        cfg.preparation = Preparation::VisibilityPreset { visibility: 0.5 };
        let r = run(&cfg).unwrap();
        assert!((r.chsh.s - 2f64.sqrt()).abs() < 1e-12);
        assert!(r.is_feasible());
    }

    #[test]
    fn json_omits_timing_and_is_deterministic() {
        let mut cfg = ExperimentConfig::ideal();
        cfg.statistics = Statistics::Shots(500);
        let a = run(&cfg).unwrap().to_json();
        let b = run(&cfg).unwrap().to_json();
        assert_eq!(a, b);
        assert!(!a.contains("timing"));
        assert!(a.contains(REPORT_HEADER));
    }
}
