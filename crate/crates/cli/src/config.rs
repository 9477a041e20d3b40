//! Experiment configuration: a TOML document with one table per pipeline
//! stage. Unknown keys are rejected, every angle carries a unit, and each
//! `kind`/`mode` only accepts the keys it uses.
//!
//! ```toml
//! seed = 7
//!
//! [source]                 # optional; defaults to fixed |H> with 1 realization
//! kind = "von_mises_linear"
//! unit = "deg"
//! mean = 0
//! concentration = 40
//! realizations = 20000
//!
//! [preparation]
//! kind = "hadamard_cnot"   # or visibility_preset / explicit
//!
//! [angles]
//! unit = "deg"
//! theta = 0
//! theta_prime = 45
//! phi = 22.5
//! phi_prime = -22.5
//!
//! [statistics]
//! mode = "analytic"        # or: mode = "shots", shots = 100000
//!
//! [solver]
//! mode = "exact_rational"  # or: mode = "float", tol = 1e-8
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use stochbell::gates::Angle;
use stochbell::linalg::{c, Ket, Operator, C64, VALIDITY_TOL};
use stochbell::measure::ChshAngles;
use stochbell::process::{Effect, JonesSource, SourceDistribution};
use stochbell::sheaf::SolverMode;

use crate::error::{CliError, CliResult};

/// Kets from a config may be off unit norm by at most this much; they are
/// renormalized exactly afterwards.
pub const KET_INPUT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Deg,
    Rad,
}

impl Unit {
    pub fn angle(self, value: f64, field: &str) -> CliResult<Angle> {
        let a = match self {
            Unit::Deg => Angle::from_degrees(value),
            Unit::Rad => Angle::from_radians(value),
        };
        a.map_err(|e| CliError::config(field, e.to_string()))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Deg => "deg",
            Unit::Rad => "rad",
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(x) => c(x, 0.0),
            Entry::Complex([x, y]) => c(x, y),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: u64,
    source: Option<RawSource>,
    preparation: RawPreparation,
    conditioning: Option<RawConditioning>,
    angles: RawAngles,
    statistics: RawStatistics,
    solver: RawSolver,
    #[serde(default)]
    outputs: Outputs,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    kind: String,
    realizations: Option<usize>,
    unit: Option<Unit>,
    ket: Option<Vec<Entry>>,
    min: Option<f64>,
    max: Option<f64>,
    mean: Option<f64>,
    concentration: Option<f64>,
    weight: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPreparation {
    kind: String,
    visibility: Option<f64>,
    unitary: Option<Vec<Vec<Entry>>>,
    ancilla: Option<Vec<Entry>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawEffect {
    Basis(usize),
    Matrix(Vec<Vec<Entry>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConditioning {
    flag_dim: usize,
    effect: RawEffect,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAngles {
    unit: Unit,
    theta: f64,
    theta_prime: f64,
    phi: f64,
    phi_prime: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStatistics {
    mode: String,
    shots: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    mode: String,
    tol: Option<f64>,
}

/// Files written by `run`. Relative paths resolve against the working
/// directory.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Empirical model in the interchange format.
    pub model: Option<PathBuf>,
    /// Machine-readable JSON report.
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    pub distribution: SourceDistribution,
    pub realizations: usize,
    /// Unit used for the source's own angle fields.
    pub unit: Unit,
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec {
            distribution: SourceDistribution::Fixed(Ket::basis(2, 0)),
            realizations: 1,
            unit: Unit::Rad,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Preparation {
    /// `CNOT·(H⊗I)` acting on source ⊗ ancilla.
    HadamardCnot { ancilla: Ket },
    /// Bell state with white noise; ignores the source.
    VisibilityPreset { visibility: f64 },
    /// User unitary on source ⊗ ancilla, where the ancilla spans beam B and
    /// the flag system (if any).
    Explicit { unitary: Operator, ancilla: Ket },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Conditioning {
    pub flag_dim: usize,
    pub effect: Effect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistics {
    Analytic,
    Shots(u64),
}

impl Statistics {
    pub fn name(self) -> String {
        match self {
            Statistics::Analytic => "analytic".into(),
            Statistics::Shots(n) => format!("shots({n})"),
        }
    }
}

/// A validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub source: SourceSpec,
    pub preparation: Preparation,
    pub conditioning: Option<Conditioning>,
    pub angles: ChshAngles,
    pub angle_unit: Unit,
    pub statistics: Statistics,
    pub solver: SolverMode,
    pub outputs: Outputs,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let de = toml::Deserializer::new(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<root>".to_string() } else { path };
            CliError::config(field, e.into_inner().message().trim().to_string())
        })?;
        validate(raw)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// The reference experiment: `|H>` through Hadamard→CNOT, measured
    /// analytically at the Tsirelson angles.
    pub fn ideal() -> Self {
        ExperimentConfig {
            seed: 0,
            source: SourceSpec::default(),
            preparation: Preparation::HadamardCnot {
                ancilla: Ket::basis(2, 0),
            },
            conditioning: None,
            angles: ChshAngles::tsirelson(),
            angle_unit: Unit::Rad,
            statistics: Statistics::Analytic,
            solver: SolverMode::ExactRational,
            outputs: Outputs::default(),
        }
    }

    /// Factor dimensions of the prepared state before conditioning.
    pub fn prepared_dims(&self) -> Vec<usize> {
        match &self.conditioning {
            Some(cond) => vec![2, 2, cond.flag_dim],
            None => vec![2, 2],
        }
    }
}

fn unused(section: &str, kind: &str, present: &[(&str, bool)]) -> CliResult<()> {
    match present.iter().find(|(_, p)| *p) {
        Some((name, _)) => Err(CliError::config(
            format!("{section}.{name}"),
            format!("not used by {kind:?}"),
        )),
        None => Ok(()),
    }
}

fn required<T>(value: Option<T>, field: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::config(field, "missing field"))
}

fn finite(value: f64, field: &str) -> CliResult<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::config(field, "must be finite"))
    }
}

fn ket(entries: &[Entry], dim: usize, field: &str) -> CliResult<Ket> {
    if entries.len() != dim {
        return Err(CliError::config(field, format!("expected {dim} amplitudes, found {}", entries.len())));
    }
    let amps: Vec<C64> = entries.iter().map(|e| e.value()).collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > KET_INPUT_TOL {
        return Err(CliError::config(field, format!("norm {norm} is not 1 (tolerance {KET_INPUT_TOL:e})")));
    }
    Ket::normalized(amps).map_err(|e| CliError::config(field, e.to_string()))
}

fn matrix(rows: &[Vec<Entry>], dim: usize, field: &str) -> CliResult<Operator> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::config(field, format!("expected a {dim}x{dim} matrix")));
    }
    let entries = rows.iter().flatten().map(|e| e.value()).collect();
    Operator::new(vec![dim], entries).map_err(|e| CliError::config(field, e.to_string()))
}

fn source(raw: RawSource) -> CliResult<SourceSpec> {
    let realizations = raw.realizations.unwrap_or(1);
    if realizations == 0 {
        return Err(CliError::config("source.realizations", "must be at least 1"));
    }
    let unit = raw.unit;
    let angle_unit = |kind: &str| required(unit, "source.unit").map_err(|_| CliError::config("source.unit", format!("{kind:?} needs a unit (\"deg\" or \"rad\")")));
    let distribution = match raw.kind.as_str() {
        "fixed" => {
            unused(
                "source",
                "fixed",
                &[
                    ("unit", raw.unit.is_some()),
                    ("min", raw.min.is_some()),
                    ("max", raw.max.is_some()),
                    ("mean", raw.mean.is_some()),
                    ("concentration", raw.concentration.is_some()),
                    ("weight", raw.weight.is_some()),
                ],
            )?;
            SourceDistribution::Fixed(ket(&required(raw.ket, "source.ket")?, 2, "source.ket")?)
        }
        "uniform_linear" => {
            unused(
                "source",
                "uniform_linear",
                &[
                    ("ket", raw.ket.is_some()),
                    ("mean", raw.mean.is_some()),
                    ("concentration", raw.concentration.is_some()),
                    ("weight", raw.weight.is_some()),
                ],
            )?;
            let u = angle_unit("uniform_linear")?;
            SourceDistribution::UniformLinear {
                min: u.angle(required(raw.min, "source.min")?, "source.min")?,
                max: u.angle(required(raw.max, "source.max")?, "source.max")?,
            }
        }
        "von_mises_linear" => {
            unused(
                "source",
                "von_mises_linear",
                &[
                    ("ket", raw.ket.is_some()),
                    ("min", raw.min.is_some()),
                    ("max", raw.max.is_some()),
                    ("weight", raw.weight.is_some()),
                ],
            )?;
            let u = angle_unit("von_mises_linear")?;
            SourceDistribution::VonMisesLinear {
                mean: u.angle(required(raw.mean, "source.mean")?, "source.mean")?,
                concentration: finite(required(raw.concentration, "source.concentration")?, "source.concentration")?,
            }
        }
        "depolarized_mix" => {
            unused(
                "source",
                "depolarized_mix",
                &[
                    ("unit", raw.unit.is_some()),
                    ("min", raw.min.is_some()),
                    ("max", raw.max.is_some()),
                    ("mean", raw.mean.is_some()),
                    ("concentration", raw.concentration.is_some()),
                ],
            )?;
            SourceDistribution::DepolarizedMix {
                weight: required(raw.weight, "source.weight")?,
                ket: ket(&required(raw.ket, "source.ket")?, 2, "source.ket")?,
            }
        }
        other => {
            return Err(CliError::config(
                "source.kind",
                format!("unknown kind {other:?} (expected fixed, uniform_linear, von_mises_linear or depolarized_mix)"),
            ))
        }
    };
    JonesSource::new(distribution.clone(), 0).map_err(|e| CliError::config("source", e.to_string()))?;
    Ok(SourceSpec {
        distribution,
        realizations,
        unit: unit.unwrap_or(Unit::Rad),
    })
}

fn preparation(raw: RawPreparation, flag_dim: Option<usize>) -> CliResult<Preparation> {
    let needs_explicit = |kind: &str| match flag_dim {
        Some(_) => Err(CliError::config(
            "conditioning",
            format!("preparation {kind:?} has no flag system; use kind = \"explicit\""),
        )),
        None => Ok(()),
    };
    match raw.kind.as_str() {
        "hadamard_cnot" => {
            needs_explicit("hadamard_cnot")?;
            unused(
                "preparation",
                "hadamard_cnot",
                &[("visibility", raw.visibility.is_some()), ("unitary", raw.unitary.is_some())],
            )?;
            let ancilla = match raw.ancilla {
                Some(a) => ket(&a, 2, "preparation.ancilla")?,
                None => Ket::basis(2, 0),
            };
            Ok(Preparation::HadamardCnot { ancilla })
        }
        "visibility_preset" => {
            needs_explicit("visibility_preset")?;
            unused(
                "preparation",
                "visibility_preset",
                &[("unitary", raw.unitary.is_some()), ("ancilla", raw.ancilla.is_some())],
            )?;
            let v = required(raw.visibility, "preparation.visibility")?;
            if !(0.0..=1.0).contains(&v) {
                return Err(CliError::config("preparation.visibility", format!("{v} is outside [0, 1]")));
            }
            Ok(Preparation::VisibilityPreset { visibility: v })
        }
        "explicit" => {
            unused("preparation", "explicit", &[("visibility", raw.visibility.is_some())])?;
            let fd = flag_dim.unwrap_or(1);
            let unitary = matrix(&required(raw.unitary, "preparation.unitary")?, 4 * fd, "preparation.unitary")?;
            unitary
                .ensure_unitary(VALIDITY_TOL)
                .map_err(|e| CliError::config("preparation.unitary", e.to_string()))?;
            let ancilla = match raw.ancilla {
                Some(a) => ket(&a, 2 * fd, "preparation.ancilla")?,
                None => Ket::basis(2 * fd, 0),
            };
            Ok(Preparation::Explicit { unitary, ancilla })
        }
        other => Err(CliError::config(
            "preparation.kind",
            format!("unknown kind {other:?} (expected hadamard_cnot, visibility_preset or explicit)"),
        )),
    }
}

fn conditioning(raw: RawConditioning) -> CliResult<Conditioning> {
    if raw.flag_dim < 2 {
        return Err(CliError::config("conditioning.flag_dim", "must be at least 2"));
    }
    let effect = match raw.effect {
        RawEffect::Basis(k) => Effect::basis(raw.flag_dim, k),
        RawEffect::Matrix(rows) => Effect::new(matrix(&rows, raw.flag_dim, "conditioning.effect")?),
    }
    .map_err(|e| CliError::config("conditioning.effect", e.to_string()))?;
    Ok(Conditioning {
        flag_dim: raw.flag_dim,
        effect,
    })
}

fn validate(raw: RawConfig) -> CliResult<ExperimentConfig> {
    let conditioning = raw.conditioning.map(conditioning).transpose()?;
    let preparation = preparation(raw.preparation, conditioning.as_ref().map(|c| c.flag_dim))?;
    let source = raw.source.map(source).transpose()?.unwrap_or_default();

    let a = raw.angles;
    let unit = a.unit;
    let angles = ChshAngles {
        theta: unit.angle(a.theta, "angles.theta")?,
        theta_prime: unit.angle(a.theta_prime, "angles.theta_prime")?,
        phi: unit.angle(a.phi, "angles.phi")?,
        phi_prime: unit.angle(a.phi_prime, "angles.phi_prime")?,
    };

    let statistics = match raw.statistics.mode.as_str() {
        "analytic" => {
            unused("statistics", "analytic", &[("shots", raw.statistics.shots.is_some())])?;
            Statistics::Analytic
        }
        "shots" => match required(raw.statistics.shots, "statistics.shots")? {
            0 => return Err(CliError::config("statistics.shots", "must be at least 1")),
            n => Statistics::Shots(n),
        },
        other => {
            return Err(CliError::config(
                "statistics.mode",
                format!("unknown mode {other:?} (expected analytic or shots)"),
            ))
        }
    };

    let solver = match raw.solver.mode.as_str() {
        "exact_rational" => {
            unused("solver", "exact_rational", &[("tol", raw.solver.tol.is_some())])?;
            SolverMode::ExactRational
        }
        "float" => {
            let tol = raw.solver.tol.unwrap_or(stochbell::sheaf::section::FLOAT_TOL);
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::config("solver.tol", "must be positive and finite"));
            }
            SolverMode::Float { tol }
        }
        other => {
            return Err(CliError::config(
                "solver.mode",
                format!("unknown mode {other:?} (expected exact_rational or float)"),
            ))
        }
    };

    Ok(ExperimentConfig {
        seed: raw.seed,
        source,
        preparation,
        conditioning,
        angles,
        angle_unit: unit,
        statistics,
        solver,
        outputs: raw.outputs,
    })
}
