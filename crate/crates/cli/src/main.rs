use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use stochbell::sheaf::section::FLOAT_TOL;
use stochbell::sheaf::SolverMode;
use stochbell_cli::fixtures::emit_fixtures;
use stochbell_cli::sweep::{parse_range, parse_values};
use stochbell_cli::{check_model, run, sweep, verdict_exit_code, CliError, CliResult, ExperimentConfig, Parameter};

#[derive(Parser)]
#[command(name = "stochbell", version, about = "Two-beam CHSH simulation and global-section checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a config file.
    Run { config: PathBuf },
    /// Re-run a config over a grid of one parameter.
    Sweep {
        config: PathBuf,
        /// visibility, shots, theta, theta_prime, phi, phi_prime or concentration
        #[arg(long)]
        param: String,
        /// Comma-separated grid values.
        #[arg(long, conflicts_with = "range", required_unless_present = "range")]
        values: Option<String>,
        /// Inclusive grid `start:stop:step`.
        #[arg(long)]
        range: Option<String>,
        /// CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an empirical-model file for a global section.
    CheckModel {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        /// Feasibility tolerance in float mode.
        #[arg(long, default_value_t = FLOAT_TOL)]
        tol: f64,
    },
    /// Write the canonical PR-box, Φ+, product and deterministic model files.
    EmitFixtures {
        #[arg(long, default_value = "fixtures")]
        dir: PathBuf,
    },
}

fn execute(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run(&cfg)?;
            stochbell_cli::run::write_outputs(&cfg, &report)?;
            print!("{}", report.render());
            Ok(verdict_exit_code(report.is_feasible()))
        }
        Command::Sweep {
            config,
            param,
            values,
            range,
            out,
        } => {
            let parameter: Parameter = param.parse()?;
            let cfg = ExperimentConfig::load(&config)?;
            let grid = match (values, range) {
                (Some(v), _) => parse_values(&v)?,
                (None, Some(r)) => parse_range(&r)?,
                (None, None) => return Err(CliError::config("grid", "pass --values or --range")),
            };
            let table = sweep(&cfg, parameter, &grid)?;
            if let Some(path) = out {
                std::fs::write(&path, table.to_csv()).map_err(|e| CliError::io(&path, e))?;
            }
            print!("{}", table.render());
            Ok(0)
        }
        Command::CheckModel { path, mode, tol } => {
            let mode = match mode {
                Mode::Exact => SolverMode::ExactRational,
                Mode::Float => SolverMode::Float { tol },
            };
            let result = check_model(&path, mode)?;
            print!("{}", result.render());
            Ok(verdict_exit_code(result.section.is_feasible()))
        }
        Command::EmitFixtures { dir } => {
            for path in emit_fixtures(&dir)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(stochbell_cli::EXIT_ERROR as u8)
        }
    }
}
