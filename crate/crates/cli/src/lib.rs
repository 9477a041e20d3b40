//! Command-line front end for `stochbell`: experiment configs, end-to-end
//! runs, parameter sweeps, model checking and fixture generation.

pub mod check;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod run;
pub mod sweep;

pub use check::{check_model, ModelCheck};
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use run::{run, RunReport};
pub use sweep::{sweep, Parameter, SweepTable};

/// Process exit status for a completed decision.
pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_ERROR: i32 = 1;

pub fn verdict_exit_code(feasible: bool) -> i32 {
    if feasible {
        EXIT_FEASIBLE
    } else {
        EXIT_INFEASIBLE
    }
}
