//! Simulation and certification of two-beam polarization CHSH experiments.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! * [`linalg`]: dense complex operators with tensor bookkeeping.
//! * [`gates`]: Hadamard, CNOT, polarization projectors and `σ_θ`.
//! * [`process`]: Kraus maps, flagged instruments, conditioning and
//!   stochastic Jones-vector sources.
//! * [`measure`]: outcome tables, contrasts, correlations and CHSH values.
//! * [`sheaf`]: empirical models and the global-section decision.

pub mod error;
pub mod gates;
pub mod linalg;
pub mod measure;
pub mod process;
pub mod sheaf;

pub use error::{Error, Result};
