//! Scenario loading, command implementations and report formatting for the
//! `dirnet` binary.

pub mod commands;
pub mod error;
pub mod format;
pub mod scenario;

pub use commands::{CostReport, Mode};
pub use error::{CliError, Result};
pub use scenario::Scenario;
