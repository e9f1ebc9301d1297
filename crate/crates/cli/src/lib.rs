//! Command-line front end for s-vine processes: simulation, fitting,
//! the filter-convergence experiment and diagnostics.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod spec;
pub mod table;

pub use commands::{execute, Cli};
pub use error::{CliError, CliResult};
