//! Front end of the k-Hessian exterior-domain laboratory: run configuration,
//! the randomized identity suites and the `solve`, `minkowski` and
//! `barriers-table` drivers. The `khlab` binary is a thin wrapper.

pub mod commands;
pub mod config;
pub mod error;
pub mod suites;

pub use commands::{
    cmd_barriers_table, cmd_minkowski, cmd_solve, cmd_verify_identities, MinkowskiOutcome, Provenance, SolveOutcome,
    TableOutcome, VerifyOutcome, SCHEMA_VERSION,
};
pub use config::{Overrides, RunConfig, Tolerances};
pub use error::{CliError, Result};
