//! File formats, JSON reports, parallel certification and the `specalc` command line on
//! top of [`specalc_core`].

use std::path::PathBuf;

pub mod config;
pub mod matrix_file;
pub mod parallel;
pub mod report;
mod run;

pub use config::{parse_args, Command, Format, RunConfig};
pub use run::{run, EXIT_ERROR, EXIT_OK, EXIT_VIOLATION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: malformed JSON: {source}", path.display())]
    MalformedJson { path: PathBuf, source: serde_json::Error },
    #[error("{}: ragged rows: row {row} has {len} entries, expected {expected}", path.display())]
    RaggedRows { path: PathBuf, row: usize, len: usize, expected: usize },
    #[error("{}: \"n\" is {declared} but there are {rows} rows", path.display())]
    DimensionMismatch { path: PathBuf, declared: usize, rows: usize },
    #[error("{}: {source}", path.display())]
    Matrix { path: PathBuf, source: specalc_core::Error },
    #[error("--field {name}: {source}")]
    Field { name: String, source: specalc_core::Error },
    #[error("{context}: {source}")]
    Compute { context: String, source: specalc_core::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn field(name: &str, source: specalc_core::Error) -> Self {
        Self::Field { name: name.into(), source }
    }
}
