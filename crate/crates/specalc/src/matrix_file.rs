//! The shared matrix format: `{"n": 2, "rows": [[1, 2], [2, 1]]}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use specalc_core::symmat::{make_symmetric_reporting, SquareMatrix, SymmetricMatrix};

use crate::CliError;

/// Entries moved by more than this during symmetrization trigger a warning.
pub const ASYMMETRY_WARN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

impl From<&SymmetricMatrix> for MatrixFile {
    fn from(m: &SymmetricMatrix) -> Self {
        Self { n: m.n(), rows: m.rows() }
    }
}

impl From<&SquareMatrix> for MatrixFile {
    fn from(m: &SquareMatrix) -> Self {
        Self { n: m.n(), rows: m.rows() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedMatrix {
    pub matrix: SymmetricMatrix,
    /// Largest change made by symmetrization.
    pub max_change: f64,
    pub warning: Option<String>,
}

/// Parses matrix JSON. `origin` names the input in diagnostics.
pub fn parse_matrix_str(text: &str, origin: &Path) -> Result<ParsedMatrix, CliError> {
    let path = || origin.to_path_buf();
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|source| CliError::MalformedJson { path: path(), source })?;
    if let Some((row, r)) = file.rows.iter().enumerate().find(|(_, r)| r.len() != file.n) {
        return Err(CliError::RaggedRows { path: path(), row, len: r.len(), expected: file.n });
    }
    if file.rows.len() != file.n {
        return Err(CliError::DimensionMismatch { path: path(), declared: file.n, rows: file.rows.len() });
    }
    let sym = make_symmetric_reporting(&file.rows).map_err(|source| CliError::Matrix { path: path(), source })?;
    let warning = (sym.max_change > ASYMMETRY_WARN)
        .then(|| format!("{}: symmetrization moved an entry by {:e}", origin.display(), sym.max_change));
    Ok(ParsedMatrix { matrix: sym.matrix, max_change: sym.max_change, warning })
}

pub fn parse_matrix_file(path: &Path) -> Result<ParsedMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: PathBuf::from(path), source })?;
    parse_matrix_str(&text, path)
}

pub fn write_matrix_file(path: &Path, m: &SymmetricMatrix) -> Result<(), CliError> {
    let text = serde_json::to_string(&MatrixFile::from(m)).expect("matrix serializes");
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
