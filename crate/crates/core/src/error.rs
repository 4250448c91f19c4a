use alloc::string::String;

use crate::specfun::{Arity, Domain};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix has no rows")]
    Empty,
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not orthogonal: max |OᵀO - I| = {deviation:e}")]
    NotOrthogonal { deviation: f64 },
    #[error("Jacobi iteration stalled after {sweeps} sweeps (largest off-diagonal {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("field `{field}` accepts {arity}, got dimension {n}")]
    Arity { field: String, arity: Arity, n: usize },
    #[error("point outside the domain of `{field}` (requires {domain})")]
    Domain { field: String, domain: Domain },
    #[error("field `{field}` is value-only (nonsmooth); smooth it with mollify::gaussian_mollify first")]
    NotSmooth { field: String },
    #[error("spectral gap {gap:e} is below tolerance {tol:e}")]
    DegenerateSpectrum { gap: f64, tol: f64 },
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("lemma requires two distinct coordinates, got x = y = {0}")]
    CoincidentPoint(f64),
    #[error("invalid index pair ({i}, {j}) for dimension {n}")]
    IndexPair { i: usize, j: usize, n: usize },
    #[error("{what} must be positive and finite, got {value}")]
    NotPositive { what: &'static str, value: f64 },
    #[error("{what} must be at least {min}, got {got}")]
    TooSmall { what: &'static str, min: usize, got: usize },
    #[error("{what} must be at most {max}, got {got}")]
    TooLarge { what: &'static str, max: usize, got: usize },
    #[error("sigma schedule must be strictly decreasing")]
    ScheduleNotDecreasing,
}
