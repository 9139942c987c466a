use thiserror::Error;

/// Errors raised by the cone/positivity machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator on `{space}` is not Hermitian (deviation {deviation:.3e})")]
    NonHermitian { space: String, deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("dimension {dim} does not factor as {left} x {right}")]
    BadFactorization { dim: usize, left: usize, right: usize },

    #[error("vector is not fixed by the cone involution (imaginary weight {0:.3e})")]
    NotReal(f64),

    #[error("operator `{0}` does not preserve the real form of the cone")]
    NotRealForm(String),

    #[error("operator does not preserve the cone")]
    NotPreserving,

    #[error("shift s = {s} is not above -E(H) = {bound}")]
    SpectralBound { s: f64, bound: f64 },

    #[error("inconsistent classification: {0}")]
    Inconsistent(String),

    #[error("input not in class: {0}")]
    InputNotInClass(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("arrow does not hold: {0}")]
    ArrowFailed(String),

    #[error("link {index} failed: {reason}")]
    LinkFailed { index: usize, reason: String },

    #[error("lowest eigenvalue is not simple (gap {gap:.3e})")]
    NotSimple { gap: f64 },

    #[error("Hamiltonian at index {index} does not commute with the observable (norm {norm:.3e})")]
    NotCommuting { index: usize, norm: f64 },

    #[error("Hamiltonian is not in the strict class: {0}")]
    NotInAPlus(String),

    #[error("good quantum number changed at index {index}: {found} != {expected}")]
    MuMismatch {
        index: usize,
        expected: f64,
        found: f64,
    },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("edge weight {value:.3e} at ({row}, {col}) is below the connectivity threshold but not negligible")]
    Indeterminate { row: usize, col: usize, value: f64 },

    #[error("lattice specification failed: {0}")]
    SpecFailed(String),

    #[error("classification failed for node {node}: {reason}")]
    ClassificationFailed { node: String, reason: String },

    #[error("total dimension {dim} exceeds cap {cap}")]
    DimCap { dim: usize, cap: usize },

    #[error("Marshall sign rule fails: {0}")]
    SignRuleFailed(String),

    #[error("sector 2M = {twice_m} is empty for {sites} sites")]
    EmptySector { sites: usize, twice_m: i64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
