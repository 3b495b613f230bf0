use thiserror::Error;

/// Errors surfaced by the decomposition library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("rank deficient: no nonsingular minor of size {0}")]
    RankDeficient(usize),

    #[error("numerical rank error: {0}")]
    NumericalRank(String),

    #[error("extension infeasible after {restarts} restarts (best residual {best_residual:.3e})")]
    Infeasible { restarts: usize, best_residual: f64 },

    #[error("non-simple spectrum: {0}")]
    NonSimpleSpectrum(String),

    #[error("degenerate case: {0}")]
    Degenerate(String),

    #[error("decomposition invalid: residual {0:.3e}")]
    DecompositionInvalid(f64),

    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),
}

impl Error {
    /// Machine-readable code used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Parse { .. } => "parse_error",
            Error::RankDeficient(_) => "rank_deficient",
            Error::NumericalRank(_) => "numerical_rank",
            Error::Infeasible { .. } => "infeasible",
            Error::NonSimpleSpectrum(_) => "non_simple_spectrum",
            Error::Degenerate(_) => "degenerate",
            Error::DecompositionInvalid(_) => "decomposition_invalid",
            Error::DecompositionFailed(_) => "decomposition_failed",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
