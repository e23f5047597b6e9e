//! Error type shared by every module, with a coarse category used by the CLI
//! to pick exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, EvoError>;

#[derive(Debug, Error)]
pub enum EvoError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The pair closure has prefactor (k-2)/(k-1); at k = 2 every off-diagonal
    /// conditional edge frequency collapses to a constant and the dynamics
    /// lose their leading order.
    #[error("degenerate degree: k = {k}, but the pair closure needs k >= 3")]
    DegenerateDegree { k: u32 },

    #[error(
        "configuration underflow: strategy {strategy} has no co-player to remove in {counts:?}"
    )]
    ConfigUnderflow { strategy: usize, counts: Vec<u32> },

    #[error("payoff model is not linear: {0}")]
    NonlinearModel(String),

    #[error("no-dilemma regime: r = {r} >= k+1 = {threshold}; punishment thresholds are defined for r < k+1")]
    NoDilemma { r: f64, threshold: f64 },

    #[error("step size underflow at t = {t} (h < {h_min:e}); last valid state {state:?}")]
    StepSizeUnderflow { t: f64, h_min: f64, state: Vec<f64> },

    #[error("eigenvalue solver failed: {0}")]
    EigenFailure(String),

    #[error("regular-graph pairing failed after {attempts} restarts (nodes = {nodes}, k = {k}, seed = {seed})")]
    GraphConstruction {
        nodes: usize,
        k: u32,
        seed: u64,
        attempts: u32,
    },

    #[error("config file, line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("payoff table file: {0}")]
    PayoffFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse failure class. The CLI maps these to exit codes 2 (validation),
/// 3 (numerical), 4 (I/O).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Validation,
    Numerical,
    Io,
}

impl EvoError {
    pub fn category(&self) -> ErrorCategory {
        use EvoError::*;
        match self {
            DimensionMismatch { .. }
            | InvalidArgument(_)
            | DegenerateDegree { .. }
            | ConfigUnderflow { .. }
            | NonlinearModel(_)
            | NoDilemma { .. }
            | ConfigParse { .. }
            | PayoffFile(_) => ErrorCategory::Validation,
            StepSizeUnderflow { .. } | EigenFailure(_) | GraphConstruction { .. } => {
                ErrorCategory::Numerical
            }
            Io(_) | Csv(_) | Json(_) => ErrorCategory::Io,
        }
    }
}
