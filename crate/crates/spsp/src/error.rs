//! Error type shared across the crate.

use thiserror::Error;

/// Unified error type for data preparation, path fitting, partitioning,
/// tuning and simulation.
#[derive(Debug, Error)]
pub enum SpspError {
    /// Predictor/response dimensions disagree, or a matrix argument has an
    /// unusable shape (e.g. zero rows or columns).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A predictor column has (numerically) zero variance and cannot be
    /// standardized.
    #[error("column {index} is constant; cannot standardize")]
    ConstantColumn { index: usize },

    /// Input contains NaN or infinite entries.
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    /// Invalid grid request (too few points, bad ratio, degenerate lambda_max).
    #[error("invalid lambda grid: {0}")]
    BadGrid(String),

    /// Penalty parameters outside their admissible range.
    #[error("invalid penalty configuration: {0}")]
    BadPenalty(String),

    /// Coordinate descent failed to reach the stationarity tolerance within
    /// the sweep budget.
    #[error("no convergence at lambda index {lambda_index} after {sweeps} sweeps (residual {residual:.3e})")]
    NoConvergence {
        lambda_index: usize,
        sweeps: usize,
        residual: f64,
    },

    /// A linear system that must be solvable turned out singular.
    #[error("singular linear system: {0}")]
    Singular(String),

    /// A solution path with fewer than two grid points cannot be partitioned.
    #[error("path has {0} rows; at least 2 are required")]
    EmptyPath(usize),

    /// Cross-validation fold count outside 2..=n.
    #[error("invalid fold count {folds} for {n} observations")]
    BadFolds { folds: usize, n: usize },

    /// Operation not defined for the given penalty (e.g. sparsity-based
    /// information criteria on a ridge path).
    #[error("{0}")]
    Unsupported(String),

    /// Unknown simulation design name.
    #[error("unknown design '{0}'")]
    UnknownDesign(String),

    /// A design override produced an inconsistent specification.
    #[error("invalid design override: {0}")]
    BadOverride(String),

    /// Output could not be written.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SpspError>;
