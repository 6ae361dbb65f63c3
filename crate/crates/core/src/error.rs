use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: n = {0}, at least 2 nodes are required")]
    InvalidGrid(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A tabulated kernel or field was evaluated away from its nodes.
    #[error("tabulated data cannot be evaluated off-grid at ({x}, {y})")]
    InterpolationUnsupported { x: f64, y: f64 },

    #[error("grid mismatch: expected {expected} nodes, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("series truncation failed: last term norm {achieved:e} after k_max = {k_max} terms")]
    Truncation { achieved: f64, k_max: usize },

    #[error("{what} is not strictly positive at index {index} (value {value:e})")]
    NotPositive {
        what: &'static str,
        index: usize,
        value: f64,
    },

    /// A converged Perron vector had entries of both signs.
    #[error("spectral anomaly: converged eigenvector has minimum entry {min:e}")]
    SpectralAnomaly { min: f64 },

    #[error("jump rate 1 + lambda - V is not positive at node {index} (value {gamma:e})")]
    RatePositivity { index: usize, gamma: f64 },

    #[error("logarithm of a non-positive kernel ratio at ({x}, {y})")]
    LogDomain { x: f64, y: f64 },

    #[error("parameter excluded by the closed form: {0}")]
    ExcludedParameter(String),

    #[error("rejection sampling failed after {proposals} proposals")]
    Sampling { proposals: usize },

    #[error("singular matrix in linear solve")]
    Singular,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
