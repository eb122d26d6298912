use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("w = {0} lies outside the strip |Im w| < pi")]
    OutsideStrip(Complex64),

    #[error("z = {0} lies on the branch cut (-inf, 0]")]
    BranchCut(Complex64),

    #[error("precision loss: {0}")]
    PrecisionLoss(String),

    #[error("evaluation too close to a pole: {0}")]
    NearPole(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by user input or configuration rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidGenerator(_) | Error::Io(_))
    }
}
