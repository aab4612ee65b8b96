use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e}, scale {scale:e})")]
    NotHermitian { asymmetry: f64, scale: f64 },

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("eigensolver failed to converge")]
    EigenNoConvergence,

    #[error("singular value decomposition failed to converge")]
    SvdNoConvergence,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precision target missed: {0}")]
    Precision(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for failures of an iterative numerical procedure, as opposed to
    /// bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNoConvergence | Error::SvdNoConvergence | Error::Precision(_)
        )
    }
}
