use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not positive semi-definite (offending eigenvalue {eigenvalue})")]
    NotPsd { eigenvalue: f64 },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("operation requires a bilinear game (B = C = 0)")]
    NotBilinear,
    #[error("operation requires a scalar game (half_dim = 1)")]
    NotScalarGame,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid HRDE order: {0}")]
    InvalidOrder(String),
    #[error("condition requires k >= 2, got k = {0}")]
    InvalidK(usize),
    #[error("leading coefficient is numerically zero")]
    DegenerateLeadingCoefficient,
    #[error("condition is not satisfiable even as gamma -> 0")]
    Unsatisfiable,
    #[error("mode frequencies have not been computed; call mode_frequencies first")]
    OmegasMissing,
}

pub type Result<T> = std::result::Result<T, Error>;
