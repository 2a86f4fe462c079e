use thiserror::Error;

/// Errors shared across the library.
#[derive(Error, Debug)]
pub enum SpectraError {
    #[error("invalid grid parameters: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "aliasing refused: max node spacing {spacing:.3e} exceeds {limit:.3e} \
         required for frequency {s_max:.3e} (>= 8 nodes per wavelength)"
    )]
    AliasingRefused { spacing: f64, limit: f64, s_max: f64 },

    #[error("grid/domain mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid transform parameter: {0}")]
    InvalidParameter(String),

    #[error("amplitude/phase fit failed: {0}")]
    FitFailure(String),

    #[error("finite-difference solver unstable: {0}")]
    Instability(String),
}

pub type Result<T> = std::result::Result<T, SpectraError>;
