//! Error type shared by all modules.

/// Errors reported by the library.
///
/// Numerical non-convergence that can only be caused by an implementation
/// bug (e.g. Newton on Legendre roots) panics instead; everything that can
/// be triggered by caller input is routed through this enum.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("basis index {index} out of range for degree {degree}")]
    IndexOutOfRange { degree: usize, index: i64 },

    #[error("{count} points exceed the maximum of {max} for degree {degree}")]
    TooManyPoints {
        count: usize,
        max: usize,
        degree: usize,
    },

    #[error("points are dependent at relative singular-value tolerance {tol:e}; Gram system is singular")]
    DependentPoints { tol: f64 },

    #[error("operation requires a nonzero harmonic")]
    ZeroHarmonic,

    #[error("pole lines are not distinct; reconstruction requires 2n simple poles")]
    CoincidentPoles,

    #[error("harmonic is a zonal multiple: its rotation orbit spans fewer than 3 dimensions")]
    ZonalHarmonic,

    #[error("iteration failed to converge: {0}")]
    NoConvergence(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
