use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Fewer samples than a sample variance needs.
    #[error("insufficient samples: need at least {min}, got {got}")]
    InsufficientSamples { min: usize, got: usize },

    /// Two symbols of a scheme cannot be told apart by the detector.
    #[error("degenerate scheme: {0}")]
    DegenerateScheme(String),

    /// Noiseless detection was asked for a statistic built from fewer than N arrivals.
    #[error("mode mismatch: noiseless detection needs {expected} arrivals, got {got}")]
    ModeMismatch { expected: usize, got: usize },

    /// An integrand returned NaN or an infinity.
    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: value {value}, error estimate {abs_error}")]
    QuadratureDepth { value: f64, abs_error: f64 },

    /// Trial configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
