use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("quantile level {0} is not in the open interval (0, 1)")]
    BoundaryQuantile(f64),

    #[error("quantile levels must be strictly increasing ({prev} is followed by {next})")]
    QuantileOrdering { prev: f64, next: f64 },

    #[error("bandwidth {0} must lie in (0, 1]")]
    Bandwidth(f64),

    #[error("confidence level alpha = {0} must lie in (0, 1)")]
    InvalidLevel(f64),

    #[error("degenerate smoothing normalizer W_n^k = {value:e} at Fourier index {k}")]
    DegenerateNormalizer { k: usize, value: f64 },

    #[error("nonpositive auto-spectrum {value:e} for component {j}, tau = {tau}, omega = {omega}")]
    DegenerateDenominator { j: usize, tau: f64, omega: f64, value: f64 },

    #[error("process is not stationary: spectral radius {0} >= 1")]
    Stability(f64),

    #[error("numerically singular matrix: {0}")]
    NumericalSingularity(String),

    #[error("internal consistency violated: {0}")]
    Consistency(String),
}
