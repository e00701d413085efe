use thiserror::Error;

/// Errors raised by the exact algebra and the grid layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("expected {expected} evaluation coordinates, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension {0} not supported (1..=3)")]
    UnsupportedDim(usize),

    #[error("grid sampling needs a one-dimensional object, got dimension {0}")]
    NotOneDimensional(usize),

    #[error("moment order must be non-negative, got {0}")]
    NegativeOrder(i64),

    #[error("bracket order {order} exceeds the configured cap {cap}")]
    OrderCap { order: usize, cap: usize },

    #[error("p-degree violation: {0}")]
    DegreeViolation(String),

    #[error("tensor order mismatch: {0}")]
    OrderMismatch(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("Fourier differentiation is only available along q")]
    FourierInP,

    #[error("nonpositive density {value} at node {index}")]
    NonpositiveDensity { index: usize, value: f64 },

    #[error("Poisson source has mean {mean:e}; neutralizing background misconfigured")]
    NonNeutralSource { mean: f64 },

    #[error("field does not decay at |p| = Pmax: boundary magnitude {boundary:e}, max {max:e}")]
    BoundaryDecay { boundary: f64, max: f64 },

    #[error("non-finite value after {0}")]
    NonFinite(String),

    #[error("time step {0} must be positive, finite and within the CFL limit")]
    BadTimeStep(f64),

    #[error("pairing disagreement: direct {direct:e} vs divergence {divergence:e}")]
    PairingDisagreement { direct: f64, divergence: f64 },

    #[error("divergence has nonzero q-mean {mean:e} at p-index {p_index}; antiderivative gauge unavailable")]
    GaugeUnavailable { p_index: usize, mean: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
