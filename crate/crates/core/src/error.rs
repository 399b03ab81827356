use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature grid of {size} points cannot resolve degree {degree} products (need at least {required})")]
    InsufficientQuadrature {
        size: usize,
        required: usize,
        degree: usize,
    },

    #[error("state dimension {found} does not match spectrum dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("relative energy drift {drift:.3e} exceeds tolerance {tolerance:.3e} at t = {time}")]
    EnergyDrift {
        time: f64,
        drift: f64,
        tolerance: f64,
    },

    #[error("Wronskian drift {drift:.3e} exceeds tolerance {tolerance:.3e}; reduce the step size")]
    WronskianDrift { drift: f64, tolerance: f64 },

    #[error("tail bound {bound:.3e} exceeds requested tolerance {tolerance:.3e} at truncation time {t_trunc}")]
    TailTolerance {
        bound: f64,
        tolerance: f64,
        t_trunc: f64,
    },

    #[error("shooting bracket does not separate exit sides: {0}")]
    Bracket(String),

    #[error("fixed-point iteration diverged: {0}")]
    Divergence(String),

    #[error("reversibility broken: residual {residual:.3e} above tolerance {tolerance:.3e}")]
    Reversibility { residual: f64, tolerance: f64 },

    #[error("malformed data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
