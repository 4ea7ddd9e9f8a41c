use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: expected 1, 2 or 3")]
    InvalidDimension(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("path horizon {horizon} is shorter than the rescaling time {needed}")]
    HorizonTooShort { horizon: f64, needed: f64 },

    #[error("spectral parameter {0} lies on the spectrum [-2, 0]")]
    OnSpectrum(Complex64),

    #[error("quadrature did not reach abs_tol {tol:e} (error estimate {estimate:e} after {boxes} boxes)")]
    Quadrature { tol: f64, estimate: f64, boxes: usize },

    #[error("perturbed resolvent has a pole at lambda = {0}")]
    Pole(Complex64),

    #[error("Richardson extrapolation did not converge (last change {change:e}, tolerance {tol:e})")]
    Extrapolation { change: f64, tol: f64 },

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("box has {sites} sites, above the memory budget of {budget}")]
    MemoryBudget { sites: usize, budget: usize },

    #[error("truncation bound {bound:e} exceeds the requested tolerance {tol:e}")]
    Truncation { bound: f64, tol: f64 },

    #[error("effective sample size {ess:.1} is below the floor {floor:.1}")]
    EssBelowFloor { ess: f64, floor: f64 },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("artifact schema version {found} differs from {expected}")]
    SchemaMismatch { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
