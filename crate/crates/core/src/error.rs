use thiserror::Error;

/// Errors shared across the simulation modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gapless mode at q = {q}: dispersion vanishes, Bogoliubov rotation undefined")]
    GaplessMode { q: f64 },

    #[error("grid mismatch: expected L = {expected}, got L = {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("separation ell = {ell} out of range 1..={max}")]
    EllOutOfRange { ell: usize, max: usize },

    #[error("correlation-length fit needs at least 3 points above the noise floor, found {found}")]
    TooFewFitPoints { found: usize },

    #[error("correlation-length fit found non-negative slope {slope}")]
    NonNegativeSlope { slope: f64 },

    #[error("root solve failed at iterative step {step}: {message} (residual {residual:.3e})")]
    RootSolveFailure {
        step: usize,
        message: String,
        residual: f64,
    },

    #[error("evolution did not reach residual {tol:.3e} within {max_time}; final residual {residual:.3e}")]
    NotConverged {
        tol: f64,
        max_time: f64,
        residual: f64,
    },

    #[error("trace drift {drift:.3e} exceeds 1e-8 at t = {t}: reduce the integrator step")]
    TraceDrift { drift: f64, t: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
