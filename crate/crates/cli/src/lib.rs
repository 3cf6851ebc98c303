//! Experiment runner for the GGE scattering simulator: config parsing,
//! deterministic CSV output, and the figure-regeneration experiments.

pub mod config;
pub mod csvio;
pub mod experiments;
pub mod metric;

/// Runner errors, split by exit code: configuration problems exit with 2,
/// numerical failures with 3.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}
