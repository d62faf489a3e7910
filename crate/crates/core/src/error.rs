use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid gas state: rho = {rho}, p = {p}")]
    InvalidState { rho: f64, p: f64 },

    #[error("invalid gas model: gamma = {0} (must exceed 1)")]
    InvalidGamma(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("at {location} index {index}: {source}")]
    AtCell {
        location: &'static str,
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("in Runge-Kutta stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("step {step} (t = {time}): {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("step limit of {0} reached before the final time")]
    StepLimit(usize),

    #[error("Riemann data generates vacuum")]
    Vacuum,

    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("unknown problem `{name}`; valid names: {valid}")]
    UnknownProblem { name: String, valid: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn at(self, location: &'static str, index: usize) -> Self {
        Error::AtCell {
            location,
            index,
            source: Box::new(self),
        }
    }
}
