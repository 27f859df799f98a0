use thiserror::Error;

/// Errors raised by densities, transforms, regions and samplers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument {x} lies outside the support {support}")]
    Domain { x: f64, support: String },

    #[error("value {y} lies outside the range [{lo}, {hi}]")]
    Range { y: f64, lo: f64, hi: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("inadmissible configuration: {0}")]
    Admissibility(String),

    #[error("region has no finite bounding rectangle: {0}")]
    UnboundedRegion(String),

    #[error("boundary supremum diverges: {0}")]
    Divergence(String),

    #[error("sampler starved: {accepted} accepted out of {proposed} proposals")]
    Starvation { proposed: u64, accepted: u64 },

    #[error("envelope violated at x = {x}: p(x) = {p}, L*pi(x) = {envelope}")]
    EnvelopeViolation { x: f64, p: f64, envelope: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("level set at y = {y} is empty")]
    EmptyLevelSet { y: f64 },

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
