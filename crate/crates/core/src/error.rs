use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid particle ordering: {0}")]
    InvalidOrdering(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("window [{lo}, {hi}] too small: {reason}")]
    WindowTooSmall { lo: i64, hi: i64, reason: String },
    #[error("particle {particle} left the window at time {time}")]
    WindowEscape { particle: usize, time: f64 },
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("state space of size {size} exceeds the limit {limit}")]
    StateSpaceTooLarge { size: usize, limit: usize },
    #[error("uniformization needs more than {cap} terms")]
    DivergenceGuard { cap: usize },
    #[error("denominator {value:e} is within {tol:e} of a pole")]
    PoleProximity { value: f64, tol: f64 },
    #[error("quadrature did not converge: change {change:e} on doubling the node count")]
    QuadratureNotConverged { change: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Bethe roots collided (min gap {gap:e})")]
    CollidedRoots { gap: f64 },
    #[error("Bethe vector is numerically null")]
    NullVector,
    #[error("solution blew up at s = {s}")]
    BlowUp { s: f64 },
    #[error("grid does not cover {0}")]
    GridCoverage(String),
    #[error("empty sample")]
    EmptySample,
    #[error("W_{{{g},{k}}} requested before its dependencies were computed")]
    CacheMiss { g: usize, k: usize },
    #[error("(g, k) = ({g}, {k}) is a base case, not produced by the recursion")]
    BaseCase { g: usize, k: usize },
    #[error("unsupported pole: {0}")]
    EssentialSingularity(String),
    #[error("chart singularity: {0}")]
    ChartSingularity(String),
    #[error("config error: {0}")]
    Schema(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| Error::Context {
            context: what(),
            source: Box::new(e),
        })
    }
}
