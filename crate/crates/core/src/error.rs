use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the domain of an operation (mismatched supports,
    /// singular covariance, atom outside a map's domain, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A probability vector or distribution violates its invariants.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    /// Problem too large for exact enumeration or grid search.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// An iterative solver stopped before reaching its tolerance.
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    /// A simulated trajectory left the finite reals.
    #[error("trajectory of particle {particle} diverged at stage {stage}")]
    Diverged { particle: usize, stage: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("linear program failed: {0}")]
    Solver(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
