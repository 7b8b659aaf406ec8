use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A modulation or channel description violates its invariants.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested quantity has no analytic route (e.g. correlated antennas).
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{what} did not converge (estimated error {achieved:e}, requested {requested:e})")]
    Convergence {
        what: &'static str,
        achieved: f64,
        requested: f64,
    },
}
