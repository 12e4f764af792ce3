use thiserror::Error;

/// Errors raised by the accountant, the optimizer and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested privacy target cannot be met inside the search box.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A structural property the algorithm relies on (e.g. monotonicity of
    /// epsilon in the noise scale) was observed to fail.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    /// Adaptive quadrature did not reach its tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Invalid or incomplete run configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
