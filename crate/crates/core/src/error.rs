use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a scalar function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// The requested scheme cannot be used with this problem.
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("network contains a directed cycle through vertex {0}")]
    Cycle(String),

    #[error("alpha row for vertex {vertex} sums to {sum}")]
    AlphaSum { vertex: String, sum: f64 },

    #[error("vertex {0} is not incident to any edge")]
    OrphanVertex(String),

    #[error("invalid network: {0}")]
    Network(String),

    /// An edge was scheduled before one of its upstream edges finished.
    #[error("sequencing error: {0}")]
    Sequencing(String),

    #[error("root not bracketed in [{lo}, {hi}] after widening")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
