use thiserror::Error;

/// Error type shared by every module in the crate.
///
/// Variants map one-to-one onto the CLI exit codes: `InputFormat` exits 4,
/// `Degenerate` exits 5, usage-level problems exit 2, and everything else
/// that surfaces from numerics exits 3.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its mathematical domain (H outside (0,1),
    /// non-integrable exponent, negative time, ...).
    #[error("domain: {0}")]
    Domain(String),

    /// A size cap or shape constraint was violated (n too large, length
    /// mismatch between a grid and its values).
    #[error("size: {0}")]
    Size(String),

    /// An operation-specific precondition failed (path not starting at 0,
    /// grid mismatch between two paths).
    #[error("precondition: {0}")]
    Precondition(String),

    /// The covariance matrix failed positive-definiteness beyond tolerance.
    #[error("factorization: {0}")]
    Factorization(String),

    /// The circulant embedding produced eigenvalues below the clip tolerance.
    #[error("embedding: {0}")]
    Embedding(String),

    /// Input is structurally unable to answer the question asked of it
    /// (constant path fed to an estimator, zero information).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A CSV/JSON input file does not match the documented format.
    #[error("input format: {0}")]
    InputFormat(String),

    /// Generic numerical failure (non-finite intermediate, overflow).
    #[error("numerical: {0}")]
    Numerical(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
