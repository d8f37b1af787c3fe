use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{matrix} is numerically singular (condition estimate {cond:.3e})")]
    Singular { matrix: String, cond: f64 },
    #[error("{what} did not converge after {terms} terms")]
    Convergence { what: String, terms: usize },
    #[error("{what} lost precision: cancellation of {magnitude:.1e} against a result of {value:.3e}; {hint}")]
    Precision {
        what: String,
        magnitude: f64,
        value: f64,
        hint: String,
    },
    #[error("argument outside the supported domain: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("case mismatch: {0}")]
    CaseMismatch(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}
