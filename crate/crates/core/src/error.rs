use thiserror::Error;

/// Errors surfaced by the numerical kernels.
#[derive(Error, Debug)]
pub enum CoreError {
    /// An input violated a documented precondition or type invariant.
    #[error("domain error: {0}")]
    Domain(String),
    /// A quadrature or iteration failed to converge; `diagnostics` carries
    /// the state needed to reproduce the failure (radii, increments, counts).
    #[error("numeric error: {what} ({diagnostics})")]
    Numeric { what: String, diagnostics: String },
    /// A config document could not be parsed or failed cross-field checks.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

pub(crate) fn domain(msg: impl Into<String>) -> CoreError {
    CoreError::Domain(msg.into())
}

pub(crate) fn numeric(what: impl Into<String>, diagnostics: impl Into<String>) -> CoreError {
    CoreError::Numeric {
        what: what.into(),
        diagnostics: diagnostics.into(),
    }
}
