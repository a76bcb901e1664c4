use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration field failed validation; `field` is a dotted path.
    #[error("{field}: {message}")]
    Config { field: String, message: String },

    #[error("quadrature grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("non-finite integrand at u = {node}: {detail}")]
    NonFiniteIntegrand { node: f64, detail: String },

    #[error("{0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }
}
