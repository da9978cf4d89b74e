use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("element is not self-adjoint (defect {defect:.3e}, tolerance {tol:.3e})")]
    NotSelfAdjoint { defect: f64, tol: f64 },

    #[error("operator is not stochastic (trace defect {defect:.3e})")]
    NotStochastic { defect: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("numerical failure: {context} (residual {residual:.3e})")]
    Numerical { context: String, residual: f64 },
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
