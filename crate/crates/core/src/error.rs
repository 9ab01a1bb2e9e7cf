use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no feasible allocation: every channel gain is zero")]
    NoFeasibleAllocation,

    #[error("domain error: {0}")]
    Domain(String),

    /// A root was not bracketed or did not converge. Carries the last
    /// bracket and the residuals observed at its endpoints.
    #[error("solver failure ({what}): bracket [{lo:e}, {hi:e}], residuals [{f_lo:e}, {f_hi:e}]")]
    SolverFailure {
        what: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
