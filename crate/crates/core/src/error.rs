use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular configuration d={d}: the two dots coincide")]
    SingularConfiguration { d: f64 },

    #[error("quadrature did not converge: best estimate {best:e} with error {error:e}")]
    Quadrature { best: f64, error: f64 },

    #[error("no root in bracket [{lo}, {hi}]: J has the same sign at both ends ({j_lo:e}, {j_hi:e} meV)")]
    NoRootInBracket { lo: f64, hi: f64, j_lo: f64, j_hi: f64 },

    #[error("root finder did not converge after {iterations} iterations, best bracket [{lo}, {hi}]")]
    Convergence { lo: f64, hi: f64, iterations: usize },

    #[error(
        "no electric-field switch at B={b_hold} T: J is not ferromagnetic there \
         (the E=0 switch sits at B*={b_star:.4} T, hold the field above it)"
    )]
    BelowThreshold { b_hold: f64, b_star: f64 },

    #[error("unknown material preset `{0}`")]
    UnknownPreset(String),

    #[error("io: {0}")]
    Io(String),

    #[error("json: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
