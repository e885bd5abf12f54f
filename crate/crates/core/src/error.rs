use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("empty spectrum: at least one energy level is required")]
    EmptySpectrum,

    #[error(
        "quadrature did not converge: best estimate {estimate:e}, error bound {error_bound:e} \
         (tolerance {tolerance:e})"
    )]
    QuadratureNotConverged {
        estimate: f64,
        error_bound: f64,
        tolerance: f64,
    },

    #[error("no real solution: sin(c r0)/r0 = {rhs:e} requires rhs <= 1/r0 = {max:e}")]
    NoRealSolution { rhs: f64, max: f64 },

    #[error("overflow: exp({exponent:e}) is not representable")]
    Overflow { exponent: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
