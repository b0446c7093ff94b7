use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure did not reach its tolerance.
    #[error("numeric error: {message} (best estimate {estimate:e}, error estimate {error:e})")]
    Numeric {
        message: String,
        estimate: f64,
        error: f64,
    },

    /// An exponential argument exceeded the double-precision guard.
    #[error("overflow: exponent {exponent:.6} exceeds guard {limit}")]
    Overflow { exponent: f64, limit: f64 },

    /// A caller-side requirement of an operation was not met.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Largest exponent fed to `exp` before a computation is refused.
pub const EXP_GUARD: f64 = 700.0;

/// Checks an exponent against [`EXP_GUARD`].
pub(crate) fn guard_exponent(x: f64) -> Result<()> {
    if x > EXP_GUARD || x.is_nan() {
        Err(Error::Overflow {
            exponent: x,
            limit: EXP_GUARD,
        })
    } else {
        Ok(())
    }
}
