use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Bessel order {order} outside supported range |n| <= {max}")]
    BesselOrderOutOfRange { order: i64, max: i64 },

    #[error("derivative order {order} outside supported range 0..={max}")]
    DerivativeOrderOutOfRange { order: u32, max: u32 },

    #[error("moment order {order} outside supported range 0..={max}")]
    MomentOrderOutOfRange { order: u32, max: u32 },

    #[error("Chebyshev degree {degree} outside supported range 0..={max}")]
    ChebyshevDegreeOutOfRange { degree: u32, max: u32 },

    #[error("non-finite argument `{name}` = {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("|omega * A| = {product} exceeds the Bessel order budget of {max}")]
    OrderBudgetExceeded { product: f64, max: f64 },

    #[error(
        "series not converged within {max_order} terms (last term magnitude {last_term:e}); \
         raise max_order or loosen tail_tolerance"
    )]
    NotConverged { max_order: usize, last_term: f64 },

    #[error("negative variance {value:e} beyond rounding tolerance")]
    NegativeVariance { value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sample count {count} exceeds the limit {max}")]
    CountTooLarge { count: u64, max: u64 },

    #[error("sample count {count} below the minimum {min}")]
    CountTooSmall { count: u64, min: u64 },

    #[error("length mismatch: {left} amplitudes vs {right} angle laws")]
    LengthMismatch { left: usize, right: usize },

    #[error("propagation target time {to} must be later than the wavefront time {from}")]
    TimeOrdering { from: f64, to: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

impl Error {
    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}
