use thiserror::Error;

/// Errors raised by the physics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("temperature must be > 0 and finite, got {0}")]
    NonPositiveTemperature(f64),

    #[error("population vector sums to {sum}, expected 1")]
    UnnormalizedPopulations { sum: f64 },

    /// The entropy mismatch does not change sign over the bracket.
    #[error(
        "no isentrope root in [{lo}, {hi}]: residuals {residual_lo:e} and {residual_hi:e} share a sign"
    )]
    NoRootInBracket {
        lo: f64,
        hi: f64,
        residual_lo: f64,
        residual_hi: f64,
    },

    #[error("metric denominator {denominator:e} is below tolerance")]
    DivisionByNearZero { denominator: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_frequency(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    if value < 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be >= 0",
        });
    }
    Ok(value)
}

pub(crate) fn check_temperature(t: f64) -> Result<f64> {
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(Error::NonPositiveTemperature(t))
    }
}
