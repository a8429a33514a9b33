use thiserror::Error;

use crate::scheme::Signal;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("no transmission scheme for alpha = {0} (defined on [0, 2])")]
    NoScheme(f64),

    #[error("rate exponent for {signal} is {lambda} < 0 at alpha = {alpha}, epsilon = {epsilon}")]
    NegativeRateExponent {
        signal: Signal,
        lambda: f64,
        alpha: f64,
        epsilon: f64,
    },

    #[error("constellation for {signal} is degenerate at P = {p}: floor(P^(lambda/2)) = 0")]
    DegenerateConstellation { signal: Signal, p: f64 },

    #[error("layer {signal} is not separable: spacing exponent {spacing} <= interference exponent {interference}")]
    SeparationViolated {
        signal: Signal,
        spacing: f64,
        interference: f64,
    },

    #[error("search needs about {estimated} nodes, cap is {cap}")]
    CapExceeded { estimated: f64, cap: u64 },

    #[error("received amplitude {magnitude:e} exceeds the fixed-point range {limit:e}")]
    DynamicRange { magnitude: f64, limit: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by a valid request that cannot be served
    /// (preconditions on the scheme, search caps), as opposed to bad input.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::InvalidParam { .. })
    }
}
