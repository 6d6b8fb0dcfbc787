use thiserror::Error;

/// Errors raised by the click models, the LLV statistics and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical or numerical parameter is NaN, infinite or outside its domain.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A click probability sits at 0 or 1, so the log-likelihood coefficients diverge.
    #[error("degenerate regime: probability `{name}` = {value} is not strictly inside (0, 1)")]
    Degenerate { name: &'static str, value: f64 },

    /// The object-present and object-absent hypotheses cannot be told apart.
    #[error("hypotheses are indistinguishable: {0}")]
    Indistinguishable(&'static str),

    /// The binomial click distributions are too skewed for the Gaussian treatment.
    #[error("Gaussian regime violated: skew {skew:.4} >= 0.3 (trials {trials}, p {p:.3e})")]
    GaussianRegime { skew: f64, trials: i64, p: f64 },

    /// A computed variance came out negative.
    #[error("negative variance {0:e} in LLV moments")]
    NegativeVariance(f64),

    /// Click counts do not satisfy 0 <= x <= k <= n, 0 <= y <= n - k.
    #[error("invalid counts x={x} y={y} k={k} n={n}")]
    Counts { x: u64, y: u64, k: u64, n: u64 },

    /// A counting window runs past the end of a stream.
    #[error("window [{start}, {end}) exceeds stream length {len}")]
    OutOfBounds { start: u64, end: u64, len: u64 },

    /// A Monte-Carlo request is too small or otherwise malformed.
    #[error("invalid experiment setup: {0}")]
    Setup(String),

    #[error("stream file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    check_finite(name, value)?;
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<f64> {
    check_finite(name, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be non-negative",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    check_finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be strictly positive",
        })
    }
}
