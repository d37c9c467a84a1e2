use thiserror::Error;

/// Errors raised by the channel, modulation and link-budget routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The BER target cannot be met at any SNR.
    #[error("no solution: BER floor {floor:.6e} is not below threshold {threshold:.6e}")]
    NoSolution { floor: f64, threshold: f64 },

    /// Every grid point of a q search was unreachable.
    #[error("no q in the grid reaches BER threshold {threshold:.6e} at p = {p}")]
    NoFeasibleQ { p: f64, threshold: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain { name, value, reason }
    }

    /// True for errors that stem from user configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_nan() || value < 0.0 {
        Err(Error::domain(name, value, "must be non-negative"))
    } else {
        Ok(value)
    }
}

pub(crate) fn unit_interval(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "must lie in [0, 1]"))
    }
}
