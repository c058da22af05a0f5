use thiserror::Error;

/// Errors raised by the simulation layers.
///
/// Configuration problems have their own type in [`crate::config`]; everything
/// here is a rejected physical input or a numerical/statistical failure.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not unitary (Frobenius deviation {deviation:.3e} exceeds {tolerance:.1e})")]
    NonUnitary { deviation: f64, tolerance: f64 },

    #[error("state is not normalized (total probability {total:.15})")]
    NotNormalized { total: f64 },

    #[error("frequency {nu_hz:.6e} Hz outside model validity range [{min_hz:.6e}, {max_hz:.6e}] Hz")]
    OutOfRange { nu_hz: f64, min_hz: f64, max_hz: f64 },

    #[error("integration step too coarse: per-step phase advance {advance:.3} rad exceeds {limit} rad (need at least {min_steps} steps)")]
    StepTooLarge { advance: f64, limit: f64, min_steps: usize },

    #[error("zero-GVD point not bracketed by the samples")]
    ZeroGvdNotBracketed,

    #[error("acceptance-bandwidth search did not bracket the half-maximum: {0}")]
    NonBracketing(String),

    #[error("fit did not converge after {iterations} iterations (rms residual {rms:.3e})")]
    FitNonConvergence { iterations: usize, rms: f64 },

    #[error("no fringes detected (fitted amplitude {amplitude:.3e}, uncertainty {uncertainty:.3e})")]
    NoFringes { amplitude: f64, uncertainty: f64 },

    #[error(
        "insufficient statistics: heralds={heralds}, herald&a={herald_a}, herald&b={herald_b}, herald&a&b={herald_ab}"
    )]
    InsufficientStatistics {
        heralds: u64,
        herald_a: u64,
        herald_b: u64,
        herald_ab: u64,
    },

    #[error("unknown channel id {0}")]
    UnknownChannel(u8),

    #[error("malformed {what} at line {line}: {reason}")]
    Parse {
        what: &'static str,
        line: usize,
        reason: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
