use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operation requires the PT_COMPLEX drive family")]
    NotPtDrive,

    /// ω_eff sits on the counter-rotating resonance where the closed-form
    /// quadratures divide by zero. Callers should switch to the secular limit.
    #[error(
        "SECULAR_SINGULAR: omega_eff = {omega_eff} is within {threshold:e} of -1; \
         use the secular-limit formula instead"
    )]
    SecularSingular { omega_eff: f64, threshold: f64 },

    #[error("adaptive quadrature did not converge (best estimate {best_re} + {best_im}i, error estimate {error:e})")]
    QuadratureNotConverged { best_re: f64, best_im: f64, error: f64 },

    #[error("state norm left the representable range at t = {t} (norm {norm:e})")]
    NormOverflow { t: f64, norm: f64 },

    #[error("Taylor series did not converge in the step starting at t = {t}")]
    SeriesNotConverged { t: f64 },

    #[error("zero-norm state")]
    ZeroNorm,

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("trajectory does not close for omega_eff = {0}")]
    NoFiniteClosure(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
