use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Divergent dwell times are not errors; they are reported through
/// [`crate::dwell::DwellValue::Divergent`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge (estimate {estimate}, error bound {error_bound:e})")]
    NonConvergence {
        what: String,
        estimate: Complex64,
        error_bound: f64,
    },

    #[error("{operation} is not supported for the {variant} state")]
    Unsupported {
        operation: &'static str,
        variant: &'static str,
    },

    #[error("degenerate input: non-positive density at grid indices {indices:?}")]
    Degenerate { indices: Vec<usize> },

    #[error("insufficient span: {0}")]
    InsufficientSpan(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Overflow(_) => "overflow",
            Error::Domain(_) => "domain",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Unsupported { .. } => "unsupported",
            Error::Degenerate { .. } => "degenerate_input",
            Error::InsufficientSpan(_) => "insufficient_span",
            Error::Precondition(_) => "precondition",
        }
    }

    /// True for errors caused by the caller's parameters rather than by the
    /// numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Unsupported { .. } | Error::Precondition(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {v}")))
    }
}

pub(crate) fn ensure_finite_complex(name: &str, z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {z}")))
    }
}
