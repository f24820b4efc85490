//! Error taxonomy shared by every module in this crate.
//!
//! Three failure classes cover the whole engine:
//!
//! * [`Error::Domain`] — the caller handed an argument outside the documented
//!   domain of an operation (non-finite input, negative Rician factor, an
//!   empty sample set, ...). These are caller bugs, not numerical accidents.
//! * [`Error::Numeric`] — the input was admissible but the evaluation failed
//!   to converge or overflowed (series hit its term budget, adaptive
//!   quadrature exhausted its bisection budget, ...).
//! * [`Error::Degenerate`] — a configuration collapses part of the model
//!   (for example a phase offset of `π/2` zeroes both moments of the
//!   reflected in-phase sum) so a derived quantity does not exist.
//!
//! # Example
//!
//! ```
//! use risvc_core::specfun::erf_exact;
//!
//! let err = erf_exact(f64::NAN).unwrap_err();
//! assert!(err.to_string().contains("domain"));
//! ```

/// Unified error type for the analytic engine and the simulator.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument was outside the documented domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An evaluation failed to converge or left the representable range.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The configuration collapses the quantity being requested.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Builds a domain error from anything printable.
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Builds a numeric error from anything printable.
    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Builds a degenerate-configuration error from anything printable.
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
