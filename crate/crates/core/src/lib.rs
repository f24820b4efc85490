//! Analytic engine and Monte Carlo simulator for a RIS-assisted two-user
//! uplink modulation scheme.
//!
//! A reconfigurable intelligent surface (RIS) serves a primary user whose
//! binary phase-shift keyed symbol it beamforms toward the base station.
//! A second user rides along by biasing the RIS phase profile a small angle
//! `±w_m` around the beamforming solution, embedding one extra bit per symbol
//! in the *phase* of the composite reflected path. The base station decodes
//! the primary bit from the in-phase rail, re-modulates, and then decodes the
//! secondary bit from the quadrature rail.
//!
//! This crate provides both sides of the performance story for that scheme:
//!
//! * [`model`] — the channel/geometry model: link budgets, the Gaussian
//!   moments of the composite reflected path, and the derived constants used
//!   by the closed forms.
//! * [`specfun`] — the special functions the closed forms are written in.
//! * [`analytic`] — distribution functions of both users' post-processing
//!   SNRs and the exact, closed-form, and series bit-error-rate evaluators.
//! * [`montecarlo`] — deterministic, reproducible channel sampling, a full
//!   link-level simulator, and semi-analytic error-rate estimation.
//!
//! # Example
//!
//! ```
//! use risvc_core::model::{self, SystemConfig};
//! use risvc_core::analytic;
//!
//! // Default configuration: 50 RIS elements, Rician factor 3, w_m = π/4.
//! let cfg = SystemConfig::default();
//! cfg.validate().unwrap();
//!
//! // Bit error rate of the primary user if the RIS were absent.
//! let direct = analytic::ber_u1_direct_only(&cfg);
//! assert!(direct > 0.0 && direct < 0.5);
//!
//! // Moments of the composite reflected in-phase sum.
//! let m1 = model::moments_r1(&cfg);
//! assert!(m1.mu > 0.0 && m1.sigma2 > 0.0);
//! ```

pub mod analytic;
pub mod error;
pub mod model;
pub mod montecarlo;
pub(crate) mod quad;
pub mod specfun;

pub use error::{Error, Result};
