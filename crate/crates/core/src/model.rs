//! System configuration, link budgets, and the statistics of the composite
//! reflected path.
//!
//! The physical picture: user 1 (U1) transmits a BPSK symbol that reaches the
//! base station over a direct Rayleigh path *and* over an `N`-element RIS
//! whose per-element cascades are Rayleigh × Rician. The RIS phase profile is
//! biased by `±w_m` to carry user 2's (U2) bit. After derotation, the
//! composite reflected amplitude splits into an in-phase part
//! `R₁ = Σᵢ αᵢ βᵢ cos(w_m)` and a quadrature part `R₂ = Σᵢ αᵢ βᵢ sin(w_m)`.
//! For tens of elements the central limit theorem makes both sums Gaussian,
//! and this module computes their exact mean and variance from the
//! per-element envelope moments.
//!
//! All second moments are normalized: `E[αᵢ²] = E[βᵢ²] = E[ε²] = 1`, so the
//! link budgets carry every power scale.
//!
//! # Example
//!
//! ```
//! use risvc_core::model::{SystemConfig, link_budget, moments_r1};
//!
//! let cfg = SystemConfig::default();
//! let budget = link_budget(&cfg);
//! // 20 dB average SNR against 20 dB / 30 dB path losses.
//! assert!((budget.gamma_bar1 - 1.0).abs() < 1e-12);
//! assert!((budget.gamma_bar2 - 0.1).abs() < 1e-12);
//!
//! let m1 = moments_r1(&cfg);
//! assert!((m1.mu - 29.529241005506108).abs() < 1e-9);
//! ```

use crate::error::{Error, Result};
use crate::specfun::{kummer_1f1_ln, ln_gamma, ErfApproxTable};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Complete description of one operating point of the system.
///
/// The default value reproduces the numerical setting used throughout the
/// crate's own validation: 50 RIS elements, Rician factor 3, phase offset
/// `π/4`, 20 dB / 30 dB path losses on the direct and reflected links, 20 dB
/// average SNR, and a conditional error probability of the Gaussian-noise
/// form `(1/2) erfc(√γ)` (i.e. `p = 1/2`, `q = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of RIS elements `N`.
    pub n_elements: u32,
    /// Rician factor `K ≥ 0` of the RIS–base-station segments.
    pub rician_k: f64,
    /// Phase offset `w_m ∈ [0, π/2]` carrying user 2's bit.
    pub w_m: f64,
    /// Path loss of the direct U1 link, in dB.
    pub l1_db: f64,
    /// Path loss of the reflected (RIS) link, in dB.
    pub l2_db: f64,
    /// Average transmit SNR `γ̄`, in dB.
    pub avg_snr_db: f64,
    /// Exponent `p` of the conditional-error kernel `γ^(p-1)`.
    pub mod_p: f64,
    /// Decay rate `q` of the conditional-error kernel `e^(-qγ)`.
    pub mod_q: f64,
    /// Truncation order for series evaluations.
    pub series_l: u32,
    /// Seed for every random stream derived from this configuration.
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_elements: 50,
            rician_k: 3.0,
            w_m: std::f64::consts::FRAC_PI_4,
            l1_db: 20.0,
            l2_db: 30.0,
            avg_snr_db: 20.0,
            mod_p: 0.5,
            mod_q: 1.0,
            series_l: 30,
            seed: 1,
        }
    }
}

impl SystemConfig {
    /// Checks every field against its documented domain.
    pub fn validate(&self) -> Result<()> {
        if self.n_elements == 0 {
            return Err(Error::domain("n_elements must be at least 1"));
        }
        if !self.rician_k.is_finite() || self.rician_k < 0.0 {
            return Err(Error::domain(format!(
                "rician_k must be finite and non-negative, got {}",
                self.rician_k
            )));
        }
        if !self.w_m.is_finite() || !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.w_m) {
            return Err(Error::domain(format!(
                "w_m must lie in [0, pi/2], got {}",
                self.w_m
            )));
        }
        for (name, value) in [
            ("l1_db", self.l1_db),
            ("l2_db", self.l2_db),
            ("avg_snr_db", self.avg_snr_db),
        ] {
            if !value.is_finite() {
                return Err(Error::domain(format!("{name} must be finite, got {value}")));
            }
        }
        if !(self.mod_p.is_finite() && self.mod_p > 0.0) {
            return Err(Error::domain(format!(
                "mod_p must be positive, got {}",
                self.mod_p
            )));
        }
        if !(self.mod_q.is_finite() && self.mod_q > 0.0) {
            return Err(Error::domain(format!(
                "mod_q must be positive, got {}",
                self.mod_q
            )));
        }
        if self.series_l == 0 {
            return Err(Error::domain("series_l must be at least 1"));
        }
        Ok(())
    }
}

/// Converts a decibel value to linear scale.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

// ---------------------------------------------------------------------------
// Link budgets
// ---------------------------------------------------------------------------

/// Average SNRs of the direct and reflected links after path loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// `γ̄₁ = γ̄ / L₁`: average SNR of the direct link.
    pub gamma_bar1: f64,
    /// `γ̄₂ = γ̄ / L₂`: average SNR of the reflected link.
    pub gamma_bar2: f64,
}

/// Splits the average transmit SNR across the two links' path losses.
pub fn link_budget(cfg: &SystemConfig) -> LinkBudget {
    LinkBudget {
        gamma_bar1: db_to_linear(cfg.avg_snr_db - cfg.l1_db),
        gamma_bar2: db_to_linear(cfg.avg_snr_db - cfg.l2_db),
    }
}

// ---------------------------------------------------------------------------
// Gaussian moments of the composite reflected path
// ---------------------------------------------------------------------------

/// Mean and variance of a Gaussian surrogate for one of the composite sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMoments {
    /// Mean `μ`.
    pub mu: f64,
    /// Variance `σ²`.
    pub sigma2: f64,
}

impl GaussianMoments {
    /// True when both moments vanish, which collapses the corresponding
    /// signal dimension entirely.
    pub fn is_degenerate(&self) -> bool {
        self.mu == 0.0 && self.sigma2 == 0.0
    }
}

/// Mean of one Rayleigh × Rician envelope product `αᵢ βᵢ`, with both factors
/// normalized to unit second moment.
///
/// `E[αβ] = Γ(3/2) · √π / (2 √(1+K) e^K) · ₁F₁(3/2; 1; K)`, evaluated in the
/// log domain so that arbitrarily large Rician factors cannot overflow the
/// intermediate `₁F₁`.
pub(crate) fn per_element_mean(k: f64) -> f64 {
    // ln Γ(3/2) + ln √π − ln 2 − ½ ln(1+K) − K + ln ₁F₁(3/2; 1; K)
    let ln_m = ln_gamma(1.5) + 0.5 * std::f64::consts::PI.ln()
        - std::f64::consts::LN_2
        - 0.5 * (1.0 + k).ln()
        - k
        + kummer_1f1_ln(1.5, 1.0, k).expect("1F1(3/2;1;K) converges for every finite K >= 0");
    ln_m.exp()
}

/// Second moment of the same product. Algebraically this is identically 1 —
/// `e^(-K) ₁F₁(2; 1; K) = 1 + K` — but it is evaluated through the defining
/// formula so the identity stays an observable property of the code rather
/// than a hidden assumption.
pub(crate) fn per_element_second_moment(k: f64) -> f64 {
    let ln_s2 = kummer_1f1_ln(2.0, 1.0, k).expect("1F1(2;1;K) converges for every finite K >= 0")
        - k
        - (1.0 + k).ln();
    ln_s2.exp()
}

/// Skewness of one envelope product `αᵢ βᵢ`.
///
/// The third raw moment is `Γ(5/2)² (1+K)^(-3/2) e^(-K) ₁F₁(5/2; 1; K)`
/// (Rayleigh and Rician third moments, the Rician one rewritten through the
/// Kummer transform so its hypergeometric argument stays non-negative); the
/// skewness then follows from the mean and the unit second moment. The value
/// is scale-invariant, so it applies unchanged to every term of either
/// composite rail regardless of the embedding angle, and it bounds how far
/// the Gaussian approximation of `R₁`, `R₂` can drift: the leading
/// Edgeworth correction to the CDF is `φ(0) |skew| / (6 √N)` in the sup norm.
pub fn per_element_skewness(k: f64) -> Result<f64> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::domain(format!(
            "Rician factor must be finite and non-negative, got {k}"
        )));
    }
    let mean = per_element_mean(k);
    let second = per_element_second_moment(k);
    let ln_m3 = 2.0 * ln_gamma(2.5) - 1.5 * (1.0 + k).ln() - k + kummer_1f1_ln(2.5, 1.0, k)?;
    let m3 = ln_m3.exp();
    let var = second - mean * mean;
    Ok((m3 - 3.0 * mean * var - mean.powi(3)) / var.powf(1.5))
}

/// Moments of the in-phase composite sum `R₁ = Σᵢ αᵢ βᵢ cos(w_m)`.
///
/// At `w_m = π/2` the cosine factor is exactly zero and both moments are
/// returned as exact zeros (the floating-point cosine of `π/2` is a subnormal
/// residue, which would otherwise leak a meaningless near-zero scale into the
/// closed forms).
pub fn moments_r1(cfg: &SystemConfig) -> GaussianMoments {
    if cfg.w_m == std::f64::consts::FRAC_PI_2 {
        return GaussianMoments {
            mu: 0.0,
            sigma2: 0.0,
        };
    }
    composite_moments(cfg, cfg.w_m.cos())
}

/// Moments of the quadrature composite sum `R₂ = Σᵢ αᵢ βᵢ sin(w_m)`.
///
/// At `w_m = 0` the sine factor is exactly zero and both moments are exact
/// zeros: user 2's signal dimension does not exist there.
pub fn moments_r2(cfg: &SystemConfig) -> GaussianMoments {
    if cfg.w_m == 0.0 {
        return GaussianMoments {
            mu: 0.0,
            sigma2: 0.0,
        };
    }
    composite_moments(cfg, cfg.w_m.sin())
}

fn composite_moments(cfg: &SystemConfig, factor: f64) -> GaussianMoments {
    let n = f64::from(cfg.n_elements);
    let mean = per_element_mean(cfg.rician_k);
    let second = per_element_second_moment(cfg.rician_k);
    GaussianMoments {
        mu: n * mean * factor,
        sigma2: n * (second - mean * mean) * factor * factor,
    }
}

// ---------------------------------------------------------------------------
// Derived constants of the closed forms
// ---------------------------------------------------------------------------

/// The constant block shared by the closed-form expressions for user 1.
///
/// `c1`, `c2` rescale the two links (`1/√γ̄₁`, `1/√γ̄₂`); `c3` and `c4`
/// collect the variance mixing of the direct and reflected paths; `c7` and
/// the indexed families [`DerivedConstants::c5`] / [`DerivedConstants::c6`]
/// appear once the error function inside the tail integrals is replaced by
/// its sum-of-exponentials approximation, whose table rides along here.
#[derive(Debug, Clone)]
pub struct DerivedConstants {
    /// `1/√γ̄₁`.
    pub c1: f64,
    /// `1/√γ̄₂`.
    pub c2: f64,
    /// `√(σ₁² L₁/L₂ + 1/2)`.
    pub c3: f64,
    /// `2 σ₁² c1² / c2`.
    pub c4: f64,
    /// `μ₁²/c2² + μ₁² c1² / (2 c2² c3²)`.
    pub c7: f64,
    /// The exponential-approximation table the indexed constants refer to.
    pub erf_table: ErfApproxTable,
    mu1: f64,
    sigma2_1: f64,
}

impl DerivedConstants {
    /// The `i`-th member of the first indexed constant family,
    /// `c5(i) = (2 c1² μ₁ σ₁² - tᵢ c2 c4 μ₁)² / (16 c2² c3⁴ σ₁⁴ + 8 c1² c2² c3² σ₁⁴ + 4 tᵢ c2² c3² c4² σ₁²)`.
    ///
    /// # Panics
    ///
    /// Panics when `i` is outside the approximation table.
    pub fn c5(&self, i: usize) -> f64 {
        let t = self.erf_table.t[i];
        let v = self.sigma2_1;
        let num = 2.0 * self.c1 * self.c1 * self.mu1 * v - t * self.c2 * self.c4 * self.mu1;
        let den = 16.0 * self.c2 * self.c2 * self.c3.powi(4) * v * v
            + 8.0 * self.c1 * self.c1 * self.c2 * self.c2 * self.c3 * self.c3 * v * v
            + 4.0 * t * self.c2 * self.c2 * self.c3 * self.c3 * self.c4 * self.c4 * v;
        num * num / den
    }

    /// The `i`-th member of the second indexed constant family,
    /// `c6(i) = (2 c1² μ₁ σ₁² + tᵢ c2² μ₁)² / (16 c2² c3⁴ σ₁⁴ + 8 c1² c2² c3² σ₁⁴ + 4 tᵢ c2⁴ c3² σ₁²)`.
    ///
    /// # Panics
    ///
    /// Panics when `i` is outside the approximation table.
    pub fn c6(&self, i: usize) -> f64 {
        let t = self.erf_table.t[i];
        let v = self.sigma2_1;
        let num = 2.0 * self.c1 * self.c1 * self.mu1 * v + t * self.c2 * self.c2 * self.mu1;
        let den = 16.0 * self.c2 * self.c2 * self.c3.powi(4) * v * v
            + 8.0 * self.c1 * self.c1 * self.c2 * self.c2 * self.c3 * self.c3 * v * v
            + 4.0 * t * self.c2.powi(4) * self.c3 * self.c3 * v;
        num * num / den
    }

    /// The sign of `2 c1² μ₁ σ₁² - tᵢ c2 c4 μ₁`, needed to keep the branch of
    /// `±erf(√c5)` consistent when the approximation table's decay rate
    /// exceeds the variance mixing (it decides which tail the completed
    /// square came from).
    pub(crate) fn c5_sign(&self, i: usize) -> f64 {
        let t = self.erf_table.t[i];
        let num =
            2.0 * self.c1 * self.c1 * self.mu1 * self.sigma2_1 - t * self.c2 * self.c4 * self.mu1;
        if num < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Builds the derived-constant block for user 1's closed forms.
///
/// The in-phase moments must be non-degenerate: at `w_m = π/2` the whole
/// constant family divides by `σ₁² = 0`, so that configuration is rejected
/// with [`Error::Degenerate`] and callers fall back to the direct-only
/// expression for user 1.
pub fn derived_constants(cfg: &SystemConfig, m1: &GaussianMoments) -> Result<DerivedConstants> {
    if m1.is_degenerate() {
        return Err(Error::degenerate(
            "in-phase moments vanish (w_m = pi/2); the closed-form constants do not exist",
        ));
    }
    if m1.sigma2 <= 0.0 {
        return Err(Error::domain(format!(
            "in-phase variance must be positive, got {}",
            m1.sigma2
        )));
    }
    let budget = link_budget(cfg);
    let c1 = 1.0 / budget.gamma_bar1.sqrt();
    let c2 = 1.0 / budget.gamma_bar2.sqrt();
    // L₁/L₂ in linear scale equals γ̄₂/γ̄₁... inverted: path-loss ratio.
    let loss_ratio = db_to_linear(cfg.l1_db - cfg.l2_db);
    let c3 = (m1.sigma2 * loss_ratio + 0.5).sqrt();
    let c4 = 2.0 * m1.sigma2 * c1 * c1 / c2;
    let c7 = m1.mu * m1.mu / (c2 * c2) + m1.mu * m1.mu * c1 * c1 / (2.0 * c2 * c2 * c3 * c3);
    Ok(DerivedConstants {
        c1,
        c2,
        c3,
        c4,
        c7,
        erf_table: ErfApproxTable::default(),
        mu1: m1.mu,
        sigma2_1: m1.sigma2,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn reference_config() -> SystemConfig {
        SystemConfig::default()
    }

    // -- configuration -------------------------------------------------------

    #[test]
    fn default_config_is_valid() {
        reference_config().validate().unwrap();
    }

    #[test]
    fn validation_rejects_out_of_domain_fields() {
        let mut cfg = reference_config();
        cfg.n_elements = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = reference_config();
        cfg.w_m = 2.0; // > pi/2
        assert!(cfg.validate().is_err());

        let mut cfg = reference_config();
        cfg.rician_k = -0.5;
        assert!(cfg.validate().is_err());

        let mut cfg = reference_config();
        cfg.mod_q = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn db_conversion_matches_known_points() {
        assert_abs_diff_eq!(db_to_linear(0.0), 1.0);
        assert_abs_diff_eq!(db_to_linear(20.0), 100.0, epsilon = 1e-10);
        assert_abs_diff_eq!(db_to_linear(-10.0), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn link_budget_splits_the_average_snr() {
        let budget = link_budget(&reference_config());
        assert_abs_diff_eq!(budget.gamma_bar1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(budget.gamma_bar2, 0.1, epsilon = 1e-13);
    }

    // -- per-element moments -------------------------------------------------

    #[test]
    fn per_element_mean_matches_reference_values() {
        // K = 0 collapses to the product of two Rayleigh means: π/4.
        assert_relative_eq!(
            per_element_mean(0.0),
            std::f64::consts::FRAC_PI_4,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            per_element_mean(1.0),
            0.80332396410261053,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            per_element_mean(3.0),
            0.83521306233140935,
            max_relative = 1e-11
        );
    }

    #[test]
    fn per_element_second_moment_is_exactly_one() {
        for &k in &[0.0, 0.5, 1.0, 3.0, 10.0] {
            assert_abs_diff_eq!(per_element_second_moment(k), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn per_element_skewness_matches_frozen_value() {
        assert_relative_eq!(
            per_element_skewness(3.0).unwrap(),
            1.1940959620660523,
            max_relative = 1e-10
        );
        assert!(per_element_skewness(-0.5).is_err());
        assert!(per_element_skewness(f64::NAN).is_err());
    }

    // -- composite moments ---------------------------------------------------

    #[test]
    fn reference_moments_match_frozen_values() {
        let cfg = reference_config();
        let m1 = moments_r1(&cfg);
        assert_relative_eq!(m1.mu, 29.529241005506108, max_relative = 1e-11);
        assert_relative_eq!(m1.sigma2, 7.5604785127747336, max_relative = 1e-9);
        // w_m = π/4 puts equal weight on both rails.
        let m2 = moments_r2(&cfg);
        assert_relative_eq!(m2.mu, m1.mu, max_relative = 1e-12);
        assert_relative_eq!(m2.sigma2, m1.sigma2, max_relative = 1e-12);
    }

    #[test]
    fn single_element_rayleigh_moments_are_analytic() {
        let cfg = SystemConfig {
            n_elements: 1,
            rician_k: 0.0,
            w_m: 0.0,
            ..reference_config()
        };
        let m1 = moments_r1(&cfg);
        assert_relative_eq!(m1.mu, std::f64::consts::FRAC_PI_4, max_relative = 1e-12);
        let expected_var = 1.0 - std::f64::consts::PI * std::f64::consts::PI / 16.0;
        assert_relative_eq!(m1.sigma2, expected_var, max_relative = 1e-10);
    }

    #[test]
    fn degenerate_angles_zero_the_right_rail_exactly() {
        let at_half_pi = SystemConfig {
            w_m: std::f64::consts::FRAC_PI_2,
            ..reference_config()
        };
        let m1 = moments_r1(&at_half_pi);
        assert!(m1.is_degenerate(), "cos(pi/2) rail must vanish exactly");
        assert_eq!(m1.mu.to_bits(), 0.0f64.to_bits());
        // ... while the quadrature rail is in full strength there.
        assert!(moments_r2(&at_half_pi).mu > 0.0);

        let at_zero = SystemConfig {
            w_m: 0.0,
            ..reference_config()
        };
        assert!(moments_r2(&at_zero).is_degenerate());
        assert!(!moments_r1(&at_zero).is_degenerate());
    }

    #[test]
    fn rails_swap_roles_under_angle_complement() {
        let cfg = SystemConfig {
            w_m: 0.3,
            ..reference_config()
        };
        let complement = SystemConfig {
            w_m: std::f64::consts::FRAC_PI_2 - 0.3,
            ..reference_config()
        };
        let m1 = moments_r1(&cfg);
        let m2c = moments_r2(&complement);
        assert_relative_eq!(m1.mu, m2c.mu, max_relative = 1e-12);
        assert_relative_eq!(m1.sigma2, m2c.sigma2, max_relative = 1e-12);
    }

    // -- derived constants ---------------------------------------------------

    #[test]
    fn derived_constants_match_frozen_values() {
        let cfg = reference_config();
        let m1 = moments_r1(&cfg);
        let k = derived_constants(&cfg, &m1).unwrap();
        assert_relative_eq!(k.c1, 1.0, max_relative = 1e-12);
        assert_relative_eq!(k.c2, 3.1622776601683791, max_relative = 1e-12);
        assert_relative_eq!(k.c3, 1.1207354064530457, max_relative = 1e-9);
        assert_relative_eq!(k.c4, 4.781666460226119, max_relative = 1e-9);
        assert_relative_eq!(k.c7, 121.9087083497744, max_relative = 1e-9);
        let c5_expected = [
            0.0,
            5.3105226777666692,
            82.000577751399746,
            0.20430202967633423,
        ];
        let c6_expected = [
            22.955624339780638,
            38.731765690974619,
            128.20520882304001,
            25.578809184566911,
        ];
        for i in 0..4 {
            assert_abs_diff_eq!(
                k.c5(i),
                c5_expected[i],
                epsilon = 1e-7 * (1.0 + c5_expected[i])
            );
            assert_relative_eq!(k.c6(i), c6_expected[i], max_relative = 1e-9);
        }
    }

    #[test]
    fn first_table_entry_makes_c5_vanish() {
        // With c4 = 2σ₁²c1²/c2, the c5 numerator is 2c1²μ₁σ₁²(1 - tᵢ), so the
        // table entry t₀ = 1 zeroes c5(0) at *every* operating point.
        let cfg = SystemConfig {
            avg_snr_db: 14.0,
            w_m: 0.9,
            ..reference_config()
        };
        let m1 = moments_r1(&cfg);
        let k = derived_constants(&cfg, &m1).unwrap();
        assert_abs_diff_eq!(k.c5(0), 0.0, epsilon = 1e-20);
    }

    #[test]
    fn degenerate_geometry_is_rejected() {
        let cfg = SystemConfig {
            w_m: std::f64::consts::FRAC_PI_2,
            ..reference_config()
        };
        let m1 = moments_r1(&cfg);
        let err = derived_constants(&cfg, &m1).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)), "got {err:?}");
    }

    // -- property-based invariants ------------------------------------------

    proptest! {
        #[test]
        fn per_element_mean_is_bounded_and_increasing(k in 0.0f64..20.0) {
            let m = per_element_mean(k);
            prop_assert!(m > 0.78 && m < 1.0, "mean {m} escaped (π/4, 1)");
            let m_hi = per_element_mean(k + 0.25);
            prop_assert!(m_hi > m, "mean must increase with the Rician factor");
        }

        #[test]
        fn in_phase_mean_decreases_with_the_phase_offset(w in 0.0f64..1.45) {
            let lo = SystemConfig { w_m: w, ..SystemConfig::default() };
            let hi = SystemConfig { w_m: w + 0.1, ..SystemConfig::default() };
            prop_assert!(moments_r1(&hi).mu < moments_r1(&lo).mu);
        }

        #[test]
        fn composite_variance_is_non_negative(
            n in 1u32..400,
            k in 0.0f64..15.0,
            w in 0.0f64..std::f64::consts::FRAC_PI_2,
        ) {
            let cfg = SystemConfig {
                n_elements: n,
                rician_k: k,
                w_m: w,
                ..SystemConfig::default()
            };
            prop_assert!(moments_r1(&cfg).sigma2 >= 0.0);
            prop_assert!(moments_r2(&cfg).sigma2 >= 0.0);
        }
    }
}
