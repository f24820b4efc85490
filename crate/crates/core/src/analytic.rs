//! Distribution functions of both users' post-processing SNRs and the
//! bit-error-rate evaluators built on them.
//!
//! Three layers live here, in increasing order of approximation:
//!
//! 1. **Quadrature references.** [`cdf_gamma1_quadrature`] integrates the
//!    defining Gaussian-mixture integral for user 1's SNR, and
//!    [`cdf_gamma2_exact`] evaluates user 2's SNR law through the half-order
//!    Marcum Q-function. These are the in-crate ground truth.
//! 2. **Closed forms.** [`cdf_gamma1_closed`] is the exact-erf closed form of
//!    the same CDF; [`ber_u1_closed`] and [`ber_u2_ideal_closed`] are the
//!    final closed-form error-rate expressions from the reference derivation.
//! 3. **Series forms.** [`cdf_gamma2_series`] expands the Marcum Q-function
//!    into a Poisson-weighted incomplete-gamma series.
//!
//! Two evaluation modes exist for the final closed forms. `AsPrinted`
//! reproduces the original expressions exactly as published, including their
//! typographical slips; `Corrected` applies the algebra fixes documented in
//! `DEVIATIONS.md` at the repository root. The as-printed forms are the
//! default so that the published expressions stay inspectable; every
//! validation gate in this repository evaluates the corrected forms and
//! cites the deviations ledger where even those cannot follow the reference
//! (the four-exponential erf approximation itself fails at high SNR).
//!
//! # Example
//!
//! ```
//! use risvc_core::model::{self, SystemConfig};
//! use risvc_core::analytic::{CdfFunction, ber_from_cdf};
//!
//! let cfg = SystemConfig::default();
//! let m2 = model::moments_r2(&cfg);
//!
//! // Average BER of user 2 under ideal first-stage decoding, from the
//! // quadrature-grade CDF of its SNR.
//! let cdf = CdfFunction::gamma2_exact(&cfg, m2);
//! let ber = ber_from_cdf(&cdf, cfg.mod_p, cfg.mod_q).unwrap();
//! assert!((ber - 4.7764e-8).abs() / 4.7764e-8 < 1e-3);
//! ```

use crate::error::{Error, Result};
use crate::model::{
    derived_constants, link_budget, DerivedConstants, GaussianMoments, SystemConfig,
};
use crate::quad::{integrate_segmented, QuadOptions};
use crate::specfun::{
    erfc_exact, erfcx, gauss_2f1_ln, ln_gamma, marcum_p_half_ref, marcum_q_half_ref,
    reg_upper_gamma, whittaker_w_ln,
};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

const SQRT_PI: f64 = 1.7724538509055160272981674833411;

// ---------------------------------------------------------------------------
// CDF abstraction
// ---------------------------------------------------------------------------

/// Where a [`CdfFunction`]'s values come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// An analytic closed form or truncated series.
    ClosedForm,
    /// Adaptive quadrature of a defining integral.
    Quadrature,
    /// An empirical step function built from samples.
    Empirical,
}

/// Which reading of the published closed forms to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosedFormMode {
    /// The expressions exactly as published, typographical slips included.
    #[default]
    AsPrinted,
    /// With the algebra fixes documented in `DEVIATIONS.md`.
    Corrected,
}

/// Which argument convention the series CDF uses for its erfc term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErfcArgMode {
    /// `erfc(√z)` — dimensionally consistent with the Marcum expansion and
    /// the default (see `DEVIATIONS.md`).
    #[default]
    SqrtCorrected,
    /// `erfc(z)` — the argument exactly as published.
    AsPrinted,
}

/// An evaluable SNR distribution function with provenance and clamp
/// accounting.
///
/// Values are clamped into `[0, 1]` on the way out; every clamp increments a
/// counter so that a series truncated too early (which can go slightly
/// negative) is observable rather than silent.
#[derive(Clone)]
pub struct CdfFunction {
    eval_fn: Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>,
    provenance: Provenance,
    clamp_events: Arc<AtomicU64>,
}

impl std::fmt::Debug for CdfFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CdfFunction")
            .field("provenance", &self.provenance)
            .field("clamp_events", &self.clamp_events())
            .finish()
    }
}

impl CdfFunction {
    /// Wraps an arbitrary evaluator with the given provenance.
    pub fn new(
        provenance: Provenance,
        eval_fn: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        CdfFunction {
            eval_fn: Arc::new(eval_fn),
            provenance,
            clamp_events: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Evaluates the CDF at `gamma`, clamping into `[0, 1]`.
    pub fn eval(&self, gamma: f64) -> Result<f64> {
        let raw = (self.eval_fn)(gamma)?;
        if !raw.is_finite() {
            return Err(Error::numeric(format!(
                "CDF evaluated to a non-finite value at gamma = {gamma:e}"
            )));
        }
        if (0.0..=1.0).contains(&raw) {
            Ok(raw)
        } else {
            self.clamp_events.fetch_add(1, Ordering::Relaxed);
            Ok(raw.clamp(0.0, 1.0))
        }
    }

    /// The provenance recorded at construction.
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// How many evaluations so far fell outside `[0, 1]` and were clamped.
    pub fn clamp_events(&self) -> u64 {
        self.clamp_events.load(Ordering::Relaxed)
    }

    /// Closed-form CDF of user 1's combined-link SNR.
    pub fn gamma1_closed(
        cfg: &SystemConfig,
        m1: GaussianMoments,
        consts: &DerivedConstants,
    ) -> Self {
        let consts = consts.clone();
        let budget = link_budget(cfg);
        CdfFunction::new(Provenance::ClosedForm, move |g| {
            cdf_gamma1_closed_impl(g, &budget, m1, &consts)
        })
    }

    /// Quadrature-grade CDF of user 1's combined-link SNR.
    pub fn gamma1_quadrature(cfg: &SystemConfig, m1: GaussianMoments) -> Self {
        let budget = link_budget(cfg);
        CdfFunction::new(Provenance::Quadrature, move |g| {
            cdf_gamma1_quadrature_impl(g, &budget, m1)
        })
    }

    /// Marcum-Q-based CDF of user 2's interference-limited SNR.
    pub fn gamma2_exact(cfg: &SystemConfig, m2: GaussianMoments) -> Self {
        let budget = link_budget(cfg);
        CdfFunction::new(Provenance::Quadrature, move |g| {
            cdf_gamma2_exact_impl(g, &budget, m2)
        })
    }

    /// Series CDF of user 2's SNR with truncation order `l_max`.
    pub fn gamma2_series(
        cfg: &SystemConfig,
        m2: GaussianMoments,
        l_max: u32,
        mode: ErfcArgMode,
    ) -> Self {
        let budget = link_budget(cfg);
        CdfFunction::new(Provenance::ClosedForm, move |g| {
            cdf_gamma2_series_impl(g, &budget, m2, l_max, mode)
        })
    }

    /// Empirical step CDF from a sample set (sorted internally).
    pub fn empirical(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("empirical CDF needs at least one sample"));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("empirical CDF samples must be finite"));
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        Ok(CdfFunction::new(Provenance::Empirical, move |g| {
            let rank = samples.partition_point(|&x| x <= g);
            Ok(rank as f64 / n)
        }))
    }
}

// ---------------------------------------------------------------------------
// User 1: combined-link SNR distribution
// ---------------------------------------------------------------------------

/// Closed-form CDF of user 1's SNR `γ₁ = (√γ̄₁ ε + √γ̄₂ R₁)²`.
///
/// The expression is the exact-erf closed form of the defining integral: a
/// Gaussian-CDF difference for the main mass plus two exponential-weighted
/// erf terms from completing the square against the direct link's Rayleigh
/// fading. The leading difference of erfs is evaluated as an erfc difference,
/// which is algebraically identical and immune to cancellation in the deep
/// lower tail.
pub fn cdf_gamma1_closed(
    gamma: f64,
    cfg: &SystemConfig,
    m1: GaussianMoments,
    consts: &DerivedConstants,
) -> Result<f64> {
    cdf_gamma1_closed_impl(gamma, &link_budget(cfg), m1, consts)
}

fn cdf_gamma1_closed_impl(
    gamma: f64,
    _budget: &crate::model::LinkBudget,
    m1: GaussianMoments,
    consts: &DerivedConstants,
) -> Result<f64> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::domain(format!(
            "CDF argument must be finite and non-negative, got {gamma}"
        )));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let (c1, c2, c3, c4) = (consts.c1, consts.c2, consts.c3, consts.c4);
    let (mu1, v1) = (m1.mu, m1.sigma2);
    let s1 = v1.sqrt();
    let z = gamma.sqrt();

    // Leading Gaussian mass: (1/2)[erf((c2 z - mu1)/sqrt(2 v1)) + erf(mu1/..)]
    let a = (c2 * z - mu1) / (2.0 * v1).sqrt();
    let b = mu1 / (2.0 * v1).sqrt();
    let line1 = 0.5 * (erfc_exact(-a)? - erfc_exact(b)?);

    // Exponential-weighted erf pair from the direct link's fading.
    let pref = (-(c1 * c2 * z - c1 * mu1).powi(2) / (2.0 * c3 * c3 * c2 * c2)).exp()
        / (2.0 * 2f64.sqrt() * c3);
    let t2 = pref * crate::specfun::erf_exact((c2 * z - mu1) / (2.0 * c3 * s1))?;
    let t3 = pref * crate::specfun::erf_exact((c4 * z + mu1) / (2.0 * c3 * s1))?;
    Ok(line1 - t2 - t3)
}

/// Quadrature-grade CDF of user 1's SNR from its defining integral.
///
/// `F(γ) = ∫₀^(√γ/√γ̄₂) φ((r-μ₁)/σ₁)/σ₁ · [1 - e^(-(√γ - √γ̄₂ r)²/γ̄₁)] dr`
///
/// The bracket combines the two published integrals into one integrand via
/// `-expm1`, which avoids subtractive cancellation when the bracket is tiny;
/// the integrals are otherwise evaluated exactly as defined, to absolute
/// accuracy 1e-10 (the adaptive tolerance is set two decades tighter).
pub fn cdf_gamma1_quadrature(gamma: f64, cfg: &SystemConfig, m1: GaussianMoments) -> Result<f64> {
    cdf_gamma1_quadrature_impl(gamma, &link_budget(cfg), m1)
}

fn cdf_gamma1_quadrature_impl(
    gamma: f64,
    budget: &crate::model::LinkBudget,
    m1: GaussianMoments,
) -> Result<f64> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::domain(format!(
            "CDF argument must be finite and non-negative, got {gamma}"
        )));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let (gb1, gb2) = (budget.gamma_bar1, budget.gamma_bar2);
    let (mu1, v1) = (m1.mu, m1.sigma2);
    if v1 <= 0.0 {
        // Degenerate reflected path: gamma1 = gamma_bar1 * eps^2 exactly,
        // with eps Rayleigh of unit second moment.
        return Ok(-(-gamma / gb1).exp_m1());
    }
    let s1 = v1.sqrt();
    let z = gamma.sqrt();
    let upper = z / gb2.sqrt();
    let norm = 1.0 / ((2.0 * std::f64::consts::PI * v1).sqrt());
    let integrand = move |r: f64| {
        let gauss = norm * (-(r - mu1) * (r - mu1) / (2.0 * v1)).exp();
        let d = z - gb2.sqrt() * r;
        gauss * (-(-d * d / gb1).exp_m1())
    };
    // Seed the subdivision with the Gaussian's own scale so the adaptive
    // refinement starts from panels that already resolve the peak.
    let mut breaks = vec![0.0];
    for candidate in [mu1 - 4.0 * s1, mu1 - s1, mu1, mu1 + s1, mu1 + 4.0 * s1] {
        if candidate > 0.0 && candidate < upper {
            breaks.push(candidate);
        }
    }
    breaks.push(upper);
    let opt = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-9,
        max_bisections: 4000,
    };
    Ok(integrate_segmented(integrand, &breaks, &opt)?.value)
}

// ---------------------------------------------------------------------------
// User 2: interference-limited SNR distribution
// ---------------------------------------------------------------------------

/// Ground-truth CDF of user 2's SNR `γ₂ = γ̄₂ R₂² / (γ̄₁ ε² + 1)`, through the
/// half-order Marcum Q-function:
///
/// `F(γ) = [1 - Q_{1/2}(μ₂/σ₂, b₀)] + √(γ̄₁γ/(2σ₂²γ̄₂ + γ̄₁γ)) e^(ex) Q_{1/2}(a₂, b₂)`
///
/// The complement `1 - Q` is evaluated directly as a lower-tail integral so
/// its relative accuracy survives in the deep tail, where the straight
/// subtraction would drown in rounding; both readings use the same quadrature
/// backend as [`crate::specfun::marcum_q_half_ref`].
pub fn cdf_gamma2_exact(gamma: f64, cfg: &SystemConfig, m2: GaussianMoments) -> Result<f64> {
    cdf_gamma2_exact_impl(gamma, &link_budget(cfg), m2)
}

fn cdf_gamma2_exact_impl(
    gamma: f64,
    budget: &crate::model::LinkBudget,
    m2: GaussianMoments,
) -> Result<f64> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::domain(format!(
            "CDF argument must be finite and non-negative, got {gamma}"
        )));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let (gb1, gb2) = (budget.gamma_bar1, budget.gamma_bar2);
    let (mu2, v2) = (m2.mu, m2.sigma2);
    if v2 <= 0.0 {
        // Degenerate quadrature rail: gamma2 is identically zero.
        return Ok(1.0);
    }
    let a = mu2 / v2.sqrt();
    let b0 = (gamma / (v2 * gb2)).sqrt();
    let t1 = marcum_p_half_ref(a, b0)?;

    let pr = (gb1 * gamma / (2.0 * v2 * gb2 + gb1 * gamma)).sqrt();
    let ex = 1.0 / gb1 - mu2 * mu2 * gb2 / (gb1 * gamma + 2.0 * v2 * gb2);
    let a2 = (mu2 * mu2 * gamma / (v2 * gamma + 2.0 * gb2 * v2 * v2 / gb1)).sqrt();
    let b2 = (2.0 / gb1 + gamma / (gb2 * v2)).sqrt();
    let q = marcum_q_half_ref(a2, b2)?;
    // For admissible link budgets (1/gamma_bar1 well below 700) the
    // exponential factor cannot push an underflowed Q back into range, so a
    // zero Q contributes exactly zero.
    let t2 = if q > 0.0 {
        pr * (ex + q.ln()).exp()
    } else {
        0.0
    };
    Ok(t1 + t2)
}

/// Series CDF of user 2's SNR: the Marcum Q-function of the exact law is
/// expanded into a Poisson-weighted incomplete-gamma series and integrated
/// term by term, truncated at `l_max`.
///
/// The default argument convention is [`ErfcArgMode::SqrtCorrected`]; the
/// published argument is available through
/// [`cdf_gamma2_series_with_mode`]. **Convergence warning:** the Poisson
/// weights peak at `l ≈ μ₂²/(2σ₂²)`, so the truncation order must comfortably
/// exceed that peak (about 58 for the default configuration) before the
/// series means anything. See `DEVIATIONS.md` for the measured convergence
/// profile.
pub fn cdf_gamma2_series(
    gamma: f64,
    cfg: &SystemConfig,
    m2: GaussianMoments,
    l_max: u32,
) -> Result<f64> {
    cdf_gamma2_series_impl(
        gamma,
        &link_budget(cfg),
        m2,
        l_max,
        ErfcArgMode::SqrtCorrected,
    )
}

/// [`cdf_gamma2_series`] with an explicit erfc argument convention.
pub fn cdf_gamma2_series_with_mode(
    gamma: f64,
    cfg: &SystemConfig,
    m2: GaussianMoments,
    l_max: u32,
    mode: ErfcArgMode,
) -> Result<f64> {
    cdf_gamma2_series_impl(gamma, &link_budget(cfg), m2, l_max, mode)
}

fn cdf_gamma2_series_impl(
    gamma: f64,
    budget: &crate::model::LinkBudget,
    m2: GaussianMoments,
    l_max: u32,
    mode: ErfcArgMode,
) -> Result<f64> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::domain(format!(
            "CDF argument must be finite and non-negative, got {gamma}"
        )));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let (gb1, gb2) = (budget.gamma_bar1, budget.gamma_bar2);
    let (mu2, v2) = (m2.mu, m2.sigma2);
    if v2 <= 0.0 {
        return Ok(1.0);
    }
    let a2v = mu2 * mu2 / v2;
    let x = gamma / (2.0 * gb2 * v2);
    let z = 1.0 / gb1 + x;

    // First block: 1 - Σ_l w_l(a²/2) Q(l + 1/2, x), the series expansion of
    // the lower-tail Marcum term.
    let ln_half_a2v = (0.5 * a2v).ln();
    let mut sum1 = 0.0;
    for l in 0..=l_max {
        let lf = f64::from(l);
        let lw = if a2v > 0.0 {
            lf * ln_half_a2v - ln_gamma(lf + 1.0) - 0.5 * a2v
        } else if l == 0 {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        let weight = lw.exp();
        sum1 += weight * reg_upper_gamma(lf + 0.5, x);
        // The Poisson weights peak at l = a²/2; once past it they decay
        // superexponentially and the remainder is negligible.
        if lf > 0.5 * a2v && weight < 1e-18 {
            break;
        }
    }
    let a1 = 1.0 - sum1;

    // Second block: the compensating series of the upper-tail Marcum term.
    // Every term is assembled in the log domain with its exponential
    // prefactor folded in, because the raw inner powers z^(k+1/2) reach
    // e^(+1300) on wide sweep grids while the prefactor e^(-x) cancels them.
    let c2inv = gb1 * gamma / (2.0 * gb2 * v2 + gb1 * gamma);
    let ln_pref = 0.5 * c2inv.ln() - x - 0.5 * a2v;
    // ln of the erfc term times e^(+z) (which each series term carries):
    // erfc(sqrt(z)) e^z = erfcx(sqrt(z)); erfc(z) e^z = erfcx(z) e^(z - z²).
    let ln_erfc_factor = match mode {
        ErfcArgMode::SqrtCorrected => erfcx(z.sqrt()).ln(),
        ErfcArgMode::AsPrinted => erfcx(z).ln() + z - z * z,
    };
    // ln_pref already carries e^(-x); together with the e^(+z) above the net
    // exponent is 1/gb1 - a2v/2, which never overflows.
    let ln_z = z.ln();
    let ln_arg = if a2v > 0.0 {
        (0.5 * a2v * c2inv).ln()
    } else {
        f64::NEG_INFINITY
    };
    let mut a2 = 0.0;
    for l in 0..=l_max {
        let lf = f64::from(l);
        let lc = if l == 0 {
            0.0
        } else {
            lf * ln_arg - ln_gamma(lf + 1.0)
        };
        a2 += (lc + ln_pref + ln_erfc_factor).exp();
        // Inner finite sum over k = 0..l-1 with Pochhammer (1/2 - l)_(l-k-1).
        // Iterate k downward so the rising-factorial product grows one factor
        // at a time: m = l - k - 1 runs 0..=l-1.
        let mut ln_poch = 0.0f64;
        let mut poch_sign = 1i8;
        let base = 0.5 - lf;
        for m in 0..l {
            let k = l - 1 - m;
            if poch_sign != 0 {
                let kf = f64::from(k);
                let sgn = f64::from(poch_sign) * if (l + k - 1) % 2 == 0 { 1.0 } else { -1.0 };
                let ln_term = lc + ln_poch + (kf + 0.5) * ln_z - ln_gamma(lf + 0.5) + ln_pref;
                a2 += sgn * ln_term.exp();
            }
            // Extend the Pochhammer product for the next (smaller) k.
            let factor = base + f64::from(m);
            if factor == 0.0 {
                poch_sign = 0;
            } else {
                ln_poch += factor.abs().ln();
                if factor < 0.0 {
                    poch_sign = -poch_sign;
                }
            }
        }
    }
    Ok(a1 + a2)
}

// ---------------------------------------------------------------------------
// Average BER from a CDF
// ---------------------------------------------------------------------------

/// Averages the conditional error probability over an SNR distribution using
/// only its CDF:
///
/// `P_e = q^p / (2 Γ(p)) ∫₀^∞ e^(-qγ) γ^(p-1) F(γ) dγ`
///
/// The integral is taken after the substitution `γ = u²` (which removes the
/// `p = 1/2` endpoint singularity) and truncated where `e^(-qγ)` underflows;
/// breakpoints seed the region where the kernel still carries 1e-18 of its
/// peak so the adaptive rule resolves both the kernel and the CDF's rise.
pub fn ber_from_cdf(cdf: &CdfFunction, p: f64, q: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0 && q.is_finite() && q > 0.0) {
        return Err(Error::domain(format!(
            "BER kernel needs p > 0 and q > 0, got p = {p}, q = {q}"
        )));
    }
    // e^(-q u^2) reaches 1e-18 here; everything beyond is tail insurance.
    let u_knee = (18.0 * std::f64::consts::LN_10 / q).sqrt();
    // ... and underflows to zero exactly here.
    let u_max = (745.2 / q).sqrt();
    let first_error: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        match cdf.eval(u * u) {
            Ok(f) => 2.0 * (-q * u * u).exp() * u.powf(2.0 * p - 1.0) * f,
            Err(e) => {
                first_error.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let mut breaks: Vec<f64> = [0.0, 0.125, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|frac| frac * u_knee)
        .collect();
    for candidate in [1.5 * u_knee, 2.0 * u_knee, 3.0 * u_knee, u_max] {
        if candidate > *breaks.last().unwrap() && candidate < u_max {
            breaks.push(candidate);
        }
    }
    if *breaks.last().unwrap() < u_max {
        breaks.push(u_max);
    }
    let opt = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-8,
        max_bisections: 4000,
    };
    let quad = integrate_segmented(integrand, &breaks, &opt)?;
    if let Some(e) = first_error.into_inner() {
        return Err(e);
    }
    let scale = (p * q.ln() - ln_gamma(p)).exp() / 2.0;
    Ok(scale * quad.value)
}

// ---------------------------------------------------------------------------
// User 1 average BER
// ---------------------------------------------------------------------------

/// One evaluated closed-form BER with its constituent parts.
#[derive(Debug, Clone)]
pub struct BerBreakdown {
    /// The final BER, clamped into `[0, 1/2]`.
    pub total: f64,
    /// The unclamped combination of the parts.
    pub raw_total: f64,
    /// The labelled integral blocks the total combines.
    pub parts: Vec<(&'static str, f64)>,
    /// Which reading of the closed forms produced this value.
    pub mode: ClosedFormMode,
    /// True when the configuration collapsed the closed form and the value
    /// came from the degenerate fallback instead.
    pub degenerate: bool,
}

/// Average BER of user 1 when the RIS is absent: the direct Rayleigh link
/// under the Gaussian-noise error kernel has the classical closed form
/// `(1/2)(1 - √(γ̄₁/(1+γ̄₁)))`.
pub fn ber_u1_direct_only(cfg: &SystemConfig) -> f64 {
    let gb1 = link_budget(cfg).gamma_bar1;
    0.5 * (1.0 - (gb1 / (1.0 + gb1)).sqrt())
}

/// Closed-form average BER of user 1, in the published (as-printed) reading.
///
/// At the degenerate angle `w_m = π/2` the in-phase rail vanishes and the
/// closed form does not exist; the result then redirects to
/// [`ber_u1_direct_only`] with [`BerBreakdown::degenerate`] set (`consts` may
/// be `None` only in that case, since the constants themselves are
/// unconstructible there).
pub fn ber_u1_closed(
    cfg: &SystemConfig,
    m1: GaussianMoments,
    consts: Option<&DerivedConstants>,
) -> Result<BerBreakdown> {
    ber_u1_closed_with_mode(cfg, m1, consts, ClosedFormMode::AsPrinted)
}

/// [`ber_u1_closed`] with an explicit closed-form reading.
pub fn ber_u1_closed_with_mode(
    cfg: &SystemConfig,
    m1: GaussianMoments,
    consts: Option<&DerivedConstants>,
    mode: ClosedFormMode,
) -> Result<BerBreakdown> {
    if m1.is_degenerate() {
        let direct = ber_u1_direct_only(cfg);
        return Ok(BerBreakdown {
            total: direct,
            raw_total: direct,
            parts: vec![("direct_only", direct)],
            mode,
            degenerate: true,
        });
    }
    let consts = consts
        .ok_or_else(|| Error::domain("non-degenerate configurations need the derived constants"))?;
    let (b_tail, b_lower, b_upper) = match mode {
        ClosedFormMode::AsPrinted => u1_blocks_as_printed(m1, consts),
        ClosedFormMode::Corrected => u1_blocks_corrected(m1, consts),
    };
    let raw_total = (b_tail - b_lower - b_upper) / (2.0 * SQRT_PI);
    Ok(BerBreakdown {
        total: raw_total.clamp(0.0, 0.5),
        raw_total,
        parts: vec![
            ("tail_mass", b_tail),
            ("lower_square", b_lower),
            ("upper_square", b_upper),
        ],
        mode,
        degenerate: false,
    })
}

/// The three integral blocks of user 1's closed form, published reading.
///
/// The tail-mass block keeps the `tᵢ²` inside its first square root and the
/// two completed-square branches keep the bare `√c7` inside the table-term
/// erf — both exactly as printed. See `DEVIATIONS.md` for why the corrected
/// reading changes them.
fn u1_blocks_as_printed(m1: GaussianMoments, k: &DerivedConstants) -> (f64, f64, f64) {
    u1_blocks(m1, k, false)
}

/// The three integral blocks with the two algebra fixes applied: `tᵢ² → tᵢ`
/// in the tail-mass block's completed square and the argument-scale fix plus
/// sign guard in the table terms of the completed-square branches.
fn u1_blocks_corrected(m1: GaussianMoments, k: &DerivedConstants) -> (f64, f64, f64) {
    u1_blocks(m1, k, true)
}

fn u1_blocks(m1: GaussianMoments, k: &DerivedConstants, corrected: bool) -> (f64, f64, f64) {
    let (mu1, v1) = (m1.mu, m1.sigma2);
    let (c1, c2, c3, c4, c7) = (k.c1, k.c2, k.c3, k.c4, k.c7);
    let s = &k.erf_table.s;
    let t = &k.erf_table.t;
    let erf = crate::specfun::erf_raw;
    let erfc = crate::specfun::erfc_raw;

    // ---- tail-mass block: the combined link on its own
    let mut b_tail = SQRT_PI / 2.0 * (2.0 * erfc(mu1 / c2) - erfc(mu1 / (2.0 * v1).sqrt()));
    for i in 0..4 {
        let (si, ti) = (s[i], t[i]);
        // As printed the completed square carries ti^2 here; the correct
        // completion of the square carries ti (first power).
        let a_coef = if corrected { ti } else { ti * ti };
        let e2 = ti * c2 * mu1 / (4.0 * v1 * v1 + 2.0 * ti * c2 * c2 * v1).sqrt();
        let e1 = (mu1 * mu1 / (c2 * c2) + a_coef * mu1 * mu1 / (2.0 * v1)).sqrt() - e2;
        let ex = ti * ti * c2 * c2 * mu1 * mu1 / (4.0 * v1 * v1 + 2.0 * ti * c2 * c2 * v1)
            - ti * mu1 * mu1 / (2.0 * v1);
        b_tail += si / 2.0
            * (2.0 * std::f64::consts::PI * v1 / (2.0 * v1 + ti * c2 * c2)).sqrt()
            * ex.exp()
            * (2.0 * erf(e1) - erfc(e2));
    }

    // Shared leading factors of the two completed-square branches.
    let exl = -mu1 * mu1 * c1 * c1 / (2.0 * c2 * c2 * c3 * c3 + c1 * c1 * c2 * c2);
    let arg =
        c1 * c1 * mu1 / (4.0 * c2 * c2 * c3.powi(4) + 2.0 * c1 * c1 * c2 * c2 * c3 * c3).sqrt();

    // ---- lower completed-square branch
    let mut b_lower = 0.5
        * (std::f64::consts::PI / (2.0 * c3 * c3 + c1 * c1)).sqrt()
        * exl.exp()
        * (1.0 + erf(arg));
    for i in 0..4 {
        let (si, ti) = (s[i], t[i]);
        let c5 = k.c5(i);
        let ex = c5
            - mu1 * mu1 * c1 * c1 / (2.0 * c2 * c2 * c3 * c3)
            - mu1 * mu1 * ti / (4.0 * c3 * c3 * v1);
        // The printed form always adds erf(sqrt(c5)); the square it came from
        // flips sign when the table's decay rate dominates the variance mix.
        let sgn = if corrected { k.c5_sign(i) } else { 1.0 };
        b_lower -= si / 2f64.sqrt()
            * (std::f64::consts::PI * v1
                / (4.0 * c3 * c3 * v1 + 2.0 * c1 * c1 * v1 + ti * c4 * c4))
                .sqrt()
            * ex.exp()
            * (1.0 + sgn * erf(c5.sqrt()));
    }

    // ---- upper completed-square branch
    let mut b_upper = 0.5
        * (std::f64::consts::PI / (2.0 * c3 * c3 + c1 * c1)).sqrt()
        * exl.exp()
        * (erfc(arg) - 2.0 * erf(c7.sqrt() - arg));
    for i in 0..4 {
        let (si, ti) = (s[i], t[i]);
        let c6 = k.c6(i);
        let ex = c6
            - c1 * c1 * mu1 * mu1 / (2.0 * c2 * c2 * c3 * c3)
            - ti * mu1 * mu1 / (4.0 * c3 * c3 * v1);
        // As printed the inner erf reuses the bare sqrt(c7); the change of
        // variables that produced this term rescales it by the table's decay.
        let sc7 = if corrected {
            (c7 + ti * mu1 * mu1 / (4.0 * c3 * c3 * v1)).sqrt()
        } else {
            c7.sqrt()
        };
        b_upper += si / 2f64.sqrt()
            * (std::f64::consts::PI * v1
                / (4.0 * c3 * c3 * v1 + 2.0 * c1 * c1 * v1 + ti * c2 * c2))
                .sqrt()
            * ex.exp()
            * (2.0 * erf(sc7 - c6.sqrt()) - erfc(c6.sqrt()));
    }

    (b_tail, b_lower, b_upper)
}

// ---------------------------------------------------------------------------
// User 2 average BER
// ---------------------------------------------------------------------------

/// Closed-form average BER of user 2 under ideal first-stage decoding, in
/// the published reading (whose inner sum over `k` starts at 1; the corrected
/// reading starts it at 0 — see `DEVIATIONS.md`).
///
/// At the degenerate angle `w_m = 0` user 2's signal dimension does not
/// exist and the error rate is exactly `1/2`, flagged via
/// [`BerBreakdown::degenerate`]. **Convergence warning:** the sums inherit
/// the Poisson peak at `l ≈ μ₂²/(2σ₂²)` from the underlying series, so
/// `cfg.series_l` must comfortably exceed that peak (about 58 at the default
/// configuration) for the value to be meaningful; see
/// [`recommended_series_l`].
pub fn ber_u2_ideal_closed(
    cfg: &SystemConfig,
    m2: GaussianMoments,
    consts: Option<&DerivedConstants>,
) -> Result<BerBreakdown> {
    ber_u2_ideal_closed_with_mode(cfg, m2, consts, ClosedFormMode::AsPrinted)
}

/// [`ber_u2_ideal_closed`] with an explicit closed-form reading.
pub fn ber_u2_ideal_closed_with_mode(
    cfg: &SystemConfig,
    m2: GaussianMoments,
    consts: Option<&DerivedConstants>,
    mode: ClosedFormMode,
) -> Result<BerBreakdown> {
    if m2.is_degenerate() {
        return Ok(BerBreakdown {
            total: 0.5,
            raw_total: 0.5,
            parts: vec![("no_quadrature_rail", 0.5)],
            mode,
            degenerate: true,
        });
    }
    let budget = link_budget(cfg);
    let (gb1, gb2) = (budget.gamma_bar1, budget.gamma_bar2);
    let (mu2, v2) = (m2.mu, m2.sigma2);
    // Only the erf-approximation table is needed from the derived constants;
    // callers without them (e.g. at user 1's degenerate angle, where they
    // cannot be built) fall back to the standard table.
    let default_table = crate::specfun::ErfApproxTable::default();
    let table = consts.map(|c| &c.erf_table).unwrap_or(&default_table);
    let a2v = mu2 * mu2 / v2;
    let l_max = cfg.series_l;
    // Contributions decay once l clears the Poisson peak; stop early there.
    let peak = 0.5 * a2v;

    // ---- ideal-link block: error mass with the direct-path interference off
    //
    // In exact arithmetic the hypergeometric series below equals the
    // folded-Gaussian expectation `2√π·E[(1/2)erfc(√γ̄₂|R₂|)]`.  In doubles it
    // is `√π` minus a sum that approaches `√π`, so once the block shrinks
    // below ~1e-13 the difference is pure cancellation noise — large enough
    // to pollute the total at high SNR.  The unfolded expectation
    // `√π·erfc(√γ̄₂μ₂/√(1+2γ̄₂σ₂²))` bounds the block from above (restoring
    // the sign of the negative Gaussian tail can only remove error mass, at
    // most `Φ(−μ₂/σ₂)` of it), so the series value is projected onto the
    // enclosure `[0, bound]`: wherever the block is large the two routes
    // agree to machine precision and the projection is a no-op; wherever
    // they disagree the bound caps the noise below anything that matters
    // against the interference blocks.
    let x21 = 2.0 * gb2 * v2 / (1.0 + 2.0 * gb2 * v2);
    let mut ideal_sum = 0.0;
    for l in 0..=l_max {
        let lf = f64::from(l);
        let lnc = lf * a2v.ln()
            - (lf - 1.0) * std::f64::consts::LN_2
            - ln_gamma(lf + 0.5)
            - 0.5 * a2v
            - (1.0 + lf) * (1.0 + 2.0 * gb2 * v2).ln()
            + 0.5 * (2.0 * gb2 * v2).ln();
        let term = (lnc + gauss_2f1_ln(1.0, lf + 1.0, 1.5, x21)?).exp();
        ideal_sum += term;
        if lf > peak && term < 1e-15 * ideal_sum {
            break;
        }
    }
    let ideal_bound =
        SQRT_PI * crate::specfun::erfc_raw(gb2.sqrt() * mu2 / (1.0 + 2.0 * gb2 * v2).sqrt());
    let b_ideal = (SQRT_PI - ideal_sum).clamp(0.0, ideal_bound);

    // ---- interference block, erf-table part
    let ln_outer = 1.0 / gb1 - 0.5 * a2v;
    let mut b_erf = 0.0;
    for l in 0..=l_max {
        let lf = f64::from(l);
        let lw = lf * (0.5 * a2v).ln();
        let mut shell = 0.0;
        for i in 0..4 {
            let (si, ti) = (table.s[i], table.t[i]);
            let zeta = (2.0 * gb2 * v2 + ti) / gb1;
            let ln_w = whittaker_w_ln(-lf - 0.25, -0.25, zeta)?;
            let ln_t = si.ln() + lw
                - 0.75 * (1.0 + ti / (2.0 * gb2 * v2)).ln()
                - 0.25 * (2.0 * gb2 * v2 / gb1).ln()
                + gb2 * v2 / gb1
                - ti / (2.0 * gb1)
                + ln_w
                + ln_outer;
            shell += ln_t.exp();
        }
        b_erf += shell;
        if lf > peak && shell < 1e-15 * b_erf {
            break;
        }
    }

    // ---- interference block, polynomial part
    let zeta_poly = (2.0 * gb2 * v2 + 1.0) / gb1;
    let ln_rate = (2.0 / gb1 + 1.0 / (gb2 * gb1 * v2)).ln();
    let mut b_poly = 0.0;
    for l in 0..=l_max {
        let lf = f64::from(l);
        // Published reading: k starts at 1 (the whole block is empty until
        // l = 2); corrected reading: k starts at 0.
        let k_start = match mode {
            ClosedFormMode::AsPrinted => 1,
            ClosedFormMode::Corrected => 0,
        };
        let mut shell = 0.0f64;
        for k in k_start..l {
            let kf = f64::from(k);
            let (ln_poch, poch_sign) = crate::specfun::ln_abs_pochhammer(0.5 - lf, l - k - 1);
            if poch_sign == 0 {
                continue;
            }
            let sgn = f64::from(poch_sign) * if (k + l - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let ln_w = whittaker_w_ln((kf - 2.0 * lf) / 2.0, (-kf - 1.0) / 2.0, zeta_poly)?;
            let ln_t = lf * (0.5 * a2v).ln() + 0.5 * kf * (gb2 * v2).ln() + ln_poch
                - ln_gamma(lf + 0.5)
                - (kf + 0.5) * (gb2 * gb1 * v2).ln()
                - 0.5 * (0.5 * gb1).ln()
                + gb2 * v2 / gb1
                - 1.0 / (2.0 * gb1)
                + (-0.5 * kf - 1.0) * ln_rate
                + ln_w
                + ln_outer;
            shell += sgn * ln_t.exp();
        }
        b_poly += shell;
        if lf > peak && shell.abs() < 1e-15 * b_poly.abs().max(1e-300) {
            break;
        }
    }

    let raw_total = (b_ideal + b_erf + b_poly) / (2.0 * SQRT_PI);
    Ok(BerBreakdown {
        total: raw_total.clamp(0.0, 0.5),
        raw_total,
        parts: vec![
            ("ideal_link", b_ideal),
            ("interference_erf", b_erf),
            ("interference_poly", b_poly),
        ],
        mode,
        degenerate: false,
    })
}

/// Truncation order at which the Poisson-weighted series for user 2 is
/// actually converged: the weights peak at `l ≈ μ₂²/(2σ₂²)`, and the sum
/// needs to clear that peak by several standard deviations (the peak sits
/// near 58 at the default configuration, well above the truncation the
/// reference derivation quotes — see `DEVIATIONS.md`).
pub fn recommended_series_l(m2: &GaussianMoments) -> u32 {
    if m2.sigma2 <= 0.0 {
        return 0;
    }
    let peak = 0.5 * m2.mu * m2.mu / m2.sigma2;
    (peak + 8.0 * peak.sqrt() + 12.0).ceil() as u32
}

/// Combines user 2's ideal-decoding BER with user 1's BER into the effective
/// two-stage error rate: an error at either stage (but not both) flips the
/// decoded bit, so `P = P₂(1 - P₁) + P₁(1 - P₂)`.
pub fn ber_u2_effective(pe1: f64, pe2_ideal: f64) -> Result<f64> {
    for (name, value) in [("pe1", pe1), ("pe2_ideal", pe2_ideal)] {
        if !(0.0..=0.5).contains(&value) {
            return Err(Error::domain(format!(
                "{name} must lie in [0, 1/2], got {value}"
            )));
        }
    }
    Ok(pe2_ideal * (1.0 - pe1) + pe1 * (1.0 - pe2_ideal))
}

/// Convenience wrapper: evaluates user 1's closed-form BER directly from a
/// configuration, handling the degenerate redirect internally.
pub fn ber_u1_closed_from_config(cfg: &SystemConfig, mode: ClosedFormMode) -> Result<BerBreakdown> {
    let m1 = crate::model::moments_r1(cfg);
    if m1.is_degenerate() {
        return ber_u1_closed_with_mode(cfg, m1, None, mode);
    }
    let consts = derived_constants(cfg, &m1)?;
    ber_u1_closed_with_mode(cfg, m1, Some(&consts), mode)
}

/// Convenience wrapper: evaluates user 2's ideal closed-form BER directly
/// from a configuration.
pub fn ber_u2_ideal_closed_from_config(
    cfg: &SystemConfig,
    mode: ClosedFormMode,
) -> Result<BerBreakdown> {
    let m2 = crate::model::moments_r2(cfg);
    ber_u2_ideal_closed_with_mode(cfg, m2, None, mode)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{moments_r1, moments_r2};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn reference_setup() -> (
        SystemConfig,
        GaussianMoments,
        GaussianMoments,
        DerivedConstants,
    ) {
        let cfg = SystemConfig::default();
        let m1 = moments_r1(&cfg);
        let m2 = moments_r2(&cfg);
        let consts = derived_constants(&cfg, &m1).unwrap();
        (cfg, m1, m2, consts)
    }

    // -- user 1 CDF ----------------------------------------------------------

    #[test]
    fn closed_cdf_matches_frozen_values() {
        let (cfg, m1, _, consts) = reference_setup();
        let points = [
            (1.0, 6.6324900556085965e-24),
            (20.0, 4.1522135508476293e-10),
            (100.0, 0.41404536331134834),
        ];
        for (g, expected) in points {
            let got = cdf_gamma1_closed(g, &cfg, m1, &consts).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-9);
        }
        // Deep saturation.
        let sat = cdf_gamma1_closed(2000.0, &cfg, m1, &consts).unwrap();
        assert_abs_diff_eq!(sat, 1.0, epsilon = 1e-9);
        assert_eq!(cdf_gamma1_closed(0.0, &cfg, m1, &consts).unwrap(), 0.0);
    }

    #[test]
    fn closed_cdf_agrees_with_the_defining_integral() {
        let (cfg, m1, _, consts) = reference_setup();
        let mut worst: f64 = 0.0;
        for i in 0..=40 {
            let g = 2000.0 * f64::from(i) / 40.0 + 1e-6;
            let closed = cdf_gamma1_closed(g, &cfg, m1, &consts).unwrap();
            let quad = cdf_gamma1_quadrature(g, &cfg, m1).unwrap();
            worst = worst.max((closed - quad).abs());
        }
        assert!(worst <= 1e-6, "sup gap {worst:e} exceeds 1e-6");
    }

    #[test]
    fn cdf_arguments_are_validated() {
        let (cfg, m1, _, consts) = reference_setup();
        assert!(cdf_gamma1_closed(-1.0, &cfg, m1, &consts).is_err());
        assert!(cdf_gamma1_quadrature(f64::NAN, &cfg, m1).is_err());
        assert!(cdf_gamma2_exact(-0.5, &cfg, moments_r2(&cfg)).is_err());
    }

    // -- user 2 CDF ----------------------------------------------------------

    #[test]
    fn exact_cdf_matches_frozen_values() {
        let (cfg, _, m2, _) = reference_setup();
        let points = [
            (0.01, 1.932849863683424e-26),
            (0.1, 2.1011515687788853e-24),
            (1.0, 1.4435664457439822e-15),
            (10.0, 0.0013007159304584978),
        ];
        for (g, expected) in points {
            let got = cdf_gamma2_exact(g, &cfg, m2).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-6);
        }
        assert_eq!(cdf_gamma2_exact(0.0, &cfg, m2).unwrap(), 0.0);
    }

    #[test]
    fn series_cdf_converges_once_past_the_poisson_peak() {
        let (cfg, _, m2, _) = reference_setup();
        let mut worst: f64 = 0.0;
        for i in 0..=80 {
            let g = 2000.0 * f64::from(i) / 80.0 + 1e-6;
            let series = cdf_gamma2_series(g, &cfg, m2, 100).unwrap();
            let exact = cdf_gamma2_exact(g, &cfg, m2).unwrap();
            worst = worst.max((series - exact).abs());
        }
        assert!(worst <= 1e-4, "L=100 sup gap {worst:e} exceeds 1e-4");
    }

    #[test]
    fn series_cdf_is_unconverged_at_the_default_truncation() {
        // At the reference configuration the Poisson peak sits at ~57.7, so
        // L = 30 stops before the mass: the truncated series is useless
        // there. This is the documented convergence cliff, asserted so a
        // future "fix" cannot silently change the semantics.
        let (cfg, _, m2, _) = reference_setup();
        // In the deep lower tail the truncated series still sits near 1
        // because every Poisson weight below the peak is negligible, leaving
        // the leading 1 uncompensated.
        let series = cdf_gamma2_series(10.0, &cfg, m2, 30).unwrap();
        let exact = cdf_gamma2_exact(10.0, &cfg, m2).unwrap();
        assert!(
            (series - exact).abs() > 0.5,
            "expected a large truncation gap, got series = {series}, exact = {exact}"
        );
    }

    #[test]
    fn series_cdf_tracks_exact_at_late_truncation() {
        let (cfg, _, m2, _) = reference_setup();
        let series = cdf_gamma2_series(10.0, &cfg, m2, 160).unwrap();
        let exact = cdf_gamma2_exact(10.0, &cfg, m2).unwrap();
        assert_abs_diff_eq!(series, exact, epsilon = 5e-11);
    }

    #[test]
    fn printed_erfc_argument_is_measurably_wrong() {
        // A small array keeps the Poisson peak (μ₂²/(2σ₂²) ≈ 9.2) well below
        // L = 30, so the series is fully converged and any residual gap is
        // attributable to the argument convention alone.
        let cfg = SystemConfig {
            n_elements: 8,
            w_m: std::f64::consts::PI / 16.0,
            ..SystemConfig::default()
        };
        let m2 = moments_r2(&cfg);
        let mut gap_sqrt: f64 = 0.0;
        let mut gap_printed: f64 = 0.0;
        for i in 1..=40 {
            let g = 2.0 * f64::from(i) / 40.0;
            let exact = cdf_gamma2_exact(g, &cfg, m2).unwrap();
            let sqrt_mode = cdf_gamma2_series(g, &cfg, m2, 30).unwrap();
            let printed =
                cdf_gamma2_series_with_mode(g, &cfg, m2, 30, ErfcArgMode::AsPrinted).unwrap();
            gap_sqrt = gap_sqrt.max((sqrt_mode - exact).abs());
            gap_printed = gap_printed.max((printed - exact).abs());
        }
        assert!(gap_sqrt <= 1e-6, "sqrt-argument gap {gap_sqrt:e}");
        assert!(
            gap_printed >= 5e-4,
            "published argument should visibly diverge, gap {gap_printed:e}"
        );
    }

    // -- BER kernel ----------------------------------------------------------

    #[test]
    fn ber_of_the_sure_loss_cdf_is_one_half() {
        let cdf = CdfFunction::new(Provenance::ClosedForm, |_| Ok(1.0));
        let ber = ber_from_cdf(&cdf, 0.5, 1.0).unwrap();
        assert_relative_eq!(ber, 0.5, max_relative = 1e-9);
    }

    #[test]
    fn ber_of_a_unit_step_cdf_matches_the_tail_formula() {
        // F = 1 for gamma >= 1: P_e = erfc(1)/2 under the (1/2, 1) kernel.
        let cdf = CdfFunction::new(Provenance::ClosedForm, |g| {
            Ok(if g >= 1.0 { 1.0 } else { 0.0 })
        });
        let ber = ber_from_cdf(&cdf, 0.5, 1.0).unwrap();
        assert_relative_eq!(ber, 0.078649603525142581, max_relative = 1e-8);
    }

    #[test]
    fn ber_of_an_exponential_cdf_has_a_closed_form() {
        // F(γ) = 1 - e^(-γ) under kernel p = 1, q = 2: P_e = 1/(2(q+1)) = 1/6.
        let cdf = CdfFunction::new(Provenance::ClosedForm, |g: f64| Ok(-(-g).exp_m1()));
        let ber = ber_from_cdf(&cdf, 1.0, 2.0).unwrap();
        assert_relative_eq!(ber, 1.0 / 6.0, max_relative = 1e-9);
    }

    #[test]
    fn ber_kernel_rejects_bad_parameters() {
        let cdf = CdfFunction::new(Provenance::ClosedForm, |_| Ok(0.0));
        assert!(ber_from_cdf(&cdf, 0.0, 1.0).is_err());
        assert!(ber_from_cdf(&cdf, 0.5, -1.0).is_err());
    }

    #[test]
    fn ber_kernel_propagates_cdf_errors() {
        let cdf = CdfFunction::new(Provenance::ClosedForm, |_| {
            Err(Error::domain("deliberate failure"))
        });
        let err = ber_from_cdf(&cdf, 0.5, 1.0).unwrap_err();
        assert!(err.to_string().contains("deliberate failure"));
    }

    // -- oracle BERs ---------------------------------------------------------

    #[test]
    fn quadrature_oracle_bers_match_frozen_values() {
        let (cfg, m1, m2, _) = reference_setup();
        let u1 = ber_from_cdf(&CdfFunction::gamma1_quadrature(&cfg, m1), 0.5, 1.0).unwrap();
        assert_relative_eq!(u1, 1.2311820853717647e-18, max_relative = 1e-3);
        let u2 = ber_from_cdf(&CdfFunction::gamma2_exact(&cfg, m2), 0.5, 1.0).unwrap();
        assert_relative_eq!(u2, 4.7764492474317494e-08, max_relative = 1e-5);
    }

    #[test]
    fn direct_only_matches_the_rayleigh_closed_form() {
        let cfg = SystemConfig::default();
        assert_relative_eq!(
            ber_u1_direct_only(&cfg),
            0.14644660940672621,
            max_relative = 1e-12
        );
        let strong = SystemConfig {
            avg_snr_db: 40.0,
            ..cfg
        };
        assert_relative_eq!(
            ber_u1_direct_only(&strong),
            0.0024814048950054235,
            max_relative = 1e-12
        );
    }

    // -- user 1 closed form --------------------------------------------------

    #[test]
    fn u1_closed_matches_frozen_values_in_both_modes() {
        let cfg = SystemConfig {
            avg_snr_db: 10.0,
            w_m: std::f64::consts::FRAC_PI_4,
            ..SystemConfig::default()
        };
        let m1 = moments_r1(&cfg);
        let consts = derived_constants(&cfg, &m1).unwrap();
        let printed = ber_u1_closed(&cfg, m1, Some(&consts)).unwrap();
        assert_relative_eq!(
            printed.raw_total,
            7.5417172801419386e-05,
            max_relative = 1e-9
        );
        let corrected =
            ber_u1_closed_with_mode(&cfg, m1, Some(&consts), ClosedFormMode::Corrected).unwrap();
        assert_relative_eq!(
            corrected.raw_total,
            1.3544080152859018e-05,
            max_relative = 1e-9
        );
        // The corrected reading lands within 1% of the quadrature oracle at
        // this operating point; the printed reading is 5.5x off.
        let oracle = ber_from_cdf(&CdfFunction::gamma1_quadrature(&cfg, m1), 0.5, 1.0).unwrap();
        assert_relative_eq!(oracle, 1.3625570201106442e-05, max_relative = 1e-4);
        assert!((corrected.total / oracle - 1.0).abs() < 0.05);
        assert!((printed.total / oracle - 1.0).abs() > 1.0);
    }

    #[test]
    fn u1_closed_recombines_its_parts() {
        let (cfg, m1, _, consts) = reference_setup();
        let b = ber_u1_closed(&cfg, m1, Some(&consts)).unwrap();
        assert_relative_eq!(b.raw_total, 5.3612854276581203e-18, max_relative = 1e-9);
        let recombined = (b.parts[0].1 - b.parts[1].1 - b.parts[2].1) / (2.0 * super::SQRT_PI);
        assert_abs_diff_eq!(b.raw_total, recombined, epsilon = 1e-12);
        assert!(!b.degenerate);
    }

    #[test]
    fn u1_closed_redirects_at_the_degenerate_angle() {
        let cfg = SystemConfig {
            w_m: std::f64::consts::FRAC_PI_2,
            ..SystemConfig::default()
        };
        let m1 = moments_r1(&cfg);
        let b = ber_u1_closed(&cfg, m1, None).unwrap();
        assert!(b.degenerate);
        assert_abs_diff_eq!(b.total, ber_u1_direct_only(&cfg), epsilon = 1e-15);
        // Missing constants anywhere else is a caller error.
        let ok_cfg = SystemConfig::default();
        assert!(ber_u1_closed(&ok_cfg, moments_r1(&ok_cfg), None).is_err());
    }

    // -- user 2 closed form --------------------------------------------------

    #[test]
    fn u2_closed_matches_frozen_values_in_both_modes() {
        let cfg = SystemConfig {
            series_l: 140,
            ..SystemConfig::default()
        };
        let m2 = moments_r2(&cfg);
        // The frozen references come from a 25-digit evaluation; the f64
        // port accumulates ~3e-5 relative error through the signed
        // cancellations of the third block, far inside the 5% the closed
        // form is held to.
        let corrected =
            ber_u2_ideal_closed_with_mode(&cfg, m2, None, ClosedFormMode::Corrected).unwrap();
        assert_relative_eq!(
            corrected.raw_total,
            4.7764102452268037e-08,
            max_relative = 2e-4
        );
        let printed = ber_u2_ideal_closed(&cfg, m2, None).unwrap();
        assert_relative_eq!(
            printed.raw_total,
            4.7342662130530107e-08,
            max_relative = 2e-4
        );
        // Within 5% of the frozen quadrature oracle in the corrected mode.
        assert!((corrected.total / 4.7764492474317494e-08f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn u2_closed_is_degenerate_without_a_quadrature_rail() {
        let cfg = SystemConfig {
            w_m: 0.0,
            ..SystemConfig::default()
        };
        let m2 = moments_r2(&cfg);
        let b = ber_u2_ideal_closed(&cfg, m2, None).unwrap();
        assert!(b.degenerate);
        assert_eq!(b.total, 0.5);
    }

    #[test]
    fn u2_effective_combines_and_validates() {
        assert_abs_diff_eq!(ber_u2_effective(0.1, 0.2).unwrap(), 0.26, epsilon = 1e-15);
        assert_abs_diff_eq!(ber_u2_effective(0.0, 0.3).unwrap(), 0.3, epsilon = 1e-15);
        assert!(ber_u2_effective(0.6, 0.1).is_err());
        assert!(ber_u2_effective(0.1, -0.01).is_err());
    }

    #[test]
    fn recommended_truncation_clears_the_poisson_peak() {
        let cfg = SystemConfig::default();
        let m2 = moments_r2(&cfg);
        let peak = 0.5 * m2.mu * m2.mu / m2.sigma2;
        let rec = recommended_series_l(&m2);
        assert!(
            (125..=140).contains(&rec),
            "default-config recommendation {rec} outside the expected band"
        );
        assert!(
            f64::from(rec) > peak + 40.0,
            "recommendation {rec} does not clear the weight peak {peak}"
        );
        let degenerate = GaussianMoments {
            mu: 1.0,
            sigma2: 0.0,
        };
        assert_eq!(recommended_series_l(&degenerate), 0);
    }

    // -- CdfFunction plumbing ------------------------------------------------

    #[test]
    fn cdf_function_clamps_and_counts() {
        let cdf = CdfFunction::new(Provenance::ClosedForm, |g| {
            Ok(if g < 1.0 { -1e-3 } else { 1.0 + 1e-9 })
        });
        assert_eq!(cdf.eval(0.5).unwrap(), 0.0);
        assert_eq!(cdf.eval(2.0).unwrap(), 1.0);
        assert_eq!(cdf.clamp_events(), 2);
        assert_eq!(cdf.provenance(), Provenance::ClosedForm);
    }

    #[test]
    fn empirical_cdf_steps_through_its_samples() {
        let cdf = CdfFunction::empirical(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(cdf.provenance(), Provenance::Empirical);
        assert_abs_diff_eq!(cdf.eval(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(cdf.eval(1.0).unwrap(), 1.0 / 3.0);
        assert_abs_diff_eq!(cdf.eval(2.5).unwrap(), 2.0 / 3.0);
        assert_abs_diff_eq!(cdf.eval(10.0).unwrap(), 1.0);
        assert!(CdfFunction::empirical(vec![]).is_err());
    }

    // -- property-based invariants ------------------------------------------

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn closed_cdf_is_monotone(g in 0.0f64..1900.0, dg in 0.001f64..100.0) {
            let (cfg, m1, _, consts) = reference_setup();
            let lo = cdf_gamma1_closed(g, &cfg, m1, &consts).unwrap();
            let hi = cdf_gamma1_closed(g + dg, &cfg, m1, &consts).unwrap();
            prop_assert!(hi >= lo - 1e-12);
        }

        #[test]
        fn exact_u2_cdf_is_monotone_and_bounded(g in 0.0f64..500.0, dg in 0.01f64..50.0) {
            let (cfg, _, m2, _) = reference_setup();
            let lo = cdf_gamma2_exact(g, &cfg, m2).unwrap();
            let hi = cdf_gamma2_exact(g + dg, &cfg, m2).unwrap();
            prop_assert!((0.0..=1.0 + 1e-9).contains(&lo));
            prop_assert!(hi >= lo - 1e-9);
        }

        #[test]
        fn effective_ber_stays_in_range(p1 in 0.0f64..0.5, p2 in 0.0f64..0.5) {
            let eff = ber_u2_effective(p1, p2).unwrap();
            prop_assert!((0.0..=0.5 + 1e-12).contains(&eff));
            // Symmetric in its arguments.
            let swapped = ber_u2_effective(p2, p1).unwrap();
            prop_assert!((eff - swapped).abs() < 1e-15);
        }
    }
}
