//! Monte Carlo engine: channel sampling, SNR draws, semi-analytic error
//! rates, full link simulation, and distribution diagnostics.
//!
//! # Determinism
//!
//! Every public entry point derives its randomness from `cfg.seed` through
//! counter-addressed ChaCha streams: work is split into fixed-size chunks of
//! [`CHUNK`] draws, and chunk `c` of purpose `d` at sweep point `p` always
//! uses stream `d + p·2²⁴ + c` of the seeded generator. Results are therefore
//! bit-identical across runs *and* across thread counts — parallelism only
//! changes which worker computes a chunk, never what the chunk contains — and
//! extending a sample budget leaves the existing prefix unchanged.
//!
//! # Detectors
//!
//! [`simulate_link`] walks the literal receiver chain: per-element phase
//! rotation at the RIS, derotation at the base station, a sign decision on
//! the in-phase rail for user 1, remodulation, and one of two second-stage
//! detectors for user 2. [`DetectorMode::Quadrature`] slices the remodulated
//! quadrature rail directly; [`DetectorMode::ModelFaithful`] draws user 2's
//! conditional error from the interference-limited SNR law that the analytic
//! layer averages, so its error rate is the one the closed forms predict.
//! The quadrature detector sees no direct-path leakage after ideal
//! derotation and is correspondingly optimistic at strong direct links.
//!
//! # Example
//!
//! ```
//! use risvc_core::model::SystemConfig;
//! use risvc_core::montecarlo::{draw_snr_samples, semi_analytic_ber, User};
//!
//! let cfg = SystemConfig { avg_snr_db: 0.0, ..SystemConfig::default() };
//! let snr = draw_snr_samples(&cfg, 4096, User::U1).unwrap();
//! let est = semi_analytic_ber(&snr).unwrap();
//! assert!(est.ber > 0.0 && est.ber < 0.5);
//! assert!(est.stderr < est.ber);
//! ```

use crate::error::{Error, Result};
use crate::model::{link_budget, moments_r1, per_element_skewness, GaussianMoments, SystemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

/// Number of draws (or channel uses) per deterministic work chunk.
pub const CHUNK: u64 = 1 << 14;

// Stream-address layout: purpose domain in the top byte, sweep point in the
// middle, chunk counter in the low 24 bits.
const POINT_STRIDE: u64 = 1 << 24;
const DOMAIN_SNR_U1: u64 = 1 << 56;
const DOMAIN_SNR_U2: u64 = 2 << 56;
const DOMAIN_LINK: u64 = 3 << 56;
const DOMAIN_CONSTELLATION: u64 = 4 << 56;
const DOMAIN_MOMENTS: u64 = 5 << 56;

fn chunk_rng(seed: u64, domain: u64, point: u64, chunk: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(domain + point * POINT_STRIDE + chunk);
    rng
}

// ---------------------------------------------------------------------------
// Elementary fading draws
// ---------------------------------------------------------------------------

/// One Rayleigh envelope with unit second moment (`σ = 1/√2`).
///
/// A Rayleigh envelope of unit power is the square root of a unit-mean
/// exponential (its power), so the draw goes through the ziggurat-backed
/// `Exp1` distribution.
pub fn sample_rayleigh<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let power: f64 = Exp1.sample(rng);
    power.sqrt()
}

/// One Rician envelope with Rician factor `k` and unit second moment:
/// `|ν + σ_r (g₁ + j g₂)|` with `ν² = K/(1+K)` and `2σ_r² = 1/(1+K)`.
pub fn sample_rician<R: Rng + ?Sized>(rng: &mut R, k: f64) -> Result<f64> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::domain(format!(
            "Rician factor must be finite and non-negative, got {k}"
        )));
    }
    let (nu, sr) = rician_params(k);
    Ok(sample_rician_raw(rng, nu, sr))
}

fn rician_params(k: f64) -> (f64, f64) {
    ((k / (1.0 + k)).sqrt(), (0.5 / (1.0 + k)).sqrt())
}

fn sample_rician_raw<R: Rng + ?Sized>(rng: &mut R, nu: f64, sr: f64) -> f64 {
    let g1: f64 = StandardNormal.sample(rng);
    let g2: f64 = StandardNormal.sample(rng);
    ((nu + sr * g1).powi(2) + (sr * g2).powi(2)).sqrt()
}

// ---------------------------------------------------------------------------
// Channel draws
// ---------------------------------------------------------------------------

/// One complete channel realization.
///
/// The draw order is fixed and part of the determinism contract: for each
/// element `i` in turn `αᵢ, θᵢ, βᵢ, ψᵢ`, then the direct link's `ε, η`.
/// All phases are uniform on `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    /// U1→RIS segment envelopes `αᵢ` (Rayleigh).
    pub alpha: Vec<f64>,
    /// U1→RIS segment phases `θᵢ`.
    pub theta: Vec<f64>,
    /// RIS→BS segment envelopes `βᵢ` (Rician).
    pub beta: Vec<f64>,
    /// RIS→BS segment phases `ψᵢ`.
    pub psi: Vec<f64>,
    /// Direct-link envelope `ε` (Rayleigh).
    pub eps: f64,
    /// Direct-link phase `η`.
    pub eta: f64,
}

/// Draws one complete channel realization in the documented order.
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, cfg: &SystemConfig) -> Result<ChannelDraw> {
    cfg.validate()?;
    let n = cfg.n_elements as usize;
    let (nu, sr) = rician_params(cfg.rician_k);
    let mut draw = ChannelDraw {
        alpha: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        beta: Vec::with_capacity(n),
        psi: Vec::with_capacity(n),
        eps: 0.0,
        eta: 0.0,
    };
    for _ in 0..n {
        draw.alpha.push(sample_rayleigh(rng));
        draw.theta.push(rng.gen_range(0.0..TAU));
        draw.beta.push(sample_rician_raw(rng, nu, sr));
        draw.psi.push(rng.gen_range(0.0..TAU));
    }
    draw.eps = sample_rayleigh(rng);
    draw.eta = rng.gen_range(0.0..TAU);
    Ok(draw)
}

/// Consumes the generator exactly like [`sample_channel`] but keeps only the
/// envelope sum `Σ αᵢβᵢ` and the direct link, avoiding per-draw allocation.
fn sample_composite<R: Rng + ?Sized>(rng: &mut R, n: usize, nu: f64, sr: f64) -> (f64, f64, f64) {
    let mut sum_ab = 0.0;
    for _ in 0..n {
        let a = sample_rayleigh(rng);
        let _theta: f64 = rng.gen_range(0.0..TAU);
        let b = sample_rician_raw(rng, nu, sr);
        let _psi: f64 = rng.gen_range(0.0..TAU);
        sum_ab += a * b;
    }
    let eps = sample_rayleigh(rng);
    let eta = rng.gen_range(0.0..TAU);
    (sum_ab, eps, eta)
}

// ---------------------------------------------------------------------------
// Instantaneous SNRs
// ---------------------------------------------------------------------------

/// Which user's post-processing SNR to form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum User {
    /// User 1: the coherent direct + in-phase reflected combination.
    U1,
    /// User 2: the quadrature rail against direct-path interference.
    U2,
}

/// User 1's instantaneous SNR for one channel draw:
/// `γ₁ = (√γ̄₁ ε + √γ̄₂ R₁)²` with `R₁ = cos(w_m) Σ αᵢβᵢ`.
pub fn snr_u1(draw: &ChannelDraw, cfg: &SystemConfig) -> f64 {
    let budget = link_budget(cfg);
    let sum_ab: f64 = draw.alpha.iter().zip(&draw.beta).map(|(a, b)| a * b).sum();
    let r1 = cfg.w_m.cos() * sum_ab;
    let amp = budget.gamma_bar1.sqrt() * draw.eps + budget.gamma_bar2.sqrt() * r1;
    amp * amp
}

/// User 2's instantaneous SNR for one channel draw:
/// `γ₂ = γ̄₂ R₂² / (γ̄₁ ε² + 1)` with `R₂ = sin(w_m) Σ αᵢβᵢ`.
pub fn snr_u2(draw: &ChannelDraw, cfg: &SystemConfig) -> f64 {
    let budget = link_budget(cfg);
    let sum_ab: f64 = draw.alpha.iter().zip(&draw.beta).map(|(a, b)| a * b).sum();
    let r2 = cfg.w_m.sin() * sum_ab;
    budget.gamma_bar2 * r2 * r2 / (budget.gamma_bar1 * draw.eps * draw.eps + 1.0)
}

/// Draws `n` independent instantaneous-SNR samples for one user.
///
/// Equivalent to repeated [`sample_channel`] + [`snr_u1`]/[`snr_u2`] on the
/// same streams, but chunked, allocation-free, and parallel.
pub fn draw_snr_samples(cfg: &SystemConfig, n: u64, user: User) -> Result<Vec<f64>> {
    draw_snr_samples_at_point(cfg, n, user, 0)
}

/// [`draw_snr_samples`] addressed to sweep point `point`, so that every grid
/// point of a parameter sweep gets its own independent, reproducible stream.
pub fn draw_snr_samples_at_point(
    cfg: &SystemConfig,
    n: u64,
    user: User,
    point: u64,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::domain("sample count must be positive"));
    }
    let budget = link_budget(cfg);
    let (gb1, gb2) = (budget.gamma_bar1, budget.gamma_bar2);
    let (nu, sr) = rician_params(cfg.rician_k);
    let n_elem = cfg.n_elements as usize;
    let (cw, sw) = (cfg.w_m.cos(), cfg.w_m.sin());
    let domain = match user {
        User::U1 => DOMAIN_SNR_U1,
        User::U2 => DOMAIN_SNR_U2,
    };
    let n_chunks = n.div_ceil(CHUNK);
    let chunks: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, domain, point, c);
            let len = (n - c * CHUNK).min(CHUNK);
            let mut out = Vec::with_capacity(len as usize);
            for _ in 0..len {
                let (sum_ab, eps, _eta) = sample_composite(&mut rng, n_elem, nu, sr);
                let snr = match user {
                    User::U1 => {
                        let r1 = cw * sum_ab;
                        let amp = gb1.sqrt() * eps + gb2.sqrt() * r1;
                        amp * amp
                    }
                    User::U2 => {
                        let r2 = sw * sum_ab;
                        gb2 * r2 * r2 / (gb1 * eps * eps + 1.0)
                    }
                };
                out.push(snr);
            }
            out
        })
        .collect();
    Ok(chunks.concat())
}

// ---------------------------------------------------------------------------
// Semi-analytic BER
// ---------------------------------------------------------------------------

/// A Monte Carlo error-rate estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    /// Estimated bit error rate.
    pub ber: f64,
    /// Standard error of the estimate.
    pub stderr: f64,
    /// Number of samples behind it.
    pub n: u64,
}

/// Semi-analytic BER: averages the conditional error probability
/// `(1/2) erfc(√γ)` over a set of instantaneous-SNR samples.
///
/// Because the conditional probability is evaluated exactly, the estimator's
/// variance comes only from the channel — orders of magnitude fewer samples
/// suffice than for bit-by-bit counting at low error rates.
pub fn semi_analytic_ber(snr_samples: &[f64]) -> Result<BerEstimate> {
    if snr_samples.is_empty() {
        return Err(Error::domain(
            "semi-analytic BER needs at least one SNR sample",
        ));
    }
    let n = snr_samples.len() as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &g in snr_samples {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::domain(format!(
                "SNR samples must be finite and non-negative, got {g}"
            )));
        }
        let p = 0.5 * crate::specfun::erfc_raw(g.sqrt());
        sum += p;
        sum_sq += p * p;
    }
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    Ok(BerEstimate {
        ber: mean,
        stderr: (var / n).sqrt(),
        n: snr_samples.len() as u64,
    })
}

// ---------------------------------------------------------------------------
// Full link simulation
// ---------------------------------------------------------------------------

/// Second-stage detector used for user 2's bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorMode {
    /// Slice the sign of the remodulated quadrature rail.
    Quadrature,
    /// Draw the conditional error from the interference-limited SNR law
    /// `γ₂ = γ̄₂R₂²/(γ̄₁ε²+1)`, matching the analytic layer's model of the
    /// second decoding stage.
    ModelFaithful,
}

/// Outcome of a bit-level link simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    /// Channel uses simulated (one U1 bit and one U2 bit each).
    pub bits_sent: u64,
    /// User 1 bit errors.
    pub bit_errors_u1: u64,
    /// User 2 bit errors.
    pub bit_errors_u2: u64,
    /// User 1 bit error rate.
    pub ber_u1: f64,
    /// User 2 bit error rate.
    pub ber_u2: f64,
    /// Binomial standard error of `ber_u1`.
    pub stderr_u1: f64,
    /// Binomial standard error of `ber_u2`.
    pub stderr_u2: f64,
    /// Seed the run was derived from.
    pub seed: u64,
    /// Second-stage detector used.
    pub detector: DetectorMode,
}

/// Simulates `n_bits` channel uses of the full transmit–receive chain.
///
/// Per use: both bits are drawn, the RIS applies per-element phases
/// `Φᵢ = η - θᵢ - ψᵢ ± w_m` (co-phasing with the direct path and embedding
/// user 2's bit in the sign), the received sample picks up circular Gaussian
/// noise of unit variance, the base station derotates by the direct-path
/// phase, slices the in-phase rail for user 1, remodulates, and applies the
/// chosen second-stage detector. The per-element rotation is evaluated
/// literally — element by element through the drawn phases — rather than
/// through the algebraic cancellation, so the chain exercises what a
/// receiver would actually compute.
pub fn simulate_link(cfg: &SystemConfig, n_bits: u64, detector: DetectorMode) -> Result<SimResult> {
    simulate_link_at_point(cfg, n_bits, detector, 0)
}

/// [`simulate_link`] addressed to sweep point `point`.
pub fn simulate_link_at_point(
    cfg: &SystemConfig,
    n_bits: u64,
    detector: DetectorMode,
    point: u64,
) -> Result<SimResult> {
    cfg.validate()?;
    if n_bits == 0 {
        return Err(Error::domain("bit count must be positive"));
    }
    let budget = link_budget(cfg);
    let (gb1, gb2) = (budget.gamma_bar1, budget.gamma_bar2);
    let (nu, sr) = rician_params(cfg.rician_k);
    let n_elem = cfg.n_elements as usize;
    let w_m = cfg.w_m;
    let sw = w_m.sin();
    let n_chunks = n_bits.div_ceil(CHUNK);
    let counts: Vec<(u64, u64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, DOMAIN_LINK, point, c);
            let len = (n_bits - c * CHUNK).min(CHUNK);
            // Scratch reused across uses; the draw order inside matches
            // `sample_channel` exactly.
            let mut alpha = vec![0.0f64; n_elem];
            let mut theta = vec![0.0f64; n_elem];
            let mut beta = vec![0.0f64; n_elem];
            let mut psi = vec![0.0f64; n_elem];
            let mut errs = (0u64, 0u64);
            for _ in 0..len {
                let x1 = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let b2 = rng.gen::<bool>();
                let bias = if b2 { -w_m } else { w_m };
                for i in 0..n_elem {
                    alpha[i] = sample_rayleigh(&mut rng);
                    theta[i] = rng.gen_range(0.0..TAU);
                    beta[i] = sample_rician_raw(&mut rng, nu, sr);
                    psi[i] = rng.gen_range(0.0..TAU);
                }
                let eps = sample_rayleigh(&mut rng);
                let eta = rng.gen_range(0.0..TAU);

                // Literal reflected composite: each element's cascade phase
                // plus its RIS correction, summed in the complex plane.
                let mut acc_re = 0.0;
                let mut acc_im = 0.0;
                let mut sum_ab = 0.0;
                for i in 0..n_elem {
                    let phi = eta - theta[i] - psi[i] + bias;
                    let angle = theta[i] + psi[i] + phi;
                    let amp = alpha[i] * beta[i];
                    acc_re += amp * angle.cos();
                    acc_im += amp * angle.sin();
                    sum_ab += amp;
                }
                let sig_re = gb1.sqrt() * eps * eta.cos() + gb2.sqrt() * acc_re;
                let sig_im = gb1.sqrt() * eps * eta.sin() + gb2.sqrt() * acc_im;
                let n1: f64 = StandardNormal.sample(&mut rng);
                let n2: f64 = StandardNormal.sample(&mut rng);
                let y_re = x1 * sig_re + FRAC_1_SQRT_2 * n1;
                let y_im = x1 * sig_im + FRAC_1_SQRT_2 * n2;
                // Derotate by the direct-path phase.
                let ty_re = y_re * eta.cos() + y_im * eta.sin();
                let ty_im = -y_re * eta.sin() + y_im * eta.cos();

                let x1_hat = if ty_re >= 0.0 { 1.0 } else { -1.0 };
                let u1_err = x1_hat != x1;
                if u1_err {
                    errs.0 += 1;
                }

                // Always drawn so both detector modes consume identical
                // stream positions and can share channel realizations.
                let aux: f64 = rng.gen();
                let u2_err = match detector {
                    DetectorMode::Quadrature => {
                        let rail = ty_im * x1_hat;
                        (rail < 0.0) != b2
                    }
                    DetectorMode::ModelFaithful => {
                        let r2 = sw * sum_ab;
                        let g2 = gb2 * r2 * r2 / (gb1 * eps * eps + 1.0);
                        let p = 0.5 * crate::specfun::erfc_raw(g2.sqrt());
                        let cond_err = aux < p;
                        if u1_err {
                            !cond_err
                        } else {
                            cond_err
                        }
                    }
                };
                if u2_err {
                    errs.1 += 1;
                }
            }
            errs
        })
        .collect();
    let (e1, e2) = counts
        .iter()
        .fold((0u64, 0u64), |acc, &(a, b)| (acc.0 + a, acc.1 + b));
    let n = n_bits as f64;
    let (p1, p2) = (e1 as f64 / n, e2 as f64 / n);
    Ok(SimResult {
        bits_sent: n_bits,
        bit_errors_u1: e1,
        bit_errors_u2: e2,
        ber_u1: p1,
        ber_u2: p2,
        stderr_u1: (p1 * (1.0 - p1) / n).sqrt(),
        stderr_u2: (p2 * (1.0 - p2) / n).sqrt(),
        seed: cfg.seed,
        detector,
    })
}

// ---------------------------------------------------------------------------
// Constellation dumps
// ---------------------------------------------------------------------------

/// One received-plane point with the bits that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationPoint {
    /// In-phase coordinate.
    pub re: f64,
    /// Quadrature coordinate.
    pub im: f64,
    /// User 1's bit (0 ↔ +1 symbol).
    pub bit_u1: u8,
    /// User 2's bit (0 ↔ +w_m bias).
    pub bit_u2: u8,
}

/// Received-plane scatter data from both decoding stages.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationDump {
    /// Derotated received samples, labelled with both transmitted bits.
    pub stage1: Vec<ConstellationPoint>,
    /// The same samples after remodulation by the *decided* U1 symbol
    /// (`bit_u1` here is the decision, not the transmitted bit).
    pub stage2: Vec<ConstellationPoint>,
    /// Seed the dump was derived from.
    pub seed: u64,
}

/// Generates `n_points` labelled received-plane samples through the same
/// literal receiver chain as [`simulate_link`], on an independent stream.
pub fn dump_constellation(cfg: &SystemConfig, n_points: u64) -> Result<ConstellationDump> {
    cfg.validate()?;
    if n_points == 0 {
        return Err(Error::domain("point count must be positive"));
    }
    let budget = link_budget(cfg);
    let (gb1, gb2) = (budget.gamma_bar1, budget.gamma_bar2);
    let (nu, sr) = rician_params(cfg.rician_k);
    let n_elem = cfg.n_elements as usize;
    let w_m = cfg.w_m;
    let n_chunks = n_points.div_ceil(CHUNK);
    let chunks: Vec<(Vec<ConstellationPoint>, Vec<ConstellationPoint>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, DOMAIN_CONSTELLATION, 0, c);
            let len = (n_points - c * CHUNK).min(CHUNK);
            let mut s1 = Vec::with_capacity(len as usize);
            let mut s2 = Vec::with_capacity(len as usize);
            for _ in 0..len {
                let x1 = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let b2 = rng.gen::<bool>();
                let bias = if b2 { -w_m } else { w_m };
                let mut acc_re = 0.0;
                let mut acc_im = 0.0;
                for _ in 0..n_elem {
                    let a = sample_rayleigh(&mut rng);
                    let theta: f64 = rng.gen_range(0.0..TAU);
                    let b = sample_rician_raw(&mut rng, nu, sr);
                    let psi: f64 = rng.gen_range(0.0..TAU);
                    let phi = /* eta applied below */ -theta - psi + bias;
                    let angle = theta + psi + phi;
                    let amp = a * b;
                    acc_re += amp * angle.cos();
                    acc_im += amp * angle.sin();
                }
                let eps = sample_rayleigh(&mut rng);
                let eta = rng.gen_range(0.0..TAU);
                // The RIS correction includes +η per element; applying it to
                // the summed composite is the same rotation.
                let (c_eta, s_eta) = (eta.cos(), eta.sin());
                let refl_re = acc_re * c_eta - acc_im * s_eta;
                let refl_im = acc_re * s_eta + acc_im * c_eta;
                let sig_re = gb1.sqrt() * eps * c_eta + gb2.sqrt() * refl_re;
                let sig_im = gb1.sqrt() * eps * s_eta + gb2.sqrt() * refl_im;
                let n1: f64 = StandardNormal.sample(&mut rng);
                let n2: f64 = StandardNormal.sample(&mut rng);
                let y_re = x1 * sig_re + FRAC_1_SQRT_2 * n1;
                let y_im = x1 * sig_im + FRAC_1_SQRT_2 * n2;
                let ty_re = y_re * c_eta + y_im * s_eta;
                let ty_im = -y_re * s_eta + y_im * c_eta;
                s1.push(ConstellationPoint {
                    re: ty_re,
                    im: ty_im,
                    bit_u1: u8::from(x1 < 0.0),
                    bit_u2: u8::from(b2),
                });
                let x1_hat = if ty_re >= 0.0 { 1.0 } else { -1.0 };
                s2.push(ConstellationPoint {
                    re: ty_re * x1_hat,
                    im: ty_im * x1_hat,
                    bit_u1: u8::from(x1_hat < 0.0),
                    bit_u2: u8::from(b2),
                });
            }
            (s1, s2)
        })
        .collect();
    let mut stage1 = Vec::with_capacity(n_points as usize);
    let mut stage2 = Vec::with_capacity(n_points as usize);
    for (s1, s2) in chunks {
        stage1.extend(s1);
        stage2.extend(s2);
    }
    Ok(ConstellationDump {
        stage1,
        stage2,
        seed: cfg.seed,
    })
}

// ---------------------------------------------------------------------------
// Distribution diagnostics
// ---------------------------------------------------------------------------

/// Comparison of the sampled in-phase composite `R₁` against its Gaussian
/// approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    /// Number of composite draws behind the statistics.
    pub n_draws: u64,
    /// Sample mean of `R₁`.
    pub sample_mean: f64,
    /// Sample variance of `R₁` (unbiased).
    pub sample_var: f64,
    /// Sample skewness of `R₁`.
    pub sample_skew: f64,
    /// The mean and variance the Gaussian approximation predicts.
    pub predicted: GaussianMoments,
    /// Kolmogorov–Smirnov distance between the empirical distribution and
    /// the predicted Gaussian.
    pub ks_statistic: f64,
    /// Size of the *systematic* CLT error: the leading Edgeworth correction
    /// to the CDF in the sup norm, `φ(0)·|skew|/(6√N)`. The KS distance
    /// cannot be expected to fall below this no matter how many draws are
    /// taken.
    pub edgeworth_allowance: f64,
}

/// The irreducible sup-norm gap between the composite sum's true CDF and its
/// Gaussian approximation, from the leading Edgeworth term.
pub fn edgeworth_ks_allowance(cfg: &SystemConfig) -> Result<f64> {
    let skew = per_element_skewness(cfg.rician_k)?;
    let phi0 = (2.0 * std::f64::consts::PI).sqrt().recip();
    Ok(phi0 * skew.abs() / (6.0 * f64::from(cfg.n_elements).sqrt()))
}

/// Draws the in-phase composite `n_draws` times and compares its empirical
/// distribution against the Gaussian approximation: first two moments,
/// skewness, and the Kolmogorov–Smirnov distance.
pub fn clt_moment_check(cfg: &SystemConfig, n_draws: u64) -> Result<MomentCheck> {
    cfg.validate()?;
    if n_draws < 2 {
        return Err(Error::domain("moment check needs at least two draws"));
    }
    let (nu, sr) = rician_params(cfg.rician_k);
    let n_elem = cfg.n_elements as usize;
    let cw = cfg.w_m.cos();
    let n_chunks = n_draws.div_ceil(CHUNK);
    let chunks: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, DOMAIN_MOMENTS, 0, c);
            let len = (n_draws - c * CHUNK).min(CHUNK);
            let mut out = Vec::with_capacity(len as usize);
            for _ in 0..len {
                let (sum_ab, _eps, _eta) = sample_composite(&mut rng, n_elem, nu, sr);
                out.push(cw * sum_ab);
            }
            out
        })
        .collect();
    let mut samples = chunks.concat();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = samples.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    let skew = m3 / m2.powf(1.5);

    let predicted = moments_r1(cfg);
    if predicted.is_degenerate() {
        return Err(Error::degenerate(
            "the in-phase composite vanishes identically at this phase offset",
        ));
    }
    let sigma = predicted.sigma2.sqrt();
    samples.sort_by(f64::total_cmp);
    let mut ks: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let z = (x - predicted.mu) / sigma;
        let f = 0.5 * crate::specfun::erfc_raw(-z * FRAC_1_SQRT_2);
        let hi = (i + 1) as f64 / n - f;
        let lo = f - i as f64 / n;
        ks = ks.max(hi.max(lo));
    }
    Ok(MomentCheck {
        n_draws,
        sample_mean: mean,
        sample_var: var,
        sample_skew: skew,
        predicted,
        ks_statistic: ks,
        edgeworth_allowance: edgeworth_ks_allowance(cfg)?,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
