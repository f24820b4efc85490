//! The `validate` subcommand: runs the numerical validation gates and emits
//! a JSON report.
//!
//! The `fast` level is purely numerical: internal identities between
//! independent evaluation routes, closed-form-versus-quadrature distribution
//! checks, the corrected closed-form error rates against their quadrature
//! references, the degenerate-angle anchors, and the bounds of the polynomial
//! erf surrogate. The `full` level adds the Monte Carlo cross-checks: sampled
//! moments against the Gaussian approximation, the semi-analytic estimator
//! against the exact average, the bit-level simulator against the
//! semi-analytic estimator, and a distribution test of the sampled SNR.
//!
//! Gate thresholds are calibrated at the default configuration; other
//! configurations run the same suite, and gates that do not exist at a
//! degenerate phase offset report themselves as skipped.

use risvc_core::analytic::{
    ber_from_cdf, ber_u1_closed_from_config, ber_u1_direct_only, ber_u2_ideal_closed_from_config,
    cdf_gamma1_closed, cdf_gamma1_quadrature, cdf_gamma2_exact, cdf_gamma2_series_with_mode,
    recommended_series_l, CdfFunction, ClosedFormMode, ErfcArgMode,
};
use risvc_core::model::{derived_constants, link_budget, moments_r1, moments_r2, SystemConfig};
use risvc_core::montecarlo::{
    clt_moment_check, draw_snr_samples, semi_analytic_ber, simulate_link, DetectorMode, User,
};
use risvc_core::specfun::{
    erf_exact, erf_sum_exp, erfc_exact, kummer_1f1, marcum_q_half_ref, marcum_q_half_series,
    upper_gamma, ErfApproxTable,
};

use crate::{config, output, Level, ValidateArgs};

// ---------------------------------------------------------------------------
// Report structure
// ---------------------------------------------------------------------------

#[derive(serde::Serialize)]
struct Gate {
    name: &'static str,
    /// `pass`, `fail`, or `info` (informational gates never fail the run).
    status: &'static str,
    measured: f64,
    threshold: Option<f64>,
    detail: String,
}

#[derive(serde::Serialize)]
struct ConfigEcho {
    n_elements: u32,
    rician_k: f64,
    w_m: f64,
    l1_db: f64,
    l2_db: f64,
    avg_snr_db: f64,
    mod_p: f64,
    mod_q: f64,
    series_l: u32,
    seed: u64,
}

#[derive(serde::Serialize)]
struct Report {
    tool: &'static str,
    version: &'static str,
    level: &'static str,
    config: ConfigEcho,
    gates: Vec<Gate>,
    gates_passed: usize,
    gates_failed: usize,
    passed: bool,
}

fn check(name: &'static str, measured: f64, threshold: f64, detail: String) -> Gate {
    Gate {
        name,
        status: if measured <= threshold {
            "pass"
        } else {
            "fail"
        },
        measured,
        threshold: Some(threshold),
        detail,
    }
}

fn info(name: &'static str, measured: f64, detail: String) -> Gate {
    Gate {
        name,
        status: "info",
        measured,
        threshold: None,
        detail,
    }
}

fn skipped(name: &'static str, detail: String) -> Gate {
    Gate {
        name,
        status: "info",
        measured: 0.0,
        threshold: None,
        detail: format!("skipped: {detail}"),
    }
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

pub fn run(args: &ValidateArgs) -> Result<i32, String> {
    let cfg = config::load(args.config.as_deref(), args.seed)?;
    let mut gates = Vec::new();

    gates.push(kummer_identity_gate()?);
    gates.push(upper_gamma_erfc_gate()?);
    gates.push(marcum_consistency_gate()?);
    gates.push(u1_cdf_gate(&cfg)?);
    gates.push(u2_cdf_gate(&cfg)?);
    gates.push(series_truncation_gate(&cfg)?);
    gates.push(u1_closed_ber_gate(&cfg)?);
    gates.push(u2_closed_ber_gate(&cfg)?);
    gates.push(degenerate_anchor_gate(&cfg)?);
    gates.push(erf_surrogate_gate()?);

    if args.level == Level::Full {
        gates.extend(clt_gates(&cfg)?);
        gates.push(semi_analytic_u2_gate(&cfg)?);
        gates.push(sim_vs_semi_analytic_gate(&cfg)?);
        gates.push(snr_distribution_gate(&cfg)?);
    }

    let gates_passed = gates.iter().filter(|g| g.status == "pass").count();
    let gates_failed = gates.iter().filter(|g| g.status == "fail").count();
    let passed = gates_failed == 0;
    let report = Report {
        tool: "risvc validate",
        version: env!("CARGO_PKG_VERSION"),
        level: args.level.name(),
        config: ConfigEcho {
            n_elements: cfg.n_elements,
            rician_k: cfg.rician_k,
            w_m: cfg.w_m,
            l1_db: cfg.l1_db,
            l2_db: cfg.l2_db,
            avg_snr_db: cfg.avg_snr_db,
            mod_p: cfg.mod_p,
            mod_q: cfg.mod_q,
            series_l: cfg.series_l,
            seed: cfg.seed,
        },
        gates,
        gates_passed,
        gates_failed,
        passed,
    };

    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| format!("cannot serialize the report: {e}"))?;
    let mut w = output::writer(args.out.as_deref())?;
    output::line(&mut *w, &json)?;
    output::finish(w)?;
    eprintln!(
        "validate ({}): {} passed, {} failed",
        args.level.name(),
        gates_passed,
        gates_failed
    );
    Ok(if passed { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// Fast-level gates
// ---------------------------------------------------------------------------

/// `₁F₁(2; 1; K) e^{-K} = 1 + K`: the confluent series against an elementary
/// identity it must reproduce.
fn kummer_identity_gate() -> Result<Gate, String> {
    let mut worst: f64 = 0.0;
    for k in [0.0, 0.3, 1.0, 3.0, 10.0] {
        let lhs = kummer_1f1(2.0, 1.0, k).map_err(|e| e.to_string())? * (-k).exp();
        let rel = (lhs - (1.0 + k)).abs() / (1.0 + k);
        worst = worst.max(rel);
    }
    Ok(check(
        "kummer_vs_exponential_identity",
        worst,
        1e-12,
        "max relative error of 1F1(2;1;K)e^-K against 1+K over K in {0,0.3,1,3,10}".into(),
    ))
}

/// `Γ(1/2, x) = √π · erfc(√x)`: the incomplete-gamma route against the erf
/// route, which the series CDF depends on.
fn upper_gamma_erfc_gate() -> Result<Gate, String> {
    let mut worst: f64 = 0.0;
    for x in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
        let lhs = upper_gamma(0.5, x).map_err(|e| e.to_string())?;
        let rhs = std::f64::consts::PI.sqrt() * erfc_exact(x.sqrt()).map_err(|e| e.to_string())?;
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    Ok(check(
        "upper_gamma_vs_erfc_identity",
        worst,
        1e-10,
        "max relative error of Gamma(1/2,x) against sqrt(pi)*erfc(sqrt(x)) over 7 points".into(),
    ))
}

/// The half-order Marcum Q by density quadrature against its series
/// expansion — two independent routes to the same function.
fn marcum_consistency_gate() -> Result<Gate, String> {
    let mut worst: f64 = 0.0;
    for (a, b) in [
        (0.0, 2.0),
        (1.0, 1.0),
        (2.0, 4.5),
        (5.0, 3.0),
        (10.739341251066445, 8.0),
    ] {
        let quad = marcum_q_half_ref(a, b).map_err(|e| e.to_string())?;
        let series = marcum_q_half_series(a, b, 300).map_err(|e| e.to_string())?;
        worst = worst.max((quad - series).abs());
    }
    Ok(check(
        "marcum_quadrature_vs_series",
        worst,
        1e-9,
        "max absolute gap between the quadrature and series Marcum Q_{1/2} over 5 points".into(),
    ))
}

/// Geometric evaluation grid spanning the lower tail through the upper tail.
fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// User 1's closed-form CDF against the defining integral by quadrature.
fn u1_cdf_gate(cfg: &SystemConfig) -> Result<Gate, String> {
    let m1 = moments_r1(cfg);
    if m1.is_degenerate() {
        return Ok(skipped(
            "u1_cdf_closed_vs_quadrature",
            "the in-phase composite vanishes at this phase offset; both routes fall back to \
             the direct-link exponential by construction"
                .into(),
        ));
    }
    let consts = derived_constants(cfg, &m1).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for g in geometric_grid(0.5, 2000.0, 61) {
        let closed = cdf_gamma1_closed(g, cfg, m1, &consts).map_err(|e| e.to_string())?;
        let quad = cdf_gamma1_quadrature(g, cfg, m1).map_err(|e| e.to_string())?;
        worst = worst.max((closed - quad).abs());
    }
    Ok(check(
        "u1_cdf_closed_vs_quadrature",
        worst,
        1e-6,
        "sup absolute gap over a 61-point geometric SNR grid [0.5, 2000]".into(),
    ))
}

/// User 2's series CDF at a convergent truncation against the Marcum-exact
/// CDF.
fn u2_cdf_gate(cfg: &SystemConfig) -> Result<Gate, String> {
    let m2 = moments_r2(cfg);
    let l = recommended_series_l(&m2).max(100);
    let mut worst: f64 = 0.0;
    for g in geometric_grid(0.05, 2000.0, 61) {
        let series = cdf_gamma2_series_with_mode(g, cfg, m2, l, ErfcArgMode::SqrtCorrected)
            .map_err(|e| e.to_string())?;
        let exact = cdf_gamma2_exact(g, cfg, m2).map_err(|e| e.to_string())?;
        worst = worst.max((series - exact).abs());
    }
    Ok(check(
        "u2_cdf_series_vs_exact",
        worst,
        1e-4,
        format!(
            "sup absolute gap at truncation L={l} over a 61-point geometric SNR grid \
             [0.05, 2000]"
        ),
    ))
}

/// Informational: how far the series CDF sits from the exact one at the
/// *configured* truncation order.
fn series_truncation_gate(cfg: &SystemConfig) -> Result<Gate, String> {
    let m2 = moments_r2(cfg);
    let g = 10.0;
    let series = cdf_gamma2_series_with_mode(g, cfg, m2, cfg.series_l, ErfcArgMode::SqrtCorrected)
        .map_err(|e| e.to_string())?;
    let exact = cdf_gamma2_exact(g, cfg, m2).map_err(|e| e.to_string())?;
    let gap = (series - exact).abs();
    let needed = recommended_series_l(&m2);
    Ok(info(
        "series_truncation_at_configured_order",
        gap,
        format!(
            "absolute gap to the exact CDF at SNR 10 with the configured series_l={}; \
             convergence needs series_l >= {needed} (see DEVIATIONS.md)",
            cfg.series_l
        ),
    ))
}

/// User 1's corrected closed-form average BER against the averaging kernel
/// applied to the quadrature CDF, probed at 10 dB transmit SNR where the
/// closed form's polynomial erf surrogate stays inside its accurate band.
fn u1_closed_ber_gate(cfg: &SystemConfig) -> Result<Gate, String> {
    let probe = SystemConfig {
        avg_snr_db: 10.0,
        ..cfg.clone()
    };
    let closed = ber_u1_closed_from_config(&probe, ClosedFormMode::Corrected)
        .map_err(|e| e.to_string())?
        .total;
    let m1 = moments_r1(&probe);
    let cdf = CdfFunction::gamma1_quadrature(&probe, m1);
    let oracle = ber_from_cdf(&cdf, probe.mod_p, probe.mod_q).map_err(|e| e.to_string())?;
    let rel = (closed - oracle).abs() / oracle;
    Ok(check(
        "u1_closed_ber_corrected_vs_oracle",
        rel,
        0.05,
        format!(
            "relative gap at 10 dB transmit SNR (closed {closed:e}, oracle {oracle:e}); \
             higher-SNR behaviour is documented in DEVIATIONS.md"
        ),
    ))
}

/// User 2's corrected closed-form average BER (at a convergent truncation)
/// against the averaging kernel applied to the Marcum-exact CDF.
fn u2_closed_ber_gate(cfg: &SystemConfig) -> Result<Gate, String> {
    let m2 = moments_r2(cfg);
    let probe = SystemConfig {
        series_l: cfg.series_l.max(recommended_series_l(&m2)),
        ..cfg.clone()
    };
    let closed = ber_u2_ideal_closed_from_config(&probe, ClosedFormMode::Corrected)
        .map_err(|e| e.to_string())?
        .total;
    let cdf = CdfFunction::gamma2_exact(&probe, m2);
    let oracle = ber_from_cdf(&cdf, probe.mod_p, probe.mod_q).map_err(|e| e.to_string())?;
    let rel = if closed == oracle {
        0.0
    } else {
        (closed - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE)
    };
    Ok(check(
        "u2_closed_ber_corrected_vs_oracle",
        rel,
        0.05,
        format!(
            "relative gap at truncation L={} (closed {closed:e}, oracle {oracle:e})",
            probe.series_l
        ),
    ))
}

/// The two degenerate phase offsets collapse to known elementary answers:
/// at `w_m = π/2` user 1 sees only the direct link, at `w_m = 0` user 2 has
/// no signal dimension and errs half the time.
fn degenerate_anchor_gate(cfg: &SystemConfig) -> Result<Gate, String> {
    let at_half_pi = SystemConfig {
        w_m: std::f64::consts::FRAC_PI_2,
        ..cfg.clone()
    };
    let u1 = ber_u1_closed_from_config(&at_half_pi, ClosedFormMode::Corrected)
        .map_err(|e| e.to_string())?;
    let gap1 = (u1.total - ber_u1_direct_only(&at_half_pi)).abs();

    let at_zero = SystemConfig {
        w_m: 0.0,
        ..cfg.clone()
    };
    let u2 = ber_u2_ideal_closed_from_config(&at_zero, ClosedFormMode::Corrected)
        .map_err(|e| e.to_string())?;
    let gap2 = (u2.total - 0.5).abs();

    Ok(check(
        "degenerate_angle_anchors",
        gap1.max(gap2),
        1e-10,
        format!(
            "max absolute gap of the anchors: |u1(pi/2) - direct_only| = {gap1:e} \
             (degenerate={}), |u2(0) - 1/2| = {gap2:e} (degenerate={})",
            u1.degenerate, u2.degenerate
        ),
    ))
}

/// Global bound of the four-exponential erf surrogate the user-1 closed form
/// is built on. The surrogate is coarse near the origin by construction;
/// the detail line also reports the tail region where the closed form needs
/// it to be tight.
fn erf_surrogate_gate() -> Result<Gate, String> {
    let table = ErfApproxTable::default();
    let mut sup_global: f64 = 0.0;
    let mut sup_tail: f64 = 0.0;
    let mut x = 0.0;
    while x <= 4.0 {
        let approx = erf_sum_exp(x, &table).map_err(|e| e.to_string())?;
        let exact = erf_exact(x).map_err(|e| e.to_string())?;
        let gap = (approx - exact).abs();
        sup_global = sup_global.max(gap);
        if x >= 1.5 {
            sup_tail = sup_tail.max(gap);
        }
        x += 0.005;
    }
    Ok(check(
        "erf_surrogate_bounds",
        sup_global,
        0.13,
        format!(
            "sup absolute error of the four-exponential erf surrogate on [0, 4]; \
             on [1.5, 4] the sup is {sup_tail:e}"
        ),
    ))
}

// ---------------------------------------------------------------------------
// Full-level gates
// ---------------------------------------------------------------------------

/// Sampled moments and distribution of the in-phase composite against its
/// Gaussian approximation: three gates from one set of draws.
fn clt_gates(cfg: &SystemConfig) -> Result<Vec<Gate>, String> {
    const DRAWS: u64 = 200_000;
    let m1 = moments_r1(cfg);
    if m1.is_degenerate() {
        let why = "the in-phase composite vanishes at this phase offset".to_string();
        return Ok(vec![
            skipped("clt_mean", why.clone()),
            skipped("clt_variance", why.clone()),
            skipped("clt_ks", why),
        ]);
    }
    let mc = clt_moment_check(cfg, DRAWS).map_err(|e| e.to_string())?;
    let mean_rel = (mc.sample_mean - mc.predicted.mu).abs() / mc.predicted.mu;
    let var_rel = (mc.sample_var - mc.predicted.sigma2).abs() / mc.predicted.sigma2;
    let ks_threshold = mc.edgeworth_allowance + 0.005;
    Ok(vec![
        check(
            "clt_mean",
            mean_rel,
            1e-3,
            format!(
                "relative gap of the sample mean over {DRAWS} draws \
                 (sample {}, predicted {})",
                mc.sample_mean, mc.predicted.mu
            ),
        ),
        check(
            "clt_variance",
            var_rel,
            1.5e-2,
            format!(
                "relative gap of the sample variance over {DRAWS} draws \
                 (sample {}, predicted {})",
                mc.sample_var, mc.predicted.sigma2
            ),
        ),
        check(
            "clt_ks",
            mc.ks_statistic,
            ks_threshold,
            format!(
                "Kolmogorov–Smirnov distance to the Gaussian approximation; the threshold \
                 is the systematic Edgeworth allowance {:e} plus sampling margin",
                mc.edgeworth_allowance
            ),
        ),
    ])
}

/// The semi-analytic estimator against the kernel average of the exact CDF,
/// in standard-error units.
fn semi_analytic_u2_gate(cfg: &SystemConfig) -> Result<Gate, String> {
    const DRAWS: u64 = 500_000;
    let samples = draw_snr_samples(cfg, DRAWS, User::U2).map_err(|e| e.to_string())?;
    let est = semi_analytic_ber(&samples).map_err(|e| e.to_string())?;
    let m2 = moments_r2(cfg);
    let cdf = CdfFunction::gamma2_exact(cfg, m2);
    let exact = ber_from_cdf(&cdf, cfg.mod_p, cfg.mod_q).map_err(|e| e.to_string())?;
    let diff = (est.ber - exact).abs();
    let measured = if est.stderr > 0.0 {
        diff / est.stderr
    } else {
        diff
    };
    Ok(check(
        "semi_analytic_vs_exact_u2",
        measured,
        4.0,
        format!(
            "|semi-analytic - exact| in standard errors over {DRAWS} draws \
             (estimate {:e} ± {:e}, exact {exact:e})",
            est.ber, est.stderr
        ),
    ))
}

/// The bit-counting simulator against the semi-analytic estimator for user 1
/// at a transmit SNR low enough for errors to be countable.
fn sim_vs_semi_analytic_gate(cfg: &SystemConfig) -> Result<Gate, String> {
    const BITS: u64 = 200_000;
    const DRAWS: u64 = 100_000;
    let probe = SystemConfig {
        avg_snr_db: cfg.avg_snr_db.min(10.0),
        ..cfg.clone()
    };
    let sim = simulate_link(&probe, BITS, DetectorMode::Quadrature).map_err(|e| e.to_string())?;
    let samples = draw_snr_samples(&probe, DRAWS, User::U1).map_err(|e| e.to_string())?;
    let semi = semi_analytic_ber(&samples).map_err(|e| e.to_string())?;
    let sigma = (sim.stderr_u1.powi(2) + semi.stderr.powi(2)).sqrt();
    let diff = (sim.ber_u1 - semi.ber).abs();
    let measured = if sigma > 0.0 { diff / sigma } else { diff };
    Ok(check(
        "sim_vs_semi_analytic_u1",
        measured,
        5.0,
        format!(
            "|counted - semi-analytic| in combined standard errors at {} dB transmit SNR \
             (counted {:e} over {BITS} bits, semi-analytic {:e} over {DRAWS} draws)",
            probe.avg_snr_db, sim.ber_u1, semi.ber
        ),
    ))
}

/// Kolmogorov–Smirnov test of sampled user-1 SNRs against the closed-form
/// CDF. The threshold combines the systematic Gaussian-approximation
/// allowance with the sampling margin.
fn snr_distribution_gate(cfg: &SystemConfig) -> Result<Gate, String> {
    const DRAWS: u64 = 100_000;
    let mut samples = draw_snr_samples(cfg, DRAWS, User::U1).map_err(|e| e.to_string())?;
    samples.sort_by(f64::total_cmp);
    let m1 = moments_r1(cfg);
    let n = samples.len() as f64;

    // The closed CDF needs the derived constants, which do not exist at the
    // degenerate angle; there the SNR law is exactly exponential.
    let consts = if m1.is_degenerate() {
        None
    } else {
        Some(derived_constants(cfg, &m1).map_err(|e| e.to_string())?)
    };
    let gb1 = link_budget(cfg).gamma_bar1;
    let mut ks: f64 = 0.0;
    for (i, &g) in samples.iter().enumerate() {
        let f = match &consts {
            Some(c) => cdf_gamma1_closed(g, cfg, m1, c).map_err(|e| e.to_string())?,
            None => -(-g / gb1).exp_m1(),
        };
        ks = ks.max(((i + 1) as f64 / n - f).max(f - i as f64 / n));
    }
    let allowance =
        risvc_core::montecarlo::edgeworth_ks_allowance(cfg).map_err(|e| e.to_string())?;
    let threshold = if m1.is_degenerate() {
        // Exact law: only sampling noise remains.
        0.0052
    } else {
        allowance + 0.0052
    };
    Ok(check(
        "snr_sample_ks_u1",
        ks,
        threshold,
        format!(
            "Kolmogorov–Smirnov distance of {DRAWS} sampled user-1 SNRs to the closed CDF; \
             systematic allowance {allowance:e} plus 1%-level sampling margin"
        ),
    ))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
