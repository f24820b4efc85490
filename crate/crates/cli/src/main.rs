//! `risvc` — command-line driver for the RIS-carried two-user uplink toolkit.
//!
//! Three subcommands cover the three ways of looking at the link:
//!
//! * `constellation` — run the literal receiver chain and dump labelled
//!   received-plane samples from both decoding stages as CSV.
//! * `sweep` — walk one configuration axis and tabulate both users' bit
//!   error rates along it, through any combination of the closed-form,
//!   quadrature-oracle, Monte Carlo, and semi-analytic paths.
//! * `validate` — run the numerical validation gates and emit a JSON report.
//!
//! Exit codes: `0` on success, `1` when a validation gate fails or the
//! closed-form path diverges from the quadrature oracle by more than 5%
//! (the data is still written), `2` on usage, configuration, or I/O errors.

mod config;
mod constellation;
mod output;
mod sweep;
mod validate;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "risvc",
    version,
    about = "Analytic engine and Monte Carlo simulator for a RIS-carried two-user uplink"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump labelled received-plane samples from both decoding stages as CSV.
    Constellation(ConstellationArgs),
    /// Sweep one configuration axis and tabulate bit error rates as CSV.
    Sweep(SweepArgs),
    /// Run the numerical validation gates and emit a JSON report.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct ConstellationArgs {
    /// Flat `key = value` configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configuration's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Received-plane samples per decoding stage.
    #[arg(long, default_value_t = 2000)]
    points: u64,
    /// Output CSV file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Flat `key = value` configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configuration's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Configuration field the grid walks.
    #[arg(long, value_enum)]
    axis: Axis,
    /// Inclusive grid `start:stop:count`; endpoints are hit exactly.
    #[arg(long)]
    grid: String,
    /// Estimation paths to tabulate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "closed,oracle")]
    paths: Vec<PathKind>,
    /// Channel uses (and SNR draws) per grid point for the sampling paths.
    #[arg(long, default_value_t = 100_000)]
    mc_bits: u64,
    /// Second-stage detector for the monte-carlo path.
    #[arg(long, value_enum, default_value_t = DetectorArg::Quadrature)]
    detector: DetectorArg,
    /// Reading of the closed-form expressions for the closed path.
    #[arg(long, value_enum, default_value_t = ModeArg::Corrected)]
    closed_form_mode: ModeArg,
    /// Output CSV file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Flat `key = value` configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configuration's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Gate suite to run: `fast` is purely numerical, `full` adds the
    /// Monte Carlo cross-checks.
    #[arg(long, value_enum, default_value_t = Level::Fast)]
    level: Level,
    /// Output JSON file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Sweepable configuration field, named exactly like the field itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    #[value(name = "w_m")]
    WM,
    #[value(name = "avg_snr_db")]
    AvgSnrDb,
    #[value(name = "n_elements")]
    NElements,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::WM => "w_m",
            Axis::AvgSnrDb => "avg_snr_db",
            Axis::NElements => "n_elements",
        }
    }
}

/// One way of estimating the two error rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PathKind {
    /// Closed-form expressions.
    Closed,
    /// Quadrature-grade reference: exact CDFs pushed through the averaging
    /// kernel numerically.
    Oracle,
    /// Bit-by-bit link simulation.
    MonteCarlo,
    /// Conditional error probability averaged over sampled SNRs.
    SemiAnalytic,
}

impl PathKind {
    fn name(self) -> &'static str {
        match self {
            PathKind::Closed => "closed",
            PathKind::Oracle => "oracle",
            PathKind::MonteCarlo => "monte-carlo",
            PathKind::SemiAnalytic => "semi-analytic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DetectorArg {
    Quadrature,
    ModelFaithful,
}

impl DetectorArg {
    fn name(self) -> &'static str {
        match self {
            DetectorArg::Quadrature => "quadrature",
            DetectorArg::ModelFaithful => "model-faithful",
        }
    }

    fn to_core(self) -> risvc_core::montecarlo::DetectorMode {
        match self {
            DetectorArg::Quadrature => risvc_core::montecarlo::DetectorMode::Quadrature,
            DetectorArg::ModelFaithful => risvc_core::montecarlo::DetectorMode::ModelFaithful,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    AsPrinted,
    Corrected,
}

impl ModeArg {
    fn name(self) -> &'static str {
        match self {
            ModeArg::AsPrinted => "as-printed",
            ModeArg::Corrected => "corrected",
        }
    }

    fn to_core(self) -> risvc_core::analytic::ClosedFormMode {
        match self {
            ModeArg::AsPrinted => risvc_core::analytic::ClosedFormMode::AsPrinted,
            ModeArg::Corrected => risvc_core::analytic::ClosedFormMode::Corrected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Level {
    Fast,
    Full,
}

impl Level {
    fn name(self) -> &'static str {
        match self {
            Level::Fast => "fast",
            Level::Full => "full",
        }
    }
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn main() {
    // clap itself exits with code 2 on malformed invocations, matching the
    // usage-error convention below.
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Constellation(args) => constellation::run(args),
        Command::Sweep(args) => sweep::run(args),
        Command::Validate(args) => validate::run(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(message) => {
            eprintln!("error: {message}");
            std::process::exit(2);
        }
    }
}
