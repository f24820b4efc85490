//! The `constellation` subcommand: runs the literal receiver chain and dumps
//! labelled received-plane samples from both decoding stages as CSV.
//!
//! Stage 1 rows are the derotated received samples with the *transmitted*
//! bits; stage 2 rows are the same samples after remodulation by the
//! *decided* first-stage symbol, which is the plane the second-stage slicer
//! actually sees.

use risvc_core::montecarlo::dump_constellation;

use crate::{config, output, ConstellationArgs};

pub fn run(args: &ConstellationArgs) -> Result<i32, String> {
    let cfg = config::load(args.config.as_deref(), args.seed)?;
    let dump = dump_constellation(&cfg, args.points).map_err(|e| e.to_string())?;

    let mut w = output::writer(args.out.as_deref())?;
    output::line(
        &mut *w,
        &format!("# risvc constellation {}", env!("CARGO_PKG_VERSION")),
    )?;
    output::line(&mut *w, &format!("# points={}", args.points))?;
    for cfg_line in config::config_lines(&cfg) {
        output::line(&mut *w, &format!("# config: {cfg_line}"))?;
    }
    output::line(&mut *w, "stage,re,im,bit_u1,bit_u2")?;
    for (stage, points) in [(1, &dump.stage1), (2, &dump.stage2)] {
        for p in points {
            output::line(
                &mut *w,
                &format!("{stage},{},{},{},{}", p.re, p.im, p.bit_u1, p.bit_u2),
            )?;
        }
    }
    output::finish(w)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
