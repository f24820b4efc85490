//! Flat `key = value` configuration files mapped onto
//! [`SystemConfig`](risvc_core::model::SystemConfig).
//!
//! Keys are exactly the configuration's field names. Blank lines and lines
//! starting with `#` are ignored; unknown keys are rejected, so a typo cannot
//! silently fall back to a default value.

use std::path::Path;

use risvc_core::model::SystemConfig;

/// Parses configuration text into a [`SystemConfig`], starting from the
/// default value and overriding field by field.
pub fn parse_config(text: &str) -> Result<SystemConfig, String> {
    let mut cfg = SystemConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {lineno}: expected `key = value`, got `{line}`"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "n_elements" => cfg.n_elements = parse_value(key, value, lineno)?,
            "rician_k" => cfg.rician_k = parse_value(key, value, lineno)?,
            "w_m" => cfg.w_m = parse_value(key, value, lineno)?,
            "l1_db" => cfg.l1_db = parse_value(key, value, lineno)?,
            "l2_db" => cfg.l2_db = parse_value(key, value, lineno)?,
            "avg_snr_db" => cfg.avg_snr_db = parse_value(key, value, lineno)?,
            "mod_p" => cfg.mod_p = parse_value(key, value, lineno)?,
            "mod_q" => cfg.mod_q = parse_value(key, value, lineno)?,
            "series_l" => cfg.series_l = parse_value(key, value, lineno)?,
            "seed" => cfg.seed = parse_value(key, value, lineno)?,
            _ => return Err(format!("line {lineno}: unknown configuration key `{key}`")),
        }
    }
    Ok(cfg)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, lineno: usize) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("line {lineno}: cannot parse `{value}` as a value for `{key}`"))
}

/// Loads (or defaults) a configuration, applies the seed override, and
/// validates the result.
pub fn load(path: Option<&Path>, seed_override: Option<u64>) -> Result<SystemConfig, String> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => SystemConfig::default(),
    };
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// The configuration as `key=value` lines in field order, using the shortest
/// round-trip float formatting. This is the metadata block echoed into every
/// output file, so a result can always be traced back to its exact inputs.
pub fn config_lines(cfg: &SystemConfig) -> Vec<String> {
    vec![
        format!("n_elements={}", cfg.n_elements),
        format!("rician_k={}", cfg.rician_k),
        format!("w_m={}", cfg.w_m),
        format!("l1_db={}", cfg.l1_db),
        format!("l2_db={}", cfg.l2_db),
        format!("avg_snr_db={}", cfg.avg_snr_db),
        format!("mod_p={}", cfg.mod_p),
        format!("mod_q={}", cfg.mod_q),
        format!("series_l={}", cfg.series_l),
        format!("seed={}", cfg.seed),
    ]
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_overrides_fields_and_round_trips() {
        let text = "\
# comment line
n_elements = 32

rician_k=1.5
w_m = 0.39269908169872414
avg_snr_db = 15
seed = 99
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.n_elements, 32);
        assert_eq!(cfg.rician_k, 1.5);
        assert_eq!(cfg.w_m, std::f64::consts::FRAC_PI_8);
        assert_eq!(cfg.avg_snr_db, 15.0);
        assert_eq!(cfg.seed, 99);
        // Untouched fields keep their defaults.
        assert_eq!(cfg.l1_db, 20.0);
        assert_eq!(cfg.series_l, 30);

        // Echoed lines parse back to the identical configuration.
        let echoed = config_lines(&cfg).join("\n");
        assert_eq!(parse_config(&echoed).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_and_malformed_lines_are_rejected() {
        let err = parse_config("n_element = 32").unwrap_err();
        assert!(err.contains("unknown configuration key"), "got: {err}");
        assert!(err.contains("line 1"), "got: {err}");

        let err = parse_config("\n\njust words\n").unwrap_err();
        assert!(err.contains("line 3"), "got: {err}");

        let err = parse_config("n_elements = 3.5").unwrap_err();
        assert!(err.contains("cannot parse"), "got: {err}");
    }

    #[test]
    fn load_applies_seed_override_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("link.cfg");
        std::fs::write(&path, "seed = 7\nw_m = 0.5\n").unwrap();

        let cfg = load(Some(&path), Some(1234)).unwrap();
        assert_eq!(cfg.seed, 1234, "the --seed override must win");
        assert_eq!(cfg.w_m, 0.5);

        std::fs::write(&path, "w_m = 3.0\n").unwrap();
        let err = load(Some(&path), None).unwrap_err();
        assert!(
            err.contains("w_m"),
            "validation failure must name the field: {err}"
        );
    }
}
