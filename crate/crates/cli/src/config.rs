//! Flat `key = value` sweep configuration.
//!
//! Blank lines and `#` comments are ignored. Unknown or repeated keys are
//! rejected; absent keys keep the [`SweepConfig::default`] values.

use std::collections::HashSet;

use krrlab::features::FeatureFamily;
use krrlab::spectral::{RidgeKind, RidgeSchedule, SpectralFamily, Variant};
use krrlab::sweep::SweepConfig;

use crate::CliError;

pub const KEYS: [&str; 14] = [
    "model.family",
    "model.a",
    "model.r",
    "model.p",
    "model.variant",
    "ridge.kind",
    "ridge.b",
    "features.family",
    "sweep.n_grid",
    "sweep.replicates",
    "noise.sigma2",
    "seed",
    "bounds.enabled",
    "bounds.delta",
];

fn invalid(key: &str, value: &str, expected: &str) -> CliError {
    CliError::Config(format!("{key}: expected {expected}, got {value:?}"))
}

fn real(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| invalid(key, v, "a finite number"))
}

fn count(key: &str, v: &str) -> Result<usize, CliError> {
    v.parse().map_err(|_| invalid(key, v, "a non-negative integer"))
}

pub fn parse_spectral_family(key: &str, v: &str) -> Result<SpectralFamily, CliError> {
    match v {
        "poly" => Ok(SpectralFamily::Poly),
        "exp" => Ok(SpectralFamily::Exp),
        _ => Err(invalid(key, v, "poly or exp")),
    }
}

pub fn parse_variant(key: &str, v: &str) -> Result<Variant, CliError> {
    match v {
        "plain" => Ok(Variant::Plain),
        "min_kernel" => Ok(Variant::MinKernel),
        _ => Err(invalid(key, v, "plain or min_kernel")),
    }
}

pub fn parse_feature_family(key: &str, v: &str) -> Result<FeatureFamily, CliError> {
    match v {
        "gaussian" => Ok(FeatureFamily::Gaussian),
        "rademacher" => Ok(FeatureFamily::Rademacher),
        "sine" => Ok(FeatureFamily::Sine),
        _ => Err(invalid(key, v, "gaussian, rademacher or sine")),
    }
}

pub fn parse_config(text: &str) -> Result<SweepConfig, CliError> {
    let mut cfg = SweepConfig::default();
    let mut seen = HashSet::new();
    let mut ridge_kind: Option<String> = None;
    let mut ridge_b: Option<f64> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
        }
        if !seen.insert(key.to_string()) {
            return Err(CliError::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
        match key {
            "model.family" => cfg.family = parse_spectral_family(key, value)?,
            "model.a" => cfg.a = real(key, value)?,
            "model.r" => cfg.r = real(key, value)?,
            "model.p" => cfg.p = count(key, value)?,
            "model.variant" => cfg.variant = parse_variant(key, value)?,
            "ridge.kind" => ridge_kind = Some(value.to_string()),
            "ridge.b" if value.is_empty() => {}
            "ridge.b" => ridge_b = Some(real(key, value)?),
            "features.family" => cfg.features = parse_feature_family(key, value)?,
            "sweep.n_grid" => {
                cfg.n_grid = value
                    .split(',')
                    .map(|s| count(key, s.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "sweep.replicates" => cfg.replicates = count(key, value)?,
            "noise.sigma2" => cfg.sigma2 = real(key, value)?,
            "seed" => cfg.seed = value.parse().map_err(|_| invalid(key, value, "a 64-bit unsigned integer"))?,
            "bounds.enabled" => {
                cfg.bounds = value.parse().map_err(|_| invalid(key, value, "true or false"))?;
            }
            "bounds.delta" => cfg.delta = real(key, value)?,
            _ => unreachable!("key list checked above"),
        }
    }

    let default_kind = match cfg.schedule.kind() {
        RidgeKind::PowerLaw(_) => "power",
        RidgeKind::ExpLaw(_) => "exp",
        RidgeKind::Zero => "zero",
    };
    // an explicit kind takes its exponent only from the file
    let b = if ridge_kind.is_some() { ridge_b } else { ridge_b.or(cfg.schedule.b()) };
    let kind = ridge_kind.unwrap_or_else(|| default_kind.to_string());
    cfg.schedule = match (kind.as_str(), b) {
        ("zero", _) => RidgeSchedule::zero(),
        ("power", Some(b)) => RidgeSchedule::power_law(b, cfg.variant)?,
        ("exp", Some(b)) => RidgeSchedule::exp_law(b)?,
        ("power" | "exp", None) => return Err(CliError::Config(format!("ridge.kind = {kind} needs ridge.b"))),
        _ => return Err(invalid("ridge.kind", &kind, "power, exp or zero")),
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text_round_trips() {
        let cfg = SweepConfig { seed: 17, bounds: true, ..SweepConfig::default() };
        assert_eq!(parse_config(&cfg.canonical_text()).unwrap(), cfg);
        let zero = SweepConfig { schedule: RidgeSchedule::zero(), ..SweepConfig::default() };
        assert_eq!(parse_config(&zero.canonical_text()).unwrap(), zero);
    }

    #[test]
    fn comments_and_defaults() {
        let cfg = parse_config("# reference\nmodel.p = 500  # trailing\n\nsweep.n_grid = 10, 20,40\n").unwrap();
        assert_eq!(cfg.p, 500);
        assert_eq!(cfg.n_grid, vec![10, 20, 40]);
        assert_eq!(cfg.replicates, SweepConfig::default().replicates);
    }

    #[test]
    fn rejections_are_named() {
        let cases = [
            "model.q = 1",
            "model.a = 1\nmodel.a = 2",
            "model.a = one",
            "model.a = 0",
            "model.family = cubic",
            "ridge.kind = power\nridge.b =",
            "ridge.kind = linear",
            "sweep.n_grid = 200,100",
            "sweep.n_grid = 100,3000",
            "sweep.replicates = 0",
            "noise.sigma2 = -1",
            "bounds.enabled = yes",
            "bounds.delta = 1.5",
            "seed = -4",
            "model.family = exp",
            "just words",
        ];
        for text in cases {
            assert!(parse_config(text).is_err(), "{text}");
        }
    }
}
