//! Flat `key=value` config files for [`SimConfig`].
//!
//! ```text
//! # comments and blank lines are ignored
//! num_nodes = 26
//! ro1_freq = 10000
//! ro1_sigma = 0.02
//! ```
//!
//! Unknown keys and repeated keys are errors. Keys not present keep their
//! default values.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::sim::SimConfig;
use crate::{Error, Result};

pub const KEYS: [&str; 16] = [
    "num_nodes",
    "ro1_freq",
    "ro1_sigma",
    "ro2_freq",
    "ro2_sigma",
    "prbs_order",
    "timer_bits",
    "seed_bits",
    "pad_zero_bits",
    "comm_duration",
    "idle_duration",
    "stim_duration",
    "cycle_period",
    "sim_duration",
    "rng_seed",
    "tick_accurate",
];

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::Parse {
        line,
        message: format!("{key}: {e}"),
    })
}

/// Applies one `key = value` assignment to `cfg`.
pub fn apply(cfg: &mut SimConfig, key: &str, value: &str, line: usize) -> Result<()> {
    match key {
        "num_nodes" => cfg.num_nodes = parse_value(key, value, line)?,
        "ro1_freq" => cfg.ro1.nominal_freq = parse_value(key, value, line)?,
        "ro1_sigma" => cfg.ro1.sigma_fraction = parse_value(key, value, line)?,
        "ro2_freq" => cfg.ro2.nominal_freq = parse_value(key, value, line)?,
        "ro2_sigma" => cfg.ro2.sigma_fraction = parse_value(key, value, line)?,
        "prbs_order" => cfg.prbs_order = parse_value(key, value, line)?,
        "timer_bits" => cfg.timer_bits = parse_value(key, value, line)?,
        "seed_bits" => cfg.seed_bits = parse_value(key, value, line)?,
        "pad_zero_bits" => cfg.pad_zero_bits = parse_value(key, value, line)?,
        "comm_duration" => cfg.comm_duration = parse_value(key, value, line)?,
        "idle_duration" => cfg.idle_duration = parse_value(key, value, line)?,
        "stim_duration" => cfg.stim_duration = parse_value(key, value, line)?,
        "cycle_period" => cfg.cycle_period = parse_value(key, value, line)?,
        "sim_duration" => cfg.sim_duration = parse_value(key, value, line)?,
        "rng_seed" => cfg.rng_seed = parse_value(key, value, line)?,
        "tick_accurate" => cfg.tick_accurate = parse_value(key, value, line)?,
        _ => {
            return Err(Error::Parse {
                line,
                message: format!("unknown key {key:?}"),
            })
        }
    }
    Ok(())
}

/// Parses a config file on top of `base`. The result is not validated.
pub fn parse_onto(base: SimConfig, text: &str) -> Result<SimConfig> {
    let mut cfg = base;
    let mut seen = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected key=value, got {content:?}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if seen.contains(&key) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key {key:?}"),
            });
        }
        seen.push(key);
        apply(&mut cfg, key, value, line)?;
    }
    Ok(cfg)
}

pub fn parse(text: &str) -> Result<SimConfig> {
    parse_onto(SimConfig::default(), text)
}

/// Renders every key, in [`KEYS`] order.
pub fn to_config_string(cfg: &SimConfig) -> String {
    let values: [String; 16] = [
        cfg.num_nodes.to_string(),
        cfg.ro1.nominal_freq.to_string(),
        cfg.ro1.sigma_fraction.to_string(),
        cfg.ro2.nominal_freq.to_string(),
        cfg.ro2.sigma_fraction.to_string(),
        cfg.prbs_order.to_string(),
        cfg.timer_bits.to_string(),
        cfg.seed_bits.to_string(),
        cfg.pad_zero_bits.to_string(),
        cfg.comm_duration.to_string(),
        cfg.idle_duration.to_string(),
        cfg.stim_duration.to_string(),
        cfg.cycle_period.to_string(),
        cfg.sim_duration.to_string(),
        cfg.rng_seed.to_string(),
        cfg.tick_accurate.to_string(),
    ];
    let mut out = String::new();
    for (k, v) in KEYS.iter().zip(values) {
        writeln!(out, "{k} = {v}").unwrap();
    }
    out
}
