//! Flat `key = value` configuration files mirroring the command-line flags.
//!
//! ```text
//! # comment
//! problem = sod
//! n = 400
//! cfl = 0.25
//! ```

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::driver::RunOptions;

pub const KEYS: [&str; 11] = [
    "problem", "n", "t-end", "cfl", "theta", "k", "alpha", "beta", "gate", "out", "floor",
];

/// Parses the file into key/value pairs. Underscores in keys are accepted as
/// dashes; later duplicates win.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        out.insert(key, value.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

/// Applies one solver option. Keys that do not belong to [`RunOptions`]
/// (`problem`, `out`) are ignored here.
pub fn apply_option(opts: &mut RunOptions, key: &str, value: &str) -> Result<()> {
    match key {
        "n" => opts.n = parse(key, value)?,
        "t-end" => opts.t_end = Some(parse(key, value)?),
        "cfl" => opts.cfl = parse(key, value)?,
        "theta" => opts.theta = parse(key, value)?,
        "k" => opts.k = Some(parse(key, value)?),
        "alpha" => opts.alpha = Some(value.parse()?),
        "beta" => opts.beta = parse(key, value)?,
        "gate" => opts.gate = value.parse()?,
        "floor" => opts.floor = parse(key, value)?,
        "problem" | "out" => {}
        _ => return Err(Error::Config(format!("unknown key `{key}`"))),
    }
    Ok(())
}
