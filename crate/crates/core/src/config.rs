//! Per-site Hamiltonian parameters and their plain-text config format.
//!
//! ```text
//! # applies to every site
//! r = 1
//! s = 2
//! t = 1
//! beta = 0.3
//! # per-site override
//! beta3 = -0.2
//! ```
//!
//! Alternatively give angles directly with `alpha = pi/4` or `alpha1`, `alpha2`,
//! `alpha3`. A file uses either angles or `(r, s, t, beta)`, not both. Values
//! accept the same forms as [`parse_angle`].

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use crate::biortho::{BiorthoBasis, BiorthoError, SystemParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot parse {0:?} as a number")]
    BadNumber(String),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("site {site} is missing {key}")]
    Missing { site: usize, key: &'static str },
    #[error("config mixes angles with Hamiltonian parameters")]
    Mixed,
}

/// Parses a real number, optionally written with `pi`: `0.5`, `pi`, `-pi/2`,
/// `3pi/4`, `3*pi/4`, `2*pi`.
pub fn parse_angle(text: &str) -> Result<f64, ConfigError> {
    let bad = || ConfigError::BadNumber(text.to_string());
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, Some(d.parse::<f64>().map_err(|_| bad())?)),
        None => (t.as_str(), None),
    };
    let value = if let Some(prefix) = num.strip_suffix("pi") {
        let prefix = prefix.strip_suffix('*').unwrap_or(prefix);
        let factor = match prefix {
            "" | "+" => 1.0,
            "-" => -1.0,
            p => p.parse::<f64>().map_err(|_| bad())?,
        };
        factor * std::f64::consts::PI
    } else {
        num.parse::<f64>().map_err(|_| bad())?
    };
    let value = match den {
        Some(d) => value / d,
        None => value,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// Where one site's eigenbasis comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SiteSource {
    Alpha(f64),
    System(SystemParams),
}

impl SiteSource {
    pub fn basis(&self) -> Result<BiorthoBasis, BiorthoError> {
        match self {
            SiteSource::Alpha(a) => BiorthoBasis::from_alpha(*a),
            SiteSource::System(p) => BiorthoBasis::from_params(p),
        }
    }

    pub fn alpha(&self) -> Result<f64, BiorthoError> {
        match self {
            SiteSource::Alpha(a) => Ok(*a),
            SiteSource::System(p) => p.alpha(),
        }
    }

    /// True when the basis is fully described by its angle (`s = t`).
    pub fn is_balanced(&self) -> bool {
        match self {
            SiteSource::Alpha(_) => true,
            SiteSource::System(p) => p.s == p.t,
        }
    }
}

/// A parsed config file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    values: BTreeMap<String, f64>,
}

const SYSTEM_KEYS: [&str; 4] = ["r", "s", "t", "beta"];

fn split_key(key: &str) -> Option<(&str, Option<usize>)> {
    let base = key.trim_end_matches(|c: char| c.is_ascii_digit());
    let suffix = &key[base.len()..];
    if !(SYSTEM_KEYS.contains(&base) || base == "alpha") {
        return None;
    }
    if suffix.is_empty() {
        return Some((base, None));
    }
    suffix.parse().ok().filter(|&n| n >= 1).map(|n| (base, Some(n)))
}

impl FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, reason: "expected key = value".into() })?;
            let key = key.trim().to_ascii_lowercase();
            if split_key(&key).is_none() {
                return Err(ConfigError::UnknownKey(key));
            }
            values.insert(key, parse_angle(value)?);
        }
        let has_alpha = values.keys().any(|k| k.starts_with("alpha"));
        let has_system = values.keys().any(|k| !k.starts_with("alpha"));
        if has_alpha && has_system {
            return Err(ConfigError::Mixed);
        }
        Ok(Config { values })
    }
}

impl Config {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), ConfigError> {
        if split_key(key).is_none() {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        let is_alpha = key.starts_with("alpha");
        if self.values.keys().any(|k| k.starts_with("alpha") != is_alpha) {
            return Err(ConfigError::Mixed);
        }
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn lookup(&self, base: &str, site: usize) -> Option<f64> {
        self.get(&format!("{base}{site}")).or_else(|| self.get(base))
    }

    /// One source per site; missing angles default to 0.
    pub fn sites(&self, count: usize) -> Result<Vec<SiteSource>, ConfigError> {
        let uses_system = self.values.keys().any(|k| !k.starts_with("alpha"));
        (1..=count)
            .map(|site| {
                if !uses_system {
                    return Ok(SiteSource::Alpha(self.lookup("alpha", site).unwrap_or(0.0)));
                }
                let mut v = [0.0; 4];
                for (slot, key) in v.iter_mut().zip(SYSTEM_KEYS) {
                    *slot = self.lookup(key, site).ok_or(ConfigError::Missing { site, key })?;
                }
                Ok(SiteSource::System(SystemParams::new(v[0], v[1], v[2], v[3])))
            })
            .collect()
    }
}
