//! Flat `key = value` configuration with `#` comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: cannot parse `{value}`: {message}")]
    Value {
        key: String,
        value: String,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Every accepted key with its default (`None`: no default).
pub const KEYS: &[(&str, Option<&str>)] = &[
    ("arms", None),
    ("horizon", None),
    ("trials", None),
    ("combos", Some("DAB:B-GLR+klUCB")),
    ("xi", None),
    ("instance", None),
    ("alpha0", Some("0.05")),
    ("gamma", Some("0.5")),
    ("threshold", Some("practical")),
    ("test_stride", Some("10")),
    ("split_stride", Some("5")),
    ("feed", Some("all")),
    ("change_scope", Some("all")),
    ("arm_model", Some("bernoulli")),
    ("arm_sigma", Some("1")),
    ("detector_sigma", Some("0.5")),
    ("ucb_sigma", Some("1")),
    ("moss_sigma", Some("1")),
    ("klucb_c", Some("3")),
    ("trajectory_points", Some("100")),
    ("seed", Some("0")),
    ("workers", None),
    ("c_d", Some("3")),
    ("c_m", Some("4")),
    ("bench_detectors", Some("B-GLR")),
    ("bench_thresholds", Some("practical")),
    ("bench_gaps", Some("0.2,0.4")),
    ("bench_horizon", None),
    ("bench_pre_window", None),
    ("bench_pre_mean", Some("0.5")),
    ("bench_placements", Some("2")),
    ("delta_f", None),
    ("delta_d", None),
    ("replay_combo", None),
    ("replay_xi", None),
    ("replay_trial", Some("0")),
    ("replay_check", None),
];

fn known(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(k, _)| *k)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<&'static str, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = known(key).ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        self.values.insert(key, value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override from the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("override `{pair}` is not key=value")))?;
        self.set(key.trim(), value.trim())
    }

    fn raw(&self, key: &'static str) -> Option<&str> {
        debug_assert!(known(key).is_some(), "undeclared key {key}");
        self.values
            .get(key)
            .map(String::as_str)
            .or_else(|| KEYS.iter().find(|(k, _)| *k == key).and_then(|(_, d)| *d))
    }

    pub fn has(&self, key: &'static str) -> bool {
        self.raw(key).is_some()
    }

    pub fn get<T: FromStr>(&self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get_opt(key)?.ok_or(ConfigError::Missing(key))
    }

    pub fn get_opt<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|v| parse_value(key, v)).transpose()
    }

    /// Comma-separated list; empty entries are dropped.
    pub fn list<T: FromStr>(&self, key: &'static str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key).ok_or(ConfigError::Missing(key))?;
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_value(key, s))
            .collect()
    }

    /// One of `choices`, returned as its position.
    pub fn choice(&self, key: &'static str, choices: &[&str]) -> Result<usize, ConfigError> {
        let v = self.raw(key).ok_or(ConfigError::Missing(key))?;
        choices
            .iter()
            .position(|c| *c == v)
            .ok_or_else(|| ConfigError::Value {
                key: key.to_string(),
                value: v.to_string(),
                message: format!("expected one of {}", choices.join(", ")),
            })
    }

    /// Every key that has a value, explicit or default, in declaration order.
    pub fn snapshot(&self) -> String {
        let mut out = String::from("# resolved configuration\n");
        for (key, _) in KEYS {
            if let Some(v) = self.raw(key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
        message: e.to_string(),
    })
}
