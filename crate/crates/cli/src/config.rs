//! `key = value` configuration files. Command-line flags take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};

pub const KEYS: &[&str] = &[
    "p",
    "M",
    "y",
    "n",
    "seed",
    "threads",
    "out",
    "format",
    "p_grid",
    "M_grid",
    "methods",
    "tolerance",
    "mode",
    "lambda",
    "env",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| CliError::Input { path: path.to_path_buf(), source })?;
        text.parse()
    }

    /// `flag` if given, else the configured value for `key`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Usage(format!("config key {key} = {v:?}: {e}"))))
            .transpose()
    }
}

impl FromStr for Config {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(CliError::Usage(format!("config line {}: unknown key {k:?}", i + 1)));
            }
            values.insert(k.to_string(), v.to_string());
        }
        Ok(Self { values })
    }
}

/// Comma-separated list, with `a:b:step` ranges allowed for numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl FromStr for List<f64> {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let nums: Vec<f64> = part
                .split(':')
                .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
                .collect::<std::result::Result<_, _>>()?;
            match nums[..] {
                [x] => out.push(x),
                [a, b, step] if step > 0.0 && b >= a => {
                    let k = ((b - a) / step + 1e-9).floor() as usize;
                    out.extend((0..=k).map(|i| a + i as f64 * step));
                }
                _ => return Err(format!("bad range {part:?}; expected start:end:step")),
            }
        }
        if out.is_empty() {
            return Err("empty list".into());
        }
        Ok(List(out))
    }
}

impl FromStr for List<crossing::Method> {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v: Vec<crossing::Method> = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|m| m.parse().map_err(|e: crossing::Error| e.to_string()))
            .collect::<std::result::Result<_, _>>()?;
        if v.is_empty() {
            return Err("empty list".into());
        }
        Ok(List(v))
    }
}
