use std::path::PathBuf;

use crate::error::{Error, Result};

/// Overrides for an experiment run, read from `key = value` lines.
///
/// ```text
/// # comments and blank lines are ignored
/// schemes = cs2, tw2
/// quick = true
/// resolutions = 100, 200, 400
/// courant = 0.5
/// t_end = 1
/// partition = I2:abs(x-0.25)<=1/8 || abs(x-0.75)<=1/8
/// threshold = 0.125
/// out = results
/// ```
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub schemes: Option<Vec<String>>,
    pub quick: bool,
    pub resolutions: Option<Vec<usize>>,
    pub courant: Option<Vec<f64>>,
    pub t_end: Option<f64>,
    pub partition: Option<String>,
    pub threshold: Option<f64>,
    pub out: Option<PathBuf>,
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Config(format!("bad value `{s}` for `{key}`"))))
        .collect()
}

fn single<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "schemes" => self.schemes = Some(list(key, value)?),
            "quick" => self.quick = single(key, value)?,
            "resolutions" => self.resolutions = Some(list(key, value)?),
            "courant" => self.courant = Some(list(key, value)?),
            "t_end" => self.t_end = Some(single(key, value)?),
            "partition" => self.partition = Some(value.to_string()),
            "threshold" => self.threshold = Some(single(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Configured schemes, or `default` when none are set.
    pub fn schemes_or(&self, default: &[&str]) -> Vec<String> {
        match &self.schemes {
            Some(s) => s.iter().map(|x| x.to_ascii_uppercase()).collect(),
            None => default.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Configured resolutions, or `default` (halved in quick mode).
    pub fn resolutions_or(&self, default: &[usize]) -> Vec<usize> {
        match &self.resolutions {
            Some(r) => r.clone(),
            None if self.quick => default.iter().map(|m| m / 2).collect(),
            None => default.to_vec(),
        }
    }

    pub fn courant_or(&self, default: &[f64]) -> Vec<f64> {
        self.courant.clone().unwrap_or_else(|| default.to_vec())
    }
}
