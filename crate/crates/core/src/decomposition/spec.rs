//! Textual partition specifications used by the CLI and config files.
//!
//! ```text
//! [I1:|I2:]ranges:12-37,62-87        explicit zero-based inclusive index ranges
//! [I1:|I2:]<predicate in x, y>       e.g. abs(x-0.5)+abs(y-0.5)<=1/3
//! dynamic:burgers:threshold=0.125    I1 = { i : u_i < threshold }, per step
//! ```
//!
//! The optional prefix names the region receiving the matched cells
//! (default `I1`); all other cells go to the other region.

use std::fmt;

use super::{CellPartition, Predicate};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PartitionRule {
    Ranges(Vec<(usize, usize)>),
    Predicate(Predicate),
    DynamicBurgers { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    /// Zero-based region receiving the matched cells.
    pub region: usize,
    pub rule: PartitionRule,
}

fn spec_err(spec: &str, msg: impl Into<String>) -> Error {
    Error::PartitionSpec { spec: spec.to_string(), msg: msg.into() }
}

impl PartitionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if let Some(rest) = trimmed.strip_prefix("dynamic:") {
            let rest = rest
                .strip_prefix("burgers:")
                .ok_or_else(|| spec_err(text, "only `dynamic:burgers:` is supported"))?;
            let value = rest
                .strip_prefix("threshold=")
                .ok_or_else(|| spec_err(text, "expected `threshold=<value>`"))?;
            let threshold = value
                .trim()
                .parse()
                .map_err(|_| spec_err(text, format!("bad threshold `{value}`")))?;
            return Ok(Self { region: 0, rule: PartitionRule::DynamicBurgers { threshold } });
        }
        let (region, body) = match trimmed.split_once(':') {
            Some(("I1", body)) => (0, body),
            Some(("I2", body)) => (1, body),
            _ => (0, trimmed),
        };
        let rule = if let Some(list) = body.strip_prefix("ranges:") {
            let mut ranges = Vec::new();
            for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (lo, hi) = item.split_once('-').unwrap_or((item, item));
                let lo: usize = lo.trim().parse().map_err(|_| spec_err(text, format!("bad range `{item}`")))?;
                let hi: usize = hi.trim().parse().map_err(|_| spec_err(text, format!("bad range `{item}`")))?;
                if hi < lo {
                    return Err(spec_err(text, format!("empty range `{item}`")));
                }
                ranges.push((lo, hi));
            }
            PartitionRule::Ranges(ranges)
        } else {
            PartitionRule::Predicate(Predicate::parse(body).map_err(|e| spec_err(text, e.0))?)
        };
        Ok(Self { region, rule })
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self.rule, PartitionRule::DynamicBurgers { .. })
    }

    /// Evaluates a static rule on cells with the given center coordinates
    /// (`y` is ignored in 1D).
    pub fn cell_partition(&self, centers: &[(f64, f64)]) -> Result<CellPartition> {
        let m = centers.len();
        let matched: Vec<bool> = match &self.rule {
            PartitionRule::Ranges(ranges) => {
                if let Some(&(_, hi)) = ranges.iter().find(|&&(_, hi)| hi >= m) {
                    return Err(spec_err(&self.to_string(), format!("index {hi} out of range for {m} cells")));
                }
                (0..m).map(|i| ranges.iter().any(|&(lo, hi)| lo <= i && i <= hi)).collect()
            }
            PartitionRule::Predicate(p) => centers.iter().map(|&(x, y)| p.holds(x, y)).collect(),
            PartitionRule::DynamicBurgers { .. } => {
                return Err(spec_err(&self.to_string(), "dynamic rules depend on the state"));
            }
        };
        let region = self.region;
        Ok(CellPartition::two_region(m, |i| matched[i] == (region == 1)))
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = if self.region == 1 { "I2:" } else { "I1:" };
        match &self.rule {
            PartitionRule::Ranges(r) => {
                let items: Vec<String> = r.iter().map(|(a, b)| format!("{a}-{b}")).collect();
                write!(f, "{prefix}ranges:{}", items.join(","))
            }
            PartitionRule::Predicate(p) => write!(f, "{prefix}{}", p.source()),
            PartitionRule::DynamicBurgers { threshold } => {
                write!(f, "dynamic:burgers:threshold={threshold}")
            }
        }
    }
}
