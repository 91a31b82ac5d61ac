//! Experiment drivers, report formatting and run configuration.

mod config;
mod experiments;
mod report;

pub use config::RunConfig;
pub use experiments::*;
pub use report::{estimate_order, ExperimentReport, OrderEstimate, ReportRow};

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How a right-hand side is split between the two regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decomposition {
    /// Single part, for one-part tableaus.
    None,
    /// `F_k = I_k F`.
    Cell,
    /// Fluxes are assigned to regions and differenced per part.
    Flux,
}

impl Decomposition {
    pub fn as_str(self) -> &'static str {
        match self {
            Decomposition::None => "none",
            Decomposition::Cell => "cell",
            Decomposition::Flux => "flux",
        }
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Decomposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "unsplit" => Ok(Decomposition::None),
            "cell" | "cell-based" => Ok(Decomposition::Cell),
            "flux" | "flux-based" => Ok(Decomposition::Flux),
            other => Err(Error::Config(format!("unknown decomposition `{other}`"))),
        }
    }
}

/// Test problems selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Adv1d,
    Burgers,
    Adv2d,
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adv1d" => Ok(Problem::Adv1d),
            "burgers" => Ok(Problem::Burgers),
            "adv2d" => Ok(Problem::Adv2d),
            other => Err(Error::Config(format!("unknown problem `{other}`"))),
        }
    }
}

/// One named assertion of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

/// Files and checks produced by one experiment.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, text) in &self.files {
            std::fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}

/// Errors of one scheme at `m = 100, 200, 400, 800`, used as reference
/// magnitudes by the convergence experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedErrors {
    pub scheme: &'static str,
    pub linf: [f64; 4],
    pub l1: [f64; 4],
    /// Rounded observed orders `(max norm, L1)`.
    pub orders: (i64, i64),
}

pub const EXPECTED_RESOLUTIONS: [usize; 4] = [100, 200, 400, 800];

/// Smooth advection, cell-based split, `nu = 1/2`, `T = 1`.
pub const EXPECTED_CELL: [ExpectedErrors; 3] = [
    ExpectedErrors {
        scheme: "CS2",
        linf: [8.22e-4, 2.75e-4, 1.46e-4, 8.37e-5],
        l1: [2.85e-4, 7.81e-5, 2.09e-5, 5.73e-6],
        orders: (1, 2),
    },
    ExpectedErrors {
        scheme: "TW2",
        linf: [3.12e-4, 8.04e-5, 2.02e-5, 5.05e-6],
        l1: [1.98e-4, 5.12e-5, 1.28e-5, 3.21e-6],
        orders: (2, 2),
    },
    ExpectedErrors {
        scheme: "SH2",
        linf: [3.13e-4, 8.06e-5, 2.02e-5, 5.05e-6],
        l1: [1.99e-4, 5.13e-5, 1.28e-5, 3.21e-6],
        orders: (2, 2),
    },
];

/// Same problem with the flux-based split.
pub const EXPECTED_FLUX: [ExpectedErrors; 3] = [
    ExpectedErrors {
        scheme: "CS2",
        linf: [3.98e-2, 3.65e-2, 3.54e-2, 3.52e-2],
        l1: [4.43e-3, 1.48e-3, 5.12e-4, 2.09e-4],
        orders: (0, 1),
    },
    ExpectedErrors {
        scheme: "TW2",
        linf: [8.20e-4, 4.20e-4, 2.45e-4, 1.31e-4],
        l1: [2.45e-4, 6.57e-5, 1.80e-5, 5.08e-6],
        orders: (1, 2),
    },
    ExpectedErrors {
        scheme: "SH2",
        linf: [3.73e-4, 1.30e-4, 6.69e-5, 3.77e-5],
        l1: [2.07e-4, 5.29e-5, 1.36e-5, 3.49e-6],
        orders: (1, 2),
    },
];

/// Level of the CS2 max-norm error plateau under the flux-based split.
pub const CS2_FLUX_PLATEAU: f64 = 3.5e-2;

pub fn expected_errors(decomposition: Decomposition, scheme: &str) -> Option<&'static ExpectedErrors> {
    let table: &'static [ExpectedErrors] = match decomposition {
        Decomposition::Cell => &EXPECTED_CELL,
        Decomposition::Flux => &EXPECTED_FLUX,
        Decomposition::None => return None,
    };
    table.iter().find(|e| e.scheme.eq_ignore_ascii_case(scheme))
}

/// `a` and `b` agree within a factor `f`.
pub fn within_factor(a: f64, b: f64, f: f64) -> bool {
    a > 0.0 && b > 0.0 && a <= f * b && b <= f * a
}
