use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Convergence slopes estimated from errors on successively refined grids.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    /// `log2(e(m) / e(2m))`-style slopes between consecutive points.
    pub pairwise: Vec<f64>,
    /// Least-squares slope of `-log e` against `log m`.
    pub least_squares: f64,
}

impl OrderEstimate {
    /// Slope between the two finest grids.
    pub fn finest(&self) -> f64 {
        *self.pairwise.last().expect("at least one pair")
    }

    /// The finest-pair slope rounded to the nearest integer.
    pub fn rounded(&self) -> i64 {
        self.finest().round() as i64
    }
}

/// Orders from `(m, error)` pairs, `m` increasing. Pairwise slopes use
/// `log(e_i / e_{i+1}) / log(m_{i+1} / m_i)`, which is `log2` of the error
/// ratio for doubled grids.
pub fn estimate_order(points: &[(usize, f64)]) -> Result<OrderEstimate> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints);
    }
    let pairwise = points
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[1].0 as f64 / w[0].0 as f64).ln())
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| -p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(OrderEstimate { pairwise, least_squares: sxy / sxx })
}

/// One line of an experiment table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scheme: String,
    pub decomposition: String,
    pub m: usize,
    pub nu: f64,
    pub err_linf: f64,
    pub err_l1: f64,
    /// Slope against the previous (coarser) row of the same group.
    pub order_linf: Option<f64>,
    pub order_l1: Option<f64>,
    /// Relative change of the total mass over the run.
    pub mass_drift: f64,
    pub diverged: bool,
    /// Wall-clock seconds; not written to CSV so output stays reproducible.
    pub runtime: f64,
}

impl ReportRow {
    pub fn new(scheme: &str, decomposition: &str, m: usize, nu: f64) -> Self {
        Self {
            scheme: scheme.to_string(),
            decomposition: decomposition.to_string(),
            m,
            nu,
            err_linf: f64::NAN,
            err_l1: f64::NAN,
            order_linf: None,
            order_l1: None,
            mass_drift: f64::NAN,
            diverged: false,
            runtime: 0.0,
        }
    }
}

/// Per-resolution errors, observed orders and conservation drift of one
/// experiment, plus `key = value` metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn new(problem: &str) -> Self {
        Self { metadata: vec![("problem".into(), problem.into())], rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    /// Rows of one scheme/decomposition/Courant number, ordered by `m`.
    pub fn group(&self, scheme: &str, decomposition: &str, nu: f64) -> Vec<&ReportRow> {
        let mut rows: Vec<&ReportRow> = self
            .rows
            .iter()
            .filter(|r| r.scheme.eq_ignore_ascii_case(scheme) && r.decomposition == decomposition && r.nu == nu)
            .collect();
        rows.sort_by_key(|r| r.m);
        rows
    }

    /// Fills `order_linf` / `order_l1` from consecutive rows of each group.
    pub fn fill_orders(&mut self) {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.sort_by(|&a, &b| {
            let (ra, rb) = (&self.rows[a], &self.rows[b]);
            (&ra.scheme, &ra.decomposition)
                .cmp(&(&rb.scheme, &rb.decomposition))
                .then(ra.nu.total_cmp(&rb.nu))
                .then(ra.m.cmp(&rb.m))
        });
        for w in idx.windows(2) {
            let (a, b) = (&self.rows[w[0]], &self.rows[w[1]]);
            if a.scheme != b.scheme || a.decomposition != b.decomposition || a.nu != b.nu {
                continue;
            }
            let ratio = (b.m as f64 / a.m as f64).ln();
            let linf = (a.err_linf / b.err_linf).ln() / ratio;
            let l1 = (a.err_l1 / b.err_l1).ln() / ratio;
            self.rows[w[1]].order_linf = Some(linf);
            self.rows[w[1]].order_l1 = Some(l1);
        }
    }

    /// Order estimate of one group in the max norm (`l1 = false`) or the L1
    /// norm.
    pub fn order(&self, scheme: &str, decomposition: &str, nu: f64, l1: bool) -> Result<OrderEstimate> {
        let pts: Vec<(usize, f64)> = self
            .group(scheme, decomposition, nu)
            .iter()
            .map(|r| (r.m, if l1 { r.err_l1 } else { r.err_linf }))
            .collect();
        estimate_order(&pts)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str("scheme,decomposition,m,nu,err_linf,err_l1,order_linf,order_l1,mass_drift,status\n");
        let opt = |o: Option<f64>| o.map_or(String::new(), |v| format!("{v:.4}"));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6e},{:.6e},{},{},{:.3e},{}",
                r.scheme,
                r.decomposition,
                r.m,
                r.nu,
                r.err_linf,
                r.err_l1,
                opt(r.order_linf),
                opt(r.order_l1),
                r.mass_drift,
                if r.diverged { "diverged" } else { "ok" }
            );
        }
        out
    }
}
