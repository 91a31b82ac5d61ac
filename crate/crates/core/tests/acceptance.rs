//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prk::analysis::{build_error_operators, predicted_local_error, solve_w, LinearSplitting};
use prk::decomposition::{CellPartition, FluxSplit, LinearSplit, PartitionSpec};
use prk::harness::{burgers_run, convergence_table, refined_upwind, w_study, Decomposition, SMOOTH_PARTITION};
use prk::spatial::{Advection1D, Boundary, Grid1D, SemiDiscreteProblem, Upwind1D};
use prk::{builtin_tableau, Stepper64};

type Outcome = Result<String, String>;

const RESOLUTIONS: [usize; 4] = [100, 200, 400, 800];

// Reference errors of the smooth advection test, (max, L1) per resolution.
const CELL_TABLE: [(&str, [f64; 4], [f64; 4]); 3] = [
    ("CS2", [8.22e-4, 2.75e-4, 1.46e-4, 8.37e-5], [2.85e-4, 7.81e-5, 2.09e-5, 5.73e-6]),
    ("TW2", [3.12e-4, 8.04e-5, 2.02e-5, 5.05e-6], [1.98e-4, 5.12e-5, 1.28e-5, 3.21e-6]),
    ("SH2", [3.13e-4, 8.06e-5, 2.02e-5, 5.05e-6], [1.99e-4, 5.13e-5, 1.28e-5, 3.21e-6]),
];

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn budget(start: Instant, limit: Duration, detail: &mut String) -> bool {
    let used = start.elapsed();
    detail.push_str(&format!("; {:.2}s (limit {}s)", used.as_secs_f64(), limit.as_secs()));
    used <= limit
}

fn slope(a: f64, b: f64) -> f64 {
    (a / b).log2()
}

fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

fn random_matrix(m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0))
}

/// `exp(A)` by scaling and squaring of a 20-term Taylor series.
fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    let norm = a.abs().row_sum().max();
    let squarings = (norm.log2().ceil().max(0.0) as i32) + 4;
    let scaled = a / 2f64.powi(squarings);
    let mut term = DMatrix::identity(m, m);
    let mut sum = DMatrix::identity(m, m);
    for k in 1..=20 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn tableau_properties() -> Outcome {
    let start = Instant::now();
    let expected = [
        ("OS1", 1, 0, true, false),
        ("TW1", 1, 1, false, true),
        ("TW2", 2, 1, false, true),
        ("CS2", 2, 0, true, false),
        ("SH2", 2, 1, false, true),
    ];
    let mut bad = Vec::new();
    for (name, p, q, cons, consistent) in expected {
        let props = builtin_tableau(name).unwrap().properties();
        let got = (props.classical_order, props.stage_order, props.conservative, props.internally_consistent);
        if got != (p, q, cons, consistent) {
            bad.push(format!("{name}: got {got:?}"));
        }
    }
    let mut detail = if bad.is_empty() { "(p, q, conservative, consistent) match for all five".into() } else { bad.join(", ") };
    let fast = budget(start, Duration::from_secs(1), &mut detail);
    check(bad.is_empty() && fast, detail)
}

fn cell_based_table() -> Outcome {
    let start = Instant::now();
    let spec = PartitionSpec::parse(SMOOTH_PARTITION).unwrap();
    let schemes: Vec<String> = CELL_TABLE.iter().map(|r| r.0.to_string()).collect();
    let report = convergence_table(Decomposition::Cell, &schemes, &RESOLUTIONS, 0.5, 1.0, &spec).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    let mut worst: f64 = 1.0;
    for ((name, linf, l1), orders) in CELL_TABLE.iter().zip([(1, 2), (2, 2), (2, 2)]) {
        let rows = report.group(name, "cell", 0.5);
        for (i, r) in rows.iter().enumerate() {
            for (got, want) in [(r.err_linf, linf[i]), (r.err_l1, l1[i])] {
                let f = (got / want).max(want / got);
                worst = worst.max(f);
                ok &= f <= 2.0;
            }
        }
        let n = rows.len();
        let got = (
            slope(rows[n - 2].err_linf, rows[n - 1].err_linf).round() as i64,
            slope(rows[n - 2].err_l1, rows[n - 1].err_l1).round() as i64,
        );
        ok &= got == orders;
        parts.push(format!("{name} {got:?}"));
    }
    let mut detail = format!("orders {}; worst magnitude factor {worst:.3}", parts.join(", "));
    ok &= budget(start, Duration::from_secs(300), &mut detail);
    check(ok, detail)
}

fn flux_based_table() -> Outcome {
    let start = Instant::now();
    let spec = PartitionSpec::parse(SMOOTH_PARTITION).unwrap();
    let schemes = vec!["CS2".to_string(), "TW2".to_string(), "SH2".to_string()];
    let report = convergence_table(Decomposition::Flux, &schemes, &RESOLUTIONS, 0.5, 1.0, &spec).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, orders) in [("CS2", (0, 1)), ("TW2", (1, 2)), ("SH2", (1, 2))] {
        let rows = report.group(name, "flux", 0.5);
        let n = rows.len();
        let got = (
            slope(rows[n - 2].err_linf, rows[n - 1].err_linf).round() as i64,
            slope(rows[n - 2].err_l1, rows[n - 1].err_l1).round() as i64,
        );
        ok &= got == orders;
        parts.push(format!("{name} {got:?}"));
    }
    let plateau: Vec<f64> = report.group("CS2", "flux", 0.5).iter().map(|r| r.err_linf).collect();
    let flat = plateau.iter().all(|&e| (3.5e-2 / 2.0..=3.5e-2 * 2.0).contains(&e));
    ok &= flat;
    let shown: Vec<String> = plateau.iter().map(|e| format!("{e:.3e}")).collect();
    let mut detail = format!("orders {}; CS2 max errors [{}]", parts.join(", "), shown.join(", "));
    ok &= budget(start, Duration::from_secs(300), &mut detail);
    check(ok, detail)
}

fn flux_split_closed_form() -> Outcome {
    // coarse cells 0..=4, fine cells 5..; face i+1/2 follows cell i+1, so
    // cell 4 has its left face coarse and its right face fine
    let m = 12;
    let dx = 1.0 / m as f64;
    let up = Upwind1D::new(Grid1D::uniform(m, Boundary::homogeneous_inflow())).unwrap();
    let cells = CellPartition::two_region(m, |i| i >= 5);
    let split = FluxSplit::from_cells(&up, &cells).unwrap();
    let u0: Vec<f64> = (0..m).map(|j| (3.0 * (j as f64 + 0.5) * dx).sin() + 1.5).collect();
    let mut worst: f64 = 0.0;
    for nu in [0.2, 0.4, 0.8] {
        let mut u = u0.clone();
        Stepper64::new(&builtin_tableau("OS1").unwrap()).step(&split, 0.0, nu * dx, &mut u).unwrap();
        let i = 4;
        let expect = u0[i] + nu * (u0[i - 1] - u0[i]) + 0.25 * nu * nu * u0[i];
        worst = worst.max((u[i] - expect).abs());
    }
    check(worst <= 1e-14, format!("max deviation {worst:.2e} at the interface cell (nu = 0.2, 0.4, 0.8)"))
}

fn os1_w_closed_form() -> Outcome {
    let tab = builtin_tableau("OS1").unwrap();
    let mut worst: f64 = 0.0;
    let mut bound_ok = true;
    let mut detail = String::new();
    for m in [20, 60, 100] {
        let (p, part, h) = refined_upwind(m).unwrap();
        for nu in [0.25, 0.5, 0.9] {
            let l = p.matrix();
            let dt = nu * h;
            let ls = LinearSplitting::cell_based(&l, &part, dt).unwrap();
            let w = solve_w(&tab, &ls, &part).unwrap();
            let i1 = DMatrix::from_diagonal(&DVector::from_fn(m, |i, _| if part.region(i) == 0 { 1.0 } else { 0.0 }));
            let i2 = DMatrix::identity(m, m) - &i1;
            let z2 = &i2 * &l * dt;
            let closed = (DMatrix::identity(m, m) + &z2 * 0.25).try_inverse().unwrap() * &i1;
            worst = worst.max(max_diff(&(&w.w * 4.0), &closed));
            let theta = z2.abs().row_sum().max() / 4.0;
            if theta < 1.0 {
                bound_ok &= w.norm <= 1.0 / (1.0 - theta);
            }
            if m == 100 && nu == 0.9 {
                detail = format!(
                    "m = 100, nu = 0.9: ||W|| = {:.4}, ||(I + Z2/4)^-1 I1|| = {:.4}, 1/(1 - theta) = {:.4}",
                    w.norm,
                    closed.abs().row_sum().max(),
                    1.0 / (1.0 - theta)
                );
            }
        }
    }
    check(
        worst <= 1e-12 && bound_ok,
        format!("max |4W - (I + Z2/4)^-1 I1| = {worst:.2e}; norm bound holds: {bound_ok}; {detail}"),
    )
}

fn w_norm_growth() -> Outcome {
    let start = Instant::now();
    let tabs = vec![("TW2".to_string(), builtin_tableau("TW2").unwrap())];
    let ms = [20, 40, 80, 160, 320, 640];
    let rows = w_study(&tabs, &ms, &[0.5, 1.0]).unwrap();
    let norms = |nu: f64| -> Vec<(usize, f64)> {
        rows.iter().filter(|r| r.nu == nu).map(|r| (r.m, r.norm_w.expect("well conditioned"))).collect()
    };
    let ratios = |v: &[(usize, f64)]| -> Vec<f64> {
        v.windows(2).filter(|w| w[0].0 >= 80).map(|w| w[1].1 / w[0].1).collect()
    };
    let (half, one) = (ratios(&norms(0.5)), ratios(&norms(1.0)));
    let mut ok = half.iter().all(|&r| r <= 1.2) && one.iter().all(|&r| (1.6..=2.4).contains(&r));
    let mut detail = format!("nu = 0.5 ratios {half:.3?}; nu = 1 ratios {one:.3?}");
    ok &= budget(start, Duration::from_secs(120), &mut detail);
    check(ok, detail)
}

fn mass(u: &[f64], h: &[f64]) -> f64 {
    u.iter().zip(h).map(|(a, b)| a * b).sum()
}

fn conservation_dichotomy() -> Outcome {
    // one refined band off the symmetry axes of sin^2, so interface fluxes
    // into the band do not cancel
    let m = 50;
    let nu = 0.5;
    let dt = nu / m as f64;
    let p = Advection1D::<f64>::new(m).unwrap();
    let h = p.cell_measures();
    let u0 = p.initial();
    let m0 = mass(&u0, &h);
    let cells = PartitionSpec::parse("I2:abs(x-0.3)<=1/8").unwrap().cell_partition(&p.centers()).unwrap();
    let drift = |scheme: &str, dec: Decomposition| -> f64 {
        let mut st = Stepper64::new(&builtin_tableau(scheme).unwrap());
        let mut u = u0.clone();
        let mut worst: f64 = 0.0;
        let cell = prk::decomposition::CellSplit::new(&p, cells.clone()).unwrap();
        let flux = FluxSplit::from_cells(&p, &cells).unwrap();
        for n in 0..100 {
            let t = n as f64 * dt;
            match dec {
                Decomposition::Flux => st.step(&flux, t, dt, &mut u).unwrap(),
                _ => st.step(&cell, t, dt, &mut u).unwrap(),
            }
            worst = worst.max((mass(&u, &h) - m0).abs() / m0);
        }
        worst
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for scheme in ["OS1", "TW1", "TW2", "CS2", "SH2"] {
        let f = drift(scheme, Decomposition::Flux);
        let c = drift(scheme, Decomposition::Cell);
        ok &= f <= 1e-10;
        ok &= if matches!(scheme, "OS1" | "CS2") { c <= 1e-12 } else { c >= 1e-6 };
        parts.push(format!("{scheme} flux {f:.1e} cell {c:.1e}"));
    }
    check(ok, parts.join("; "))
}

/// Rightmost downward crossing of `u = 1/2` in `x > 1/2`, linearly
/// interpolated.
fn shock_x(x: &[f64], u: &[f64]) -> f64 {
    (1..u.len())
        .rev()
        .find(|&j| x[j] > 0.5 && u[j - 1] >= 0.5 && u[j] < 0.5)
        .map(|j| x[j - 1] + (x[j] - x[j - 1]) * (u[j - 1] - 0.5) / (u[j - 1] - u[j]))
        .unwrap_or(f64::NAN)
}

fn burgers_shock_speed() -> Outcome {
    // unit jump into zero: Rankine-Hugoniot speed 1/2, so x = 1/2 + t/2
    let t_end = 0.5;
    let exact = 0.5 + 0.5 * t_end;
    let mut ok = true;
    let mut parts = Vec::new();
    for (scheme, m) in [("CS2", 2000), ("CS2", 4000), ("TW2", 2000), ("TW2", 4000), ("SH2", 2000), ("SH2", 4000)] {
        let run = burgers_run(Some(scheme), m, 0.125, t_end).unwrap();
        let d = (shock_x(&run.x, &run.u) - exact) * m as f64;
        match (scheme, m) {
            ("CS2", _) => ok &= d.abs() <= 5.0,
            (_, 4000) => ok &= d.abs() >= 10.0,
            _ => {}
        }
        parts.push(format!("{scheme}@{m} {d:+.1}"));
    }
    check(ok, format!("displacement in cells: {}", parts.join(", ")))
}

fn reduction_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fe = |l: &DMatrix<f64>, u: &DVector<f64>, dt: f64| u + l * u * dt;
    let etr = |l: &DMatrix<f64>, u: &DVector<f64>, dt: f64| {
        let k1 = l * u;
        let k2 = l * (u + &k1 * dt);
        u + (k1 + k2) * (0.5 * dt)
    };
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let m = 2 + trial % 19;
        let l = random_matrix(m, &mut rng);
        let u0 = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        let dt = 0.1;
        for scheme in ["OS1", "TW1", "TW2", "CS2", "SH2"] {
            let base: &dyn Fn(&DMatrix<f64>, &DVector<f64>, f64) -> DVector<f64> =
                if matches!(scheme, "OS1" | "TW1") { &fe } else { &etr };
            for region in 0..2 {
                let split = LinearSplit::cell_based(&l, &CellPartition::uniform(m, 2, region)).unwrap();
                let mut u: Vec<f64> = u0.iter().copied().collect();
                Stepper64::new(&builtin_tableau(scheme).unwrap()).step(&split, 0.0, dt, &mut u).unwrap();
                let expect = if region == 0 { base(&l, &u0, dt) } else { base(&l, &base(&l, &u0, dt / 2.0), dt / 2.0) };
                worst = worst.max(u.iter().zip(expect.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            }
        }
    }
    check(worst <= 1e-14, format!("max deviation {worst:.2e} over 20 systems, m <= 20, both trivial partitions"))
}

fn local_error_expansion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = 10;
    let l = random_matrix(m, &mut rng);
    let part = CellPartition::two_region(m, |i| i % 3 == 1);
    let u0 = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    let split = LinearSplit::cell_based(&l, &part).unwrap();
    let ops_k: Vec<DMatrix<f64>> = split.operators().to_vec();
    let dts = [0.08, 0.04, 0.02, 0.01];
    let mut ok = true;
    let mut parts = Vec::new();
    for scheme in ["TW1", "TW2", "CS2", "SH2"] {
        let tab = builtin_tableau(scheme).unwrap();
        let p = tab.properties().classical_order;
        let mut defects = Vec::new();
        for terms in 1..=3 {
            let mut res = Vec::new();
            for &dt in &dts {
                let exact = expm(&(&l * dt)) * &u0;
                let mut u: Vec<f64> = u0.iter().copied().collect();
                Stepper64::new(&tab).step(&split, 0.0, dt, &mut u).unwrap();
                let defect = &exact - DVector::from_vec(u);
                if terms == 1 {
                    defects.push(defect.abs().max());
                }
                let ls = LinearSplitting::from_operators(&ops_k, dt).unwrap();
                let ops = build_error_operators(&tab, &ls, terms).unwrap();
                // phi_k^{(j)} = L_k L^j u for the linear autonomous problem
                let mut lj = u0.clone();
                let mut phi = Vec::new();
                for _ in 0..terms {
                    phi.push(ops_k.iter().map(|lk| lk * &lj).collect::<Vec<_>>());
                    lj = &l * lj;
                }
                let pred = predicted_local_error(&ops, dt, &phi);
                res.push((defect - pred).abs().max());
            }
            // d_{j,k} = O(dt^{p+1-j}), so dropping the terms beyond l
            // leaves O(dt^{max(l, p) + 1})
            let fit = fitted_slope(&dts, &res);
            let want = (terms.max(p) + 1) as f64;
            ok &= (fit - want).abs() <= 0.2;
            parts.push(format!("{scheme} l={terms} {fit:.2}/{want}"));
        }
        let fit = fitted_slope(&dts, &defects);
        ok &= (fit - (p + 1) as f64).abs() <= 0.2;
        parts.push(format!("{scheme} defect {fit:.2}/{}", p + 1));
    }
    check(ok, format!("fitted/predicted slopes: {}", parts.join(", ")))
}

/// Least-squares slope of `log e` against `log dt`.
fn fitted_slope(dts: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("tableau properties", tableau_properties),
        ("cell-based convergence table", cell_based_table),
        ("flux-based convergence table", flux_based_table),
        ("flux split one-step closed form", flux_split_closed_form),
        ("OS1 W closed form and bound", os1_w_closed_form),
        ("TW2 ||W|| growth", w_norm_growth),
        ("conservation dichotomy", conservation_dichotomy),
        ("Burgers shock position", burgers_shock_speed),
        ("reduction property", reduction_property),
        ("local error expansion", local_error_expansion),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
