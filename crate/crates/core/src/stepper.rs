//! Explicit partitioned Runge-Kutta time stepping.

use crate::decomposition::{SplitRhs, Unsplit};
use crate::error::{Error, Result};
use crate::rhs::{mass, Rhs};
use crate::scalar::{Coefficient, Real};
use crate::tableau::{classical_rk4, PrkTableau};

/// States whose maximum norm exceeds this multiple of `max(1, |u_0|)` are
/// treated as diverged.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// One explicit partitioned Runge-Kutta method with its stage workspace.
///
/// Stage times use the abscissae `c` of the tableau for every part. Pairs
/// `(stage j, part k)` whose column `j` of `A_k` and entry `b_k[j]` are all
/// zero are never evaluated.
#[derive(Debug, Clone)]
pub struct PrkStepper<T> {
    /// `a[k][i][j]`
    a: Vec<Vec<Vec<T>>>,
    b: Vec<Vec<T>>,
    c: Vec<T>,
    /// `needed[j][k]`
    needed: Vec<Vec<bool>>,
    /// `stage_f[j][k] = F_k(t_n + c_j dt, v_j)`
    stage_f: Vec<Vec<Vec<T>>>,
    v: Vec<T>,
    steps_taken: usize,
}

impl<T: Real> PrkStepper<T> {
    pub fn new<C: Coefficient>(tableau: &PrkTableau<C>) -> Self {
        let conv = |x: &C| T::lit(x.to_f64());
        let r = tableau.parts();
        let s = tableau.stages();
        let a: Vec<Vec<Vec<T>>> = (0..r)
            .map(|k| tableau.a(k).iter().map(|row| row.iter().map(conv).collect()).collect())
            .collect();
        let b: Vec<Vec<T>> = (0..r).map(|k| tableau.b(k).iter().map(conv).collect()).collect();
        let c = tableau.c().iter().map(conv).collect();
        let needed = (0..s)
            .map(|j| {
                (0..r)
                    .map(|k| b[k][j] != T::zero() || (j + 1..s).any(|i| a[k][i][j] != T::zero()))
                    .collect()
            })
            .collect();
        Self {
            a,
            b,
            c,
            needed,
            stage_f: vec![vec![Vec::new(); r]; s],
            v: Vec::new(),
            steps_taken: 0,
        }
    }

    pub fn parts(&self) -> usize {
        self.b.len()
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// Number of `F_k` evaluations per step.
    pub fn evaluations_per_step(&self) -> usize {
        self.needed.iter().flatten().filter(|&&n| n).count()
    }

    /// Whether `F_k` is evaluated at stage `j`.
    pub fn is_needed(&self, stage: usize, part: usize) -> bool {
        self.needed[stage][part]
    }

    /// Advances `u` from `t` to `t + dt` in place.
    ///
    /// Fails with [`Error::Diverged`] if a stage or the result is not finite;
    /// the reported index counts the steps taken by this stepper.
    pub fn step<S: SplitRhs<T> + ?Sized>(&mut self, f: &S, t: T, dt: T, u: &mut [T]) -> Result<()> {
        let r = self.parts();
        let s = self.stages();
        if f.parts() != r {
            return Err(Error::PartCountMismatch { tableau: r, split: f.parts() });
        }
        if f.dim() != u.len() {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: u.len() });
        }
        let m = u.len();
        for (j, row) in self.stage_f.iter_mut().enumerate() {
            for (k, buf) in row.iter_mut().enumerate() {
                if self.needed[j][k] && buf.len() != m {
                    *buf = vec![T::zero(); m];
                }
            }
        }
        self.v.resize(m, T::zero());
        let diverged = Error::Diverged { step: self.steps_taken };

        for i in 0..s {
            if !self.needed[i].iter().any(|&n| n) {
                continue;
            }
            self.v.copy_from_slice(u);
            for k in 0..r {
                for j in 0..i {
                    let w = self.a[k][i][j];
                    if w != T::zero() {
                        let coeff = dt * w;
                        for (x, &g) in self.v.iter_mut().zip(&self.stage_f[j][k]) {
                            *x += coeff * g;
                        }
                    }
                }
            }
            if !self.v.iter().all(|x| x.is_finite()) {
                return Err(diverged);
            }
            f.eval_parts(t + self.c[i] * dt, &self.v, &self.needed[i], &mut self.stage_f[i]);
        }

        for k in 0..r {
            for j in 0..s {
                let w = self.b[k][j];
                if w != T::zero() {
                    let coeff = dt * w;
                    for (x, &g) in u.iter_mut().zip(&self.stage_f[j][k]) {
                        *x += coeff * g;
                    }
                }
            }
        }
        self.steps_taken += 1;
        if u.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(diverged)
        }
    }
}

/// A fixed-step integration from `t0` to `t_end` in `steps` equal steps.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationRun<T> {
    pub t0: T,
    pub t_end: T,
    pub steps: usize,
    /// Cell measures for a per-step mass trace.
    pub mass_weights: Option<Vec<T>>,
    /// Keep every `n`-th state (and the final one).
    pub sample_every: Option<usize>,
}

impl<T: Real> IntegrationRun<T> {
    pub fn new(t0: T, t_end: T, steps: usize) -> Self {
        Self { t0, t_end, steps, mass_weights: None, sample_every: None }
    }

    /// Smallest step count with `dt <= dt_max`. Ratios within rounding of an
    /// integer are not bumped to the next count.
    pub fn with_max_step(t0: T, t_end: T, dt_max: T) -> Self {
        let ratio = (t_end - t0) / dt_max;
        let nearest = ratio.round();
        let n = if (ratio - nearest).abs() <= T::lit(1e-9) * nearest { nearest } else { ratio.ceil() };
        let n = n.to_usize().unwrap_or(1).max(1);
        Self::new(t0, t_end, n)
    }

    pub fn dt(&self) -> T {
        (self.t_end - self.t0) / T::count(self.steps)
    }

    pub fn time(&self, n: usize) -> T {
        if n == self.steps {
            self.t_end
        } else {
            self.t0 + T::count(n) * self.dt()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationOutput<T> {
    pub state: Vec<T>,
    /// `mass(h, u_n)` for `n = 0..=steps` when requested.
    pub mass: Vec<T>,
    pub samples: Vec<(T, Vec<T>)>,
}

impl<T: Real> IntegrationOutput<T> {
    /// `|mass(u_N) - mass(u_0)|`, or `None` without a mass trace.
    pub fn mass_drift(&self) -> Option<T> {
        Some((*self.mass.last()? - self.mass[0]).abs())
    }
}

/// Integrates `u' = sum_k F_k(t, u)`, calling
/// [`SplitRhs::begin_step`] with `(t_n, u_n)` before every step.
pub fn integrate<T: Real, S: SplitRhs<T> + ?Sized>(
    stepper: &mut PrkStepper<T>,
    split: &mut S,
    u0: &[T],
    run: &IntegrationRun<T>,
) -> Result<IntegrationOutput<T>> {
    let mut u = u0.to_vec();
    let dt = run.dt();
    let limit = T::lit(DIVERGENCE_FACTOR) * sup_norm(u0).max(T::one());
    let record = |u: &[T], out: &mut Vec<T>| -> Result<()> {
        if let Some(h) = &run.mass_weights {
            out.push(mass(h, u)?);
        }
        Ok(())
    };
    let mut masses = Vec::new();
    let mut samples = Vec::new();
    record(&u, &mut masses)?;
    for n in 0..run.steps {
        let t = run.time(n);
        split.begin_step(t, &u);
        stepper.step(&*split, t, dt, &mut u).map_err(|e| match e {
            Error::Diverged { .. } => Error::Diverged { step: n },
            other => other,
        })?;
        if sup_norm(&u) > limit {
            return Err(Error::Diverged { step: n });
        }
        record(&u, &mut masses)?;
        if let Some(every) = run.sample_every {
            if every > 0 && (n + 1) % every == 0 && n + 1 < run.steps {
                samples.push((run.time(n + 1), u.clone()));
            }
        }
    }
    if run.sample_every.is_some() {
        samples.push((run.t_end, u.clone()));
    }
    Ok(IntegrationOutput { state: u, mass: masses, samples })
}

fn sup_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Fixed-step classical fourth-order Runge-Kutta integration.
pub fn rk4_integrate<T: Real, R: Rhs<T>>(rhs: &R, u0: &[T], t0: T, t_end: T, steps: usize) -> Result<Vec<T>> {
    let mut stepper = PrkStepper::new(&classical_rk4());
    let mut split = Unsplit::new(rhs);
    Ok(integrate(&mut stepper, &mut split, u0, &IntegrationRun::new(t0, t_end, steps))?.state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution<T> {
    pub state: Vec<T>,
    /// Step count of the accepted solution.
    pub steps: usize,
    /// Max-norm change against the solution with half as many steps.
    pub change: T,
}

/// Reference solution by classical RK4, doubling the step count from
/// `initial_steps` until the result changes by less than `tol` in the
/// maximum norm.
pub fn reference_integrate<T: Real, R: Rhs<T>>(
    rhs: &R,
    u0: &[T],
    t0: T,
    t_end: T,
    initial_steps: usize,
    tol: T,
    max_halvings: usize,
) -> Result<ReferenceSolution<T>> {
    let mut steps = initial_steps.max(1);
    let mut prev = rk4_integrate(rhs, u0, t0, t_end, steps)?;
    let mut change = T::infinity();
    for _ in 0..max_halvings {
        steps *= 2;
        let next = rk4_integrate(rhs, u0, t0, t_end, steps)?;
        change = next.iter().zip(&prev).fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()));
        if change < tol {
            return Ok(ReferenceSolution { state: next, steps, change });
        }
        prev = next;
    }
    Err(Error::ReferenceNotConverged { tol: tol.as_f64(), halvings: max_halvings, change: change.as_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{CellPartition, CellSplit, FluxSplit, LinearSplit};
    use crate::rhs::FnRhs;
    use crate::spatial::{Boundary, Grid1D, Upwind1D};
    use crate::tableau::builtin_tableau;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0))
    }

    fn fe(l: &DMatrix<f64>, u: &DVector<f64>, dt: f64) -> DVector<f64> {
        u + dt * (l * u)
    }

    fn etr(l: &DMatrix<f64>, u: &DVector<f64>, dt: f64) -> DVector<f64> {
        let k1 = l * u;
        let k2 = l * (u + dt * &k1);
        u + 0.5 * dt * (k1 + k2)
    }

    #[test]
    fn forward_euler_on_scalar_decay() {
        let mut st = PrkStepper::new(&builtin_tableau("FE1").unwrap());
        let rhs = FnRhs::new(1, |_t: f64, v: &[f64], out: &mut [f64]| out[0] = -3.0 * v[0]);
        let mut u = [2.0];
        st.step(&Unsplit::new(&rhs), 0.0, 0.1, &mut u).unwrap();
        assert!((u[0] - 2.0 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn skipped_evaluations_match_expected_counts() {
        // SH2 evaluates F_1 twice and F_2 four times per step
        let st = PrkStepper::<f64>::new(&builtin_tableau("SH2").unwrap());
        let count = |k: usize| (0..5).filter(|&j| st.is_needed(j, k)).count();
        assert_eq!((count(0), count(1)), (2, 4));
        assert_eq!(st.evaluations_per_step(), 6);
    }

    #[test]
    fn multirate_schemes_reduce_to_their_base_method() {
        // (scheme, base, substeps when everything is coarse, when everything is fine)
        let cases = [("OS1", 1, 1, 2), ("TW1", 1, 1, 2), ("TW2", 2, 1, 2), ("CS2", 2, 1, 2), ("SH2", 2, 1, 2)];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (name, base, coarse, fine) in cases {
            let tab = builtin_tableau(name).unwrap();
            for m in [3, 11, 20] {
                let l = random_matrix(m, &mut rng);
                let u0 = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
                let dt = 0.1;
                for (region, sub) in [(0, coarse), (1, fine)] {
                    let split = LinearSplit::cell_based(&l, &CellPartition::uniform(m, 2, region)).unwrap();
                    let mut u = u0.as_slice().to_vec();
                    PrkStepper::new(&tab).step(&split, 0.0, dt, &mut u).unwrap();
                    let mut expect = u0.clone();
                    for _ in 0..sub {
                        let h = dt / sub as f64;
                        expect = if base == 1 { fe(&l, &expect, h) } else { etr(&l, &expect, h) };
                    }
                    for i in 0..m {
                        assert!((u[i] - expect[i]).abs() < 1e-14, "{name} region {region} m {m}");
                    }
                }
            }
        }
    }

    #[test]
    fn os1_flux_split_interface_closed_form() {
        // coarse cells 0..=4, fine cells 5..10; face 4+1/2 joins the fine
        // region, so cell 4 is split between the parts
        let m = 10;
        let up = Upwind1D::new(Grid1D::<f64>::uniform(m, Boundary::homogeneous_inflow())).unwrap();
        let part = CellPartition::two_region(m, |i| i >= 5);
        let split = FluxSplit::from_cells(&up, &part).unwrap();
        let u0: Vec<f64> = (0..m).map(|j| ((j as f64) * 0.7).sin() + 1.5).collect();
        let dx = 1.0 / m as f64;
        let dt = 0.4 * dx;
        let mut u = u0.clone();
        PrkStepper::new(&builtin_tableau("OS1").unwrap()).step(&split, 0.0, dt, &mut u).unwrap();
        let nu = dt / dx;
        let i = 4;
        let expect = u0[i] + nu * (u0[i - 1] - u0[i]) + 0.25 * nu * nu * u0[i];
        assert!((u[i] - expect).abs() < 1e-14);
    }

    #[test]
    fn cell_split_conservation_follows_equal_weights() {
        let m = 40;
        let up = Upwind1D::new(Grid1D::<f64>::uniform(m, Boundary::Periodic)).unwrap();
        let part = CellPartition::two_region(m, |i| (10..30).contains(&i));
        let u0: Vec<f64> = (0..m).map(|j| (j as f64 / m as f64 * 6.0).sin().powi(2)).collect();
        let h = vec![1.0 / m as f64; m];
        let m0 = mass(&h, &u0).unwrap();
        for (name, conservative) in [("OS1", true), ("CS2", true), ("TW1", false), ("TW2", false), ("SH2", false)] {
            let mut split = CellSplit::new(&up, part.clone()).unwrap();
            let mut st = PrkStepper::new(&builtin_tableau(name).unwrap());
            let mut run = IntegrationRun::new(0.0, 0.5, 40);
            run.mass_weights = Some(h.clone());
            let out = integrate(&mut st, &mut split, &u0, &run).unwrap();
            let drift = out.mass_drift().unwrap() / m0;
            assert_eq!(drift < 1e-12, conservative, "{name}: {drift:e}");
        }
    }

    #[test]
    fn stage_times_use_the_abscissae() {
        let mut st = PrkStepper::new(&builtin_tableau("ETR2").unwrap());
        let rhs = FnRhs::new(1, |t: f64, _v: &[f64], out: &mut [f64]| out[0] = 2.0 * t);
        let mut u = [0.0];
        st.step(&Unsplit::new(&rhs), 1.0, 0.5, &mut u).unwrap();
        // trapezoid of 2t over [1, 1.5]
        assert!((u[0] - 0.5 * (2.0 + 3.0) * 0.5).abs() < 1e-15);
    }

    #[test]
    fn divergence_is_reported_with_step_index() {
        let rhs = FnRhs::new(1, |_t: f64, v: &[f64], out: &mut [f64]| out[0] = v[0] * v[0]);
        let mut st = PrkStepper::new(&builtin_tableau("FE1").unwrap());
        let err = integrate(&mut st, &mut Unsplit::new(&rhs), &[1.0], &IntegrationRun::new(0.0, 10.0, 100));
        assert!(matches!(err, Err(Error::Diverged { step }) if step > 0 && step < 100));
    }

    #[test]
    fn part_count_mismatch() {
        let rhs = FnRhs::new(1, |_t: f64, _v: &[f64], out: &mut [f64]| out[0] = 0.0);
        let mut st = PrkStepper::new(&builtin_tableau("OS1").unwrap());
        let err = st.step(&Unsplit::new(&rhs), 0.0, 0.1, &mut [1.0]);
        assert_eq!(err, Err(Error::PartCountMismatch { tableau: 2, split: 1 }));
    }

    #[test]
    fn step_count_hits_end_time() {
        let run = IntegrationRun::with_max_step(0.0, 1.0 / 3.0, 0.01);
        assert_eq!(run.steps, 34);
        assert_eq!(run.time(run.steps), 1.0 / 3.0);
    }

    #[test]
    fn reference_matches_matrix_exponential() {
        let m = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = random_matrix(m, &mut rng) * 0.5;
        let u0: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let split = LinearSplit::new(vec![l.clone()]).unwrap();
        let rhs = split.part(0);
        let sol = reference_integrate(&rhs, &u0, 0.0, 1.0, 8, 1e-10, 12).unwrap();
        assert!(sol.change < 1e-10);
        let exact = expm_taylor(&l) * DVector::from_vec(u0);
        for i in 0..m {
            assert!((sol.state[i] - exact[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn reference_reports_failure() {
        let rhs = FnRhs::new(1, |_t: f64, v: &[f64], out: &mut [f64]| out[0] = -v[0]);
        let err = reference_integrate(&rhs, &[1.0], 0.0, 1.0, 1, 1e-30, 2);
        assert!(matches!(err, Err(Error::ReferenceNotConverged { .. })));
    }

    /// `exp(A)` by scaling and squaring with a long Taylor series.
    fn expm_taylor(a: &DMatrix<f64>) -> DMatrix<f64> {
        let m = a.nrows();
        let norm = a.abs().row_sum().max();
        let squarings = (norm.log2().ceil().max(0.0) as i32) + 4;
        let b = a / 2f64.powi(squarings);
        let mut term = DMatrix::identity(m, m);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &b / k as f64;
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }
}
