//! Descent of the discrete `(n+1)`-energy.
//!
//! The energy is `E_h(u) = vol * Σ_i (n+1)^{-(n+1)/2} |D u(i)|^{n+1}` with `D`
//! the lattice difference stencil, and the gradient is its exact derivative
//! `(n+1)^{-(n-1)/2} vol D^T(|Du|^{n-1} Du)`. Steps are plain gradient steps
//! with Armijo backtracking.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::hs_norm;
use crate::gridmap::{
    energy_report, flux, jacobian, stencil_transpose, weak_conformal_check, Coefficients, GridMap, McrOperator,
};
use crate::scalar::{nan_max, pairwise_sum, Real};

/// Smallest accepted line-search step.
pub const MIN_STEP: f64 = 1e-16;
/// A step is rejected if any node's pullback density drops below `-ORIENTATION_EPS`.
pub const ORIENTATION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T = f64> {
    pub max_iters: usize,
    /// Stop once the largest per-node gradient norm is below this.
    pub grad_tol: T,
    pub step0: T,
    pub backtrack: T,
    pub armijo: T,
    pub record_every: usize,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            grad_tol: T::lit(1e-8),
            step0: T::one(),
            backtrack: T::lit(0.5),
            armijo: T::lit(1e-4),
            record_every: 1,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub const KEYS: [&'static str; 6] = ["max_iters", "grad_tol", "step0", "backtrack", "armijo", "record_every"];

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.grad_tol >= T::zero()) || !self.grad_tol.is_finite() {
            return bad(format!("grad_tol must be finite and non-negative, got {:?}", self.grad_tol));
        }
        if !(self.step0 > T::zero()) || !self.step0.is_finite() {
            return bad(format!("step0 must be positive, got {:?}", self.step0));
        }
        if !(self.backtrack > T::zero() && self.backtrack < T::one()) {
            return bad(format!("backtrack must lie in (0, 1), got {:?}", self.backtrack));
        }
        if !(self.armijo > T::zero() && self.armijo < T::one()) {
            return bad(format!("armijo must lie in (0, 1), got {:?}", self.armijo));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        Ok(())
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let real = |v: &str| -> Result<T> {
            v.parse::<T>()
                .map_err(|_| Error::InvalidConfig(format!("{key}: `{v}` is not a number")))
        };
        let int = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("{key}: `{v}` is not a non-negative integer")))
        };
        match key {
            "max_iters" => self.max_iters = int(value)?,
            "grad_tol" => self.grad_tol = real(value)?,
            "step0" => self.step0 = real(value)?,
            "backtrack" => self.backtrack = real(value)?,
            "armijo" => self.armijo = real(value)?,
            "record_every" => self.record_every = int(value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown solver key `{key}`"))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowRecord<T = f64> {
    pub iter: usize,
    pub energy: T,
    pub pullback: T,
    /// `E - ∫u*ω`.
    pub gap: T,
    pub max_residual: T,
    /// Step accepted to reach this iterate, 0 for the start.
    pub step: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowHistory<T = f64> {
    pub records: Vec<FlowRecord<T>>,
}

impl<T: Real> FlowHistory<T> {
    pub const CSV_HEADER: &'static str = "iter,energy,pullback,gap,max_residual,step";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            writeln!(s, "{},{:?},{:?},{:?},{:?},{:?}", r.iter, r.energy, r.pullback, r.gap, r.max_residual, r.step).unwrap();
        }
        s
    }

    pub fn first(&self) -> Option<&FlowRecord<T>> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&FlowRecord<T>> {
        self.records.last()
    }

    pub fn energy_non_increasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].energy <= w[0].energy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient fell below `grad_tol`.
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOutcome<T = f64> {
    pub map: GridMap<T>,
    pub history: FlowHistory<T>,
    pub termination: Termination,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError<T: Real = f64> {
    #[error(transparent)]
    Config(#[from] Error),
    #[error("line search stalled at iteration {iteration}: no step above 1e-16 decreases the energy")]
    Stall {
        iteration: usize,
        map: Box<GridMap<T>>,
        history: FlowHistory<T>,
    },
}

/// Discrete `(n+1)`-energy and the smallest pullback density.
fn energy_and_orientation<T: Real>(m: &GridMap<T>, op: &McrOperator<T>) -> (T, T) {
    let c = op.coefficients();
    let np1 = c.n + 1;
    let per: Vec<(T, T)> = (0..m.node_count())
        .into_par_iter()
        .map(|i| {
            let du = jacobian(m, i);
            (c.energy * hs_norm(&du).powi(np1 as i32), op.pullback(&du))
        })
        .collect();
    let e: Vec<T> = per.iter().map(|p| p.0).collect();
    let pmin = per.iter().map(|p| p.1).fold(T::infinity(), |a, b| a.min(b));
    (pairwise_sum(&e) * m.cell_volume(), pmin)
}

/// Discrete `(n+1)`-energy.
pub fn discrete_energy<T: Real>(m: &GridMap<T>) -> T {
    let c = Coefficients::<T>::new(m.triad().n());
    let e: Vec<T> = (0..m.node_count())
        .into_par_iter()
        .map(|i| c.energy * hs_norm(&jacobian(m, i)).powi(c.n as i32 + 1))
        .collect();
    pairwise_sum(&e) * m.cell_volume()
}

/// Exact gradient of [`discrete_energy`] with respect to the node values,
/// node-major with `d` entries per node.
pub fn energy_gradient<T: Real>(m: &GridMap<T>) -> Vec<T> {
    let n = m.triad().n();
    let c = Coefficients::<T>::new(n);
    let scale = c.energy * T::from_usize_lossy(n + 1) * m.cell_volume();
    let f = flux(m, T::from_usize_lossy(n + 1), scale);
    stencil_transpose(m, &f)
}

fn max_node_norm<T: Real>(g: &[T], d: usize) -> T {
    g.chunks(d)
        .map(|c| c.iter().map(|&x| x * x).sum::<T>().sqrt())
        .fold(T::zero(), nan_max)
}

fn record<T: Real>(m: &GridMap<T>, op: &McrOperator<T>, iter: usize, step: T) -> FlowRecord<T> {
    let per: Vec<(T, T, T)> = (0..m.node_count())
        .into_par_iter()
        .map(|i| {
            let j = op.jet(jacobian(m, i), T::zero());
            (j.e_np1_density, j.pullback_density, hs_norm(&j.mcr_residual))
        })
        .collect();
    let vol = m.cell_volume();
    let e = pairwise_sum(&per.iter().map(|p| p.0).collect::<Vec<_>>()) * vol;
    let p = pairwise_sum(&per.iter().map(|p| p.1).collect::<Vec<_>>()) * vol;
    FlowRecord {
        iter,
        energy: e,
        pullback: p,
        gap: e - p,
        max_residual: per.iter().map(|x| x.2).fold(T::zero(), nan_max),
        step,
    }
}

/// Gradient descent with Armijo backtracking. Each line search starts from
/// twice the previously accepted step (`step0` on the first iteration) and
/// rejects trial maps that reverse orientation at any node.
pub fn minimize_energy<T: Real>(m0: &GridMap<T>, cfg: &SolverConfig<T>) -> Result<FlowOutcome<T>, SolverError<T>> {
    cfg.validate()?;
    let op = McrOperator::new(m0.triad())?;
    let d = m0.target_dim();
    let mut u = m0.clone();
    let (mut e, _) = energy_and_orientation(&u, &op);
    let mut grad = energy_gradient(&u);
    let mut history = FlowHistory::default();
    history.records.push(record(&u, &op, 0, T::zero()));
    let mut step = cfg.step0 / T::lit(2.0);
    let eps = T::lit(ORIENTATION_EPS);
    let min_step = T::lit(MIN_STEP);
    let mut iter = 0;
    loop {
        if max_node_norm(&grad, d) < cfg.grad_tol {
            break finish(u, history, &op, iter, Termination::Converged);
        }
        if iter >= cfg.max_iters {
            break finish(u, history, &op, iter, Termination::MaxIters);
        }
        iter += 1;
        let g2 = pairwise_sum(&grad.iter().map(|&x| x * x).collect::<Vec<_>>());
        let mut t = step * T::lit(2.0);
        let (trial, et) = loop {
            let vals: Vec<T> = u.values().iter().zip(&grad).map(|(&x, &g)| x - t * g).collect();
            let trial = u.with_values(vals).map_err(SolverError::Config)?;
            let (et, pmin) = energy_and_orientation(&trial, &op);
            if pmin >= -eps && et <= e - cfg.armijo * t * g2 {
                break (trial, et);
            }
            t *= cfg.backtrack;
            if t < min_step {
                return Err(SolverError::Stall {
                    iteration: iter,
                    map: Box::new(u),
                    history,
                });
            }
        };
        step = t;
        u = trial;
        e = et;
        grad = energy_gradient(&u);
        if iter % cfg.record_every == 0 {
            history.records.push(record(&u, &op, iter, t));
        }
    }
}

fn finish<T: Real>(
    map: GridMap<T>,
    mut history: FlowHistory<T>,
    op: &McrOperator<T>,
    iter: usize,
    termination: Termination,
) -> Result<FlowOutcome<T>, SolverError<T>> {
    if history.last().map(|r| r.iter) != Some(iter) {
        let step = T::zero();
        history.records.push(record(&map, op, iter, step));
    }
    Ok(FlowOutcome {
        map,
        history,
        termination,
        iterations: iter,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport<T = f64> {
    pub tol: T,
    pub max_mcr_residual: T,
    pub energy: T,
    pub pullback: T,
    /// `|E - ∫u*ω|`.
    pub energy_gap: T,
    pub weak_conformal_residual: T,
    pub pass: bool,
}

impl<T: Real> VerifyReport<T> {
    pub fn to_key_values(&self) -> String {
        format!(
            "verify_tol={:?}\nverify_max_mcr_residual={:?}\nverify_energy_gap={:?}\nverify_weak_conformal_residual={:?}\nverify_pass={}\n",
            self.tol, self.max_mcr_residual, self.energy_gap, self.weak_conformal_residual, self.pass
        )
    }
}

/// Multiholomorphic to tolerance: `ð u`, `E - ∫u*ω` and the conformality
/// defect all small.
pub fn verify_solution<T: Real>(m: &GridMap<T>, tol: T) -> Result<VerifyReport<T>> {
    let r = energy_report(m)?;
    let wc = weak_conformal_check(m);
    let gap = (r.energy_np1 - r.pullback_integral).abs();
    let pass = r.max_mcr_residual <= tol && gap <= tol * r.energy_np1.max(T::one()) && wc <= tol;
    Ok(VerifyReport {
        tol,
        max_mcr_residual: r.max_mcr_residual,
        energy: r.energy_np1,
        pullback: r.pullback_integral,
        energy_gap: gap,
        weak_conformal_residual: wc,
        pass,
    })
}
