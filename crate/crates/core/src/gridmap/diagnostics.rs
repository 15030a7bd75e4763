//! Integrated energies, residual maxima and distortion over a lattice map.

use rayon::prelude::*;

use super::jet::{critical_threshold, jacobian, McrOperator};
use super::{stencil, stencil_sources, unwrap_delta, GridMap};
use crate::error::{Error, Result};
use crate::exterior::{hs_norm, LinearMap};
use crate::linalg;
use crate::scalar::{nan_max, pairwise_sum, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport<T = f64> {
    pub node_count: usize,
    pub eps_crit: T,
    pub energy_np1: T,
    pub energy_mix: T,
    pub pullback_integral: T,
    /// `(1/(n+1)) ∫ <du, ðu>`.
    pub identity_gap: T,
    /// `E_{n+1} - gap - ∫u*ω`.
    pub identity_residual: T,
    /// `β ∫ |ðu|² / |du|^{n-1}`.
    pub mixed_gap: T,
    /// `E_mix - mixed_gap - ∫u*ω`.
    pub mixed_residual: T,
    /// Largest Hilbert–Schmidt norm of `ðu` over nodes.
    pub max_mcr_residual: T,
    pub max_weak_conformal_residual: T,
    pub min_pullback_density: T,
    pub distortion_max: Option<T>,
    pub outer_dilation: Option<T>,
    pub quasiregular_q: Option<T>,
    /// Only for endomorphisms.
    pub cr_residual: Option<T>,
    pub critical_nodes: Vec<usize>,
    /// Integer winding matrix, column per domain axis; only for fully periodic maps.
    pub winding: Option<Vec<Vec<i64>>>,
    /// `ω(W e_0, ..., W e_n)`, the exact pullback integral of the homotopy class.
    pub exact_pullback: Option<T>,
}

fn opt<T: Real>(x: Option<T>) -> String {
    x.map_or_else(|| "undefined".to_string(), |v| format!("{v:?}"))
}

impl<T: Real> DiagnosticsReport<T> {
    pub fn critical_fraction(&self) -> f64 {
        self.critical_nodes.len() as f64 / self.node_count.max(1) as f64
    }

    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        };
        kv("nodes", self.node_count.to_string());
        kv("eps_crit", format!("{:?}", self.eps_crit));
        kv("energy", format!("{:?}", self.energy_np1));
        kv("energy_mix", format!("{:?}", self.energy_mix));
        kv("pullback", format!("{:?}", self.pullback_integral));
        kv("gap", format!("{:?}", self.identity_gap));
        kv("identity_residual", format!("{:?}", self.identity_residual));
        kv("mixed_gap", format!("{:?}", self.mixed_gap));
        kv("mixed_residual", format!("{:?}", self.mixed_residual));
        kv("max_mcr_residual", format!("{:?}", self.max_mcr_residual));
        kv("max_weak_conformal_residual", format!("{:?}", self.max_weak_conformal_residual));
        kv("min_pullback_density", format!("{:?}", self.min_pullback_density));
        kv("distortion_max", opt(self.distortion_max));
        kv("outer_dilation", opt(self.outer_dilation));
        kv("quasiregular_q", opt(self.quasiregular_q));
        kv("cr_residual", opt(self.cr_residual));
        kv("critical_count", self.critical_nodes.len().to_string());
        kv("critical_fraction", format!("{:?}", self.critical_fraction()));
        kv(
            "critical_nodes",
            self.critical_nodes.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
        );
        kv(
            "winding",
            match &self.winding {
                None => "undefined".to_string(),
                Some(w) => w
                    .iter()
                    .map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
                    .collect::<Vec<_>>()
                    .join(";"),
            },
        );
        kv("exact_pullback", opt(self.exact_pullback));
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport<T = f64> {
    /// Largest `σ_max / σ_min` over nodes with `σ_min > ε_crit`.
    pub distortion_max: Option<T>,
    /// Least `Q` with `(n+1)^{-(n+1)/2} |du|^{n+1} <= Q J(u)` on regular nodes.
    pub quasiregular_q: T,
    /// Largest `σ_max^{n+1} / J(u)` on regular nodes.
    pub outer_dilation: T,
    /// `max |du^T du - |det du|^{2/(n+1)} I|`, endomorphisms only.
    pub cr_residual: Option<T>,
    pub regular_nodes: usize,
}

/// Per-node scalars; the full jets are not kept.
#[derive(Debug, Clone, Copy)]
struct Sample<T> {
    e_np1: T,
    e_mix: T,
    mixed_gap: T,
    pullback: T,
    pairing: T,
    mcr_norm: T,
    wc: T,
    critical: bool,
    sv_ratio: Option<T>,
    q: T,
    outer: T,
    cr: Option<T>,
}

struct Shape {
    n: usize,
    endo: bool,
}

/// Max-entry norm of `du^T du - c I`.
fn gram_residual<T: Real>(g: &LinearMap<T>, c: T) -> T {
    let mut r = T::zero();
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let want = if i == j { c } else { T::zero() };
            r = nan_max(r, (g.get(i, j) - want).abs());
        }
    }
    r
}

fn sample<T: Real>(op: &McrOperator<T>, du: LinearMap<T>, eps: T, shape: &Shape) -> Sample<T> {
    let n = shape.n;
    let np1 = T::from_usize_lossy(n + 1);
    let g = du.transpose().matmul(&du).unwrap();
    let jet = op.jet(du, eps);
    let wc = gram_residual(&g, jet.du_norm * jet.du_norm / np1);
    let ev = linalg::sym_eigenvalues(g.as_slice(), n + 1);
    let smin = ev[0].max(T::zero()).sqrt();
    let smax = ev[n].max(T::zero()).sqrt();
    let sv_ratio = (smin > eps).then(|| smax / smin);
    let gdet = linalg::det_col_major(g.as_slice(), n + 1);
    let jac = if shape.endo {
        jet.du.det().unwrap()
    } else {
        gdet.max(T::zero()).sqrt()
    };
    let (q, outer) = if jet.critical {
        (T::zero(), T::zero())
    } else if jac > T::zero() {
        (jet.e_np1_density / jac, (0..n + 1).fold(T::one(), |p, _| p * smax) / jac)
    } else {
        (T::infinity(), T::infinity())
    };
    let cr = shape
        .endo
        .then(|| gram_residual(&g, jet.du.det().unwrap().abs().powf(T::lit(2.0) / np1)));
    Sample {
        e_np1: jet.e_np1_density,
        e_mix: jet.e_mix_density,
        mixed_gap: jet.mixed_gap_density,
        pullback: jet.pullback_density,
        pairing: jet.pairing,
        mcr_norm: hs_norm(&jet.mcr_residual),
        wc,
        critical: jet.critical,
        sv_ratio,
        q,
        outer,
        cr,
    }
}

fn samples<T: Real>(m: &GridMap<T>, endo: bool) -> Result<(Vec<Sample<T>>, T)> {
    let op = McrOperator::new(m.triad())?;
    let eps = critical_threshold(m);
    let shape = Shape {
        n: m.triad().n(),
        endo,
    };
    let s = (0..m.node_count())
        .into_par_iter()
        .map(|i| sample(&op, jacobian(m, i), eps, &shape))
        .collect();
    Ok((s, eps))
}

fn integral<T: Real>(m: &GridMap<T>, s: &[Sample<T>], f: impl Fn(&Sample<T>) -> T) -> T {
    let v: Vec<T> = s.iter().map(f).collect();
    pairwise_sum(&v) * m.cell_volume()
}

fn max_of<T: Real>(s: &[Sample<T>], f: impl Fn(&Sample<T>) -> T) -> T {
    s.iter().map(f).fold(T::zero(), nan_max)
}

fn max_opt<T: Real>(s: &[Sample<T>], f: impl Fn(&Sample<T>) -> Option<T>) -> Option<T> {
    s.iter().filter_map(f).reduce(nan_max)
}

/// Energies, the two energy identities, residual maxima, distortion and the
/// critical set of `m`. Distortion quantities are `None` when every node is
/// critical.
pub fn energy_report<T: Real>(m: &GridMap<T>) -> Result<DiagnosticsReport<T>> {
    let endo = m.target_dim() == m.domain_dim();
    let (s, eps) = samples(m, endo)?;
    let n = m.triad().n();
    let energy = integral(m, &s, |x| x.e_np1);
    let energy_mix = integral(m, &s, |x| x.e_mix);
    let pullback = integral(m, &s, |x| x.pullback);
    let gap = integral(m, &s, |x| x.pairing) / T::from_usize_lossy(n + 1);
    let mixed_gap = integral(m, &s, |x| x.mixed_gap);
    let regular = s.iter().any(|x| !x.critical);
    let critical_nodes: Vec<usize> = s.iter().enumerate().filter(|(_, x)| x.critical).map(|(i, _)| i).collect();
    let winding = winding_numbers(m);
    let exact = exact_pullback(m);
    Ok(DiagnosticsReport {
        node_count: m.node_count(),
        eps_crit: eps,
        energy_np1: energy,
        energy_mix,
        pullback_integral: pullback,
        identity_gap: gap,
        identity_residual: energy - gap - pullback,
        mixed_gap,
        mixed_residual: energy_mix - mixed_gap - pullback,
        max_mcr_residual: max_of(&s, |x| x.mcr_norm),
        max_weak_conformal_residual: max_of(&s, |x| x.wc),
        min_pullback_density: s.iter().map(|x| x.pullback).fold(T::infinity(), |a, b| a.min(b)),
        distortion_max: max_opt(&s, |x| x.sv_ratio),
        outer_dilation: regular.then(|| max_of(&s, |x| x.outer)),
        quasiregular_q: regular.then(|| max_of(&s, |x| x.q)),
        cr_residual: max_opt(&s, |x| x.cr),
        critical_nodes,
        winding,
        exact_pullback: exact,
    })
}

/// `max |du^T du - (|du|²/(n+1)) I|` over nodes, max-entry norm.
pub fn weak_conformal_check<T: Real>(m: &GridMap<T>) -> T {
    let np1 = T::from_usize_lossy(m.domain_dim());
    let r: Vec<T> = (0..m.node_count())
        .into_par_iter()
        .map(|i| {
            let du = jacobian(m, i);
            let g = du.transpose().matmul(&du).unwrap();
            gram_residual(&g, du.hs_dot(&du) / np1)
        })
        .collect();
    r.into_iter().fold(T::zero(), nan_max)
}

pub fn distortion_report<T: Real>(m: &GridMap<T>, endo: bool) -> Result<DistortionReport<T>> {
    if endo && m.target_dim() != m.domain_dim() {
        return Err(Error::Dimension(format!(
            "endomorphism check on a map from dimension {} to {}",
            m.domain_dim(),
            m.target_dim()
        )));
    }
    let (s, _) = samples(m, endo)?;
    let regular = s.iter().filter(|x| !x.critical).count();
    if regular == 0 {
        return Err(Error::DistortionUndefined);
    }
    Ok(DistortionReport {
        distortion_max: max_opt(&s, |x| x.sv_ratio),
        quasiregular_q: max_of(&s, |x| x.q),
        outer_dilation: max_of(&s, |x| x.outer),
        cr_residual: max_opt(&s, |x| x.cr),
        regular_nodes: regular,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalLocus {
    pub nodes: Vec<usize>,
    pub fraction: f64,
}

/// Nodes with `|du| < tol`.
pub fn critical_locus<T: Real>(m: &GridMap<T>, tol: T) -> Result<CriticalLocus> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidConfig(format!("critical tolerance must be positive, got {tol:?}")));
    }
    let flags: Vec<bool> = (0..m.node_count()).into_par_iter().map(|i| hs_norm(&jacobian(m, i)) < tol).collect();
    let nodes: Vec<usize> = flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect();
    Ok(CriticalLocus {
        fraction: nodes.len() as f64 / m.node_count() as f64,
        nodes,
    })
}

/// `D^T F`: transpose of the difference stencil applied to a flux field
/// holding one `d x (n+1)` column-major block per node.
pub(crate) fn stencil_transpose<T: Real>(m: &GridMap<T>, flux: &[T]) -> Vec<T> {
    let d = m.target_dim();
    let dd = m.domain_dim();
    let block = d * dd;
    let rows: Vec<Vec<T>> = (0..m.node_count())
        .into_par_iter()
        .map(|j| {
            let idx = m.multi_index(j);
            let mut out = vec![T::zero(); d];
            for a in 0..dd {
                let n = m.shape()[a];
                let per = m.periodic()[a];
                let half_inv_h = T::from_usize_lossy(n) / T::lit(2.0);
                for i in stencil_sources(n, per, idx[a]) {
                    let (entries, len) = stencil(n, per, i);
                    let w: i32 = entries[..len].iter().filter(|e| e.0 == idx[a]).map(|e| e.1).sum();
                    if w == 0 {
                        continue;
                    }
                    let src = m.along(j, a, idx[a], i);
                    let f = &flux[src * block + a * d..src * block + (a + 1) * d];
                    let w = T::from_i32(w).unwrap() * half_inv_h;
                    for t in 0..d {
                        out[t] += w * f[t];
                    }
                }
            }
            out
        })
        .collect();
    rows.concat()
}

/// Flux `|du|^{p-2} du` at every node, zero where `du = 0`.
pub(crate) fn flux<T: Real>(m: &GridMap<T>, p: T, scale: T) -> Vec<T> {
    let blocks: Vec<Vec<T>> = (0..m.node_count())
        .into_par_iter()
        .map(|i| {
            let du = jacobian(m, i);
            let norm = hs_norm(&du);
            if norm == T::zero() {
                return vec![T::zero(); du.as_slice().len()];
            }
            let w = scale * norm.powf(p - T::lit(2.0));
            du.as_slice().iter().map(|&x| w * x).collect()
        })
        .collect();
    blocks.concat()
}

/// Discrete p-Laplacian `-D^T(|Du|^{p-2} Du)`, node-major with `d` values
/// per node. On smooth maps it approaches `div(|du|^{p-2} du)`, so `p = 2`
/// gives the classical Laplacian.
pub fn p_laplacian<T: Real>(m: &GridMap<T>, p: T) -> Result<Vec<T>> {
    if !(p > T::one()) {
        return Err(Error::InvalidExponent(p.to_f64_lossy()));
    }
    let f = flux(m, p, T::one());
    Ok(stencil_transpose(m, &f).into_iter().map(|x| -x).collect())
}

/// Integer winding of every target coordinate along every domain axis,
/// `w[axis][target]`, from the unwrapped increments along the lattice line
/// through node 0. `None` unless every axis is periodic.
pub fn winding_numbers<T: Real>(m: &GridMap<T>) -> Option<Vec<Vec<i64>>> {
    if !m.all_periodic() {
        return None;
    }
    let d = m.target_dim();
    Some(
        (0..m.domain_dim())
            .map(|a| {
                let n = m.shape()[a];
                (0..d)
                    .map(|t| {
                        let total: T = (0..n)
                            .map(|i| {
                                let here = m.value(m.along(0, a, 0, i))[t];
                                let next = m.value(m.along(0, a, 0, (i + 1) % n))[t];
                                unwrap_delta(next - here)
                            })
                            .sum();
                        total.round().to_i64().unwrap_or(0)
                    })
                    .collect()
            })
            .collect(),
    )
}

/// `ω(W e_0, ..., W e_n)` for the winding matrix `W`: the pullback integral
/// every map in the homotopy class shares.
pub fn exact_pullback<T: Real>(m: &GridMap<T>) -> Option<T> {
    let w = winding_numbers(m)?;
    let cols: Vec<Vec<T>> = w.iter().map(|c| c.iter().map(|&x| T::lit(x as f64)).collect()).collect();
    let refs: Vec<&[T]> = cols.iter().map(|c| c.as_slice()).collect();
    m.triad().evaluate(&refs).ok()
}
