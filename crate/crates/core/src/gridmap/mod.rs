//! Maps from a uniform box lattice into a flat torus `R^d / Z^d` carrying a
//! compatible triad.
//!
//! Node `i` sits at `x = i * h` with `h = 1/N` on every axis. Values are
//! stored node-major (row-major over the lattice, last axis fastest), `d`
//! reals per node. Differences between neighbouring nodes are reduced to the
//! nearest lift, so maps of nonzero degree such as the inclusion `x ↦ x` are
//! stored by their values mod 1 and differentiated correctly.

mod diagnostics;
mod equivariance;
mod io;
mod jet;

pub use diagnostics::{
    critical_locus, distortion_report, energy_report, exact_pullback, p_laplacian, weak_conformal_check,
    winding_numbers, CriticalLocus, DiagnosticsReport, DistortionReport,
};
pub use equivariance::{conformal_equivariance_check, Similarity};
pub use io::{read_gmap, write_gmap};
pub(crate) use diagnostics::{flux, stencil_transpose};
pub(crate) use jet::jacobian;
pub use jet::{finite_diff_jacobian, jet_field, mcr_residual, Coefficients, JetField, McrOperator, NodeJet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::LinearMap;
use crate::scalar::Real;
use crate::triad::Triad;

/// Smallest lattice size per axis; the boundary stencils need three nodes.
pub const MIN_NODES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap<T = f64> {
    shape: Vec<usize>,
    periodic: Vec<bool>,
    values: Vec<T>,
    triad: Triad<T>,
}

impl<T: Real> GridMap<T> {
    pub fn new(triad: Triad<T>, shape: &[usize], periodic: &[bool], values: Vec<T>) -> Result<Self> {
        if shape.len() != triad.n() + 1 {
            return Err(Error::Dimension(format!(
                "a {}-fold triad needs a {}-dimensional domain, got shape {:?}",
                triad.n(),
                triad.n() + 1,
                shape
            )));
        }
        if periodic.len() != shape.len() {
            return Err(Error::Dimension(format!(
                "{} periodicity flags for {} axes",
                periodic.len(),
                shape.len()
            )));
        }
        if let Some(&n) = shape.iter().find(|&&n| n < MIN_NODES) {
            return Err(Error::Dimension(format!("lattice size {n} below the minimum {MIN_NODES}")));
        }
        let count: usize = shape.iter().product();
        if values.len() != count * triad.dim() {
            return Err(Error::Dimension(format!(
                "{} values for {} nodes of a {}-dimensional target",
                values.len(),
                count,
                triad.dim()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("map values"));
        }
        Ok(Self {
            shape: shape.to_vec(),
            periodic: periodic.to_vec(),
            values,
            triad,
        })
    }

    /// Samples `f` at every node; `f` receives the node coordinates.
    pub fn from_fn<F>(triad: Triad<T>, shape: &[usize], periodic: &[bool], f: F) -> Result<Self>
    where
        F: Fn(&[T]) -> Vec<T> + Sync,
    {
        let d = triad.dim();
        let count: usize = shape.iter().product();
        let probe = Self {
            shape: shape.to_vec(),
            periodic: periodic.to_vec(),
            values: Vec::new(),
            triad: triad.clone(),
        };
        let rows: Vec<Vec<T>> = (0..count).into_par_iter().map(|i| f(&probe.coords(i))).collect();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::Dimension(format!("sample function returned {} values, target has {d}", r.len())));
        }
        Self::new(triad, shape, periodic, rows.concat())
    }

    pub fn constant(triad: Triad<T>, shape: &[usize], value: &[T]) -> Result<Self> {
        let periodic = vec![true; shape.len()];
        Self::from_fn(triad, shape, &periodic, |_| value.to_vec())
    }

    /// Linear map `x ↦ W x` on the periodic box. The columns must be integer
    /// vectors so the map descends to the torus.
    pub fn linear(triad: Triad<T>, shape: &[usize], w: &LinearMap<T>) -> Result<Self> {
        if w.rows() != triad.dim() || w.cols() != shape.len() {
            return Err(Error::Dimension(format!(
                "linear map {}x{} for target {} and domain {}",
                w.rows(),
                w.cols(),
                triad.dim(),
                shape.len()
            )));
        }
        if w.as_slice().iter().any(|&x| (x - x.round()).abs() > T::lit(1e-12)) {
            return Err(Error::LatticeMismatch("linear map with non-integer entries does not descend to the torus".into()));
        }
        let periodic = vec![true; shape.len()];
        let w = w.clone();
        Self::from_fn(triad, shape, &periodic, move |x| w.apply(x).expect("shape checked"))
    }

    /// Coordinate inclusion of the box onto the first `n+1` target axes,
    /// with the first two swapped when that is needed to make it calibrated
    /// (the Cayley form is `-1` on `(1, i, j, k)`).
    pub fn inclusion(triad: Triad<T>, shape: &[usize]) -> Result<Self> {
        Self::scaled_inclusion(triad, shape, 1)
    }

    /// `s` times the inclusion; a conformal map of degree `s^{n+1}`.
    pub fn scaled_inclusion(triad: Triad<T>, shape: &[usize], s: i64) -> Result<Self> {
        let w = inclusion_matrix(&triad, shape.len(), T::lit(s as f64))?;
        Self::linear(triad, shape, &w)
    }

    /// Adds `f(x)` to the value at every node.
    pub fn perturbed<F>(mut self, f: F) -> Result<Self>
    where
        F: Fn(&[T]) -> Vec<T> + Sync,
    {
        let d = self.target_dim();
        let add: Vec<Vec<T>> = (0..self.node_count()).into_par_iter().map(|i| f(&self.coords(i))).collect();
        for (i, a) in add.iter().enumerate() {
            if a.len() != d {
                return Err(Error::Dimension(format!("perturbation returned {} values, target has {d}", a.len())));
            }
            for (v, &x) in self.values[i * d..(i + 1) * d].iter_mut().zip(a) {
                *v += x;
            }
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("perturbed map values"));
        }
        Ok(self)
    }

    pub fn domain_dim(&self) -> usize {
        self.shape.len()
    }

    pub fn target_dim(&self) -> usize {
        self.triad.dim()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn all_periodic(&self) -> bool {
        self.periodic.iter().all(|&p| p)
    }

    pub fn spacing(&self, axis: usize) -> T {
        T::one() / T::from_usize_lossy(self.shape[axis])
    }

    /// Volume of one lattice cell, the quadrature weight of a node.
    pub fn cell_volume(&self) -> T {
        (0..self.domain_dim()).map(|a| self.spacing(a)).fold(T::one(), |p, h| p * h)
    }

    pub fn node_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn triad(&self) -> &Triad<T> {
        &self.triad
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn value(&self, node: usize) -> &[T] {
        let d = self.target_dim();
        &self.values[node * d..(node + 1) * d]
    }

    /// Same lattice and triad, new values.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.triad.clone(), &self.shape, &self.periodic, values)
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        let mut r = node;
        for a in (0..self.shape.len()).rev() {
            idx[a] = r % self.shape[a];
            r /= self.shape[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn coords(&self, node: usize) -> Vec<T> {
        self.multi_index(node)
            .iter()
            .enumerate()
            .map(|(a, &i)| T::from_usize_lossy(i) * self.spacing(a))
            .collect()
    }

    /// Flat stride of `axis`.
    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    /// Node obtained by replacing the `axis` index of `node` by `to`.
    #[inline]
    pub(crate) fn along(&self, node: usize, axis: usize, from: usize, to: usize) -> usize {
        let s = self.stride(axis);
        node + to * s - from * s
    }
}

/// Reduces a target difference to its nearest lift in `(-1/2, 1/2]`.
#[inline]
pub fn unwrap_delta<T: Real>(x: T) -> T {
    x - x.round()
}

/// Derivative stencil along one axis at lattice index `i`: entries
/// `(index, weight)` with weights in units of `1/(2h)`.
pub(crate) fn stencil(n: usize, periodic: bool, i: usize) -> ([(usize, i32); 3], usize) {
    if periodic || (i > 0 && i + 1 < n) {
        ([((i + 1) % n, 1), ((i + n - 1) % n, -1), (0, 0)], 2)
    } else if i == 0 {
        ([(0, -3), (1, 4), (2, -1)], 3)
    } else {
        ([(n - 1, 3), (n - 2, -4), (n - 3, 1)], 3)
    }
}

/// Lattice indices whose stencil may touch index `j`.
pub(crate) fn stencil_sources(n: usize, periodic: bool, j: usize) -> Vec<usize> {
    let mut out: Vec<usize> = if periodic {
        (0..5).map(|k| (j + n + k - 2) % n).collect()
    } else {
        (j.saturating_sub(2)..=(j + 2).min(n - 1)).collect()
    };
    out.sort_unstable();
    out.dedup();
    out
}

pub(crate) fn inclusion_matrix<T: Real>(triad: &Triad<T>, dim: usize, s: T) -> Result<LinearMap<T>> {
    let d = triad.dim();
    if dim > d {
        return Err(Error::Dimension(format!("no inclusion of a {dim}-box into a {d}-torus")));
    }
    let mut cols: Vec<Vec<T>> = (0..dim)
        .map(|a| {
            let mut c = vec![T::zero(); d];
            c[a] = s;
            c
        })
        .collect();
    let refs: Vec<&[T]> = cols.iter().map(|c| c.as_slice()).collect();
    if dim == triad.n() + 1 && triad.evaluate(&refs)? < T::zero() {
        cols.swap(0, 1);
    }
    LinearMap::from_columns(&cols)
}
