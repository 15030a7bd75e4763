//! Conformal equivariance of `ð` under lattice similarities.

use rayon::prelude::*;

use super::jet::{jacobian, McrOperator};
use super::GridMap;
use crate::error::{Error, Result};
use crate::exterior::{hs_norm, sort_sign, LinearMap};
use crate::scalar::{nan_max, Real};

/// `φ(x) = s R x + shift * h` with `R` a signed axis permutation
/// (`(R x)_a = signs[a] * x_{perm[a]}`), `s` a positive integer and `shift`
/// counted in lattice steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Similarity {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
    pub scale: usize,
    pub shift: Vec<i64>,
}

impl Similarity {
    pub fn identity(dim: usize) -> Self {
        Self {
            perm: (0..dim).collect(),
            signs: vec![1; dim],
            scale: 1,
            shift: vec![0; dim],
        }
    }

    pub fn translation(shift: &[i64]) -> Self {
        Self {
            shift: shift.to_vec(),
            ..Self::identity(shift.len())
        }
    }

    pub fn permutation(perm: &[usize]) -> Self {
        Self {
            perm: perm.to_vec(),
            ..Self::identity(perm.len())
        }
    }

    pub fn scaling(dim: usize, scale: usize) -> Self {
        Self {
            scale,
            ..Self::identity(dim)
        }
    }

    /// `det R`, or 0 if `perm` is not a permutation.
    pub fn orientation(&self) -> i32 {
        let mut seen = vec![false; self.perm.len()];
        for &p in &self.perm {
            if p >= seen.len() || seen[p] {
                return 0;
            }
            seen[p] = true;
        }
        let s: i32 = self.signs.iter().map(|&x| x as i32).product();
        sort_sign(&self.perm) * s
    }

    /// `d φ = s R`.
    pub fn differential<T: Real>(&self) -> LinearMap<T> {
        let n = self.perm.len();
        let mut l = LinearMap::zeros(n, n);
        for a in 0..n {
            l.set(a, self.perm[a], T::lit(self.scale as f64 * self.signs[a] as f64));
        }
        l
    }

    fn validate<T: Real>(&self, m: &GridMap<T>) -> Result<()> {
        let n = m.domain_dim();
        if self.perm.len() != n || self.signs.len() != n || self.shift.len() != n {
            return Err(Error::LatticeMismatch(format!("similarity of dimension {} on a {n}-dimensional box", self.perm.len())));
        }
        if self.signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::LatticeMismatch("signs must be ±1".into()));
        }
        match self.orientation() {
            1 => {}
            0 => return Err(Error::LatticeMismatch(format!("{:?} is not a permutation", self.perm))),
            _ => return Err(Error::LatticeMismatch("orientation-reversing rotation".into())),
        }
        if self.scale == 0 {
            return Err(Error::LatticeMismatch("scale must be a positive integer".into()));
        }
        if !m.all_periodic() {
            return Err(Error::LatticeMismatch("similarities need a fully periodic lattice".into()));
        }
        for a in 0..n {
            if m.shape()[a] != m.shape()[self.perm[a]] {
                return Err(Error::LatticeMismatch(format!(
                    "axis {a} has {} nodes but is fed by axis {} with {}",
                    m.shape()[a],
                    self.perm[a],
                    m.shape()[self.perm[a]]
                )));
            }
        }
        Ok(())
    }

    /// Lattice node `φ(i)`.
    pub fn map_node<T: Real>(&self, m: &GridMap<T>, node: usize) -> usize {
        let idx = m.multi_index(node);
        let out: Vec<usize> = (0..idx.len())
            .map(|a| {
                let n = m.shape()[a] as i64;
                let v = self.scale as i64 * self.signs[a] as i64 * idx[self.perm[a]] as i64 + self.shift[a];
                v.rem_euclid(n) as usize
            })
            .collect();
        m.flat_index(&out)
    }

    /// `u ∘ φ` on the same lattice.
    pub fn compose<T: Real>(&self, m: &GridMap<T>) -> Result<GridMap<T>> {
        self.validate(m)?;
        let d = m.target_dim();
        let mut vals = Vec::with_capacity(m.values().len());
        for node in 0..m.node_count() {
            vals.extend_from_slice(m.value(self.map_node(m, node)));
        }
        debug_assert_eq!(vals.len(), m.node_count() * d);
        m.with_values(vals)
    }
}

/// `max_i |ð(u∘φ)(i) - s^{n-1} ðu(φ(i)) ∘ dφ|`, Hilbert–Schmidt norm.
pub fn conformal_equivariance_check<T: Real>(m: &GridMap<T>, phi: &Similarity) -> Result<T> {
    let composed = phi.compose(m)?;
    let op = McrOperator::new(m.triad())?;
    let n = m.triad().n();
    let dphi = phi.differential::<T>();
    let mu = T::lit((phi.scale as f64).powi(n as i32 - 1));
    let r: Vec<T> = (0..m.node_count())
        .into_par_iter()
        .map(|i| {
            let lhs = op.apply(&jacobian(&composed, i)).unwrap();
            let rhs = op.apply(&jacobian(m, phi.map_node(m, i))).unwrap().matmul(&dphi).unwrap().scale(mu);
            hs_norm(&lhs.sub(&rhs).unwrap())
        })
        .collect();
    Ok(r.into_iter().fold(T::zero(), nan_max))
}
