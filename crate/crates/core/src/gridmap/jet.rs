//! Pointwise jets: the discrete differential, the multi-Cauchy–Riemann
//! operator and the energy densities.

use rayon::prelude::*;

use super::{unwrap_delta, GridMap};
use crate::error::{Error, Result};
use crate::exterior::{ext_power, hs_norm, LinearMap, MultiVector};
use crate::scalar::Real;
use crate::triad::{make_triad, Family, Triad};

/// Normalizing constants for fold `n`, all derived from `n + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients<T = f64> {
    pub n: usize,
    /// `(n+1)^{-(n-1)/2}`, weight of `|du|^{n-1} du` in `ð`.
    pub mcr: T,
    /// `(n+1)^{-(n+1)/2}`, weight of `|du|^{n+1}` in the energy.
    pub energy: T,
    /// `(n+1)^{(n-3)/2} / 2`, weight of the mixed-energy quotient terms.
    pub mixed: T,
    /// `1/(n+1)`, weight of `<du, ðu>` in `E - ∫u*ω`.
    pub gap: T,
}

impl<T: Real> Coefficients<T> {
    pub fn new(n: usize) -> Self {
        let m = (n + 1) as f64;
        let nf = n as f64;
        Self {
            n,
            mcr: T::lit(m.powf(-(nf - 1.0) / 2.0)),
            energy: T::lit(m.powf(-(nf + 1.0) / 2.0)),
            mixed: T::lit(m.powf((nf - 3.0) / 2.0) / 2.0),
            gap: T::lit(1.0 / m),
        }
    }

    /// `|du|^p`, with `0^0 = 1`.
    #[inline]
    pub(crate) fn pow(x: T, p: usize) -> T {
        x.powi(p as i32)
    }
}

/// `ð` for a fixed target triad:
/// `ð(L) = (n+1)^{-(n-1)/2} |L|^{n-1} L - (-1)^n J ∘ Λ^n L ∘ k`,
/// where `k` sends a domain vector to its Hodge dual `n`-vector.
#[derive(Debug, Clone)]
pub struct McrOperator<T = f64> {
    coef: Coefficients<T>,
    sign: T,
    j: LinearMap<T>,
    k: LinearMap<T>,
    omega: MultiVector<T>,
}

impl<T: Real> McrOperator<T> {
    pub fn new(triad: &Triad<T>) -> Result<Self> {
        let n = triad.n();
        let domain: Triad<T> = make_triad(Family::Conformal, n + 1)?;
        Ok(Self {
            coef: Coefficients::new(n),
            sign: if n.is_multiple_of(2) { T::one() } else { -T::one() },
            j: triad.j_matrix().clone(),
            k: domain.k_matrix().clone(),
            omega: triad.omega().clone(),
        })
    }

    pub fn coefficients(&self) -> &Coefficients<T> {
        &self.coef
    }

    fn check(&self, du: &LinearMap<T>) -> Result<()> {
        if du.rows() != self.j.rows() || du.cols() != self.coef.n + 1 {
            return Err(Error::Dimension(format!(
                "differential {}x{} for a {}x{} operator",
                du.rows(),
                du.cols(),
                self.j.rows(),
                self.coef.n + 1
            )));
        }
        Ok(())
    }

    /// `J ∘ Λ^n du ∘ k` and `Λ^n du`.
    fn split_term(&self, du: &LinearMap<T>) -> (LinearMap<T>, LinearMap<T>) {
        let lam = ext_power(du, self.coef.n).expect("checked shape");
        let t = self.j.matmul(&lam.matmul(&self.k).unwrap()).unwrap();
        (t, lam)
    }

    pub fn apply(&self, du: &LinearMap<T>) -> Result<LinearMap<T>> {
        self.check(du)?;
        Ok(self.apply_unchecked(du, hs_norm(du)).0)
    }

    fn apply_unchecked(&self, du: &LinearMap<T>, norm: T) -> (LinearMap<T>, LinearMap<T>) {
        let (t, lam) = self.split_term(du);
        let first = du.scale(self.coef.mcr * Coefficients::pow(norm, self.coef.n - 1));
        (first.sub(&t.scale(self.sign)).unwrap(), lam)
    }

    /// `u*ω` on the unit cube: `ω(du e_0, ..., du e_n)`.
    pub fn pullback(&self, du: &LinearMap<T>) -> T {
        let cols: Vec<&[T]> = (0..du.cols()).map(|a| du.column(a)).collect();
        let b = MultiVector::blade(&cols).expect("vectors of one dimension");
        self.omega.dot(&b).expect("same shape")
    }

    /// All pointwise quantities at one differential.
    pub fn jet(&self, du: LinearMap<T>, eps_crit: T) -> NodeJet<T> {
        let n = self.coef.n;
        let norm = hs_norm(&du);
        let (res, lam) = self.apply_unchecked(&du, norm);
        let e_np1 = self.coef.energy * Coefficients::pow(norm, n + 1);
        let critical = norm <= eps_crit;
        let lam2 = lam.hs_dot(&lam);
        let quotient = |x: T| {
            if n == 1 {
                x
            } else if critical {
                T::zero()
            } else {
                x / Coefficients::pow(norm, n - 1)
            }
        };
        let e_mix = e_np1 / T::lit(2.0) + self.coef.mixed * quotient(lam2);
        let mixed_gap = self.coef.mixed * quotient(res.hs_dot(&res));
        NodeJet {
            du_norm: norm,
            lambda_wc: norm * norm / T::from_usize_lossy(n + 1),
            e_np1_density: e_np1,
            e_mix_density: e_mix,
            mixed_gap_density: mixed_gap,
            pullback_density: self.pullback(&du),
            pairing: du.hs_dot(&res),
            critical,
            mcr_residual: res,
            du,
        }
    }
}

/// `ð u` at a single differential.
pub fn mcr_residual<T: Real>(triad: &Triad<T>, du: &LinearMap<T>) -> Result<LinearMap<T>> {
    McrOperator::new(triad)?.apply(du)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeJet<T = f64> {
    pub du: LinearMap<T>,
    pub du_norm: T,
    /// Weak conformal factor `|du|² / (n+1)`.
    pub lambda_wc: T,
    pub mcr_residual: LinearMap<T>,
    pub e_np1_density: T,
    pub e_mix_density: T,
    /// `β |ðu|² / |du|^{n-1}`, zero at critical nodes.
    pub mixed_gap_density: T,
    pub pullback_density: T,
    /// `<du, ðu>`.
    pub pairing: T,
    pub critical: bool,
}

/// Jets at every node plus the critical threshold used for masking.
#[derive(Debug, Clone, PartialEq)]
pub struct JetField<T = f64> {
    pub nodes: Vec<NodeJet<T>>,
    pub eps_crit: T,
}

/// Threshold below which a node counts as critical.
pub const CRITICAL_REL: f64 = 1e-8;

/// Discrete differential at `node`: central differences of nearest-lift
/// edge increments, one-sided second order on non-periodic boundaries.
pub fn finite_diff_jacobian<T: Real>(m: &GridMap<T>, node: usize) -> Result<LinearMap<T>> {
    if node >= m.node_count() {
        return Err(Error::Dimension(format!("node {node} out of range {}", m.node_count())));
    }
    Ok(jacobian(m, node))
}

pub(crate) fn jacobian<T: Real>(m: &GridMap<T>, node: usize) -> LinearMap<T> {
    let d = m.target_dim();
    let dd = m.domain_dim();
    let idx = m.multi_index(node);
    let mut data = vec![T::zero(); d * dd];
    let u = m.value(node);
    for a in 0..dd {
        let n = m.shape()[a];
        let i = idx[a];
        let inv2h = T::from_usize_lossy(n) / T::lit(2.0);
        let col = &mut data[a * d..(a + 1) * d];
        let at = |j: usize| m.value(m.along(node, a, i, j));
        if m.periodic()[a] || (i > 0 && i + 1 < n) {
            let up = at((i + 1) % n);
            let dn = at((i + n - 1) % n);
            for t in 0..d {
                col[t] = (unwrap_delta(up[t] - u[t]) + unwrap_delta(u[t] - dn[t])) * inv2h;
            }
        } else {
            // edges oriented away from the boundary
            let (e1, e2, s) = if i == 0 {
                ((at(0), at(1)), (at(1), at(2)), T::one())
            } else {
                ((at(n - 1), at(n - 2)), (at(n - 2), at(n - 3)), -T::one())
            };
            for t in 0..d {
                let d1 = unwrap_delta(e1.1[t] - e1.0[t]);
                let d2 = unwrap_delta(e2.1[t] - e2.0[t]);
                col[t] = s * (T::lit(3.0) * d1 - d2) * inv2h;
            }
        }
    }
    LinearMap::from_raw(d, dd, data)
}

/// Largest `|du|` over the lattice.
pub(crate) fn max_du_norm<T: Real>(m: &GridMap<T>) -> T {
    (0..m.node_count())
        .into_par_iter()
        .map(|i| hs_norm(&jacobian(m, i)))
        .collect::<Vec<T>>()
        .into_iter()
        .fold(T::zero(), crate::scalar::nan_max)
}

pub(crate) fn critical_threshold<T: Real>(m: &GridMap<T>) -> T {
    T::lit(CRITICAL_REL) * max_du_norm(m)
}

/// Full per-node jets.
pub fn jet_field<T: Real>(m: &GridMap<T>) -> Result<JetField<T>> {
    let op = McrOperator::new(m.triad())?;
    let eps = critical_threshold(m);
    let nodes = (0..m.node_count()).into_par_iter().map(|i| op.jet(jacobian(m, i), eps)).collect();
    Ok(JetField { nodes, eps_crit: eps })
}
