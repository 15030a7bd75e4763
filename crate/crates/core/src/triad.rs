//! Compatible n-triads `(ω, g, (J, K))` on flat `R^d`.
//!
//! The metric is always the flat orthonormal one, so forms and multivectors
//! share coefficients. The split product is stored as two matrices derived
//! from `ω`:
//!
//! * `J : Λ^n → R^d` with `g(J ζ, B) = ω(ζ ∧ B)`,
//! * `K : R^d → Λ^n` with `<ζ, K A> = ω(A ∧ ζ)`,
//!
//! and `J ∘ K = (-1)^n λ id`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::{self, binomial, subset_rank, subsets, wedge, wedge_sign, LinearMap, MultiVector};
use crate::linalg;
use crate::octonion::{coordinate_slot, triple_cross, Octonion};
use crate::sampling;
use crate::scalar::{nan_max, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Hermitian,
    Conformal,
    Associative,
    Cayley,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Hermitian, Family::Conformal, Family::Associative, Family::Cayley];

    pub fn name(self) -> &'static str {
        match self {
            Family::Hermitian => "hermitian",
            Family::Conformal => "conformal",
            Family::Associative => "associative",
            Family::Cayley => "cayley",
        }
    }

    /// Ambient dimension used when none is given.
    pub fn default_dim(self) -> usize {
        match self {
            Family::Hermitian => 2,
            Family::Conformal => 3,
            Family::Associative => 7,
            Family::Cayley => 8,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnsupportedTriad {
                family: s.to_string(),
                dim: 0,
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triad<T = f64> {
    family: Family,
    n: usize,
    omega: MultiVector<T>,
    lambda: T,
    j: LinearMap<T>,
    k: LinearMap<T>,
}

/// `ω_0 = dx^123 - dx^1(dy^23 + dy^10) - dx^2(dy^31 + dy^20) - dx^3(dy^12 + dy^30)`.
const OMEGA0_TERMS: [(f64, [&str; 3]); 7] = [
    (1.0, ["x1", "x2", "x3"]),
    (-1.0, ["x1", "y2", "y3"]),
    (-1.0, ["x1", "y1", "y0"]),
    (-1.0, ["x2", "y3", "y1"]),
    (-1.0, ["x2", "y2", "y0"]),
    (-1.0, ["x3", "y1", "y2"]),
    (-1.0, ["x3", "y3", "y0"]),
];

/// The associative 3-form on `Im O = R^7` from its coordinate expansion.
pub fn associative_form<T: Real>() -> MultiVector<T> {
    let mut omega = MultiVector::zero(7, 3).expect("grade 3 in R^7");
    for (coef, labels) in OMEGA0_TERMS {
        let idx = labels.map(|l| coordinate_slot(l).expect("known label") - 1);
        let blade = MultiVector::<T>::basis(7, &idx).expect("distinct indices");
        omega = omega.add(&blade.scale(T::lit(coef))).expect("same shape");
    }
    omega
}

/// The Cayley 4-form `Φ(x, y, z, w) = <x × y × z, w>` on `O = R^8`.
pub fn cayley_form<T: Real>() -> MultiVector<T> {
    let mut coeffs = Vec::with_capacity(70);
    for &m in subsets(8, 4) {
        let idx = exterior::mask_indices(m);
        let t = triple_cross(&Octonion::basis(idx[0]), &Octonion::basis(idx[1]), &Octonion::basis(idx[2]));
        coeffs.push(t.coords[idx[3]]);
    }
    MultiVector::from_coeffs(8, 4, coeffs).expect("70 coefficients")
}

fn kahler_form<T: Real>(dim: usize) -> MultiVector<T> {
    let mut omega = MultiVector::zero(dim, 2).expect("grade 2");
    for p in 0..dim / 2 {
        let mask = (1u8 << (2 * p)) | (1u8 << (2 * p + 1));
        omega.coeffs_mut()[subset_rank(dim, mask)] = T::one();
    }
    omega
}

/// Builds one of the four compatible triad families in dimension `dim`.
pub fn make_triad<T: Real>(family: Family, dim: usize) -> Result<Triad<T>> {
    let unsupported = || Error::UnsupportedTriad {
        family: family.name().to_string(),
        dim,
    };
    let (omega, lambda): (MultiVector<T>, Option<f64>) = match family {
        Family::Hermitian if (2..=exterior::MAX_DIM).contains(&dim) && dim.is_multiple_of(2) => (kahler_form(dim), Some(1.0)),
        Family::Conformal if (2..=exterior::MAX_DIM).contains(&dim) => (MultiVector::volume(dim)?, Some(1.0)),
        Family::Associative if dim == 7 => (associative_form(), Some(3.0)),
        Family::Cayley if dim == 8 => (cayley_form(), None),
        _ => return Err(unsupported()),
    };
    let triad: Triad<T> = Triad::from_form(family, omega)?;
    if let Some(l) = lambda {
        debug_assert!(
            (triad.lambda - T::lit(l)).abs() <= T::lit(1e-12),
            "{family}: J∘K gives λ = {:?}, expected {l}",
            triad.lambda
        );
        return Ok(Triad {
            lambda: T::lit(l),
            ..triad
        });
    }
    Ok(triad)
}

impl<T: Real> Triad<T> {
    /// Derives `(J, K)` and `λ` from an `(n+1)`-form. Fails if `J ∘ K` is
    /// not a positive multiple of `(-1)^n id`.
    pub fn from_form(family: Family, omega: MultiVector<T>) -> Result<Self> {
        let d = omega.dim();
        if omega.grade() < 2 {
            return Err(Error::Dimension(format!("a triad needs a form of degree >= 2, got {}", omega.grade())));
        }
        let n = omega.grade() - 1;
        let grade_n = subsets(d, n);
        let mut j = LinearMap::zeros(d, grade_n.len());
        let mut k = LinearMap::zeros(grade_n.len(), d);
        for (col, &m) in grade_n.iter().enumerate() {
            for b in 0..d {
                let bit = 1u8 << b;
                // ω(e_I ∧ e_b)
                let s_ib = wedge_sign(m, bit);
                if s_ib != 0 {
                    let c = omega.coeff(m | bit) * T::from_i32(s_ib).unwrap();
                    j.set(b, col, c);
                    // ω(e_b ∧ e_I) = (-1)^n ω(e_I ∧ e_b)
                    let s_bi = wedge_sign(bit, m);
                    k.set(col, b, omega.coeff(m | bit) * T::from_i32(s_bi).unwrap());
                }
            }
        }
        let jk = j.matmul(&k)?;
        let sign = if n.is_multiple_of(2) { T::one() } else { -T::one() };
        let lambda = sign * (0..d).map(|i| jk.get(i, i)).sum::<T>() / T::from_usize_lossy(d);
        let dev = jk.sub(&LinearMap::identity(d).scale(sign * lambda))?.max_abs();
        if !(lambda > T::zero()) || dev > T::lit(1e-9) * lambda {
            return Err(Error::UnsupportedTriad {
                family: format!("{family} (J∘K not proportional to identity, deviation {dev:?})"),
                dim: d,
            });
        }
        Ok(Self {
            family,
            n,
            omega,
            lambda,
            j,
            k,
        })
    }

    /// Replaces the form while keeping the split product; used to build
    /// deliberately inconsistent triads.
    pub fn with_form(&self, omega: MultiVector<T>) -> Result<Self> {
        if omega.dim() != self.dim() || omega.grade() != self.n + 1 {
            return Err(Error::Dimension("replacement form has the wrong shape".into()));
        }
        Ok(Self { omega, ..self.clone() })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Fold `n`; the form has degree `n + 1`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn omega(&self) -> &MultiVector<T> {
        &self.omega
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Matrix of `J`, columns indexed by the lexicographic `n`-subsets.
    pub fn j_matrix(&self) -> &LinearMap<T> {
        &self.j
    }

    /// Matrix of `K`, rows indexed by the lexicographic `n`-subsets.
    pub fn k_matrix(&self) -> &LinearMap<T> {
        &self.k
    }

    /// `ω(v_0, ..., v_n)`.
    pub fn evaluate(&self, vectors: &[&[T]]) -> Result<T> {
        if vectors.len() != self.n + 1 {
            return Err(Error::Dimension(format!("ω takes {} vectors, got {}", self.n + 1, vectors.len())));
        }
        self.omega.dot(&MultiVector::blade(vectors)?)
    }
}

/// The vector cross product `J` on a grade-`n` multivector.
pub fn apply_j<T: Real>(t: &Triad<T>, a: &MultiVector<T>) -> Result<Vec<T>> {
    if a.dim() != t.dim() || a.grade() != t.n {
        return Err(Error::Dimension(format!(
            "J expects grade {} in dimension {}, got grade {} in dimension {}",
            t.n,
            t.dim(),
            a.grade(),
            a.dim()
        )));
    }
    t.j.apply(a.coeffs())
}

/// The split `K : R^d → Λ^n`.
pub fn apply_k<T: Real>(t: &Triad<T>, v: &[T]) -> Result<MultiVector<T>> {
    if v.len() != t.dim() {
        return Err(Error::Dimension(format!("K expects a vector of length {}, got {}", t.dim(), v.len())));
    }
    MultiVector::from_coeffs(t.dim(), t.n, t.k.apply(v)?)
}

/// Maximum residuals of the triad axioms over random samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport<T = f64> {
    pub family: Family,
    pub samples: usize,
    pub tol: T,
    pub lambda: T,
    /// `ω(ζ, B) - g(J ζ, B)`.
    pub form_vs_cross_product: T,
    /// `<ζ, K A> - ω(A, ζ)`.
    pub split_adjoint: T,
    /// `J ∘ K - (-1)^n λ id`, relative to λ.
    pub split_identity: T,
    /// `|J(v_1 ∧ .. ∧ v_n)|² - |v_1 ∧ .. ∧ v_n|²` on decomposables, relative.
    pub comass: T,
    /// `g(A, B) - λ⁻¹ (-1)^n ω(K A, B)`.
    pub metric_recovery: T,
    /// Smallest `|ι_V ω|` over random unit `V`.
    pub nondegeneracy_margin: T,
    pub failing: Vec<&'static str>,
}

impl<T: Real> CompatibilityReport<T> {
    pub fn pass(&self) -> bool {
        self.failing.is_empty()
    }

    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("family={}\n", self.family));
        s.push_str(&format!("samples={}\n", self.samples));
        s.push_str(&format!("tol={:?}\n", self.tol));
        s.push_str(&format!("lambda={:?}\n", self.lambda));
        s.push_str(&format!("form_vs_cross_product={:?}\n", self.form_vs_cross_product));
        s.push_str(&format!("split_adjoint={:?}\n", self.split_adjoint));
        s.push_str(&format!("split_identity={:?}\n", self.split_identity));
        s.push_str(&format!("comass={:?}\n", self.comass));
        s.push_str(&format!("metric_recovery={:?}\n", self.metric_recovery));
        s.push_str(&format!("nondegeneracy_margin={:?}\n", self.nondegeneracy_margin));
        s.push_str(&format!("compatibility_pass={}\n", self.pass()));
        if !self.failing.is_empty() {
            s.push_str(&format!("failing={}\n", self.failing.join(",")));
        }
        s
    }
}

/// Samples the triad axioms. Every identity is evaluated through the stored
/// form by the wedge route and compared with the stored `J`/`K`, so they
/// catch a form that disagrees with its split product.
pub fn check_compatibility<T: Real, R: Rng>(
    t: &Triad<T>,
    samples: usize,
    tol: T,
    rng: &mut R,
) -> CompatibilityReport<T> {
    let d = t.dim();
    let n = t.n;
    let sign = if n.is_multiple_of(2) { T::one() } else { -T::one() };
    let omega = &t.omega;
    let mut form_vs_j = T::zero();
    let mut adjoint = T::zero();
    let mut comass = T::zero();
    let mut metric = T::zero();
    let mut margin = T::infinity();

    for _ in 0..samples.max(1) {
        let zeta = sampling::gaussian_multivector::<T, _>(rng, d, n);
        let b = sampling::gaussian_vec::<T, _>(rng, d);
        let bv = MultiVector::vector(&b).unwrap();
        let zn = zeta.norm();
        let bn = linalg::norm(&b);

        let lhs = omega.dot(&wedge(&zeta, &bv).unwrap()).unwrap();
        let rhs = linalg::dot(&apply_j(t, &zeta).unwrap(), &b);
        form_vs_j = nan_max(form_vs_j, (lhs - rhs).abs() / (zn * bn));

        let ka = apply_k(t, &b).unwrap();
        let lhs = zeta.dot(&ka).unwrap();
        let rhs = omega.dot(&wedge(&bv, &zeta).unwrap()).unwrap();
        adjoint = nan_max(adjoint, (lhs - rhs).abs() / (zn * bn));

        let vs: Vec<Vec<T>> = (0..n).map(|_| sampling::gaussian_vec(rng, d)).collect();
        let refs: Vec<&[T]> = vs.iter().map(|v| v.as_slice()).collect();
        let dec = MultiVector::blade(&refs).unwrap();
        let dn2 = dec.dot(&dec).unwrap();
        let jd = apply_j(t, &dec).unwrap();
        comass = nan_max(comass, (linalg::dot(&jd, &jd) - dn2).abs() / dn2);

        let a1 = sampling::gaussian_vec::<T, _>(rng, d);
        let kb = apply_k(t, &b).unwrap();
        let rhs = sign / t.lambda * omega.dot(&wedge(&kb, &MultiVector::vector(&a1).unwrap()).unwrap()).unwrap();
        metric = nan_max(metric, (linalg::dot(&b, &a1) - rhs).abs() / (bn * linalg::norm(&a1)));

        let v = sampling::unit_vector::<T, _>(rng, d);
        let iv = exterior::interior(&v, omega).unwrap();
        margin = margin.min(iv.norm());
    }

    let jk = t.j.matmul(&t.k).unwrap();
    let split = jk.sub(&LinearMap::identity(d).scale(sign * t.lambda)).unwrap().max_abs() / t.lambda;

    let mut failing = Vec::new();
    let checks = [
        ("form_vs_cross_product", form_vs_j),
        ("split_adjoint", adjoint),
        ("split_identity", split),
        ("comass", comass),
        ("metric_recovery", metric),
    ];
    for (name, r) in checks {
        if !(r <= tol) {
            failing.push(name);
        }
    }
    if !(margin > T::zero()) {
        failing.push("nondegeneracy_margin");
    }
    CompatibilityReport {
        family: t.family,
        samples,
        tol,
        lambda: t.lambda,
        form_vs_cross_product: form_vs_j,
        split_adjoint: adjoint,
        split_identity: split,
        comass,
        metric_recovery: metric,
        nondegeneracy_margin: margin,
        failing,
    }
}

/// Sampled comass of `ω` and its equality cases.
#[derive(Debug, Clone, PartialEq)]
pub struct ComassReport<T = f64> {
    pub family: Family,
    pub frames: usize,
    pub tol: T,
    /// Largest `ω(ζ_0, ..., ζ_n)` over random orthonormal frames.
    pub max_value: T,
    /// Largest `|ω(ζ_1, .., ζ_n, J(ζ_1 ∧ .. ∧ ζ_n)) - 1|` over random orthonormal `n`-frames.
    pub equality_deviation: T,
    /// Largest `| |η - Jζ|² - 2 (1 - ω(ζ_1, .., ζ_n, η)) |` over random unit `η`:
    /// the value 1 is reached only at `η = Jζ`.
    pub converse_deviation: T,
}

impl<T: Real> ComassReport<T> {
    pub fn pass(&self) -> bool {
        self.max_value <= T::one() + self.tol && self.equality_deviation <= self.tol && self.converse_deviation <= self.tol
    }

    pub fn to_key_values(&self) -> String {
        format!(
            "comass_frames={}\ncomass_max={:?}\ncalibrated_equality_deviation={:?}\ncalibrated_converse_deviation={:?}\ncomass_pass={}\n",
            self.frames,
            self.max_value,
            self.equality_deviation,
            self.converse_deviation,
            self.pass()
        )
    }
}

/// Samples `ω` on random orthonormal `(n+1)`-frames and checks the frames on
/// which it attains 1.
///
/// The calibrated frames put `J`'s arguments first, `(ζ_1, .., ζ_n, Jζ)`,
/// which is the ordering fixed by `ω(ζ, B) = g(Jζ, B)`; for even `n` it is
/// the same oriented plane as `(Jζ, ζ_1, .., ζ_n)`.
pub fn calibration_comass_check<T: Real, R: Rng>(t: &Triad<T>, frames: usize, tol: T, rng: &mut R) -> ComassReport<T> {
    let d = t.dim();
    let n = t.n;
    let mut max_value = T::neg_infinity();
    let mut eq_dev = T::zero();
    let mut conv_dev = T::zero();
    for _ in 0..frames.max(1) {
        let f = sampling::orthonormal_frame::<T, _>(rng, d, n + 1);
        let refs: Vec<&[T]> = f.iter().map(|v| v.as_slice()).collect();
        max_value = nan_max(max_value, t.evaluate(&refs).unwrap());

        let zeta_refs = &refs[..n];
        let zeta = MultiVector::blade(zeta_refs).unwrap();
        let jz = apply_j(t, &zeta).unwrap();
        let mut with_j: Vec<&[T]> = zeta_refs.to_vec();
        with_j.push(&jz);
        eq_dev = nan_max(eq_dev, (t.evaluate(&with_j).unwrap() - T::one()).abs());

        // random unit η, biased toward Jζ so values near 1 are exercised
        let pert = sampling::gaussian_vec::<T, _>(rng, d);
        let eps: T = T::lit(10f64.powf(-6.0 * rng.random::<f64>()));
        let mut eta: Vec<T> = jz.iter().zip(&pert).map(|(&a, &p)| a + eps * p).collect();
        let len = linalg::norm(&eta);
        eta.iter_mut().for_each(|x| *x /= len);
        let mut with_eta: Vec<&[T]> = zeta_refs.to_vec();
        with_eta.push(&eta);
        let val = t.evaluate(&with_eta).unwrap();
        let dist2: T = eta.iter().zip(&jz).map(|(&a, &b)| (a - b) * (a - b)).sum();
        conv_dev = nan_max(conv_dev, (dist2 - T::lit(2.0) * (T::one() - val)).abs());
    }
    ComassReport {
        family: t.family,
        frames,
        tol,
        max_value,
        equality_deviation: eq_dev,
        converse_deviation: conv_dev,
    }
}

/// Smallest singular value of `V ↦ ι_V ω`, computed exactly from `K`.
pub fn nondegeneracy_floor<T: Real>(t: &Triad<T>) -> T {
    let ktk = t.k.transpose().matmul(&t.k).unwrap();
    let ev = linalg::sym_eigenvalues(ktk.as_slice(), t.dim());
    ev[0].max(T::zero()).sqrt()
}

/// Number of grade-`n` basis blades of the triad.
pub fn split_rank<T: Real>(t: &Triad<T>) -> usize {
    binomial(t.dim(), t.n)
}
