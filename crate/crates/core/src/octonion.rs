//! Octonions by the Cayley–Dickson doubling of the quaternions,
//! `(a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))`.
//!
//! Basis order is `(1, i, j, k, l, il, jl, kl)`. In coordinates this is
//! `(x0, x1, x2, x3, y0, y1, y2, y3)`: the first quaternion of the pair
//! carries the `x` coordinates and the second the `y` coordinates, so
//! `l = (0, 1)` and `il = (0, i)`. Imaginary octonions drop the real slot and
//! use `(i, j, k, l, il, jl, kl) = (x1, x2, x3, y0, y1, y2, y3)`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Real;

/// Coordinate labels of the imaginary basis, in storage order.
pub const IM_LABELS: [&str; 7] = ["x1", "x2", "x3", "y0", "y1", "y2", "y3"];

/// Coordinate labels of the full octonion basis, in storage order.
pub const LABELS: [&str; 8] = ["x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3"];

/// Storage slot of a coordinate label such as `"y2"`.
pub fn coordinate_slot(label: &str) -> Option<usize> {
    LABELS.iter().position(|&l| l == label)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Octonion<T = f64> {
    pub coords: [T; 8],
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImOctonion<T = f64> {
    pub coords: [T; 7],
}

#[inline]
fn qmul<T: Real>(a: [T; 4], b: [T; 4]) -> [T; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

#[inline]
fn qconj<T: Real>(a: [T; 4]) -> [T; 4] {
    [a[0], -a[1], -a[2], -a[3]]
}

impl<T: Real> Octonion<T> {
    pub fn new(coords: [T; 8]) -> Self {
        Self { coords }
    }

    pub fn zero() -> Self {
        Self { coords: [T::zero(); 8] }
    }

    pub fn one() -> Self {
        Self::basis(0)
    }

    /// Basis element in storage slot `i` (0 is the unit).
    pub fn basis(i: usize) -> Self {
        let mut c = [T::zero(); 8];
        c[i] = T::one();
        Self { coords: c }
    }

    /// Splits into the quaternion pair `(x, y)` with `self = x + y l`.
    pub fn halves(&self) -> ([T; 4], [T; 4]) {
        let c = &self.coords;
        ([c[0], c[1], c[2], c[3]], [c[4], c[5], c[6], c[7]])
    }

    pub fn from_halves(x: [T; 4], y: [T; 4]) -> Self {
        Self {
            coords: [x[0], x[1], x[2], x[3], y[0], y[1], y[2], y[3]],
        }
    }

    pub fn re(&self) -> T {
        self.coords[0]
    }

    pub fn im(&self) -> ImOctonion<T> {
        let mut c = [T::zero(); 7];
        c.copy_from_slice(&self.coords[1..]);
        ImOctonion { coords: c }
    }

    pub fn conj(&self) -> Self {
        let mut c = self.coords.map(|x| -x);
        c[0] = self.coords[0];
        Self { coords: c }
    }

    /// Euclidean inner product, equal to `Re(a conj(b))`.
    pub fn dot(&self, other: &Self) -> T {
        self.coords.iter().zip(&other.coords).map(|(&a, &b)| a * b).sum()
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            coords: self.coords.map(|x| x * s),
        }
    }
}

impl<T: Real> Mul for Octonion<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        oct_mul(&self, &rhs)
    }
}

impl<T: Real> Add for Octonion<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let mut c = self.coords;
        for (x, &y) in c.iter_mut().zip(&rhs.coords) {
            *x += y;
        }
        Self { coords: c }
    }
}

impl<T: Real> Sub for Octonion<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Real> Neg for Octonion<T> {
    type Output = Self;

    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> ImOctonion<T> {
    pub fn new(coords: [T; 7]) -> Self {
        Self { coords }
    }

    /// Imaginary basis element in slot `i`: 0 = i, 1 = j, ..., 6 = kl.
    pub fn basis(i: usize) -> Self {
        let mut c = [T::zero(); 7];
        c[i] = T::one();
        Self { coords: c }
    }

    pub fn from_slice(v: &[T]) -> Self {
        let mut c = [T::zero(); 7];
        c.copy_from_slice(v);
        Self { coords: c }
    }

    pub fn to_octonion(&self) -> Octonion<T> {
        let mut c = [T::zero(); 8];
        c[1..].copy_from_slice(&self.coords);
        Octonion { coords: c }
    }

    pub fn dot(&self, other: &Self) -> T {
        self.coords.iter().zip(&other.coords).map(|(&a, &b)| a * b).sum()
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            coords: self.coords.map(|x| x * s),
        }
    }
}

impl<T: Real> From<ImOctonion<T>> for Octonion<T> {
    fn from(v: ImOctonion<T>) -> Self {
        v.to_octonion()
    }
}

/// Cayley–Dickson product.
pub fn oct_mul<T: Real>(a: &Octonion<T>, b: &Octonion<T>) -> Octonion<T> {
    let (p, q) = a.halves();
    let (r, s) = b.halves();
    let first = qmul(p, r);
    let corr = qmul(qconj(s), q);
    let second_a = qmul(s, p);
    let second_b = qmul(q, qconj(r));
    Octonion::from_halves(
        [
            first[0] - corr[0],
            first[1] - corr[1],
            first[2] - corr[2],
            first[3] - corr[3],
        ],
        [
            second_a[0] + second_b[0],
            second_a[1] + second_b[1],
            second_a[2] + second_b[2],
            second_a[3] + second_b[3],
        ],
    )
}

/// Seven-dimensional cross product `Im(a b)`.
pub fn cross7<T: Real>(a: &ImOctonion<T>, b: &ImOctonion<T>) -> ImOctonion<T> {
    oct_mul(&a.to_octonion(), &b.to_octonion()).im()
}

/// `(x y) z - x (y z)`.
pub fn associator<T: Real>(x: &ImOctonion<T>, y: &ImOctonion<T>, z: &ImOctonion<T>) -> Octonion<T> {
    let (x, y, z) = (x.to_octonion(), y.to_octonion(), z.to_octonion());
    let out = oct_mul(&oct_mul(&x, &y), &z) - oct_mul(&x, &oct_mul(&y, &z));
    debug_assert!(
        out.re().abs() <= T::lit(1e-13) * (T::one() + x.norm() * y.norm() * z.norm()),
        "associator of imaginary octonions has real part {:?}",
        out.re()
    );
    out
}

/// Triple cross product `½ (x (conj(y) z) - z (conj(y) x))`.
pub fn triple_cross<T: Real>(x: &Octonion<T>, y: &Octonion<T>, z: &Octonion<T>) -> Octonion<T> {
    let yb = y.conj();
    (oct_mul(x, &oct_mul(&yb, z)) - oct_mul(z, &oct_mul(&yb, x))).scale(T::lit(0.5))
}

/// Default relative tolerance for [`is_associative_frame`].
pub const ASSOCIATIVE_TOL: f64 = 1e-9;

/// Outcome of an associative-plane test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociativeFrameCheck<T = f64> {
    pub associative: bool,
    /// `|[f1, f2, f3]| / (|f1| |f2| |f3|)`.
    pub relative_associator: T,
    /// Set when the three vectors are (numerically) linearly dependent.
    pub degenerate: bool,
}

/// Tests whether `f1 ∧ f2 ∧ f3` spans an associative 3-plane, i.e. a copy of
/// `Im H` on which the associator vanishes.
pub fn is_associative_frame<T: Real>(
    f1: &ImOctonion<T>,
    f2: &ImOctonion<T>,
    f3: &ImOctonion<T>,
    tol: T,
) -> AssociativeFrameCheck<T> {
    let scale = f1.norm() * f2.norm() * f3.norm();
    let vol = crate::exterior::MultiVector::blade(&[&f1.coords[..], &f2.coords[..], &f3.coords[..]])
        .map(|b| b.norm())
        .unwrap_or(T::zero());
    let degenerate = scale == T::zero() || vol <= T::lit(1e-12) * scale;
    let rel = if scale == T::zero() {
        T::zero()
    } else {
        associator(f1, f2, f3).norm() / scale
    };
    AssociativeFrameCheck {
        associative: rel <= tol,
        relative_associator: rel,
        degenerate,
    }
}
