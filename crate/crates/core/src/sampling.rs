//! Seeded random sampling.
//!
//! All sampled checks draw from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded
//! with a `u64`. ChaCha output is specified independently of platform and
//! word size, so a seed reproduces the same samples everywhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::exterior::{binomial, MultiVector};
use crate::linalg;
use crate::scalar::Real;

pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<T: Real, R: Rng>(rng: &mut R) -> T {
    let x: f64 = rng.sample(StandardNormal);
    T::lit(x)
}

pub fn gaussian_vec<T: Real, R: Rng>(rng: &mut R, n: usize) -> Vec<T> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Uniform point on the unit sphere in `R^n`.
pub fn unit_vector<T: Real, R: Rng>(rng: &mut R, n: usize) -> Vec<T> {
    loop {
        let mut v = gaussian_vec::<T, _>(rng, n);
        let len = linalg::norm(&v);
        if len > T::lit(1e-6) {
            v.iter_mut().for_each(|x| *x /= len);
            return v;
        }
    }
}

/// Haar-random orthonormal `k`-frame in `R^n`.
pub fn orthonormal_frame<T: Real, R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<Vec<T>> {
    loop {
        let mut f: Vec<Vec<T>> = (0..k).map(|_| gaussian_vec(rng, n)).collect();
        if linalg::gram_schmidt(&mut f) {
            return f;
        }
    }
}

/// Grade-`k` multivector with independent standard normal coefficients.
pub fn gaussian_multivector<T: Real, R: Rng>(rng: &mut R, dim: usize, grade: usize) -> MultiVector<T> {
    MultiVector::from_coeffs(dim, grade, gaussian_vec(rng, binomial(dim, grade))).expect("valid grade")
}
