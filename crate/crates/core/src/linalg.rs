//! Small dense kernels: determinants and symmetric eigenvalues for matrices
//! of size at most 8.

use crate::scalar::Real;

/// Determinant of an `n x n` column-major matrix.
pub fn det_col_major<T: Real>(a: &[T], n: usize) -> T {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => T::one(),
        1 => a[0],
        2 => a[0] * a[3] - a[2] * a[1],
        3 => {
            // columns (a0 a1 a2) (a3 a4 a5) (a6 a7 a8)
            a[0] * (a[4] * a[8] - a[7] * a[5]) - a[3] * (a[1] * a[8] - a[7] * a[2])
                + a[6] * (a[1] * a[5] - a[4] * a[2])
        }
        _ => lu_det(a, n),
    }
}

fn lu_det<T: Real>(a: &[T], n: usize) -> T {
    let mut m = a.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[col * n + i].abs().partial_cmp(&m[col * n + j].abs()).unwrap())
            .unwrap();
        let p = m[col * n + pivot];
        if p == T::zero() {
            return T::zero();
        }
        if pivot != col {
            for c in 0..n {
                m.swap(c * n + pivot, c * n + col);
            }
            det = -det;
        }
        det *= p;
        for r in (col + 1)..n {
            let f = m[col * n + r] / p;
            if f == T::zero() {
                continue;
            }
            for c in col..n {
                let v = m[c * n + col];
                m[c * n + r] -= f * v;
            }
        }
    }
    det
}

/// Eigenvalues of a symmetric `n x n` matrix (column-major), ascending.
/// Cyclic Jacobi rotations; intended for `n <= 8`.
pub fn sym_eigenvalues<T: Real>(a: &[T], n: usize) -> Vec<T> {
    let mut m = a.to_vec();
    let idx = |r: usize, c: usize| c * n + r;
    for _sweep in 0..64 {
        let mut off = T::zero();
        for c in 0..n {
            for r in 0..n {
                if r != c {
                    off += m[idx(r, c)] * m[idx(r, c)];
                }
            }
        }
        let scale: T = (0..n).map(|i| m[idx(i, i)] * m[idx(i, i)]).sum::<T>() + off;
        if off <= T::epsilon() * T::epsilon() * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[idx(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[idx(p, p)];
                let aqq = m[idx(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[idx(k, p)];
                    let mkq = m[idx(k, q)];
                    m[idx(k, p)] = c * mkp - s * mkq;
                    m[idx(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[idx(p, k)];
                    let mqk = m[idx(q, k)];
                    m[idx(p, k)] = c * mpk - s * mqk;
                    m[idx(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[idx(i, i)]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Orthonormalizes the given vectors in place (modified Gram–Schmidt).
/// Returns `false` if they are numerically dependent.
pub fn gram_schmidt<T: Real>(vectors: &mut [Vec<T>]) -> bool {
    for i in 0..vectors.len() {
        for _pass in 0..2 {
            for j in 0..i {
                let (head, tail) = vectors.split_at_mut(i);
                let d: T = head[j].iter().zip(tail[0].iter()).map(|(&a, &b)| a * b).sum();
                for (x, &q) in tail[0].iter_mut().zip(head[j].iter()) {
                    *x -= d * q;
                }
            }
        }
        let n = norm(&vectors[i]);
        if n <= T::lit(1e3) * T::epsilon() {
            return false;
        }
        for x in vectors[i].iter_mut() {
            *x /= n;
        }
    }
    true
}

pub fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}
