//! Exterior algebra over `R^d` for `d <= 8`.
//!
//! A grade-`k` multivector stores one coefficient per strictly increasing
//! index tuple `i_1 < ... < i_k`, in lexicographic order. Index tuples are
//! encoded internally as bitmasks; signs of reorderings are inversion counts.
//! All inner products are taken in the flat orthonormal metric, so the basis
//! blades `e_I` are orthonormal.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

struct BasisTables {
    // subsets[d][k]: masks of the k-subsets of {0..d-1}, lexicographic
    subsets: Vec<Vec<Vec<u8>>>,
    // rank[d][mask]: position of mask inside subsets[d][popcount(mask)]
    rank: Vec<Vec<u16>>,
}

fn tables() -> &'static BasisTables {
    static TABLES: OnceLock<BasisTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut subsets = Vec::with_capacity(MAX_DIM + 1);
        let mut rank = Vec::with_capacity(MAX_DIM + 1);
        for d in 0..=MAX_DIM {
            let mut by_grade: Vec<Vec<u8>> = vec![Vec::new(); d + 1];
            let mut tuples: Vec<Vec<usize>> = (0u32..(1u32 << d))
                .map(|m| (0..d).filter(|&i| m & (1 << i) != 0).collect())
                .collect();
            tuples.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            for t in tuples {
                let mask = t.iter().fold(0u8, |m, &i| m | (1 << i));
                by_grade[t.len()].push(mask);
            }
            let mut r = vec![u16::MAX; 256];
            for grade in &by_grade {
                for (pos, &m) in grade.iter().enumerate() {
                    r[m as usize] = pos as u16;
                }
            }
            subsets.push(by_grade);
            rank.push(r);
        }
        BasisTables { subsets, rank }
    })
}

/// Bitmasks of the `k`-subsets of `{0, .., d-1}` in lexicographic order.
pub fn subsets(d: usize, k: usize) -> &'static [u8] {
    assert!(d <= MAX_DIM && k <= d, "subset table out of range: d={d} k={k}");
    &tables().subsets[d][k]
}

/// Position of `mask` in [`subsets`]`(d, popcount(mask))`.
#[inline]
pub fn subset_rank(d: usize, mask: u8) -> usize {
    tables().rank[d][mask as usize] as usize
}

/// Sorted indices of a subset mask.
pub fn mask_indices(mask: u8) -> Vec<usize> {
    (0..8).filter(|&i| mask & (1 << i) != 0).collect()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Sign of `e_A ∧ e_B` relative to `e_{A∪B}`, or 0 if the sets overlap.
#[inline]
pub fn wedge_sign(a: u8, b: u8) -> i32 {
    if a & b != 0 {
        return 0;
    }
    // inversions: pairs (i in a, j in b) with i > j
    let mut inv = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inv += ((a as u32) >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if inv.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sign of the permutation sorting `idx` (0 if an index repeats).
pub fn sort_sign(idx: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..idx.len() {
        for j in (i + 1)..idx.len() {
            if idx[i] == idx[j] {
                return 0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Element of `Λ^k R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiVector<T = f64> {
    dim: usize,
    grade: usize,
    coeffs: Vec<T>,
}

impl<T: Real> MultiVector<T> {
    pub fn zero(dim: usize, grade: usize) -> Result<Self> {
        check_dims(dim, grade)?;
        Ok(Self {
            dim,
            grade,
            coeffs: vec![T::zero(); binomial(dim, grade)],
        })
    }

    pub fn from_coeffs(dim: usize, grade: usize, coeffs: Vec<T>) -> Result<Self> {
        check_dims(dim, grade)?;
        let want = binomial(dim, grade);
        if coeffs.len() != want {
            return Err(Error::Dimension(format!(
                "grade-{grade} multivector in dimension {dim} needs {want} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { dim, grade, coeffs })
    }

    /// Grade-1 element with the given components.
    pub fn vector(components: &[T]) -> Result<Self> {
        Self::from_coeffs(components.len(), 1, components.to_vec())
    }

    pub fn scalar(dim: usize, value: T) -> Result<Self> {
        Self::from_coeffs(dim, 0, vec![value])
    }

    /// The blade `e_{i_1} ∧ ... ∧ e_{i_k}` for arbitrary (unsorted) indices.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut mv = Self::zero(dim, indices.len())?;
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::Dimension(format!("basis index {bad} out of range for dimension {dim}")));
        }
        let sign = sort_sign(indices);
        if sign != 0 {
            let mask = indices.iter().fold(0u8, |m, &i| m | (1 << i));
            mv.coeffs[subset_rank(dim, mask)] = T::from_i32(sign).unwrap();
        }
        Ok(mv)
    }

    /// Unit volume element `e_0 ∧ ... ∧ e_{d-1}`.
    pub fn volume(dim: usize) -> Result<Self> {
        Self::from_coeffs(dim, dim, vec![T::one()])
    }

    /// `v_1 ∧ ... ∧ v_k` for vectors given by their components.
    pub fn blade(vectors: &[&[T]]) -> Result<Self> {
        let dim = vectors
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::Dimension("blade of zero vectors needs an explicit dimension".into()))?;
        let mut acc = Self::scalar(dim, T::one())?;
        for v in vectors {
            acc = wedge(&acc, &Self::vector(v)?)?;
        }
        Ok(acc)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn grade(&self) -> usize {
        self.grade
    }

    #[inline]
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `e_I` for sorted `I` given as a mask.
    pub fn coeff(&self, mask: u8) -> T {
        debug_assert_eq!(mask.count_ones() as usize, self.grade);
        self.coeffs[subset_rank(self.dim, mask)]
    }

    /// Coefficient of the blade built from `indices` in the given order.
    pub fn component(&self, indices: &[usize]) -> T {
        let sign = sort_sign(indices);
        if sign == 0 || indices.len() != self.grade {
            return T::zero();
        }
        let mask = indices.iter().fold(0u8, |m, &i| m | (1 << i));
        self.coeffs[subset_rank(self.dim, mask)] * T::from_i32(sign).unwrap()
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        self.check_same(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a * b).sum())
    }

    pub fn norm(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            grade: self.grade,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            dim: self.dim,
            grade: self.grade,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.grade != other.grade {
            return Err(Error::Dimension(format!(
                "(dim {}, grade {}) vs (dim {}, grade {})",
                self.dim, self.grade, other.dim, other.grade
            )));
        }
        Ok(())
    }
}

fn check_dims(dim: usize, grade: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::Dimension(format!("ambient dimension {dim} exceeds {MAX_DIM}")));
    }
    if grade > dim {
        return Err(Error::Grade { grade, dim });
    }
    Ok(())
}

/// Exterior product.
pub fn wedge<T: Real>(a: &MultiVector<T>, b: &MultiVector<T>) -> Result<MultiVector<T>> {
    if a.dim != b.dim {
        return Err(Error::Dimension(format!("wedge of dimension {} with {}", a.dim, b.dim)));
    }
    let d = a.dim;
    let grade = a.grade + b.grade;
    if grade > d {
        return Err(Error::Grade { grade, dim: d });
    }
    let mut out = MultiVector::zero(d, grade)?;
    let sa = subsets(d, a.grade);
    let sb = subsets(d, b.grade);
    for (ia, &ma) in sa.iter().enumerate() {
        let ca = a.coeffs[ia];
        if ca == T::zero() {
            continue;
        }
        for (ib, &mb) in sb.iter().enumerate() {
            let s = wedge_sign(ma, mb);
            if s == 0 {
                continue;
            }
            let term = ca * b.coeffs[ib];
            let slot = &mut out.coeffs[subset_rank(d, ma | mb)];
            if s > 0 {
                *slot += term;
            } else {
                *slot -= term;
            }
        }
    }
    Ok(out)
}

/// Hodge star in the flat metric with orientation `e_0 ∧ ... ∧ e_{d-1}`:
/// `a ∧ ⋆b = <a, b> vol`.
pub fn hodge_star<T: Real>(a: &MultiVector<T>) -> MultiVector<T> {
    let d = a.dim;
    let full = if d == 8 { u8::MAX } else { ((1u16 << d) - 1) as u8 };
    let mut out = MultiVector::zero(d, d - a.grade).expect("complementary grade is valid");
    for (i, &m) in subsets(d, a.grade).iter().enumerate() {
        let comp = full & !m;
        let s = T::from_i32(wedge_sign(m, comp)).unwrap();
        out.coeffs[subset_rank(d, comp)] = s * a.coeffs[i];
    }
    out
}

/// Contraction `ι_v ω`: `(ι_v ω)(B_1, ..) = ω(v, B_1, ..)`.
pub fn interior<T: Real>(v: &[T], form: &MultiVector<T>) -> Result<MultiVector<T>> {
    let d = form.dim;
    if v.len() != d {
        return Err(Error::Dimension(format!("contraction of a length-{} vector into dimension {d}", v.len())));
    }
    if form.grade == 0 {
        return Err(Error::Grade { grade: 0, dim: d });
    }
    let mut out = MultiVector::zero(d, form.grade - 1)?;
    for (i, &m) in subsets(d, form.grade - 1).iter().enumerate() {
        let mut acc = T::zero();
        for (a, &va) in v.iter().enumerate() {
            let s = wedge_sign(1 << a, m);
            if s == 0 || va == T::zero() {
                continue;
            }
            let c = form.coeffs[subset_rank(d, m | (1 << a))];
            acc += if s > 0 { va * c } else { -va * c };
        }
        out.coeffs[i] = acc;
    }
    Ok(out)
}

/// Dense real matrix in column-major order, used for differentials and
/// other pointwise linear maps between orthonormal frames.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> LinearMap<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds a map from column-major data, rejecting non-finite entries.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} map needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("linear map"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: &[T]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{rows}x{cols} map needs {} entries", rows * cols)));
        }
        let mut cm = Vec::with_capacity(data.len());
        for c in 0..cols {
            for r in 0..rows {
                cm.push(data[r * cols + c]);
            }
        }
        Self::from_column_major(rows, cols, cm)
    }

    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        Self::from_column_major(rows, columns.len(), columns.concat())
    }

    /// Column-major constructor for internal hot paths; callers guarantee finiteness.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[c * self.rows + r] = v;
    }

    #[inline]
    pub fn column(&self, c: usize) -> &[T] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, c: usize) -> &mut [T] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for c in 0..self.cols {
            for r in 0..self.rows {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for c in 0..rhs.cols {
            for k in 0..self.cols {
                let b = rhs.get(k, c);
                if b == T::zero() {
                    continue;
                }
                let src = self.column(k);
                let dst = out.column_mut(c);
                for r in 0..self.rows {
                    dst[r] += src[r] * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("{}x{} map applied to length {}", self.rows, self.cols, v.len())));
        }
        let mut out = vec![T::zero(); self.rows];
        for (c, &x) in v.iter().enumerate() {
            for (o, &m) in out.iter_mut().zip(self.column(c)) {
                *o += m * x;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&x| x * s).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("shape mismatch in subtraction".into()));
        }
        Ok(Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        ))
    }

    /// Hilbert–Schmidt pairing `Σ a_ij b_ij`.
    pub fn hs_dot(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Determinant of a square map.
    pub fn det(&self) -> Result<T> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!("determinant of non-square {}x{}", self.rows, self.cols)));
        }
        Ok(linalg::det_col_major(&self.data, self.rows))
    }
}

/// Hilbert–Schmidt norm `sqrt(Σ L_ij²)`.
pub fn hs_norm<T: Real>(l: &LinearMap<T>) -> T {
    l.data.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Matrix of `Λ^k L`: entry `(J, I)` is the minor `det L[J, I]`, rows and
/// columns indexed by the lexicographic `k`-subsets of target and source.
pub fn ext_power<T: Real>(l: &LinearMap<T>, k: usize) -> Result<LinearMap<T>> {
    let (m, n) = (l.rows, l.cols);
    if m > MAX_DIM || n > MAX_DIM {
        return Err(Error::Dimension(format!("exterior power of {m}x{n} map exceeds dimension {MAX_DIM}")));
    }
    if k > m.min(n) {
        return Err(Error::Dimension(format!("grade {k} exceeds min({m}, {n})")));
    }
    let rows_s = subsets(m, k);
    let cols_s = subsets(n, k);
    let mut out = LinearMap::zeros(rows_s.len(), cols_s.len());
    let mut ri = [0usize; MAX_DIM];
    let mut ci = [0usize; MAX_DIM];
    let mut buf = [T::zero(); MAX_DIM * MAX_DIM];
    for (c, &cm) in cols_s.iter().enumerate() {
        fill_indices(cm, &mut ci);
        for (r, &rm) in rows_s.iter().enumerate() {
            fill_indices(rm, &mut ri);
            for b in 0..k {
                for a in 0..k {
                    buf[b * k + a] = l.get(ri[a], ci[b]);
                }
            }
            out.set(r, c, linalg::det_col_major(&buf[..k * k], k));
        }
    }
    Ok(out)
}

fn fill_indices(mask: u8, out: &mut [usize; MAX_DIM]) {
    let mut m = mask;
    let mut i = 0;
    while m != 0 {
        out[i] = m.trailing_zeros() as usize;
        m &= m - 1;
        i += 1;
    }
}

/// Applies the standard exterior power: `v_1 ∧ ... ∧ v_k ↦ Lv_1 ∧ ... ∧ Lv_k`.
pub fn ext_power_apply<T: Real>(l: &LinearMap<T>, k: usize, a: &MultiVector<T>) -> Result<MultiVector<T>> {
    if a.grade != k || a.dim != l.cols {
        return Err(Error::Dimension(format!(
            "grade-{} multivector in dimension {} cannot feed Λ^{k} of a {}x{} map",
            a.grade, a.dim, l.rows, l.cols
        )));
    }
    let p = ext_power(l, k)?;
    MultiVector::from_coeffs(l.rows, k, p.apply(&a.coeffs)?)
}
