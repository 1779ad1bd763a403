//! Dense matrices over a scalar ring.
//!
//! Coefficients are square `d x d` matrices; sequence terms may be
//! rectangular `d x c` (column vectors are the `c = 1` case), so the type
//! carries explicit row and column counts. Squareness is enforced where an
//! operation requires it.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    entries: Vec<S>, // row-major
}

impl<S: Scalar> Matrix<S> {
    pub fn new(rows: usize, cols: usize, entries: Vec<S>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![S::zero(); rows * cols])
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        assert!(r > 0);
        let c = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    /// Diagonal matrix from integer entries; test and example helper.
    pub fn diag_i64(values: &[i64]) -> Self {
        let d = values.len();
        let mut m = Self::zeros(d, d);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = S::from_i64(v);
        }
        m
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&v| S::from_i64(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert!(self.same_shape(rhs), "shape mismatch in add");
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a.add_ref(b))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert!(self.same_shape(rhs), "shape mismatch in sub");
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a.sub_ref(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| a.neg_ref()).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let t = a.mul_ref(&rhs[(k, j)]);
                    out[(i, j)] = out[(i, j)].add_ref(&t);
                }
            }
        }
        out
    }

    /// `self + scale * rhs`, accumulating in place.
    pub fn add_scaled_assign(&mut self, scale: &S, rhs: &Self) {
        assert!(self.same_shape(rhs), "shape mismatch in add_scaled_assign");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            let t = scale.mul_ref(b);
            *a = a.add_ref(&t);
        }
    }

    pub fn add_assign(&mut self, rhs: &Self) {
        assert!(self.same_shape(rhs), "shape mismatch in add_assign");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a = a.add_ref(b);
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| s.mul_ref(a)).collect(),
        }
    }

    pub fn scale_bigint(&self, v: &BigInt) -> Self {
        self.scale(&S::from_bigint(v))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|a| a.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self[(i, j)] == S::one()
                    } else {
                        self[(i, j)].is_zero()
                    }
                })
            })
    }

    /// Frobenius norm as f64 (exact entries are converted for the norm only).
    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|a| {
                let v = a.abs_f64();
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|a| a.abs_f64()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other), "shape mismatch in max_abs_diff");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub_ref(b).abs_f64())
            .fold(0.0, f64::max)
    }

    /// Exact equality in exact mode; relative Frobenius closeness otherwise.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if !self.same_shape(other) {
            return false;
        }
        if S::EXACT {
            self == other
        } else {
            let diff = self.sub(other).frobenius_norm();
            diff <= tol * (1.0 + self.frobenius_norm().max(other.frobenius_norm()))
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let d = self[(i, j)].sub_ref(&self[(j, i)]).abs_f64();
                let scale = 1.0 + self[(i, j)].abs_f64().max(self[(j, i)].abs_f64());
                if S::EXACT {
                    if d != 0.0 {
                        return false;
                    }
                } else if d > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn render_rows(&self) -> Vec<String> {
        (0..self.rows)
            .map(|i| {
                let cells: Vec<String> = (0..self.cols).map(|j| self[(i, j)].render()).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect()
    }
}

impl<S> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.entries[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.entries[i * self.cols + j]
    }
}

impl<S: std::fmt::Debug> std::fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Matrix{}x{}{:?}", self.rows, self.cols, self.entries)
    }
}

/// `xy - yx`.
pub fn commutator<S: Scalar>(x: &Matrix<S>, y: &Matrix<S>) -> Result<Matrix<S>> {
    if !x.is_square() || !y.is_square() || x.dim() != y.dim() {
        return Err(Error::Dimension(format!(
            "commutator needs square matrices of equal dimension, got {}x{} and {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    Ok(x.mul(y).sub(&y.mul(x)))
}

/// Frobenius norm of `xy - yx`. Exactly zero iff the matrices commute when
/// the ring is exact. Norms are returned as f64 because they are square
/// roots and generally leave the rational field.
pub fn commutator_norm<S: Scalar>(x: &Matrix<S>, y: &Matrix<S>) -> Result<f64> {
    let c = commutator(x, y)?;
    if S::EXACT && c.is_zero() {
        return Ok(0.0);
    }
    Ok(c.frobenius_norm())
}

/// `x^n` by repeated squaring; `x^0 = I`.
pub fn mat_power_naive<S: Scalar>(x: &Matrix<S>, n: u64) -> Matrix<S> {
    mat_power_counted(x, n).0
}

/// Same as [`mat_power_naive`] but also reports the number of matrix
/// products performed.
pub fn mat_power_counted<S: Scalar>(x: &Matrix<S>, n: u64) -> (Matrix<S>, u64) {
    assert!(x.is_square(), "powers need a square matrix");
    let mut result = Matrix::identity(x.dim());
    let mut base = x.clone();
    let mut e = n;
    let mut mults = 0;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul(&base);
            mults += 1;
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base);
            mults += 1;
        }
    }
    (result, mults)
}
