//! The block companion matrix of an order-r tuple and its powers, both by
//! repeated squaring on the flattened matrix (the oracle) and by the
//! entrywise closed form over a shared rho table.
//!
//! Block layout: row 0 holds the coefficients in lag order
//! `(c_1, c_2, ..., c_r)`, identity blocks sit on the subdiagonal, and the
//! state vector stacks `(u_{n+r-1}, ..., u_n)` top-down so that
//! `Y_{n+1} = B Y_n`.
//!
//! Orientation of the closed form: with the state components in decreasing
//! order, the formula for block `(i, k)` of `B^n` reads
//! `sum_s rho(n + (r-1-i) - s) C_{s,k}` -- the row index is flipped relative
//! to the ascending-index derivation, the column index is not. The flip was
//! calibrated once against the naive-power oracle on an asymmetric tuple and
//! is pinned by `orientation_regression` below.

use crate::error::{Error, Result};
use crate::family::CoefficientTuple;
use crate::matrix::{mat_power_counted, Matrix};
use crate::rho::rho_dp;
use crate::scalar::Scalar;

/// `r x r` grid of `d x d` blocks (total dimension `rd x rd`).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix<S> {
    r: usize,
    d: usize,
    blocks: Vec<Matrix<S>>, // row-major block order
}

impl<S: Scalar> BlockMatrix<S> {
    pub fn from_blocks(r: usize, d: usize, blocks: Vec<Matrix<S>>) -> Self {
        assert_eq!(blocks.len(), r * r);
        assert!(blocks.iter().all(|b| b.rows() == d && b.cols() == d));
        Self { r, d, blocks }
    }

    pub fn zeros(r: usize, d: usize) -> Self {
        Self::from_blocks(r, d, vec![Matrix::zeros(d, d); r * r])
    }

    pub fn block_identity(r: usize, d: usize) -> Self {
        let mut b = Self::zeros(r, d);
        for i in 0..r {
            *b.block_mut(i, i) = Matrix::identity(d);
        }
        b
    }

    pub fn block_order(&self) -> usize {
        self.r
    }

    pub fn block_dim(&self) -> usize {
        self.d
    }

    pub fn block(&self, i: usize, k: usize) -> &Matrix<S> {
        &self.blocks[i * self.r + k]
    }

    pub fn block_mut(&mut self, i: usize, k: usize) -> &mut Matrix<S> {
        &mut self.blocks[i * self.r + k]
    }

    /// Flatten to a single `rd x rd` matrix.
    pub fn flatten(&self) -> Matrix<S> {
        let n = self.r * self.d;
        Matrix::from_fn(n, n, |row, col| {
            self.block(row / self.d, col / self.d)[(row % self.d, col % self.d)].clone()
        })
    }

    pub fn from_flat(m: &Matrix<S>, r: usize, d: usize) -> Self {
        assert_eq!(m.rows(), r * d);
        assert_eq!(m.cols(), r * d);
        let mut blocks = Vec::with_capacity(r * r);
        for i in 0..r {
            for k in 0..r {
                blocks.push(Matrix::from_fn(d, d, |p, q| {
                    m[(i * d + p, k * d + q)].clone()
                }));
            }
        }
        Self::from_blocks(r, d, blocks)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.r, self.d), (other.r, other.d));
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// Assemble the companion block matrix: block `(0, j)` is the lag-(j+1)
/// coefficient, block `(i+1, i)` is the identity, everything else zero.
pub fn build_companion<S: Scalar>(a: &CoefficientTuple<S>) -> BlockMatrix<S> {
    let (r, d) = (a.order(), a.dim());
    let mut b = BlockMatrix::zeros(r, d);
    for j in 0..r {
        *b.block_mut(0, j) = a.lag(j + 1).clone();
    }
    for i in 0..r - 1 {
        *b.block_mut(i + 1, i) = Matrix::identity(d);
    }
    b
}

/// `B^n` by repeated squaring on the flattened matrix; the oracle for the
/// closed form.
pub fn companion_power_naive<S: Scalar>(b: &BlockMatrix<S>, n: u64) -> BlockMatrix<S> {
    companion_power_naive_counted(b, n).0
}

/// As [`companion_power_naive`], also reporting the cost in d x d product
/// equivalents (each flattened product counts as r^3 of them).
pub fn companion_power_naive_counted<S: Scalar>(
    b: &BlockMatrix<S>,
    n: u64,
) -> (BlockMatrix<S>, u64) {
    let (flat, products) = mat_power_counted(&b.flatten(), n);
    let r = b.block_order() as u64;
    (
        BlockMatrix::from_flat(&flat, b.block_order(), b.block_dim()),
        products * r * r * r,
    )
}

/// The constant block `C_{s,k}`: the coefficient with rho-index `s + k` when
/// `s + k <= r - 1`, the zero matrix otherwise.
pub fn c_block<S: Scalar>(s: usize, k: usize, a: &CoefficientTuple<S>) -> Result<Matrix<S>> {
    let r = a.order();
    if s >= r || k >= r {
        return Err(Error::Range(format!(
            "block indices (s, k) = ({s}, {k}) out of range for order {r}"
        )));
    }
    if s + k < r {
        Ok(a.rho_index(s + k).clone())
    } else {
        Ok(Matrix::zeros(a.dim(), a.dim()))
    }
}

/// Entrywise closed form for `B^n`, `n >= r`:
/// block `(i, k)` is `sum_s rho(n + (r-1-i) - s) C_{s,k}`.
///
/// For `n < r` the literal formula is wrong (the zero convention for rho
/// erases the identity blocks); such queries are refused here and served by
/// [`companion_power_naive`]. Use [`companion_power_closed_unchecked`] to
/// observe the failure.
pub fn companion_power_closed<S: Scalar>(
    a: &CoefficientTuple<S>,
    n: i64,
) -> Result<BlockMatrix<S>> {
    let r = a.order() as i64;
    if n < r {
        return Err(Error::Range(format!(
            "closed companion power is valid for n >= {r}, got {n}; use the naive power instead"
        )));
    }
    companion_power_closed_unchecked(a, n)
}

/// The literal closed-form evaluation for any `n >= 0`, extending rho by
/// zero below the boundary. Correct for `n >= r`; for `n < r` it provably
/// deviates from `B^n` (e.g. it yields the zero matrix at `n = 0`), which
/// the negative tests document.
pub fn companion_power_closed_unchecked<S: Scalar>(
    a: &CoefficientTuple<S>,
    n: i64,
) -> Result<BlockMatrix<S>> {
    if n < 0 {
        return Err(Error::Range(format!("negative power {n}")));
    }
    let (r, d) = (a.order(), a.dim());
    // one shared table serves every block entry
    let top = n + r as i64 - 1;
    let table = if top >= r as i64 {
        Some(rho_dp(top, a)?)
    } else {
        None
    };
    let mut out = BlockMatrix::zeros(r, d);
    for i in 0..r {
        for k in 0..r {
            let mut acc = Matrix::zeros(d, d);
            for s in 0..r {
                if s + k > r - 1 {
                    continue; // C_{s,k} = 0
                }
                let idx = n + (r - 1 - i) as i64 - s as i64;
                let rho = match &table {
                    Some(t) => t.value_or_zero(idx),
                    None => Matrix::zeros(d, d),
                };
                if rho.is_zero() {
                    continue;
                }
                acc.add_assign(&rho.mul(a.rho_index(s + k)));
            }
            *out.block_mut(i, k) = acc;
        }
    }
    Ok(out)
}
