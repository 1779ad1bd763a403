//! Vector- and operator-valued recurrences: the direct iteration oracle, the
//! boundary weights W_s, and the closed-form term formula
//! `T_n = sum_s rho(n - s) W_s` for `n >= r`.
//!
//! Vector problems are not a separate code path: a term is any `d x c`
//! matrix, with `c = 1` for column-vector sequences.

use crate::error::{Error, Result};
use crate::family::CoefficientTuple;
use crate::matrix::Matrix;
use crate::rho::{rho_dp, RhoTable};
use crate::scalar::Scalar;

/// A full problem statement: order, coefficients in lag order, and the `r`
/// initial terms `T_0 .. T_{r-1}`.
#[derive(Clone, Debug)]
pub struct RecurrenceSpec<S> {
    pub coeffs: CoefficientTuple<S>,
    pub initial: Vec<Matrix<S>>,
}

/// The boundary weights `W_0 .. W_{r-1}` of the closed form.
#[derive(Clone, Debug)]
pub struct WeightFamily<S> {
    pub w: Vec<Matrix<S>>,
}

impl<S: Scalar> RecurrenceSpec<S> {
    pub fn new(coeffs: CoefficientTuple<S>, initial: Vec<Matrix<S>>) -> Result<Self> {
        let r = coeffs.order();
        let d = coeffs.dim();
        if initial.len() != r {
            return Err(Error::Dimension(format!(
                "expected {r} initial terms, got {}",
                initial.len()
            )));
        }
        let cols = initial[0].cols();
        for (i, t) in initial.iter().enumerate() {
            if t.rows() != d || t.cols() != cols {
                return Err(Error::Dimension(format!(
                    "initial term {i} is {}x{}, expected {d}x{cols}",
                    t.rows(),
                    t.cols()
                )));
            }
        }
        Ok(Self { coeffs, initial })
    }

    pub fn order(&self) -> usize {
        self.coeffs.order()
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    pub fn term_cols(&self) -> usize {
        self.initial[0].cols()
    }

    /// Direct evaluation `T_{n+r} = sum_l c_l T_{n+r-l}`; the oracle every
    /// closed form is checked against. Works for uncertified tuples too.
    pub fn iterate_sequence(&self, n_max: i64) -> Vec<Matrix<S>> {
        self.iterate_sequence_counted(n_max).0
    }

    pub fn iterate_sequence_counted(&self, n_max: i64) -> (Vec<Matrix<S>>, u64) {
        assert!(n_max >= 0);
        let r = self.order();
        let mut terms: Vec<Matrix<S>> = self
            .initial
            .iter()
            .take((n_max + 1) as usize)
            .cloned()
            .collect();
        let mut mults = 0;
        for _n in r as i64..=n_max {
            let len = terms.len();
            let mut acc = Matrix::zeros(self.dim(), self.term_cols());
            for l in 1..=r {
                acc.add_assign(&self.coeffs.lag(l).mul(&terms[len - l]));
                mults += 1;
            }
            terms.push(acc);
        }
        (terms, mults)
    }

    /// `W_s = sum_{j=s}^{r-1} A_j T_{s+r-1-j}` with `A_j` the lag-(j+1)
    /// coefficient, the pairing frozen by the rho-engine calibration test.
    pub fn weights(&self) -> WeightFamily<S> {
        let r = self.order();
        let mut w = Vec::with_capacity(r);
        for s in 0..r {
            let mut acc = Matrix::zeros(self.dim(), self.term_cols());
            for j in s..r {
                acc.add_assign(&self.coeffs.rho_index(j).mul(&self.initial[s + r - 1 - j]));
            }
            w.push(acc);
        }
        WeightFamily { w }
    }

    /// Closed-form term `T_n = sum_s rho(n - s) W_s`, valid for `n >= r`.
    /// Queries below `r` are refused: the zero convention for rho makes the
    /// formula wrong there, and the initial terms already hold the answer.
    pub fn closed_term(&self, n: i64) -> Result<Matrix<S>> {
        let table = rho_dp(self.required_table_index(n)?, &self.coeffs)?;
        self.closed_term_with_table(&table, n)
    }

    /// As [`Self::closed_term`], reusing a shared rho table (must extend to `n`).
    pub fn closed_term_with_table(&self, table: &RhoTable<S>, n: i64) -> Result<Matrix<S>> {
        let r = self.order() as i64;
        if n < r {
            return Err(Error::Range(format!(
                "closed form is valid for n >= {r}; term {n} is an initial term, read it directly"
            )));
        }
        let weights = self.weights();
        let mut acc = Matrix::zeros(self.dim(), self.term_cols());
        for (s, w) in weights.w.iter().enumerate() {
            let rho = table.value_or_zero(n - s as i64);
            if rho.is_zero() {
                continue;
            }
            acc.add_assign(&rho.mul(w));
        }
        Ok(acc)
    }

    pub fn required_table_index(&self, n: i64) -> Result<i64> {
        let r = self.order() as i64;
        if n < r {
            return Err(Error::Range(format!(
                "closed form is valid for n >= {r}, got {n}"
            )));
        }
        Ok(n)
    }
}
