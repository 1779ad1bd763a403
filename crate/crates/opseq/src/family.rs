//! Coefficient tuples in canonical lag order, with pairwise-commutativity
//! certification, plus a seeded generator of commuting test families.
//!
//! Lag order means `coefficient(l)` multiplies the lag-`l` term: the
//! recurrence reads `T_{n+r} = c_1 T_{n+r-1} + c_2 T_{n+r-2} + ... + c_r T_n`.

use crate::error::{Error, Result};
use crate::matrix::{commutator, commutator_norm, Matrix};
use crate::scalar::{Scalar, FLOAT_COMMUTATOR_TOL};

#[derive(Clone, Debug)]
pub struct CoefficientTuple<S> {
    mats: Vec<Matrix<S>>, // mats[l-1] is the lag-l coefficient
    certified: bool,
}

impl<S: Scalar> CoefficientTuple<S> {
    /// Validate shapes and the nonzero highest-lag coefficient, then certify
    /// pairwise commutativity. Exact mode demands exactly zero commutators;
    /// float mode allows `||c_i c_j - c_j c_i||_F <= tol_c ||c_i||_F ||c_j||_F`.
    pub fn new(mats: Vec<Matrix<S>>) -> Result<Self> {
        Self::with_tolerance(mats, FLOAT_COMMUTATOR_TOL)
    }

    pub fn with_tolerance(mats: Vec<Matrix<S>>, tol_c: f64) -> Result<Self> {
        let tuple = Self::new_uncertified(mats)?;
        tuple.certify(tol_c)
    }

    /// Shape validation only; the tuple is usable for direct iteration but
    /// the closed forms will refuse it.
    pub fn new_uncertified(mats: Vec<Matrix<S>>) -> Result<Self> {
        let r = mats.len();
        if r < 2 {
            return Err(Error::Coefficient(format!(
                "order must be at least 2, got {r}"
            )));
        }
        let d = mats[0].rows();
        for (l, m) in mats.iter().enumerate() {
            if !m.is_square() || m.rows() != d {
                return Err(Error::Dimension(format!(
                    "coefficient for lag {} is {}x{}, expected {d}x{d}",
                    l + 1,
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if mats[r - 1].is_zero() {
            return Err(Error::Coefficient(format!(
                "the lag-{r} coefficient must be nonzero"
            )));
        }
        Ok(Self {
            mats,
            certified: false,
        })
    }

    fn certify(mut self, tol_c: f64) -> Result<Self> {
        for i in 0..self.mats.len() {
            for j in (i + 1)..self.mats.len() {
                let (a, b) = (&self.mats[i], &self.mats[j]);
                let ok = if S::EXACT {
                    commutator(a, b)?.is_zero()
                } else {
                    commutator_norm(a, b)? <= tol_c * a.frobenius_norm() * b.frobenius_norm()
                };
                if !ok {
                    return Err(Error::Commutativity(format!(
                        "coefficients for lags {} and {} do not commute",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        self.certified = true;
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].rows()
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// Lag-`l` coefficient, `1 <= l <= r`.
    pub fn lag(&self, l: usize) -> &Matrix<S> {
        &self.mats[l - 1]
    }

    /// Coefficient by its index in the fundamental-solution formula. The
    /// pairing index `j` <-> lag `j+1` was frozen by oracle calibration (see
    /// the regression test in the `rho` module), so this is `lag(j + 1)`.
    pub fn rho_index(&self, j: usize) -> &Matrix<S> {
        &self.mats[j]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Matrix<S>> {
        self.mats.iter()
    }

    /// When every coefficient is a scalar multiple of the identity, return
    /// the scalars in lag order.
    pub fn as_scalars(&self) -> Option<Vec<S>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(self.order());
        for m in &self.mats {
            let a = m[(0, 0)].clone();
            let candidate = Matrix::identity(d).scale(&a);
            if S::EXACT {
                if *m != candidate {
                    return None;
                }
            } else if m.max_abs_diff(&candidate) > 1e-12 * (1.0 + m.max_abs()) {
                return None;
            }
            out.push(a);
        }
        Some(out)
    }
}

/// Minimal deterministic PRNG (splitmix64); keeps generated families stable
/// across platforms without pulling in an external generator.
pub(crate) struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `lo..=hi`.
    pub fn next_in(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }
}

/// Seeded family of `r` pairwise-commuting `d x d` matrices: each is a
/// polynomial of degree `< d` in one random symmetric integer matrix, so
/// commutativity holds identically. The lag-`r` coefficient is redrawn until
/// nonzero (all coefficients are, to keep test families non-degenerate).
pub fn generate_commuting_family<S: Scalar>(seed: u64, r: usize, d: usize) -> CoefficientTuple<S> {
    assert!(r >= 2 && d >= 1);
    let mut rng = SplitMix64::new(seed.wrapping_mul(0xa076_1d64_78bd_642f).wrapping_add(1));

    let mut base: Matrix<S> = Matrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = S::from_i64(rng.next_in(-2, 2));
            base[(i, j)] = v.clone();
            base[(j, i)] = v;
        }
    }
    // powers base^0 .. base^{d-1}
    let mut powers = Vec::with_capacity(d);
    powers.push(Matrix::<S>::identity(d));
    for p in 1..d {
        let next = powers[p - 1].mul(&base);
        powers.push(next);
    }

    let mut mats = Vec::with_capacity(r);
    for _ in 0..r {
        let mut attempts = 0;
        let m = loop {
            let mut acc = Matrix::<S>::zeros(d, d);
            for power in powers.iter() {
                let coeff = S::from_i64(rng.next_in(-2, 2));
                if !coeff.is_zero() {
                    acc.add_scaled_assign(&coeff, power);
                }
            }
            if !acc.is_zero() {
                break acc;
            }
            attempts += 1;
            if attempts > 64 {
                break Matrix::identity(d);
            }
        };
        mats.push(m);
    }

    CoefficientTuple::new(mats).expect("generated family must certify")
}
