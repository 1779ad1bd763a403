//! Stirling and Bell combinatorics, Dobinski-type truncated series, and the
//! Bell-polynomial closed forms for powers and exponentials of algebraic
//! matrices (matrices annihilated by a known monic polynomial).

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::binet::{
    binet_eval, binet_solve, characteristic_polynomial, real_cast, roots_with_multiplicities,
    BinetDecomposition, DEFAULT_CLUSTER_TOL,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::recurrence::RecurrenceSpec;
use crate::scalar::Scalar;

/// Relative agreement required between the combinatorial and Binet-type
/// representations of an algebraic power.
pub const POWER_CONSISTENCY_TOL: f64 = 1e-8;

/// Default truncation tolerance of the series matrix exponential.
pub const EXPM_SERIES_TOL: f64 = 1e-12;

/// Triangular table of Stirling numbers of the second kind, `S(n, k)` for
/// `0 <= k <= n <= n_max`.
pub struct StirlingTable {
    rows: Vec<Vec<BigUint>>,
}

impl StirlingTable {
    /// Build by the recurrence `S(n, k) = k S(n-1, k) + S(n-1, k-1)` from
    /// `S(0, 0) = 1`.
    pub fn new(n_max: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n_max + 1);
        rows.push(vec![BigUint::one()]);
        for n in 1..=n_max {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            row.push(BigUint::zero());
            for k in 1..=n {
                let from_same = if k < n {
                    BigUint::from(k) * &prev[k]
                } else {
                    BigUint::zero()
                };
                row.push(from_same + &prev[k - 1]);
            }
            rows.push(row);
        }
        Self { rows }
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, n: usize, k: usize) -> Result<&BigUint> {
        if k > n {
            return Err(Error::Range(format!("S({n}, {k}) needs k <= n")));
        }
        Ok(&self.rows[n][k])
    }

    pub fn row(&self, n: usize) -> &[BigUint] {
        &self.rows[n]
    }
}

/// Exact Stirling number of the second kind.
pub fn stirling2(n: usize, k: usize) -> Result<BigUint> {
    if k > n {
        return Err(Error::Range(format!("S({n}, {k}) needs k <= n")));
    }
    Ok(StirlingTable::new(n).get(n, k)?.clone())
}

/// Bell number `B_n = sum_k S(n, k)`, exact.
pub fn bell_number(n: usize) -> BigUint {
    StirlingTable::new(n).row(n).iter().sum()
}

/// Bell polynomial `B_n(x) = sum_k S(n, k) x^k`, evaluated by Horner on the
/// exact coefficient list.
pub fn bell_poly<S: Scalar>(n: usize, x: &S) -> S {
    let table = StirlingTable::new(n);
    let row = table.row(n);
    let mut acc = S::from_bigint(&BigInt::from(row[n].clone()));
    for k in (0..n).rev() {
        acc = acc
            .mul_ref(x)
            .add_ref(&S::from_bigint(&BigInt::from(row[k].clone())));
    }
    acc
}

/// Shifted Bell polynomial by the Dobinski-type series
/// `B_{n,r}(x) = e^{-x} sum_k (k + r)^n x^k / k!`, truncated once the term
/// sequence has entered its decreasing regime (`k > x` and `k > n`, past the
/// term peak) and the current term drops below `eps` times the partial sum.
pub fn r_bell_poly_dobinski(n: u32, shift: u32, x: f64, eps: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Range(format!(
            "Dobinski series needs x > 0, got {x}"
        )));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Range("eps must be positive".into()));
    }
    let mut weight = 1.0; // x^k / k!
    let mut partial = 0.0;
    let mut k: u32 = 0;
    loop {
        let term = ((k + shift) as f64).powi(n as i32) * weight;
        partial += term;
        // stop only after the decreasing regime begins: a first-small-term
        // rule could fire in the pre-peak valley for large n
        let decreasing = (k as f64) > x && k > n;
        if decreasing && term < eps * partial {
            break;
        }
        k += 1;
        weight *= x / k as f64;
        if k > 10_000 {
            break; // unreachable for finite n, x; safety stop
        }
    }
    Ok((-x).exp() * partial)
}

/// Closed form of the exponentially weighted power sum:
/// `sum_{n>=0} n^j lam^n / n! = e^lam B_j(lam)`.
pub fn weighted_exp_sum(j: u32, lam: f64) -> f64 {
    lam.exp() * bell_poly(j as usize, &lam)
}

/// Truncated-series oracle for [`weighted_exp_sum`].
pub fn weighted_exp_sum_series(j: u32, lam: f64, eps: f64) -> f64 {
    let mut weight = 1.0; // lam^n / n!
    let mut partial = 0.0;
    let mut n: u32 = 0;
    loop {
        let term = if n == 0 && j > 0 {
            0.0
        } else {
            (n as f64).powi(j as i32) * weight
        };
        partial += term;
        let decreasing = (n as f64) > lam.abs() && n > j;
        if decreasing && term.abs() < eps * (1.0 + partial.abs()) {
            break;
        }
        n += 1;
        weight *= lam / n as f64;
        if n > 10_000 {
            break;
        }
    }
    partial
}

/// Matrix exponential by scaling-and-squaring with a truncated Taylor
/// series: scale so `||x / 2^s||_F <= 0.5`, sum terms until the term norm
/// drops below `tol`, then square `s` times. Serves as the oracle for the
/// Bell-polynomial closed form.
pub fn expm_series_oracle(x: &Matrix<f64>, tol: f64) -> Matrix<f64> {
    assert!(x.is_square());
    let d = x.dim();
    let norm = x.frobenius_norm();
    let squarings = if norm <= 0.5 {
        0
    } else {
        (norm / 0.5).log2().ceil() as u32
    };
    let scaled = x.scale(&(0.5f64.powi(squarings as i32)));
    let mut sum: Matrix<f64> = Matrix::identity(d);
    let mut term: Matrix<f64> = Matrix::identity(d);
    let mut k = 1.0f64;
    loop {
        term = term.mul(&scaled).scale(&(1.0 / k));
        sum.add_assign(&term);
        if term.frobenius_norm() < tol {
            break;
        }
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..squarings {
        result = result.mul(&result);
    }
    result
}

/// Bell-polynomial closed form of the exponential of an algebraic matrix:
/// for a decomposition of the power sequence `T^n`,
/// `e^T = sum_{i,j} S_{i,j} e^{lambda_i} B_j(lambda_i)`.
pub fn algebraic_expm(dec: &BinetDecomposition) -> Result<Matrix<f64>> {
    let (rows, cols) = dec.term_shape();
    let mut acc = Matrix::<Complex64>::zeros(rows, cols);
    for (g, &(lambda, m)) in dec.spectral.groups().iter().enumerate() {
        let e_lambda = lambda.exp();
        for j in 0..m {
            let factor = e_lambda * bell_poly(j, &lambda);
            acc.add_scaled_assign(&factor, dec.coefficient(g, j));
        }
    }
    real_cast(&acc)
}

/// Decomposition of the power sequence of an algebraic matrix from its
/// monic annihilating polynomial, given in lag-coefficient form
/// (`T^r = c_1 T^{r-1} + ... + c_r I`).
pub fn power_sequence_decomposition(
    t: &Matrix<f64>,
    lag_coeffs: &[f64],
) -> Result<BinetDecomposition> {
    if !t.is_square() {
        return Err(Error::Dimension("algebraic matrix must be square".into()));
    }
    let r = lag_coeffs.len();
    let poly = characteristic_polynomial(lag_coeffs)?;
    let spectral = roots_with_multiplicities(&poly, DEFAULT_CLUSTER_TOL)?;
    let mut initial = Vec::with_capacity(r);
    let mut power = Matrix::<f64>::identity(t.dim());
    for _ in 0..r {
        initial.push(power.clone());
        power = power.mul(t);
    }
    binet_solve(&initial, &spectral)
}

/// Power of an algebraic matrix computed along BOTH routes: the
/// combinatorial closed form of the recurrence spec and the Binet-type
/// representation. The two must agree within [`POWER_CONSISTENCY_TOL`]
/// relative (a disagreement signals root-finding failure); the combinatorial
/// value is returned.
///
/// The spec must encode the minimal-polynomial recurrence of some matrix T:
/// scalar coefficients and initial terms `I, T, ..., T^{r-1}`.
pub fn algebraic_power(spec: &RecurrenceSpec<f64>, n: i64) -> Result<Matrix<f64>> {
    let scalars = spec.coeffs.as_scalars().ok_or_else(|| {
        Error::Coefficient(
            "algebraic powers need scalar coefficients (multiples of the identity)".into(),
        )
    })?;
    if !spec.initial[0].is_identity() {
        return Err(Error::Coefficient(
            "power sequence must start at T^0 = I".into(),
        ));
    }
    let combinatorial = spec.closed_term(n)?;

    let poly = characteristic_polynomial(&scalars)?;
    let spectral = roots_with_multiplicities(&poly, DEFAULT_CLUSTER_TOL)?;
    let dec = binet_solve(&spec.initial, &spectral)?;
    let binet = binet_eval(&dec, n as u64)?;

    let diff = combinatorial.sub(&binet).frobenius_norm();
    let scale = 1.0 + combinatorial.frobenius_norm().max(binet.frobenius_norm());
    if diff > POWER_CONSISTENCY_TOL * scale {
        return Err(Error::Consistency(format!(
            "combinatorial and Binet representations disagree: \
             relative deviation {:.3e} at n = {n}",
            diff / scale
        )));
    }
    Ok(combinatorial)
}

/// Build the power-sequence recurrence spec of an algebraic matrix from its
/// annihilating polynomial in lag form.
pub fn power_recurrence_spec(t: &Matrix<f64>, lag_coeffs: &[f64]) -> Result<RecurrenceSpec<f64>> {
    use crate::family::CoefficientTuple;
    if !t.is_square() {
        return Err(Error::Dimension("algebraic matrix must be square".into()));
    }
    let d = t.dim();
    let mats: Vec<Matrix<f64>> = lag_coeffs
        .iter()
        .map(|&c| Matrix::identity(d).scale(&c))
        .collect();
    let coeffs = CoefficientTuple::new(mats)?;
    let mut initial = Vec::with_capacity(lag_coeffs.len());
    let mut power = Matrix::<f64>::identity(d);
    for _ in 0..lag_coeffs.len() {
        initial.push(power.clone());
        power = power.mul(t);
    }
    RecurrenceSpec::new(coeffs, initial)
}

/// Set-partition enumeration oracle for the Bell numbers: counts partitions
/// of `{1..n}` by the restricted-growth recursion. Exponential; for test
/// cross-checks only.
pub fn bell_number_enumeration_oracle(n: usize) -> BigUint {
    fn count(remaining: usize, blocks: usize) -> u64 {
        if remaining == 0 {
            return 1;
        }
        // next element joins one of the existing blocks or opens a new one
        blocks as u64 * count(remaining - 1, blocks) + count(remaining - 1, blocks + 1)
    }
    BigUint::from(count(n, 0))
}

/// Direct enumeration of `S(n, k)` by counting restricted-growth strings;
/// exponential, test oracle only.
pub fn stirling2_enumeration_oracle(n: usize, k: usize) -> BigUint {
    fn walk(remaining: usize, blocks: usize, k: usize) -> u64 {
        if remaining == 0 {
            return if blocks == k { 1 } else { 0 };
        }
        let mut total = blocks as u64 * walk(remaining - 1, blocks, k);
        if blocks < k {
            total += walk(remaining - 1, blocks + 1, k);
        }
        total
    }
    BigUint::from(walk(n, 0, k))
}

/// f64 value of a BigUint, for tolerance comparisons in tests.
pub fn biguint_to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}
