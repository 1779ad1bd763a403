//! Scalar-coefficient spectral path: characteristic polynomial, complex
//! roots with numerically clustered multiplicities, the confluent
//! Vandermonde solve for the coefficient matrices S_{i,j}, Binet
//! evaluation, and the atomic-moment positivity report.
//!
//! Complex arithmetic is confined to this module (and `bell`, which reuses
//! its decompositions); every public output is a real matrix guarded by an
//! imaginary-residue check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Default absolute clustering tolerance, applied after max-norm scaling.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;

/// Condition-estimate ceiling for the Vandermonde solve.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Imaginary-residue bound: `||Im|| <= IMAG_RESIDUE_TOL * (1 + ||Re||)`.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

/// Eigenvalue tolerance for positive-semidefiniteness verdicts.
pub const PSD_TOL: f64 = 1e-9;

/// Distinct roots with multiplicities; `sum m_i` equals the degree.
#[derive(Clone, Debug)]
pub struct SpectralData {
    groups: Vec<(Complex64, usize)>,
    /// Set when the clustering was ambiguous at the declared tolerance
    /// (a different tolerance within a factor of two would regroup).
    pub multiplicity_warning: Option<String>,
}

impl SpectralData {
    /// Exact spectral data supplied by the caller (regression tests, known
    /// spectra). No clustering is performed.
    pub fn from_groups(groups: Vec<(Complex64, usize)>) -> Result<Self> {
        if groups.is_empty() || groups.iter().any(|&(_, m)| m == 0) {
            return Err(Error::Range("empty root group".into()));
        }
        Ok(Self {
            groups,
            multiplicity_warning: None,
        })
    }

    pub fn groups(&self) -> &[(Complex64, usize)] {
        &self.groups
    }

    /// Total degree `sum m_i`.
    pub fn degree(&self) -> usize {
        self.groups.iter().map(|&(_, m)| m).sum()
    }

    pub fn all_simple(&self) -> bool {
        self.groups.iter().all(|&(_, m)| m == 1)
    }

    pub fn all_real(&self) -> bool {
        self.groups.iter().all(|&(z, _)| z.im == 0.0)
    }
}

/// Monic characteristic polynomial of the lag-order coefficients:
/// `X^r - c_1 X^{r-1} - ... - c_r`, returned as the `r + 1` coefficients in
/// descending degree. The lag-`l` coefficient maps to degree `r - l`.
pub fn characteristic_polynomial(lag_coeffs: &[f64]) -> Result<Vec<f64>> {
    let r = lag_coeffs.len();
    if r == 0 {
        return Err(Error::Coefficient("empty coefficient list".into()));
    }
    if lag_coeffs[r - 1] == 0.0 {
        return Err(Error::Coefficient(format!(
            "the lag-{r} coefficient must be nonzero"
        )));
    }
    let mut poly = Vec::with_capacity(r + 1);
    poly.push(1.0);
    poly.extend(lag_coeffs.iter().map(|c| -c));
    Ok(poly)
}

fn second_derivative(poly: &[Complex64], z: Complex64) -> Complex64 {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut ddp = Complex64::new(0.0, 0.0);
    for &c in poly {
        ddp = ddp * z + dp * 2.0;
        dp = dp * z + p;
        p = p * z + c;
    }
    ddp
}

/// Newton-refine `z` as a root of the `order`-th derivative of `monic`;
/// falls back to the input when the iteration wanders off.
fn polish_on_derivative(monic: &[f64], z: Complex64, order: usize, guard: f64) -> Complex64 {
    let mut coeffs: Vec<f64> = monic.to_vec();
    for _ in 0..order {
        let deg = coeffs.len() - 1;
        coeffs = coeffs[..deg]
            .iter()
            .enumerate()
            .map(|(i, &c)| c * (deg - i) as f64)
            .collect();
    }
    if coeffs.len() < 2 {
        return z;
    }
    let poly: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let mut w = z;
    for _ in 0..40 {
        let (p, dp) = horner(&poly, w);
        if dp.norm() < 1e-300 {
            break;
        }
        let step = p / dp;
        w -= step;
        if step.norm() < 1e-15 * (1.0 + w.norm()) {
            break;
        }
    }
    // keep the polish only if it stayed in the cluster's neighborhood
    if (w - z).norm() <= 64.0 * guard {
        w
    } else {
        z
    }
}

fn horner(poly: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    // value and derivative
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in poly {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of a monic real polynomial by the Aberth-Ehrlich
/// simultaneous iteration (an equivalent of the companion-eigenvalue
/// method at these degrees). Deterministic: fixed starting points, fixed
/// iteration order.
fn all_roots(monic: &[f64]) -> Vec<Complex64> {
    let degree = monic.len() - 1;
    assert!(degree >= 1);
    let poly: Vec<Complex64> = monic.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    // Cauchy bound on root magnitude
    let bound = 1.0 + monic[1..].iter().fold(0.0f64, |acc, c| acc.max(c.abs()));

    let mut z: Vec<Complex64> = (0..degree)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * (i as f64) / (degree as f64) + 0.4;
            Complex64::from_polar(0.7 * bound, angle)
        })
        .collect();

    let eps = 1e-14 * bound.max(1.0);
    for _ in 0..400 {
        let mut worst = 0.0f64;
        for i in 0..degree {
            let (p, dp) = horner(&poly, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 1e-300 {
                p / dp
            } else {
                Complex64::new(1e-8 * bound, 1e-8 * bound)
            };
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..degree {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 1e-300 {
                        repulsion += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.norm() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            z[i] -= step;
            worst = worst.max(step.norm());
        }
        if worst < eps {
            break;
        }
    }
    z
}

/// Find the roots of a monic polynomial and cluster them into
/// `(value, multiplicity)` groups within `tol_cluster` (absolute, after
/// scaling by the root bound). Cluster means with negligible imaginary part
/// are snapped onto the real axis so that conjugate pairs of a real
/// polynomial collapse cleanly.
pub fn roots_with_multiplicities(monic: &[f64], tol_cluster: f64) -> Result<SpectralData> {
    if monic.len() < 2 {
        return Err(Error::Range("polynomial must have degree >= 1".into()));
    }
    if monic[0] != 1.0 {
        return Err(Error::Coefficient("polynomial must be monic".into()));
    }
    let roots = all_roots(monic);
    let scale = 1.0f64.max(roots.iter().map(|z| z.norm()).fold(0.0, f64::max));
    let tol_abs = tol_cluster * scale;

    // Per-root merge radius: the declared tolerance, widened to the
    // resolution limit the coefficients admit. Relative coefficient noise
    // eps splits an exact double root at z by about
    // sqrt(eps * sum|c_i||z|^(deg-i) / |p''(z)/2|); below that distance two
    // computed roots are numerically indistinguishable, so multiplicity is
    // decided as if they coincide. Capped to stay far from genuine
    // separations.
    let radius: Vec<f64> = roots
        .iter()
        .map(|&z| {
            let az = z.norm();
            let mut coeff_scale = 0.0f64;
            for c in monic {
                coeff_scale = coeff_scale * az + c.abs();
            }
            let poly: Vec<Complex64> = monic.iter().map(|&c| Complex64::new(c, 0.0)).collect();
            let ddp = second_derivative(&poly, z).norm() * 0.5;
            // headroom over the first-order estimate; the iteration adds
            // its own stagnation error on top of coefficient rounding
            let split = 32.0 * (f64::EPSILON * coeff_scale / ddp.max(1e-300)).sqrt();
            tol_abs.max(split.min(1e-4 * scale))
        })
        .collect();

    // transitive-closure clustering
    let n = roots.len();
    let mut assigned = vec![false; n];
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    let mut intra_max = 0.0f64;
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let mut members = vec![i];
        assigned[i] = true;
        let mut grew = true;
        while grew {
            grew = false;
            for j in 0..n {
                if assigned[j] {
                    continue;
                }
                if members
                    .iter()
                    .any(|&m| (roots[m] - roots[j]).norm() <= radius[m].min(radius[j]))
                {
                    members.push(j);
                    assigned[j] = true;
                    grew = true;
                }
            }
        }
        for &a in &members {
            for &b in &members {
                intra_max = intra_max.max((roots[a] - roots[b]).norm());
            }
        }
        let mean = members.iter().map(|&m| roots[m]).sum::<Complex64>()
            / Complex64::new(members.len() as f64, 0.0);
        groups.push((mean, members.len()));
    }

    // A repeated root is a simple root of the (m-1)-th derivative; a short
    // Newton polish there recovers the accuracy the clustered mean loses to
    // the split.
    for (z, m) in groups.iter_mut() {
        if *m > 1 {
            *z = polish_on_derivative(monic, *z, *m - 1, tol_abs);
        }
    }

    // snap near-real cluster means onto the axis
    for (z, _) in groups.iter_mut() {
        if z.im.abs() <= tol_abs {
            *z = Complex64::new(z.re, 0.0);
        }
    }

    // ambiguity check: a tolerance within a factor of two would regroup
    let mut inter_min = f64::INFINITY;
    for a in 0..groups.len() {
        for b in (a + 1)..groups.len() {
            inter_min = inter_min.min((groups[a].0 - groups[b].0).norm());
        }
    }
    let multiplicity_warning = if inter_min < 2.0 * tol_abs || intra_max > 0.5 * tol_abs {
        Some(format!(
            "clustering ambiguous at tolerance {tol_abs:.3e}: \
             closest distinct clusters {inter_min:.3e}, widest cluster {intra_max:.3e}"
        ))
    } else {
        None
    };

    groups.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(SpectralData {
        groups,
        multiplicity_warning,
    })
}

/// Binet decomposition `T_n = sum_{i,j} S_{i,j} n^j lambda_i^n`. The
/// coefficient matrices are stored complex; evaluation casts back to real
/// behind the residue guard.
#[derive(Clone, Debug)]
pub struct BinetDecomposition {
    pub spectral: SpectralData,
    /// Coefficient matrices in column order: groups in `spectral` order,
    /// inner index `j = 0 .. m_i - 1`.
    s: Vec<Matrix<Complex64>>,
    rows: usize,
    cols: usize,
    /// Max absolute residual of the Vandermonde solve.
    pub residual: f64,
    /// One-norm condition estimate of the Vandermonde matrix.
    pub condition_estimate: f64,
}

impl BinetDecomposition {
    /// Coefficient matrix for the `g`-th root group and nilpotent index `j`.
    pub fn coefficient(&self, g: usize, j: usize) -> &Matrix<Complex64> {
        let mut col = 0;
        for (idx, &(_, m)) in self.spectral.groups().iter().enumerate() {
            if idx == g {
                assert!(j < m, "nilpotent index out of range");
                return &self.s[col + j];
            }
            col += m;
        }
        panic!("root group {g} out of range");
    }

    /// Real cast of a coefficient matrix, with the residue guard.
    pub fn coefficient_real(&self, g: usize, j: usize) -> Result<Matrix<f64>> {
        real_cast(self.coefficient(g, j))
    }

    pub fn term_shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

fn vandermonde_entry(n: usize, lambda: Complex64, j: usize) -> Complex64 {
    // n^j lambda^n with the 0^0 = 1 convention on the n = 0 row
    let nf = n as f64;
    let npow = if j == 0 { 1.0 } else { nf.powi(j as i32) };
    lambda.powu(n as u32) * npow
}

/// LU factorization with partial pivoting of a complex square matrix stored
/// row-major; returns the factors in place plus the pivot permutation.
struct Lu {
    n: usize,
    a: Vec<Complex64>,
    piv: Vec<usize>,
}

impl Lu {
    fn factor(n: usize, mut a: Vec<Complex64>) -> Option<Self> {
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut best, mut best_val) = (k, a[k * n + k].norm());
            for i in (k + 1)..n {
                let v = a[i * n + k].norm();
                if v > best_val {
                    best = i;
                    best_val = v;
                }
            }
            if best_val == 0.0 {
                return None;
            }
            if best != k {
                for j in 0..n {
                    a.swap(k * n + j, best * n + j);
                }
                piv.swap(k, best);
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let factor = a[i * n + k] / pivot;
                a[i * n + k] = factor;
                for j in (k + 1)..n {
                    let t = factor * a[k * n + j];
                    a[i * n + j] -= t;
                }
            }
        }
        Some(Self { n, a, piv })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let t = self.a[i * n + j] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let t = self.a[i * n + j] * x[j];
                x[i] -= t;
            }
            x[i] /= self.a[i * n + i];
        }
        x
    }
}

fn one_norm(n: usize, a: &[Complex64]) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solve the confluent Vandermonde system for the Binet coefficients from
/// the initial terms. Row `n in 0..r-1` has entries `n^j lambda_i^n`; the
/// right-hand sides are the matrix entries, solved independently.
pub fn binet_solve(initial: &[Matrix<f64>], spectral: &SpectralData) -> Result<BinetDecomposition> {
    let r = spectral.degree();
    if initial.len() != r {
        return Err(Error::Dimension(format!(
            "expected {r} initial terms for total multiplicity {r}, got {}",
            initial.len()
        )));
    }
    let (rows, cols) = (initial[0].rows(), initial[0].cols());
    if !initial.iter().all(|t| t.rows() == rows && t.cols() == cols) {
        return Err(Error::Dimension("initial terms differ in shape".into()));
    }

    // columns: (group, j) pairs in order
    let mut v = vec![Complex64::new(0.0, 0.0); r * r];
    for n in 0..r {
        let mut col = 0;
        for &(lambda, m) in spectral.groups() {
            for j in 0..m {
                v[n * r + col] = vandermonde_entry(n, lambda, j);
                col += 1;
            }
        }
    }

    let norm_v = one_norm(r, &v);
    let lu = Lu::factor(r, v.clone()).ok_or(Error::Conditioning {
        estimate: f64::INFINITY,
        limit: CONDITION_LIMIT,
    })?;

    // condition estimate via the explicit inverse (r is small)
    let mut inv_norm_cols = vec![0.0f64; r];
    for j in 0..r {
        let mut e = vec![Complex64::new(0.0, 0.0); r];
        e[j] = Complex64::new(1.0, 0.0);
        let x = lu.solve(&e);
        inv_norm_cols[j] = x.iter().map(|z| z.norm()).sum();
    }
    let condition = norm_v * inv_norm_cols.iter().fold(0.0f64, |a, &b| a.max(b));
    if condition > CONDITION_LIMIT {
        return Err(Error::Conditioning {
            estimate: condition,
            limit: CONDITION_LIMIT,
        });
    }

    let mut s = vec![Matrix::<Complex64>::zeros(rows, cols); r];
    for p in 0..rows {
        for q in 0..cols {
            let b: Vec<Complex64> = (0..r)
                .map(|n| Complex64::new(initial[n][(p, q)], 0.0))
                .collect();
            let x = lu.solve(&b);
            for (col, value) in x.into_iter().enumerate() {
                s[col][(p, q)] = value;
            }
        }
    }

    // residual of the solve, max over equations and entries
    let mut residual = 0.0f64;
    for n in 0..r {
        for p in 0..rows {
            for q in 0..cols {
                let mut acc = Complex64::new(0.0, 0.0);
                for col in 0..r {
                    acc += v[n * r + col] * s[col][(p, q)];
                }
                residual = residual.max((acc - initial[n][(p, q)]).norm());
            }
        }
    }

    Ok(BinetDecomposition {
        spectral: spectral.clone(),
        s,
        rows,
        cols,
        residual,
        condition_estimate: condition,
    })
}

/// Evaluate the decomposition at `n`, accumulating in complex arithmetic
/// and casting the result back to the reals behind the residue guard.
pub fn binet_eval(dec: &BinetDecomposition, n: u64) -> Result<Matrix<f64>> {
    let mut acc = Matrix::<Complex64>::zeros(dec.rows, dec.cols);
    let mut col = 0;
    for &(lambda, m) in dec.spectral.groups() {
        for j in 0..m {
            let factor = vandermonde_entry(n as usize, lambda, j);
            acc.add_scaled_assign(&factor, &dec.s[col]);
            col += 1;
        }
    }
    real_cast(&acc)
}

/// Drop the imaginary part of a nominally real complex matrix. Errors when
/// `||Im||_F > IMAG_RESIDUE_TOL * (1 + ||Re||_F)`.
pub fn real_cast(m: &Matrix<Complex64>) -> Result<Matrix<f64>> {
    let re = Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].re);
    let im_norm = Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].im).frobenius_norm();
    let bound = IMAG_RESIDUE_TOL * (1.0 + re.frobenius_norm());
    if im_norm > bound {
        return Err(Error::ImaginaryResidue {
            residue: im_norm,
            bound,
        });
    }
    Ok(re)
}

/// Eigenvalues of a real symmetric matrix by the cyclic Jacobi method.
pub fn symmetric_eigenvalues(m: &Matrix<f64>) -> Vec<f64> {
    assert!(m.is_square());
    let n = m.dim();
    let mut a: Vec<f64> = m.entries().to_vec();
    let idx = |i: usize, j: usize| i * n + j;
    let total: f64 = a.iter().map(|v| v * v).sum();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[idx(i, j)] * a[idx(i, j)];
            }
        }
        if off <= 1e-30 * (1.0 + total) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[idx(q, q)] - a[idx(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

fn is_psd(m: &Matrix<f64>) -> (bool, f64) {
    // symmetrize first; a weight that is not even symmetric cannot pass
    let sym = m.add(&m.transpose()).scale(&0.5);
    let eigs = symmetric_eigenvalues(&sym);
    let min = eigs.first().copied().unwrap_or(0.0);
    let scale = eigs.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
    let symmetric_enough = m.max_abs_diff(&m.transpose()) <= PSD_TOL * (1.0 + m.max_abs());
    (symmetric_enough && min >= -PSD_TOL * (1.0 + scale), min)
}

/// Per-atom positivity verdict for a simple-root decomposition.
#[derive(Clone, Debug)]
pub struct AtomReport {
    pub lambda: f64,
    pub weight: Matrix<f64>,
    pub min_eigenvalue: f64,
    pub positive: bool,
}

/// Report of the finitely-atomic measure interpretation: per-atom PSD
/// checks on the weights plus local moment-matrix checks on sample vectors.
#[derive(Clone, Debug)]
pub struct MomentReport {
    pub atoms: Vec<AtomReport>,
    /// One verdict per sample vector: is `(<T_{i+j} x, x>)_{i,j}` PSD?
    pub moment_matrix_psd: Vec<bool>,
    /// True iff every atom weight and every sampled moment matrix is PSD.
    pub verdict: bool,
}

/// Check whether the decomposition describes an operator moment sequence on
/// its atoms: all weights S_i positive semidefinite, and the r x r local
/// moment matrix `(<T_{i+j} x, x>)` PSD for each sample vector.
///
/// Requires simple roots (`s = r`); the measure interpretation also needs
/// real atoms, so complex ones are rejected.
pub fn atomic_moment_report(
    dec: &BinetDecomposition,
    sample_vectors: &[Vec<f64>],
) -> Result<MomentReport> {
    if !dec.spectral.all_simple() {
        return Err(Error::NotSimpleRoots(
            "atomic measure report needs all roots simple".into(),
        ));
    }
    if !dec.spectral.all_real() {
        return Err(Error::NonRealAtoms(
            "atomic measure report needs real atoms".into(),
        ));
    }
    if dec.rows != dec.cols {
        return Err(Error::Dimension(
            "moment report needs square (operator-valued) terms".into(),
        ));
    }
    let r = dec.spectral.degree();
    let mut atoms = Vec::with_capacity(r);
    for (g, &(lambda, _)) in dec.spectral.groups().iter().enumerate() {
        let weight = dec.coefficient_real(g, 0)?;
        let (positive, min_eigenvalue) = is_psd(&weight);
        atoms.push(AtomReport {
            lambda: lambda.re,
            weight,
            min_eigenvalue,
            positive,
        });
    }

    // terms T_0 .. T_{2r-2} reconstructed from the decomposition
    let terms: Vec<Matrix<f64>> = (0..(2 * r - 1))
        .map(|n| binet_eval(dec, n as u64))
        .collect::<Result<_>>()?;

    let mut moment_matrix_psd = Vec::with_capacity(sample_vectors.len());
    for x in sample_vectors {
        if x.len() != dec.rows {
            return Err(Error::Dimension(format!(
                "sample vector has length {}, expected {}",
                x.len(),
                dec.rows
            )));
        }
        let moment = Matrix::from_fn(r, r, |i, j| {
            let t = &terms[i + j];
            let mut acc = 0.0;
            for p in 0..dec.rows {
                for q in 0..dec.cols {
                    acc += x[p] * t[(p, q)] * x[q];
                }
            }
            acc
        });
        moment_matrix_psd.push(is_psd(&moment).0);
    }

    let verdict = atoms.iter().all(|a| a.positive) && moment_matrix_psd.iter().all(|&b| b);
    Ok(MomentReport {
        atoms,
        moment_matrix_psd,
        verdict,
    })
}
