//! Acceptance suite: every closed form in the crate is validated against an
//! independent oracle at desk scale. Each test prints one pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use opseq::bell::{
    algebraic_expm, algebraic_power, bell_number, bell_number_enumeration_oracle, biguint_to_f64,
    expm_series_oracle, power_recurrence_spec, power_sequence_decomposition, r_bell_poly_dobinski,
    StirlingTable, EXPM_SERIES_TOL,
};
use opseq::binet::{binet_eval, binet_solve, roots_with_multiplicities, DEFAULT_CLUSTER_TOL};
use opseq::companion::{
    build_companion, companion_power_closed, companion_power_closed_unchecked,
    companion_power_naive,
};
use opseq::matrix::{mat_power_naive, Matrix};
use opseq::recurrence::RecurrenceSpec;
use opseq::rho::{rho_dp, rho_enum, rho_scalar};
use opseq::scalar::{Rat, Scalar};
use opseq::{generate_commuting_family, CoefficientTuple};

fn criterion<F: FnOnce() + std::panic::UnwindSafe>(id: u32, name: &str, body: F) {
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = started.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => println!("[criterion {id}] {name}: PASS ({elapsed:.2}s)"),
        Err(payload) => {
            println!("[criterion {id}] {name}: FAIL ({elapsed:.2}s)");
            std::panic::resume_unwind(payload);
        }
    }
}

/// Tiny deterministic generator for seeded test data (independent of the
/// library's internal one).
struct TestRng(u64);

impl TestRng {
    fn new(seed: u64) -> Self {
        Self(
            seed.wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add(0x1234_5678),
        )
    }

    fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as i64
    }
}

fn random_initial_rat(rng: &mut TestRng, r: usize, d: usize) -> Vec<Matrix<Rat>> {
    (0..r)
        .map(|_| Matrix::from_fn(d, d, |_, _| Rat::from_i64(rng.int(-3, 3))))
        .collect()
}

const GRID_SEEDS: u64 = 20;

#[test]
fn criterion_1_rho_cross_validation() {
    criterion(1, "rho enumeration equals rho dp exactly", || {
        for r in [2usize, 3, 4] {
            for d in [1usize, 2, 3] {
                for seed in 0..GRID_SEEDS {
                    let tuple: CoefficientTuple<Rat> = generate_commuting_family(seed, r, d);
                    let table = rho_dp(25, &tuple).unwrap();
                    for m in 0..=25i64 {
                        assert_eq!(
                            rho_enum(m, &tuple).unwrap(),
                            table.value_or_zero(m),
                            "r={r} d={d} seed={seed} m={m}"
                        );
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_2_closed_term_equivalence() {
    criterion(2, "closed term equals direct iteration exactly", || {
        for r in [2usize, 3, 4] {
            for d in [1usize, 2, 3] {
                for seed in 0..GRID_SEEDS {
                    let tuple: CoefficientTuple<Rat> = generate_commuting_family(seed, r, d);
                    let mut rng = TestRng::new(seed * 31 + r as u64 * 7 + d as u64);
                    let spec =
                        RecurrenceSpec::new(tuple, random_initial_rat(&mut rng, r, d)).unwrap();
                    let terms = spec.iterate_sequence(40);
                    let table = rho_dp(40, &spec.coeffs).unwrap();
                    for n in r as i64..=40 {
                        assert_eq!(
                            spec.closed_term_with_table(&table, n).unwrap(),
                            terms[n as usize],
                            "r={r} d={d} seed={seed} n={n}"
                        );
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_3_companion_power_equivalence() {
    criterion(
        3,
        "companion power closed form equals repeated squaring",
        || {
            for r in [2usize, 3] {
                for d in [1usize, 2, 3] {
                    for seed in 0..GRID_SEEDS {
                        let tuple: CoefficientTuple<Rat> = generate_commuting_family(seed, r, d);
                        let b = build_companion(&tuple);
                        for n in r as i64..=20 {
                            assert_eq!(
                                companion_power_closed(&tuple, n).unwrap(),
                                companion_power_naive(&b, n as u64),
                                "r={r} d={d} seed={seed} n={n}"
                            );
                        }
                        // recorded negative check: the literal formula fails
                        // below the boundary, where rho's zero convention erases
                        // the identity blocks
                        for n in [0i64, 1] {
                            assert_ne!(
                                companion_power_closed_unchecked(&tuple, n).unwrap(),
                                companion_power_naive(&b, n as u64),
                                "literal formula unexpectedly valid at n={n}"
                            );
                        }
                    }
                }
            }
        },
    );
}

#[test]
fn criterion_4_fibonacci_anchor() {
    criterion(
        4,
        "Fibonacci anchors for rho_scalar and the solve command",
        || {
            let a = [Rat::from_i64(1), Rat::from_i64(1)];
            let expected = [1i64, 1, 2, 3, 5, 8, 13, 21, 34];
            for (i, &want) in expected.iter().enumerate() {
                let n = 2 + i as i64;
                assert_eq!(rho_scalar(n, &a), Rat::from_i64(want), "n={n}");
            }

            let file = format!("{}/testdata/fibonacci.json", env!("CARGO_MANIFEST_DIR"));
            let output = Command::new(env!("CARGO_BIN_EXE_opseq"))
                .args(["solve", &file, "--n", "10"])
                .output()
                .expect("solve command runs");
            assert!(output.status.success(), "exit: {:?}", output.status);
            let stdout = String::from_utf8_lossy(&output.stdout);
            assert!(stdout.contains("55"), "stdout missing 55:\n{stdout}");
            assert!(stdout.contains("deviation: 0"), "stdout:\n{stdout}");
        },
    );
}

fn expand_roots(root_groups: &[(f64, usize)]) -> Vec<f64> {
    // monic polynomial with the given roots, expanded; returned in lag form
    // (coefficients of the recurrence, c_l at lag l)
    let mut poly = vec![1.0f64]; // descending degree
    for &(root, mult) in root_groups {
        for _ in 0..mult {
            let mut next = vec![0.0; poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * root;
            }
            poly = next;
        }
    }
    poly[1..].iter().map(|&c| -c).collect()
}

#[test]
fn criterion_5_binet_reconstruction() {
    criterion(
        5,
        "Binet evaluation reconstructs the iterated sequence",
        || {
            let cases: Vec<Vec<(f64, usize)>> = vec![
                vec![(1.0, 1), (-1.0, 1)],
                vec![(1.0, 1), (0.5, 1), (-0.5, 1)],
                vec![(2.0, 1), (1.0, 1), (-1.0, 1), (0.5, 1)],
                vec![(2.0, 1), (1.0, 1), (0.5, 1), (-1.0, 1), (-1.5, 1)],
                vec![(1.0, 2)], // the double-root case, T_n = (1 + n) pattern
            ];
            for (case_idx, groups) in cases.iter().enumerate() {
                let lag = expand_roots(groups);
                let r = lag.len();
                let d = 2usize;
                let mats: Vec<Matrix<f64>> =
                    lag.iter().map(|&c| Matrix::identity(d).scale(&c)).collect();
                let tuple = CoefficientTuple::new(mats).unwrap();
                let initial: Vec<Matrix<f64>> = if groups == &vec![(1.0, 2)] {
                    // T_0 = I, T_1 = 2I gives T_n = (1 + n) I
                    vec![Matrix::identity(d), Matrix::identity(d).scale(&2.0)]
                } else {
                    let mut rng = TestRng::new(900 + case_idx as u64);
                    (0..r)
                        .map(|_| Matrix::from_fn(d, d, |_, _| rng.int(-3, 3) as f64))
                        .collect()
                };
                let spec = RecurrenceSpec::new(tuple, initial).unwrap();

                let poly = opseq::binet::characteristic_polynomial(&lag).unwrap();
                let spectral = roots_with_multiplicities(&poly, DEFAULT_CLUSTER_TOL).unwrap();
                assert_eq!(spectral.degree(), r, "case {case_idx}");
                let dec = binet_solve(&spec.initial, &spectral).unwrap();

                let terms = spec.iterate_sequence(40);
                for (n, oracle) in terms.iter().enumerate() {
                    let rec = binet_eval(&dec, n as u64).unwrap();
                    let dev = rec.sub(oracle).frobenius_norm() / (1.0 + oracle.frobenius_norm());
                    assert!(dev <= 1e-8, "case {case_idx} n={n}: deviation {dev:.3e}");
                }
                if groups == &vec![(1.0, 2)] {
                    let t7 = binet_eval(&dec, 7).unwrap();
                    let want: Matrix<f64> = Matrix::identity(d).scale(&8.0);
                    assert!(t7.approx_eq(&want, 1e-9), "double-root T_7 must be 8I");
                }
            }
        },
    );
}

/// Unimodular integer matrix (det +-1) from a few random shears, together
/// with its exact inverse. Small shear coefficients keep the similarity
/// transform well conditioned so tolerance checks measure the algorithms,
/// not the test data.
fn random_unimodular(rng: &mut TestRng, d: usize) -> (Matrix<f64>, Matrix<f64>) {
    let mut shears: Vec<(usize, usize, f64)> = Vec::new();
    for _ in 0..4 {
        let i = rng.int(0, d as i64 - 1) as usize;
        let mut j = rng.int(0, d as i64 - 1) as usize;
        if i == j {
            j = (j + 1) % d;
        }
        let c = rng.int(-1, 1) as f64;
        shears.push((i, j, c));
    }
    let mut q: Matrix<f64> = Matrix::identity(d);
    for &(i, j, c) in &shears {
        // row_i += c * row_j
        for col in 0..d {
            let add = c * q[(j, col)];
            q[(i, col)] += add;
        }
    }
    let mut q_inv: Matrix<f64> = Matrix::identity(d);
    for &(i, j, c) in shears.iter().rev() {
        for col in 0..d {
            let sub = c * q_inv[(j, col)];
            q_inv[(i, col)] -= sub;
        }
    }
    (q, q_inv)
}

/// Random algebraic matrix with prescribed Jordan structure: similarity
/// transform of a block-diagonal normal form by a unimodular integer
/// matrix. Returns the matrix, its minimal polynomial in lag form, the
/// minimal-polynomial degree, and whether a repeated root was built in.
fn random_algebraic(
    rng: &mut TestRng,
    eigen_pool: &[f64],
    max_order: usize,
    jordan_block: bool,
) -> (Matrix<f64>, Vec<f64>, usize, bool) {
    // pick distinct eigenvalues
    let mut values = eigen_pool.to_vec();
    for i in (1..values.len()).rev() {
        let j = rng.int(0, i as i64) as usize;
        values.swap(i, j);
    }
    let distinct = rng.int(1, (max_order.min(values.len())) as i64) as usize;
    let chosen = &values[..distinct];
    let has_jordan = jordan_block && chosen.len() < max_order;
    let r = chosen.len() + if has_jordan { 1 } else { 0 };

    // normal form: optional J_2 block for the first eigenvalue, then
    // diagonal entries drawn from the chosen set until dimension d
    let d_min = chosen.len() + if has_jordan { 1 } else { 0 };
    let d = rng.int(d_min as i64, 5.max(d_min as i64)) as usize;
    let mut normal: Matrix<f64> = Matrix::zeros(d, d);
    let mut row = 0;
    if has_jordan {
        normal[(0, 0)] = chosen[0];
        normal[(0, 1)] = 1.0;
        normal[(1, 1)] = chosen[0];
        row = 2;
    }
    for &lambda in chosen.iter().skip(if has_jordan { 1 } else { 0 }) {
        normal[(row, row)] = lambda;
        row += 1;
    }
    while row < d {
        let pick = chosen[rng.int(0, chosen.len() as i64 - 1) as usize];
        normal[(row, row)] = pick;
        row += 1;
    }

    let (q, q_inv) = random_unimodular(rng, d);
    let t = q.mul(&normal).mul(&q_inv);

    let mut groups: Vec<(f64, usize)> = Vec::new();
    for (idx, &lambda) in chosen.iter().enumerate() {
        let mult = if has_jordan && idx == 0 { 2 } else { 1 };
        groups.push((lambda, mult));
    }
    (t, expand_roots(&groups), r, has_jordan)
}

#[test]
fn criterion_6_dual_representation_consistency() {
    criterion(
        6,
        "combinatorial and Binet power representations agree",
        || {
            let pool = [1.0, -1.0, 0.5, -0.5, 2.0, 1.5, -2.0];
            let mut produced = 0;
            let mut seed = 0u64;
            while produced < 20 {
                let mut rng = TestRng::new(3000 + seed);
                seed += 1;
                let (t, lag, r, _) = random_algebraic(&mut rng, &pool, 4, false);
                if r < 2 {
                    continue; // recurrence order must be at least 2
                }
                produced += 1;
                let spec = power_recurrence_spec(&t, &lag).unwrap();
                for n in r as i64..=30 {
                    let via_both = algebraic_power(&spec, n).unwrap();
                    let oracle = mat_power_naive(&t, n as u64);
                    let dev =
                        via_both.sub(&oracle).frobenius_norm() / (1.0 + oracle.frobenius_norm());
                    assert!(
                        dev <= 1e-8,
                        "case {produced} r={r} n={n}: deviation {dev:.3e}"
                    );
                }
            }
        },
    );
}

#[test]
fn criterion_7_exponential_closed_form() {
    criterion(
        7,
        "Bell-polynomial exponential matches the series oracle",
        || {
            let pool = [1.0, -1.0, 0.5, -0.5, 2.0, -1.5];
            let mut produced = 0;
            let mut repeated_cases = 0;
            let mut seed = 0u64;
            while produced < 20 {
                let mut rng = TestRng::new(7000 + seed);
                seed += 1;
                let want_jordan = produced < 6; // at least 5 repeated-root cases
                let (t, lag, r, has_jordan) = random_algebraic(&mut rng, &pool, 4, want_jordan);
                if r < 2 || (want_jordan && !has_jordan) {
                    continue;
                }
                produced += 1;
                if has_jordan {
                    repeated_cases += 1;
                }
                let dec = power_sequence_decomposition(&t, &lag).unwrap();
                let closed = algebraic_expm(&dec).unwrap();
                let oracle = expm_series_oracle(&t, EXPM_SERIES_TOL);
                let dev = closed.sub(&oracle).frobenius_norm() / (1.0 + oracle.frobenius_norm());
                assert!(dev <= 1e-9, "case {produced}: deviation {dev:.3e}");
            }
            assert!(repeated_cases >= 5, "need >= 5 repeated-root cases");

            // the cosh/sinh anchor is bit-stable across evaluations
            let t = Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
            let run = || {
                let dec = power_sequence_decomposition(&t, &[0.0, 1.0]).unwrap();
                algebraic_expm(&dec).unwrap()
            };
            let (first, second) = (run(), run());
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(
                        first[(i, j)].to_bits(),
                        second[(i, j)].to_bits(),
                        "entry ({i},{j}) not bit-stable"
                    );
                }
            }
            let (c, s) = (1.0f64.cosh(), 1.0f64.sinh());
            let expect = Matrix::from_rows(vec![vec![c, s], vec![s, c]]);
            assert!(first.approx_eq(&expect, 1e-9));
        },
    );
}

#[test]
fn criterion_8_combinatorics_suite() {
    criterion(8, "Stirling/Bell/Dobinski identities", || {
        // recurrence holds on the full table up to n = 30
        let table = StirlingTable::new(30);
        for n in 1..=30usize {
            assert_eq!(table.get(n, 0).unwrap(), &num_bigint::BigUint::from(0u32));
            assert_eq!(table.get(n, n).unwrap(), &num_bigint::BigUint::from(1u32));
            for k in 1..n {
                let expect = num_bigint::BigUint::from(k) * table.get(n - 1, k).unwrap()
                    + table.get(n - 1, k - 1).unwrap();
                assert_eq!(table.get(n, k).unwrap(), &expect, "S({n},{k})");
            }
        }

        assert_eq!(bell_number(5), num_bigint::BigUint::from(52u32));
        for n in 0..=10 {
            assert_eq!(bell_number(n), bell_number_enumeration_oracle(n), "B_{n}");
        }

        // Dobinski truncation at eps = 1e-10 (relative; the exact Bell
        // numbers grow past what an absolute 1e-10 in f64 could mean)
        let eps = 1e-10;
        for n in 0..=12u32 {
            let want = biguint_to_f64(&bell_number(n as usize));
            let got = r_bell_poly_dobinski(n, 0, 1.0, eps).unwrap();
            assert!(
                (got - want).abs() <= eps * want.max(1.0),
                "B_{n}: {got} vs {want}"
            );
        }

        // shifted linear case: B_{1,r}(x) = x + r
        for shift in [0u32, 1, 2, 5] {
            for x in [0.5, 1.0, 3.0] {
                let got = r_bell_poly_dobinski(1, shift, x, eps).unwrap();
                let want = x + shift as f64;
                assert!(
                    (got - want).abs() <= eps * (1.0 + want.abs()),
                    "shift={shift} x={x}"
                );
            }
        }
    });
}

#[test]
fn criterion_9_benchmark_report() {
    criterion(
        9,
        "dp multiplication counts linear, enumeration superlinear",
        || {
            let file = format!(
                "{}/testdata/commuting_r3_d2.json",
                env!("CARGO_MANIFEST_DIR")
            );
            let output = Command::new(env!("CARGO_BIN_EXE_opseq"))
                .args(["bench", &file, "--n-max", "40"])
                .output()
                .expect("bench command runs");
            assert!(output.status.success(), "exit: {:?}", output.status);
            let stdout = String::from_utf8_lossy(&output.stdout);
            let mut lines = stdout.lines();
            assert_eq!(
                lines.next().unwrap(),
                "n,enum_mults,dp_mults,iter_mults,naive_pow_mults",
                "CSV header contract"
            );
            let mut rows: Vec<(i64, u64, u64)> = Vec::new();
            for line in lines {
                let cols: Vec<&str> = line.split(',').collect();
                assert_eq!(cols.len(), 5, "row: {line}");
                rows.push((
                    cols[0].parse().unwrap(),
                    cols[1].parse().unwrap(),
                    cols[2].parse().unwrap(),
                ));
            }
            assert_eq!(rows.first().unwrap().0, 3);
            assert_eq!(rows.last().unwrap().0, 40);

            let dp_at = |n: i64| rows.iter().find(|r| r.0 == n).unwrap().2;
            let enum_at = |n: i64| rows.iter().find(|r| r.0 == n).unwrap().1;

            // dp: per-step increment is constant (r products) from 2r on
            for n in 7..40i64 {
                let d2 = dp_at(n + 1) + dp_at(n - 1) - 2 * dp_at(n);
                assert_eq!(d2, 0, "dp second difference at n={n}");
            }
            // enumeration dominates dp from n = 30 on and pulls away
            for n in 30..=40i64 {
                assert!(
                    enum_at(n) > dp_at(n),
                    "n={n}: enum {} vs dp {}",
                    enum_at(n),
                    dp_at(n)
                );
            }
            assert!(
                enum_at(40) - enum_at(30) > dp_at(40) - dp_at(30),
                "enumeration must grow strictly faster"
            );
        },
    );
}
