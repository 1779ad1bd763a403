//! Multi-indices of fixed weighted degree and exact multinomial
//! coefficients: the index set and weights of the fundamental-solution
//! formula.
//!
//! The weight vector is fixed to `(1, 2, ..., r)`: component `j` of an index
//! contributes `(j + 1) * k_j` to the weighted degree.

use num_bigint::BigUint;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    k: Vec<u32>,
}

impl MultiIndex {
    pub fn new(k: Vec<u32>) -> Self {
        Self { k }
    }

    pub fn components(&self) -> &[u32] {
        &self.k
    }

    pub fn order(&self) -> usize {
        self.k.len()
    }

    /// `|k| = sum k_j`.
    pub fn length(&self) -> u64 {
        self.k.iter().map(|&v| v as u64).sum()
    }

    /// `<k, d> = sum (j+1) k_j`.
    pub fn weighted_degree(&self) -> u64 {
        weighted_degree(&self.k)
    }
}

pub fn weighted_degree(k: &[u32]) -> u64 {
    k.iter()
        .enumerate()
        .map(|(j, &v)| (j as u64 + 1) * v as u64)
        .sum()
}

/// Visit every index in `Z_+^r` with weighted degree `m`, in the
/// deterministic order produced by fixing `k_{r-1}` first (ascending) and
/// descending to `k_0`. Nothing is visited for `m < 0`; only the zero index
/// for `m = 0`.
pub fn for_each_weighted<F: FnMut(&[u32])>(r: usize, m: i64, mut f: F) {
    assert!(r >= 1, "order must be positive");
    if m < 0 {
        return;
    }
    let mut k = vec![0u32; r];
    descend(r - 1, m as u64, &mut k, &mut f);
}

fn descend<F: FnMut(&[u32])>(j: usize, rem: u64, k: &mut [u32], f: &mut F) {
    if j == 0 {
        k[0] = rem as u32;
        f(k);
        return;
    }
    let w = (j + 1) as u64;
    for t in 0..=rem / w {
        k[j] = t as u32;
        descend(j - 1, rem - w * t, k, f);
    }
    k[j] = 0;
}

pub fn enumerate_weighted(r: usize, m: i64) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for_each_weighted(r, m, |k| out.push(MultiIndex::new(k.to_vec())));
    out
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc = acc * BigUint::from(n - k + i) / BigUint::from(i);
    }
    acc
}

/// Exact multinomial coefficient `|k|! / (k_0! ... k_{r-1}!)`, computed as a
/// product of binomials of partial sums so every intermediate stays integral.
pub fn multinomial(k: &[u32]) -> BigUint {
    let mut acc = BigUint::one();
    let mut partial: u64 = 0;
    for &kj in k {
        partial += kj as u64;
        acc *= binomial(partial, kj as u64);
    }
    acc
}

/// Number of indices of weighted degree `m`, i.e. the number of partitions
/// of `m` into parts of size at most `r`. Computed by an independent
/// partition-counting recurrence; serves as the cardinality oracle for
/// [`enumerate_weighted`].
pub fn count_weighted(r: usize, m: i64) -> BigUint {
    assert!(r >= 1);
    if m < 0 {
        return BigUint::zero();
    }
    let m = m as usize;
    let mut table = vec![BigUint::zero(); m + 1];
    table[0] = BigUint::one();
    for part in 1..=r {
        for total in part..=m {
            let add = table[total - part].clone();
            table[total] += add;
        }
    }
    table[m].clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_zero_has_only_the_zero_index() {
        assert_eq!(
            enumerate_weighted(3, 0),
            vec![MultiIndex::new(vec![0, 0, 0])]
        );
    }

    #[test]
    fn negative_degree_is_empty() {
        assert!(enumerate_weighted(2, -1).is_empty());
    }

    #[test]
    fn order_two_degree_four() {
        let got = enumerate_weighted(2, 4);
        let expected = vec![
            MultiIndex::new(vec![4, 0]),
            MultiIndex::new(vec![2, 1]),
            MultiIndex::new(vec![0, 2]),
        ];
        assert_eq!(got, expected);
    }

    #[test]
    fn every_index_has_the_requested_degree() {
        for r in 1..=4 {
            for m in 0..=15 {
                for idx in enumerate_weighted(r, m) {
                    assert_eq!(idx.weighted_degree(), m as u64);
                    assert_eq!(idx.order(), r);
                }
            }
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(&[0, 0, 0]), BigUint::from(1u32));
        assert_eq!(multinomial(&[1, 1]), BigUint::from(2u32));
        assert_eq!(multinomial(&[2, 1, 1]), BigUint::from(12u32));
    }

    #[test]
    fn multinomial_matches_factorial_definition() {
        // 10! / (3! 3! 4!) = 4200
        assert_eq!(multinomial(&[3, 3, 4]), BigUint::from(4200u32));
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_weighted(5, 0), BigUint::from(1u32));
        assert_eq!(count_weighted(2, 4), BigUint::from(3u32));
        assert_eq!(count_weighted(3, 6), BigUint::from(7u32));
    }

    #[test]
    fn enumeration_matches_partition_count() {
        for r in 1..=5 {
            for m in 0..=30 {
                let listed = enumerate_weighted(r, m).len();
                assert_eq!(BigUint::from(listed), count_weighted(r, m), "r={r} m={m}");
            }
        }
    }

    #[test]
    fn binomial_large_values_are_exact() {
        // C(60, 30) overflows u64 arithmetic headroom checks; spot value
        assert_eq!(binomial(60, 30).to_string(), "118264581564861424");
    }
}
