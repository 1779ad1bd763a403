//! opseq: closed forms for linear recurrences with pairwise-commuting
//! matrix coefficients, validated against brute-force iteration oracles.
//!
//! The library computes terms of `T_{n+r} = c_1 T_{n+r-1} + ... + c_r T_n`
//! (matrix coefficients, matrix or vector terms) four ways:
//!
//! * a combinatorial fundamental-solution formula over weighted
//!   multi-indices ([`rho`]),
//! * an entrywise closed form for powers of the block companion matrix
//!   ([`companion`]),
//! * a Binet decomposition over the characteristic roots for scalar
//!   coefficients ([`binet`]),
//! * Bell-polynomial closed forms for powers and exponentials of algebraic
//!   matrices ([`bell`]),
//!
//! and checks every one of them against direct iteration. Exact rational
//! arithmetic is the correctness reference; binary64 exists for benchmarks.

pub mod bell;
pub mod binet;
pub mod companion;
pub mod error;
pub mod family;
pub mod matrix;
pub mod multiindex;
pub mod problem;
pub mod recurrence;
pub mod rho;
pub mod scalar;

pub use error::{Error, Result};
pub use family::{generate_commuting_family, CoefficientTuple};
pub use matrix::{commutator, commutator_norm, mat_power_naive, Matrix};
pub use multiindex::{count_weighted, enumerate_weighted, multinomial, MultiIndex};
pub use recurrence::{RecurrenceSpec, WeightFamily};
pub use rho::{rho_dp, rho_enum, rho_scalar, RhoTable};
pub use scalar::{Rat, Scalar};
