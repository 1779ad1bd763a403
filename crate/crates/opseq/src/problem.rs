//! Problem files: a small JSON schema describing one recurrence problem.
//!
//! Schema (version 1):
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "mode": "exact",
//!   "order": "lag",
//!   "r": 2,
//!   "d": 1,
//!   "coefficients": [[1], [1]],
//!   "initial": [[0], [1]],
//!   "n": 10
//! }
//! ```
//!
//! Matrix entries are row-major arrays of exactly `d*d` values, numbers or
//! `"p/q"` strings. The `order` tag is mandatory and must be `"lag"`:
//! coefficient `l` multiplies the lag-`l` term. Files without the tag are
//! rejected rather than guessed at.
//!
//! In exact mode only integers and `"p/q"` strings are accepted; a
//! non-integer JSON number like `0.1` is not the rational 1/10 and silently
//! accepting it would corrupt exact results.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::CoefficientTuple;
use crate::matrix::Matrix;
use crate::recurrence::RecurrenceSpec;
use crate::scalar::{Rat, Scalar, FLOAT_COMMUTATOR_TOL};

pub const SCHEMA_VERSION: u32 = 1;

/// Parsed (coefficients, initial terms) of one problem.
pub type MatrixPair<S> = (Vec<Matrix<S>>, Vec<Matrix<S>>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(format!(
                "mode must be \"exact\" or \"float\", got {other:?}"
            ))),
        }
    }
}

/// One matrix entry as read from the file, kept in exact form so both
/// scalar modes can be built from the same parse.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    numer: BigInt,
    denom: BigInt,
    /// True when the source token was a non-integer JSON number (only legal
    /// in float mode).
    from_float: bool,
    float_value: f64,
}

impl Entry {
    fn from_json(value: &serde_json::Value, mode: Mode) -> Result<Self> {
        match value {
            serde_json::Value::Number(num) => {
                // float mode canonicalizes every numeric entry to f64 so the
                // canonical dump round-trips structurally
                if mode == Mode::Float {
                    let f = num
                        .as_f64()
                        .ok_or_else(|| Error::Parse(format!("unrepresentable number {num}")))?;
                    if !f.is_finite() {
                        return Err(Error::Parse(format!("non-finite entry {num}")));
                    }
                    return Ok(Self {
                        numer: BigInt::from(0),
                        denom: BigInt::from(1),
                        from_float: true,
                        float_value: f,
                    });
                }
                if let Some(i) = num.as_i64() {
                    return Ok(Self {
                        numer: BigInt::from(i),
                        denom: BigInt::from(1),
                        from_float: false,
                        float_value: i as f64,
                    });
                }
                Err(Error::Parse(format!(
                    "non-integer number {num} in exact mode; write it as a \"p/q\" string"
                )))
            }
            serde_json::Value::String(s) => {
                let (p, q) = match s.split_once('/') {
                    Some((p, q)) => (p.trim(), q.trim()),
                    None => (s.trim(), "1"),
                };
                let numer: BigInt = p
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad rational numerator {p:?}")))?;
                let denom: BigInt = q
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad rational denominator {q:?}")))?;
                if denom == BigInt::from(0) {
                    return Err(Error::Parse(format!("zero denominator in {s:?}")));
                }
                let rat = Rat::new(numer, denom);
                let float_value = num_traits::ToPrimitive::to_f64(&rat).unwrap_or(f64::NAN);
                if mode == Mode::Float {
                    if !float_value.is_finite() {
                        return Err(Error::Parse(format!(
                            "entry {s:?} does not fit in binary64"
                        )));
                    }
                    return Ok(Self {
                        numer: BigInt::from(0),
                        denom: BigInt::from(1),
                        from_float: true,
                        float_value,
                    });
                }
                Ok(Self {
                    numer: rat.numer().clone(),
                    denom: rat.denom().clone(),
                    from_float: false,
                    float_value,
                })
            }
            other => Err(Error::Parse(format!(
                "matrix entries must be numbers or \"p/q\" strings, got {other}"
            ))),
        }
    }

    fn to_rat(&self) -> Result<Rat> {
        if self.from_float {
            return Err(Error::Parse(
                "float-sourced entry cannot enter exact mode".into(),
            ));
        }
        Ok(Rat::new(self.numer.clone(), self.denom.clone()))
    }

    fn to_f64(&self) -> f64 {
        self.float_value
    }

    fn to_json(&self, mode: Mode) -> serde_json::Value {
        match mode {
            Mode::Exact => {
                let rat = Rat::new(self.numer.clone(), self.denom.clone());
                serde_json::Value::String(rat.render())
            }
            Mode::Float => serde_json::Value::Number(
                serde_json::Number::from_f64(self.to_f64()).expect("finite entry"),
            ),
        }
    }
}

#[derive(Deserialize, Serialize)]
struct RawProblem {
    schema_version: u32,
    mode: String,
    order: String,
    r: usize,
    d: usize,
    coefficients: Vec<Vec<serde_json::Value>>,
    initial: Vec<Vec<serde_json::Value>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_max: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

/// A validated problem file.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub mode: Mode,
    pub r: usize,
    pub d: usize,
    pub coefficients: Vec<Vec<Entry>>,
    pub initial: Vec<Vec<Entry>>,
    pub n: Option<i64>,
    pub n_max: Option<i64>,
    pub eps: Option<f64>,
    pub tol: Option<f64>,
}

impl Problem {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawProblem =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        if raw.order != "lag" {
            return Err(Error::Parse(format!(
                "coefficient order must be tagged \"lag\", got {:?}; ambiguous files are rejected",
                raw.order
            )));
        }
        let mode: Mode = raw.mode.parse()?;
        if raw.r < 2 {
            return Err(Error::Parse(format!("order r must be >= 2, got {}", raw.r)));
        }
        if raw.d < 1 {
            return Err(Error::Parse(format!(
                "dimension d must be >= 1, got {}",
                raw.d
            )));
        }
        let want = raw.d * raw.d;
        let parse_matrices =
            |arrays: &[Vec<serde_json::Value>], what: &str| -> Result<Vec<Vec<Entry>>> {
                if arrays.len() != raw.r {
                    return Err(Error::Parse(format!(
                        "expected {} {what} matrices, got {}",
                        raw.r,
                        arrays.len()
                    )));
                }
                arrays
                    .iter()
                    .enumerate()
                    .map(|(i, arr)| {
                        if arr.len() != want {
                            return Err(Error::Parse(format!(
                                "{what} matrix {i} has {} entries, expected d*d = {want}",
                                arr.len()
                            )));
                        }
                        arr.iter().map(|v| Entry::from_json(v, mode)).collect()
                    })
                    .collect()
            };
        let coefficients = parse_matrices(&raw.coefficients, "coefficient")?;
        let initial = parse_matrices(&raw.initial, "initial")?;
        Ok(Self {
            mode,
            r: raw.r,
            d: raw.d,
            coefficients,
            initial,
            n: raw.n,
            n_max: raw.n_max,
            eps: raw.eps,
            tol: raw.tol,
        })
    }

    /// Canonical re-emission of the parsed problem: exact entries as
    /// rational strings, float entries as numbers. Re-parsing the output
    /// yields an identical problem.
    pub fn dump_canonical(&self) -> String {
        let matrices = |ms: &[Vec<Entry>]| -> Vec<Vec<serde_json::Value>> {
            ms.iter()
                .map(|m| m.iter().map(|e| e.to_json(self.mode)).collect())
                .collect()
        };
        let raw = RawProblem {
            schema_version: SCHEMA_VERSION,
            mode: self.mode.as_str().to_string(),
            order: "lag".to_string(),
            r: self.r,
            d: self.d,
            coefficients: matrices(&self.coefficients),
            initial: matrices(&self.initial),
            n: self.n,
            n_max: self.n_max,
            eps: self.eps,
            tol: self.tol,
        };
        serde_json::to_string_pretty(&raw).expect("serialization cannot fail")
    }

    fn build_matrices<S: Scalar>(
        &self,
        entries: &[Vec<Entry>],
        convert: impl Fn(&Entry) -> Result<S>,
    ) -> Result<Vec<Matrix<S>>> {
        entries
            .iter()
            .map(|arr| {
                let values: Result<Vec<S>> = arr.iter().map(&convert).collect();
                Ok(Matrix::new(self.d, self.d, values?))
            })
            .collect()
    }

    pub fn exact_matrices(&self) -> Result<MatrixPair<Rat>> {
        Ok((
            self.build_matrices(&self.coefficients, |e| e.to_rat())?,
            self.build_matrices(&self.initial, |e| e.to_rat())?,
        ))
    }

    pub fn float_matrices(&self) -> Result<MatrixPair<f64>> {
        Ok((
            self.build_matrices(&self.coefficients, |e| Ok(e.to_f64()))?,
            self.build_matrices(&self.initial, |e| Ok(e.to_f64()))?,
        ))
    }

    /// Build the exact-mode spec. `require_symmetric` adds the optional
    /// strictness check; `certify` controls whether commutativity is
    /// enforced (iteration-only callers may skip it).
    pub fn to_exact_spec(
        &self,
        require_symmetric: bool,
        certify: bool,
    ) -> Result<RecurrenceSpec<Rat>> {
        let (coeffs, initial) = self.exact_matrices()?;
        check_symmetry(&coeffs, require_symmetric)?;
        let tuple = if certify {
            CoefficientTuple::with_tolerance(coeffs, 0.0)?
        } else {
            CoefficientTuple::new_uncertified(coeffs)?
        };
        RecurrenceSpec::new(tuple, initial)
    }

    pub fn to_float_spec(
        &self,
        require_symmetric: bool,
        certify: bool,
        tol_c: Option<f64>,
    ) -> Result<RecurrenceSpec<f64>> {
        let (coeffs, initial) = self.float_matrices()?;
        check_symmetry(&coeffs, require_symmetric)?;
        let tuple = if certify {
            CoefficientTuple::with_tolerance(coeffs, tol_c.unwrap_or(FLOAT_COMMUTATOR_TOL))?
        } else {
            CoefficientTuple::new_uncertified(coeffs)?
        };
        RecurrenceSpec::new(tuple, initial)
    }
}

fn check_symmetry<S: Scalar>(coeffs: &[Matrix<S>], required: bool) -> Result<()> {
    if !required {
        return Ok(());
    }
    for (l, c) in coeffs.iter().enumerate() {
        if !c.is_symmetric(1e-12) {
            return Err(Error::Coefficient(format!(
                "--require-symmetric: coefficient for lag {} is not symmetric",
                l + 1
            )));
        }
    }
    Ok(())
}
