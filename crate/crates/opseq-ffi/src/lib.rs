//! C ABI for the opseq solver.
//!
//! Conventions, mirrored in `include/opseq.h`:
//!
//! * Problems travel as opaque `OpseqProblem` handles created from the same
//!   JSON schema the CLI reads, and must be released with
//!   [`opseq_problem_free`].
//! * Every computation returns an [`OpseqStatus`]; results are written into
//!   caller-provided `double` buffers, row-major, `d * d` entries. Exact-mode
//!   problems are computed in exact arithmetic where the library does so
//!   internally, but FFI outputs are always binary64.
//! * On failure, [`opseq_last_error_message`] returns a thread-local,
//!   NUL-terminated description of the most recent error.
//!
//! The header is maintained by hand and kept in lockstep with this file.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use opseq::bell::{algebraic_expm, power_sequence_decomposition};
use opseq::error::Error;
use opseq::matrix::Matrix;
use opseq::problem::Problem;
use opseq::recurrence::RecurrenceSpec;
use opseq::rho::rho_dp;

/// Status codes shared with the header. Values 1..3 match the CLI exit-code
/// contract; 4 and up are FFI-specific.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpseqStatus {
    Ok = 0,
    NumericMismatch = 1,
    InvalidInput = 2,
    InternalError = 3,
    NullPointer = 4,
    BufferTooSmall = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(e: &Error) -> OpseqStatus {
    match e {
        Error::Parse(_)
        | Error::Coefficient(_)
        | Error::Commutativity(_)
        | Error::Dimension(_)
        | Error::Range(_)
        | Error::NotSimpleRoots(_)
        | Error::NonRealAtoms(_) => OpseqStatus::InvalidInput,
        Error::Conditioning { .. } | Error::ImaginaryResidue { .. } | Error::Consistency(_) => {
            OpseqStatus::InternalError
        }
    }
}

fn fail(e: &Error) -> OpseqStatus {
    set_error(&e.to_string());
    status_of(e)
}

/// Opaque problem handle: the parsed file plus the float-mode spec used for
/// numeric answers.
pub struct OpseqProblem {
    spec: RecurrenceSpec<f64>,
    problem: Problem,
}

/// Parse a problem from a JSON string (same schema as the CLI). On success
/// writes a handle to `out` and returns `Ok`; the handle must be freed with
/// [`opseq_problem_free`].
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn opseq_problem_parse_json(
    json: *const c_char,
    out: *mut *mut OpseqProblem,
) -> OpseqStatus {
    if json.is_null() || out.is_null() {
        set_error("null pointer argument");
        return OpseqStatus::NullPointer;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("problem JSON is not valid UTF-8");
            return OpseqStatus::InvalidInput;
        }
    };
    let problem = match Problem::parse(text) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let spec = match problem.to_float_spec(false, true, None) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let handle = Box::new(OpseqProblem { spec, problem });
    *out = Box::into_raw(handle);
    OpseqStatus::Ok
}

/// Release a handle returned by [`opseq_problem_parse_json`]. Null is a
/// no-op.
///
/// # Safety
/// `p` must be a pointer previously returned by this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn opseq_problem_free(p: *mut OpseqProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Recurrence order r of the problem, or 0 on null.
///
/// # Safety
/// `p` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn opseq_problem_order(p: *const OpseqProblem) -> u32 {
    p.as_ref().map_or(0, |h| h.spec.order() as u32)
}

/// Matrix dimension d of the problem, or 0 on null.
///
/// # Safety
/// `p` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn opseq_problem_dim(p: *const OpseqProblem) -> u32 {
    p.as_ref().map_or(0, |h| h.spec.dim() as u32)
}

unsafe fn write_matrix(m: &Matrix<f64>, out: *mut f64, len: usize) -> OpseqStatus {
    let need = m.rows() * m.cols();
    if out.is_null() {
        set_error("null output buffer");
        return OpseqStatus::NullPointer;
    }
    if len < need {
        set_error(&format!("output buffer holds {len} doubles, need {need}"));
        return OpseqStatus::BufferTooSmall;
    }
    let slice = std::slice::from_raw_parts_mut(out, need);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            slice[i * m.cols() + j] = m[(i, j)];
        }
    }
    OpseqStatus::Ok
}

/// Closed-form term T_n (n >= r), written row-major into `out`.
///
/// # Safety
/// `p` must be a valid handle; `out` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn opseq_closed_term(
    p: *const OpseqProblem,
    n: i64,
    out: *mut f64,
    len: usize,
) -> OpseqStatus {
    let Some(handle) = p.as_ref() else {
        set_error("null problem handle");
        return OpseqStatus::NullPointer;
    };
    match handle.spec.closed_term(n) {
        Ok(m) => write_matrix(&m, out, len),
        Err(e) => fail(&e),
    }
}

/// Term T_n by direct iteration (any n >= 0); the oracle route.
///
/// # Safety
/// As for [`opseq_closed_term`].
#[no_mangle]
pub unsafe extern "C" fn opseq_iterate_term(
    p: *const OpseqProblem,
    n: i64,
    out: *mut f64,
    len: usize,
) -> OpseqStatus {
    let Some(handle) = p.as_ref() else {
        set_error("null problem handle");
        return OpseqStatus::NullPointer;
    };
    if n < 0 {
        set_error("term index must be non-negative");
        return OpseqStatus::InvalidInput;
    }
    let terms = handle.spec.iterate_sequence(n);
    write_matrix(&terms[n as usize], out, len)
}

/// Fundamental-solution coefficient rho(m) (zero matrix below the boundary
/// index r), written row-major into `out`.
///
/// # Safety
/// As for [`opseq_closed_term`].
#[no_mangle]
pub unsafe extern "C" fn opseq_rho(
    p: *const OpseqProblem,
    m: i64,
    out: *mut f64,
    len: usize,
) -> OpseqStatus {
    let Some(handle) = p.as_ref() else {
        set_error("null problem handle");
        return OpseqStatus::NullPointer;
    };
    let r = handle.spec.order() as i64;
    if m < r {
        let zero = Matrix::zeros(handle.spec.dim(), handle.spec.dim());
        return write_matrix(&zero, out, len);
    }
    match rho_dp(m, &handle.spec.coeffs) {
        Ok(table) => write_matrix(table.value(m), out, len),
        Err(e) => fail(&e),
    }
}

/// Bell-polynomial exponential for a power-sequence problem (scalar
/// coefficients, initial terms I, T, ..., T^{r-1}); writes e^T.
///
/// # Safety
/// As for [`opseq_closed_term`].
#[no_mangle]
pub unsafe extern "C" fn opseq_expm(
    p: *const OpseqProblem,
    out: *mut f64,
    len: usize,
) -> OpseqStatus {
    let Some(handle) = p.as_ref() else {
        set_error("null problem handle");
        return OpseqStatus::NullPointer;
    };
    let Some(scalars) = handle.spec.coeffs.as_scalars() else {
        set_error("expm needs scalar coefficients (multiples of the identity)");
        return OpseqStatus::InvalidInput;
    };
    if !handle.spec.initial[0].is_identity() || handle.spec.initial.len() < 2 {
        set_error("expm needs the power-sequence form: initial terms I, T, ...");
        return OpseqStatus::InvalidInput;
    }
    let t = handle.spec.initial[1].clone();
    let result = power_sequence_decomposition(&t, &scalars).and_then(|dec| algebraic_expm(&dec));
    match result {
        Ok(m) => write_matrix(&m, out, len),
        Err(e) => fail(&e),
    }
}

/// Description of the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn opseq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn opseq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

impl OpseqProblem {
    /// Canonical JSON of the parsed problem (Rust-side helper for bindings
    /// that want to re-serialize).
    pub fn canonical_json(&self) -> String {
        self.problem.dump_canonical()
    }
}
