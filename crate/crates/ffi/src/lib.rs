//! C ABI over the `cannings` crate.
//!
//! Objects cross the boundary as opaque handles created by the constructor
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`CanningsStatus`]; on failure a message is kept per thread and
//! can be read with [`cannings_last_error_message`]. Strings handed out by the
//! library must be released with [`cannings_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cannings::ancestral::{mc_transition_estimate, transition_matrix, TransitionMatrix};
use cannings::rational::{fraction_string, to_f64, Rational};
use cannings::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CanningsStatus {
    Ok = 0,
    InvalidArgument = 1,
    DomainViolation = 2,
    Unsupported = 3,
    CapExceeded = 4,
    ParseError = 5,
    NullPointer = 6,
    Incomplete = 7,
    Internal = 8,
}

/// A validated finite population model.
pub struct CanningsModel(cannings::CanningsModel);

/// A transition matrix over labeled partitions, exact or estimated.
pub struct CanningsMatrix {
    exact: Option<TransitionMatrix<Rational>>,
    float: TransitionMatrix<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CanningsStatus {
    match e {
        Error::InvalidArgument(_) | Error::InvalidModel(_) => CanningsStatus::InvalidArgument,
        Error::DomainViolation(_) => CanningsStatus::DomainViolation,
        Error::Unsupported(_) => CanningsStatus::Unsupported,
        Error::CapExceeded(_) => CanningsStatus::CapExceeded,
        Error::Parse(_) | Error::Json(_) => CanningsStatus::ParseError,
        Error::IncompleteTable(_) => CanningsStatus::Incomplete,
        Error::Io(_) => CanningsStatus::Internal,
    }
}

struct Fail(CanningsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CanningsStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CanningsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CanningsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CanningsStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CanningsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

unsafe fn model_ref<'a>(m: *const CanningsModel) -> Result<&'a cannings::CanningsModel, Fail> {
    m.as_ref().map(|m| &m.0).ok_or_else(|| null("model"))
}

unsafe fn matrix_ref<'a>(m: *const CanningsMatrix) -> Result<&'a CanningsMatrix, Fail> {
    m.as_ref().ok_or_else(|| null("matrix"))
}

fn checked_index(m: &CanningsMatrix, a: usize) -> Result<(), Fail> {
    if a >= m.float.dim() {
        return Err(Fail(
            CanningsStatus::InvalidArgument,
            format!("index {a} out of range for dimension {}", m.float.dim()),
        ));
    }
    Ok(())
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn cannings_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn cannings_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cannings_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a model from its JSON text (`{"d","N","law","counts"}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_model_from_json(json: *const c_char, out: *mut *mut CanningsModel) -> CanningsStatus {
    guard(|| {
        let v = cannings::io::parse_json(text(json, "json")?)?;
        let m = cannings::CanningsModel::from_json(&v)?;
        put(out, Box::into_raw(Box::new(CanningsModel(m))), "out")
    })
}

/// # Safety
/// `model` must be null or a handle from [`cannings_model_from_json`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cannings_model_free(model: *mut CanningsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_model_d(model: *const CanningsModel, out: *mut usize) -> CanningsStatus {
    guard(|| put(out, model_ref(model)?.d(), "out"))
}

/// `|P_{n,E}|` for `d` types. Fails with `CAP_EXCEEDED` beyond 64 bits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_partition_count(n: usize, d: usize, out: *mut u64) -> CanningsStatus {
    guard(|| {
        let c = cannings::partition::partition_count(n, d);
        let c = u64::try_from(c)
            .map_err(|_| Fail(CanningsStatus::CapExceeded, format!("|P_{{{n},{d}}}| does not fit in 64 bits")))?;
        put(out, c, "out")
    })
}

/// Exact one-step transition matrix on `n` samples.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_transition_matrix(
    model: *const CanningsModel,
    n: usize,
    out: *mut *mut CanningsMatrix,
) -> CanningsStatus {
    guard(|| {
        let p = transition_matrix(model_ref(model)?, n)?;
        let float = p.to_f64();
        put(out, Box::into_raw(Box::new(CanningsMatrix { exact: Some(p), float })), "out")
    })
}

/// Monte-Carlo estimate of the transition matrix from `reps` one-step
/// simulations per state.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_mc_estimate(
    model: *const CanningsModel,
    n: usize,
    reps: usize,
    seed: u64,
    out: *mut *mut CanningsMatrix,
) -> CanningsStatus {
    guard(|| {
        let est = mc_transition_estimate(model_ref(model)?, n, reps, seed)?;
        put(out, Box::into_raw(Box::new(CanningsMatrix { exact: None, float: est.matrix })), "out")
    })
}

/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cannings_matrix_free(matrix: *mut CanningsMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_matrix_dim(matrix: *const CanningsMatrix, out: *mut usize) -> CanningsStatus {
    guard(|| put(out, matrix_ref(matrix)?.float.dim(), "out"))
}

/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_matrix_entry_f64(
    matrix: *const CanningsMatrix,
    row: usize,
    col: usize,
    out: *mut f64,
) -> CanningsStatus {
    guard(|| {
        let m = matrix_ref(matrix)?;
        checked_index(m, row)?;
        checked_index(m, col)?;
        let v = match &m.exact {
            Some(p) => to_f64(p.entry(row, col)),
            None => *m.float.entry(row, col),
        };
        put(out, v, "out")
    })
}

/// Entry as a fraction string such as `"1/8"`. `UNSUPPORTED` for estimated
/// matrices. Free the result with [`cannings_string_free`].
///
/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_matrix_entry_fraction(
    matrix: *const CanningsMatrix,
    row: usize,
    col: usize,
    out: *mut *mut c_char,
) -> CanningsStatus {
    guard(|| {
        let m = matrix_ref(matrix)?;
        checked_index(m, row)?;
        checked_index(m, col)?;
        let p = m
            .exact
            .as_ref()
            .ok_or_else(|| Fail(CanningsStatus::Unsupported, "estimated matrices have no exact entries".into()))?;
        put(out, owned(fraction_string(p.entry(row, col))), "out")
    })
}

/// Text form of state `index`, e.g. `"1,2:1"`. Free with [`cannings_string_free`].
///
/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_matrix_state(
    matrix: *const CanningsMatrix,
    index: usize,
    out: *mut *mut c_char,
) -> CanningsStatus {
    guard(|| {
        let m = matrix_ref(matrix)?;
        checked_index(m, index)?;
        put(out, owned(m.float.state(index).to_string()), "out")
    })
}

/// CSV with a header row of states; exact matrices use fraction entries.
/// Free with [`cannings_string_free`].
///
/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_matrix_to_csv(matrix: *const CanningsMatrix, out: *mut *mut c_char) -> CanningsStatus {
    guard(|| {
        let m = matrix_ref(matrix)?;
        let csv = match &m.exact {
            Some(p) => p.to_csv(),
            None => m.float.to_csv(),
        };
        put(out, owned(csv), "out")
    })
}

/// Runs the consistency check up to `depth` lineages. `passed` receives the
/// verdict; `report_json`, if not null, receives the report as JSON text
/// (free with [`cannings_string_free`]).
///
/// # Safety
/// `model` must be a live handle; `passed` must be writable; `report_json`
/// must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_check_consistency(
    model: *const CanningsModel,
    depth: usize,
    passed: *mut bool,
    report_json: *mut *mut c_char,
) -> CanningsStatus {
    guard(|| {
        let r = cannings::laws::check_consistency(model_ref(model)?, depth)?;
        put(passed, r.passed(), "passed")?;
        if !report_json.is_null() {
            report_json.write(owned(r.to_json().to_string()));
        }
        Ok(())
    })
}

/// Rate of a diagonal tensor under a Xi coalescent. `spec_json` describes the measure.
/// `diag` lists the slot sizes per type, e.g. `"2,2;3"`.
///
/// # Safety
/// Both strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cannings_xi_rate(spec_json: *const c_char, diag: *const c_char, out: *mut f64) -> CanningsStatus {
    guard(|| {
        let v = cannings::io::parse_json(text(spec_json, "spec_json")?)?;
        let spec = cannings::limits::XiSpec::from_json(&v)?;
        let t = cannings::io::parse_diagonal(text(diag, "diag")?)?;
        put(out, cannings::limits::xi_rate(&spec, &t)?, "out")
    })
}
