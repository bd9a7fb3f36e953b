//! C ABI over `halving_lab`.
//!
//! Every fallible function returns an [`HlStatus`] and writes its result
//! through an out pointer. On failure the message is kept per thread and
//! read with [`hl_last_error_message`]. Strings handed out must be released
//! with [`hl_string_free`], handles with their `_free` function. Panics are
//! caught at the boundary and reported as `HL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use halving_lab::density;
use halving_lab::forcing::{self, Condition, ForcingError};
use halving_lab::montecarlo::{self, Exponent};
use halving_lab::rational::{format_rational, ratio};
use halving_lab::sets::{SetError, SetSchema};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    Precondition = 3,
    Internal = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// A parsed set schema.
pub struct HlSchema(SetSchema);

/// A forcing condition.
pub struct HlCondition(Condition);

struct Failure(HlStatus, String);

type Outcome = Result<(), Failure>;

impl From<SetError> for Failure {
    fn from(e: SetError) -> Self {
        let status = if matches!(e, SetError::Parse(_)) { HlStatus::Parse } else { HlStatus::Precondition };
        Failure(status, e.to_string())
    }
}

impl From<density::DensityError> for Failure {
    fn from(e: density::DensityError) -> Self {
        Failure(HlStatus::Precondition, e.to_string())
    }
}

impl From<montecarlo::MonteCarloError> for Failure {
    fn from(e: montecarlo::MonteCarloError) -> Self {
        Failure(HlStatus::Precondition, e.to_string())
    }
}

impl From<ForcingError> for Failure {
    fn from(e: ForcingError) -> Self {
        let status = match e {
            ForcingError::Malformed(_) | ForcingError::BadPartialFn(_) => HlStatus::Parse,
            ForcingError::Postcondition(_) => HlStatus::Internal,
            _ => HlStatus::Precondition,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: Option<String>) {
    let c = message.map(|m| CString::new(m.replace('\0', " ")).expect("no interior nul"));
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Outcome) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(None);
            HlStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(Some(message));
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(Some(format!("panic: {message}")));
            HlStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(HlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(HlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Outcome {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior nul").into_raw()
}

/// Message of the last failure on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a schema in the text grammar.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_schema_parse(text: *const c_char, out: *mut *mut HlSchema) -> HlStatus {
    guard(|| {
        let schema: SetSchema = self::text(text, "text")?.parse()?;
        put(out, Box::into_raw(Box::new(HlSchema(schema))), "out")
    })
}

/// # Safety
/// `schema` must come from `hl_schema_parse` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hl_schema_free(schema: *mut HlSchema) {
    if !schema.is_null() {
        drop(Box::from_raw(schema));
    }
}

/// Canonical text of a schema.
///
/// # Safety
/// `schema` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_schema_to_string(schema: *const HlSchema, out: *mut *mut c_char) -> HlStatus {
    guard(|| {
        let s = handle(schema, "schema")?;
        put(out, owned_string(s.0.to_string()), "out")
    })
}

/// # Safety
/// `schema` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_schema_contains(schema: *const HlSchema, n: u64, out: *mut bool) -> HlStatus {
    guard(|| {
        let s = handle(schema, "schema")?;
        put(out, s.0.contains(n)?, "out")
    })
}

/// `|X ∩ [0, n)|`.
///
/// # Safety
/// `schema` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_schema_count_below(schema: *const HlSchema, n: u64, out: *mut u64) -> HlStatus {
    guard(|| {
        let s = handle(schema, "schema")?;
        put(out, s.0.count_below(n)?, "out")
    })
}

/// `|X ∩ n| / n` as a `p/q` string.
///
/// # Safety
/// `schema` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_initial_density(schema: *const HlSchema, n: u64, out: *mut *mut c_char) -> HlStatus {
    guard(|| {
        let s = handle(schema, "schema")?;
        let d = density::initial_density(&s.0, n)?;
        put(out, owned_string(format_rational(d.value())), "out")
    })
}

/// `|S ∩ X ∩ n| / |X ∩ n|` as a `p/q` string.
///
/// # Safety
/// `s` and `x` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_relative_density(
    s: *const HlSchema,
    x: *const HlSchema,
    n: u64,
    out: *mut *mut c_char,
) -> HlStatus {
    guard(|| {
        let (s, x) = (handle(s, "s")?, handle(x, "x")?);
        let d = density::relative_density(&s.0, &x.0, n)?;
        put(out, owned_string(format_rational(d.value())), "out")
    })
}

/// Reads a condition from its JSON form.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_condition_from_json(json: *const c_char, out: *mut *mut HlCondition) -> HlStatus {
    guard(|| {
        let c = Condition::from_json(text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(HlCondition(c))), "out")
    })
}

/// # Safety
/// `condition` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_condition_to_json(condition: *const HlCondition, out: *mut *mut c_char) -> HlStatus {
    guard(|| {
        let c = handle(condition, "condition")?;
        put(out, owned_string(c.0.to_json()), "out")
    })
}

/// # Safety
/// `condition` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hl_condition_free(condition: *mut HlCondition) {
    if !condition.is_null() {
        drop(Box::from_raw(condition));
    }
}

/// # Safety
/// `condition` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_condition_n(condition: *const HlCondition, out: *mut u64) -> HlStatus {
    guard(|| {
        let c = handle(condition, "condition")?;
        put(out, c.0.n(), "out")
    })
}

/// Number of violated clauses; `0` means valid. The first violation, if
/// any, becomes the thread's last error message even though the call
/// succeeds.
///
/// # Safety
/// `condition` must be a live handle; `violations` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_condition_validate(condition: *const HlCondition, violations: *mut usize) -> HlStatus {
    let mut first = None;
    let status = guard(|| {
        let c = handle(condition, "condition")?;
        let found = forcing::validate(&c.0)?;
        first = found.first().map(|v| v.to_string());
        put(violations, found.len(), "violations")
    });
    if first.is_some() {
        set_last_error(first);
    }
    status
}

/// Whether `q ≤ p`.
///
/// # Safety
/// `q` and `p` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_condition_leq(q: *const HlCondition, p: *const HlCondition, out: *mut bool) -> HlStatus {
    guard(|| {
        let (q, p) = (handle(q, "q")?, handle(p, "p")?);
        put(out, forcing::leq(&q.0, &p.0)?.holds, "out")
    })
}

/// Final condition of the standard run on `index_count` ids.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_condition_generic_run(
    index_count: usize,
    rounds: usize,
    min_horizon: u64,
    seed: u64,
    out: *mut *mut HlCondition,
) -> HlStatus {
    guard(|| {
        let report = forcing::generic_run(index_count, rounds, min_horizon, seed)?;
        put(out, Box::into_raw(Box::new(HlCondition(report.condition))), "out")
    })
}

/// Number of trials, out of `trials`, whose walk returns to zero within
/// `steps` elements of `x`.
///
/// # Safety
/// `x` must be a live handle; `successes` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_estimate_recurrence(
    x: *const HlSchema,
    steps: u64,
    trials: u64,
    seed: u64,
    successes: *mut u64,
) -> HlStatus {
    guard(|| {
        let x = handle(x, "x")?;
        let r = montecarlo::estimate_recurrence(&x.0, steps, trials, seed)?;
        put(successes, r.successes, "successes")
    })
}

/// Natural log of `N · 16n² · exp(-⌈N·P⌉ / c n²)` with `P = p_num/p_den`
/// in `(0, 1]`
/// and `c = 8` when `derived` is nonzero, `2` otherwise.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_delta_n_ln(
    big_n: u64,
    p_num: u64,
    p_den: u64,
    n: u64,
    derived: bool,
    out: *mut f64,
) -> HlStatus {
    guard(|| {
        if p_den == 0 {
            return Err(Failure(HlStatus::Precondition, "zero denominator".into()));
        }
        let exponent = if derived { Exponent::Derived } else { Exponent::Stated };
        put(out, montecarlo::delta_n_ln(big_n, &ratio(p_num, p_den), n, exponent)?, "out")
    })
}
