//! C ABI for the workbench. Terms live behind opaque handles, every
//! fallible call returns a status code, and the detail message for the
//! most recent failure on the calling thread is available through
//! `lin_last_error_message`.
//!
//! Ownership rules:
//! - handles returned through `*mut LinTerm` out-params are owned by the
//!   caller and released with `lin_term_free`;
//! - strings returned through `*mut *mut c_char` out-params are released
//!   with `lin_string_free`;
//! - input pointers are borrowed for the duration of the call only.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use linlam_core::coh::CohBackend;
use linlam_core::model::{
    denote_ground, interpret, semantic_eq, Backend, Eq3, GroundResult, ModelError, ObsSpec,
};
use linlam_core::parser::{parse_term, pretty};
use linlam_core::reduce::{normalize_in_mode, Strategy};
use linlam_core::strict::StrictBackend;
use linlam_core::syntax::{Basis, Term};
use linlam_core::typecheck::infer_in_mode;
use linlam_core::Mode;

/// Opaque handle to a term.
pub struct LinTerm(Term);

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The source text did not parse.
    ParseError = 3,
    /// The term does not type under the requested discipline.
    TypeError = 4,
    /// A scalar argument was out of range, or the operands disagree.
    InvalidArgument = 5,
    /// Interpretation failed inside the model backend.
    ModelError = 6,
}

/// Backend selector: the flat natural-numbers model.
pub const LIN_BACKEND_STRICT: u32 = 0;
/// Backend selector: the coherence-space model.
pub const LIN_BACKEND_COH: u32 = 1;

/// Denotation kind: the program diverges.
pub const LIN_DENOTE_BOTTOM: u32 = 0;
/// Denotation kind: a numeral, carried in `value`.
pub const LIN_DENOTE_NUM: u32 = 1;
/// Denotation kind: the observation has not stabilised within budget.
pub const LIN_DENOTE_UNSTABLE: u32 = 2;

/// Comparison verdict: observably equal within budget.
pub const LIN_EQ_EQUAL: u32 = 0;
/// Comparison verdict: a distinguishing input exists (see the error
/// message for the witness).
pub const LIN_EQ_DISTINCT: u32 = 1;
/// Comparison verdict: undecided while a fixed point is still
/// stabilising.
pub const LIN_EQ_INCONCLUSIVE: u32 = 2;

/// Observed denotation of a closed ground term.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LinDenotation {
    /// One of the `LIN_DENOTE_*` constants.
    pub kind: u32,
    /// The numeral when `kind` is `LIN_DENOTE_NUM`, zero otherwise.
    pub value: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let text = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::default();
    });
}

fn mode_of(ext: bool) -> Mode {
    if ext {
        Mode::Extended
    } else {
        Mode::Core
    }
}

fn model_status(e: &ModelError) -> LinStatus {
    match e {
        ModelError::Typing(_) => LinStatus::TypeError,
        _ => LinStatus::ModelError,
    }
}

/// Version of the library, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the detail message for the most recent failure on this thread
/// into `buf` (up to `cap` bytes including the NUL terminator) and
/// returns the full length of the message including the terminator.
/// With a null `buf` or zero `cap`, only the required length is
/// reported.
#[no_mangle]
pub unsafe extern "C" fn lin_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = cap.min(bytes.len());
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            // The copy is NUL-terminated even when truncated.
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Parses source text into a fresh term handle.
#[no_mangle]
pub unsafe extern "C" fn lin_term_parse(
    src: *const c_char,
    out: *mut *mut LinTerm,
) -> LinStatus {
    if src.is_null() || out.is_null() {
        set_error("null argument");
        return LinStatus::NullArgument;
    }
    let text = match CStr::from_ptr(src).to_str() {
        Ok(t) => t,
        Err(e) => {
            set_error(e);
            return LinStatus::InvalidUtf8;
        }
    };
    match parse_term(text) {
        Ok(t) => {
            clear_error();
            *out = Box::into_raw(Box::new(LinTerm(t)));
            LinStatus::Ok
        }
        Err(e) => {
            set_error(e);
            LinStatus::ParseError
        }
    }
}

/// Releases a term handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lin_term_free(t: *mut LinTerm) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn lin_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of syntax nodes in the term.
#[no_mangle]
pub unsafe extern "C" fn lin_term_size(t: *const LinTerm, out: *mut usize) -> LinStatus {
    if t.is_null() || out.is_null() {
        set_error("null argument");
        return LinStatus::NullArgument;
    }
    clear_error();
    *out = (*t).0.size();
    LinStatus::Ok
}

/// Formats the term; the result parses back to the same term.
#[no_mangle]
pub unsafe extern "C" fn lin_term_pretty(
    t: *const LinTerm,
    out: *mut *mut c_char,
) -> LinStatus {
    if t.is_null() || out.is_null() {
        set_error("null argument");
        return LinStatus::NullArgument;
    }
    let text = pretty(&(*t).0).replace('\0', " ");
    clear_error();
    *out = CString::new(text).unwrap_or_default().into_raw();
    LinStatus::Ok
}

/// Infers the type of the closed term under the core discipline, or the
/// extended one when `ext` is set, and returns it formatted.
#[no_mangle]
pub unsafe extern "C" fn lin_term_infer(
    t: *const LinTerm,
    ext: bool,
    out: *mut *mut c_char,
) -> LinStatus {
    if t.is_null() || out.is_null() {
        set_error("null argument");
        return LinStatus::NullArgument;
    }
    match infer_in_mode(&Basis::empty(), &(*t).0, mode_of(ext)) {
        Ok((ty, _)) => {
            clear_error();
            *out = CString::new(ty.to_string()).unwrap_or_default().into_raw();
            LinStatus::Ok
        }
        Err(e) => {
            set_error(e);
            LinStatus::TypeError
        }
    }
}

/// Normalizes the term with the leftmost strategy under the given fuel.
/// `out_exhausted` reports whether fuel ran out before a normal form.
#[no_mangle]
pub unsafe extern "C" fn lin_term_normalize(
    t: *const LinTerm,
    fuel: u32,
    ext: bool,
    out: *mut *mut LinTerm,
    out_steps: *mut u32,
    out_exhausted: *mut bool,
) -> LinStatus {
    if t.is_null() || out.is_null() {
        set_error("null argument");
        return LinStatus::NullArgument;
    }
    let norm = normalize_in_mode(&(*t).0, Strategy::Leftmost, fuel, mode_of(ext));
    clear_error();
    if !out_steps.is_null() {
        *out_steps = norm.steps;
    }
    if !out_exhausted.is_null() {
        *out_exhausted = norm.exhausted;
    }
    *out = Box::into_raw(Box::new(LinTerm(norm.term)));
    LinStatus::Ok
}

fn denote_with<B: Backend>(
    b: &B,
    t: &Term,
    fix_iters: u32,
    ext: bool,
) -> Result<LinDenotation, (LinStatus, String)> {
    let obs = ObsSpec::new(8, 3, fix_iters, 100, 0);
    match denote_ground(b, t, &obs, mode_of(ext)) {
        Ok(GroundResult::Bottom) => Ok(LinDenotation {
            kind: LIN_DENOTE_BOTTOM,
            value: 0,
        }),
        Ok(GroundResult::Num(k)) => Ok(LinDenotation {
            kind: LIN_DENOTE_NUM,
            value: k,
        }),
        Ok(GroundResult::Unstable) => Ok(LinDenotation {
            kind: LIN_DENOTE_UNSTABLE,
            value: 0,
        }),
        Err(e) => Err((model_status(&e), e.to_string())),
    }
}

/// Observes the denotation of a closed ground term in the selected
/// backend. `fix_iters` bounds fixed-point unrolling; 16 is a sound
/// default for small programs.
#[no_mangle]
pub unsafe extern "C" fn lin_term_denote(
    t: *const LinTerm,
    backend: u32,
    fix_iters: u32,
    ext: bool,
    out: *mut LinDenotation,
) -> LinStatus {
    if t.is_null() || out.is_null() {
        set_error("null argument");
        return LinStatus::NullArgument;
    }
    let run = match backend {
        LIN_BACKEND_STRICT => denote_with(&StrictBackend, &(*t).0, fix_iters, ext),
        LIN_BACKEND_COH => denote_with(&CohBackend, &(*t).0, fix_iters, ext),
        _ => {
            set_error(format!("unknown backend selector {}", backend));
            return LinStatus::InvalidArgument;
        }
    };
    match run {
        Ok(d) => {
            clear_error();
            *out = d;
            LinStatus::Ok
        }
        Err((status, msg)) => {
            set_error(msg);
            status
        }
    }
}

fn compare_with<B: Backend>(
    b: &B,
    l: &Term,
    r: &Term,
    ext: bool,
) -> Result<u32, (LinStatus, String)> {
    let mode = mode_of(ext);
    let (ty_l, dl) = infer_in_mode(&Basis::empty(), l, mode)
        .map_err(|e| (LinStatus::TypeError, e.to_string()))?;
    let (ty_r, dr) = infer_in_mode(&Basis::empty(), r, mode)
        .map_err(|e| (LinStatus::TypeError, e.to_string()))?;
    if ty_l != ty_r {
        return Err((
            LinStatus::InvalidArgument,
            format!("operand types differ: {} vs {}", ty_l, ty_r),
        ));
    }
    let ml = interpret(b, &dl).map_err(|e| (model_status(&e), e.to_string()))?;
    let mr = interpret(b, &dr).map_err(|e| (model_status(&e), e.to_string()))?;
    match semantic_eq(b, &ml, &mr, &ObsSpec::default()) {
        Ok(Eq3::Equal) => Ok(LIN_EQ_EQUAL),
        Ok(Eq3::Distinct { witness }) => {
            set_error(witness);
            Ok(LIN_EQ_DISTINCT)
        }
        Ok(Eq3::Inconclusive { .. }) => Ok(LIN_EQ_INCONCLUSIVE),
        Err(e) => Err((model_status(&e), e.to_string())),
    }
}

/// Compares two closed terms of the same type by observation in the
/// selected backend. On `LIN_EQ_DISTINCT` the distinguishing input is
/// available through `lin_last_error_message`.
#[no_mangle]
pub unsafe extern "C" fn lin_semantic_eq(
    left: *const LinTerm,
    right: *const LinTerm,
    backend: u32,
    ext: bool,
    out_verdict: *mut u32,
) -> LinStatus {
    if left.is_null() || right.is_null() || out_verdict.is_null() {
        set_error("null argument");
        return LinStatus::NullArgument;
    }
    let run = match backend {
        LIN_BACKEND_STRICT => compare_with(&StrictBackend, &(*left).0, &(*right).0, ext),
        LIN_BACKEND_COH => compare_with(&CohBackend, &(*left).0, &(*right).0, ext),
        _ => {
            set_error(format!("unknown backend selector {}", backend));
            return LinStatus::InvalidArgument;
        }
    };
    match run {
        Ok(verdict) => {
            if verdict == LIN_EQ_EQUAL || verdict == LIN_EQ_INCONCLUSIVE {
                clear_error();
            }
            *out_verdict = verdict;
            LinStatus::Ok
        }
        Err((status, msg)) => {
            set_error(msg);
            status
        }
    }
}
