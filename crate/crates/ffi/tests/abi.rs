//! Exercises the C ABI through the exported symbols: handle lifecycle,
//! status codes, and the thread-local error message.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use linlam_ffi::{
    lin_last_error_message, lin_semantic_eq, lin_string_free, lin_term_denote, lin_term_free,
    lin_term_infer, lin_term_normalize, lin_term_parse, lin_term_pretty, lin_term_size,
    lin_version, LinDenotation, LinStatus, LinTerm, LIN_BACKEND_COH, LIN_BACKEND_STRICT,
    LIN_DENOTE_BOTTOM, LIN_DENOTE_NUM, LIN_EQ_EQUAL,
};

fn parse(src: &str) -> *mut LinTerm {
    let c = CString::new(src).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { lin_term_parse(c.as_ptr(), &mut out) };
    assert_eq!(status, LinStatus::Ok, "parse failed: {}", last_error());
    out
}

fn last_error() -> String {
    let needed = unsafe { lin_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; needed.max(1)];
    unsafe { lin_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

fn take_string(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let text = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { lin_string_free(s) };
    text
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(lin_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn parse_pretty_roundtrip() {
    let t = parse("pred (succ (succ 0))");
    let mut size = 0usize;
    assert_eq!(unsafe { lin_term_size(t, &mut size) }, LinStatus::Ok);
    assert_eq!(size, 7);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { lin_term_pretty(t, &mut text) }, LinStatus::Ok);
    assert_eq!(take_string(text), "pred 2");
    unsafe { lin_term_free(t) };
}

#[test]
fn parse_failure_sets_the_error_message() {
    let c = CString::new("succ (").unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { lin_term_parse(c.as_ptr(), &mut out) };
    assert_eq!(status, LinStatus::ParseError);
    assert!(!last_error().is_empty());
}

#[test]
fn null_arguments_are_rejected() {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { lin_term_parse(ptr::null(), &mut out) },
        LinStatus::NullArgument
    );
    let t = parse("0");
    assert_eq!(
        unsafe { lin_term_pretty(t, ptr::null_mut()) },
        LinStatus::NullArgument
    );
    unsafe { lin_term_free(t) };
}

#[test]
fn infer_reports_types_and_linearity_errors() {
    let t = parse("\\x:iota. succ x");
    let mut ty = ptr::null_mut();
    assert_eq!(unsafe { lin_term_infer(t, false, &mut ty) }, LinStatus::Ok);
    assert_eq!(take_string(ty), "iota -o iota");
    unsafe { lin_term_free(t) };

    let bad = parse("\\f:iota -o iota. f (f 0)");
    let mut ty = ptr::null_mut();
    assert_eq!(
        unsafe { lin_term_infer(bad, false, &mut ty) },
        LinStatus::TypeError
    );
    assert!(last_error().contains("used more than once"));
    unsafe { lin_term_free(bad) };
}

#[test]
fn normalize_counts_steps() {
    let t = parse("pred (succ (succ 0))");
    let mut out = ptr::null_mut();
    let mut steps = 0u32;
    let mut exhausted = true;
    let status =
        unsafe { lin_term_normalize(t, 100, false, &mut out, &mut steps, &mut exhausted) };
    assert_eq!(status, LinStatus::Ok);
    assert_eq!(steps, 1);
    assert!(!exhausted);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { lin_term_pretty(out, &mut text) }, LinStatus::Ok);
    assert_eq!(take_string(text), "1");
    unsafe { lin_term_free(out) };
    unsafe { lin_term_free(t) };
}

#[test]
fn denote_agrees_across_backends() {
    let t = parse("pred (succ 0)");
    for backend in [LIN_BACKEND_STRICT, LIN_BACKEND_COH] {
        let mut d = LinDenotation { kind: 99, value: 99 };
        let status = unsafe { lin_term_denote(t, backend, 16, false, &mut d) };
        assert_eq!(status, LinStatus::Ok, "error: {}", last_error());
        assert_eq!(d.kind, LIN_DENOTE_NUM);
        assert_eq!(d.value, 0);
    }
    unsafe { lin_term_free(t) };

    let bot = parse("mu $f:iota. $f");
    let mut d = LinDenotation { kind: 99, value: 99 };
    let status = unsafe { lin_term_denote(bot, LIN_BACKEND_STRICT, 16, false, &mut d) };
    assert_eq!(status, LinStatus::Ok);
    assert_eq!(d.kind, LIN_DENOTE_BOTTOM);
    unsafe { lin_term_free(bot) };
}

#[test]
fn denote_rejects_unknown_backends_and_non_ground_terms() {
    let t = parse("0");
    let mut d = LinDenotation { kind: 0, value: 0 };
    assert_eq!(
        unsafe { lin_term_denote(t, 7, 16, false, &mut d) },
        LinStatus::InvalidArgument
    );
    unsafe { lin_term_free(t) };

    let arrow = parse("\\x:iota. x");
    let mut d = LinDenotation { kind: 0, value: 0 };
    assert_eq!(
        unsafe { lin_term_denote(arrow, LIN_BACKEND_STRICT, 16, false, &mut d) },
        LinStatus::TypeError
    );
    unsafe { lin_term_free(arrow) };
}

#[test]
fn semantic_eq_identifies_the_absorbed_argument() {
    let left = parse("(\\x:iota. x) (mu $f:iota. $f)");
    let right = parse("mu $f:iota. $f");
    for backend in [LIN_BACKEND_STRICT, LIN_BACKEND_COH] {
        let mut verdict = 99u32;
        let status = unsafe { lin_semantic_eq(left, right, backend, false, &mut verdict) };
        assert_eq!(status, LinStatus::Ok, "error: {}", last_error());
        assert_eq!(verdict, LIN_EQ_EQUAL);
    }
    unsafe { lin_term_free(left) };
    unsafe { lin_term_free(right) };
}
