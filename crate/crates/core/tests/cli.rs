//! End-to-end checks of the command-line binary: output shapes, exit
//! codes, and byte-level determinism of the structured mode.

use std::process::{Command, Output};

fn linlam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linlam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn parse_echoes_a_formatted_term() {
    let out = linlam(&["parse", "\\x:iota. succ x"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "\\x:iota.succ x\n");
}

#[test]
fn denote_prints_the_observed_numeral() {
    let out = linlam(&["denote", "--backend", "strict", "pred (succ 0)"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "0\n");

    let out = linlam(&["denote", "--backend", "coh", "pred (succ 0)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "0\n");
}

#[test]
fn denote_reports_bottom_for_divergence() {
    let out = linlam(&["denote", "mu $f:iota. $f"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "bottom\n");
}

#[test]
fn check_rejects_a_duplicated_higher_variable() {
    let out = linlam(&["check", "\\f:iota -o iota. f (f 0)"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("used more than once"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn reduce_prints_a_tagged_trace() {
    let out = linlam(&["reduce", "pred (succ (succ 0))"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("delta-pred-succ"), "stdout: {}", text);
    assert!(text.ends_with("1 after 1 step\n"), "stdout: {}", text);
}

#[test]
fn extension_rules_only_fire_behind_the_flag() {
    let gated = linlam(&["reduce", "derelict (promote!(3))"]);
    assert_eq!(gated.status.code(), Some(0));
    assert!(
        stdout(&gated).ends_with("derelict (promote!(3)) after 0 steps\n"),
        "stdout: {}",
        stdout(&gated)
    );

    let open = linlam(&["reduce", "--ext", "derelict (promote!(3))"]);
    assert_eq!(open.status.code(), Some(0));
    assert!(
        stdout(&open).ends_with("3 after 1 step\n"),
        "stdout: {}",
        stdout(&open)
    );
}

#[test]
fn structured_output_is_byte_deterministic() {
    let args = ["--output", "structured", "denote", "succ 1"];
    let first = linlam(&args);
    let second = linlam(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(stdout(&first), "{\"ok\":true,\"result\":\"2\"}\n");
}

#[test]
fn generated_terms_are_deterministic_per_seed() {
    let args = ["gen", "--count", "2", "--size", "12", "--seed", "4"];
    let first = linlam(&args);
    let second = linlam(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(stdout(&first).lines().count(), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    let out = linlam(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn witness_reports_the_weakened_gap() {
    let out = linlam(&["witness"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("weakened-argument gap"), "stdout: {}", text);
}
