//! Acceptance gate for the workspace: one test per shipped guarantee.
//! Each test prints a single `PASS`/`FAIL` line with the evidence that
//! backs the verdict, then asserts it. Tolerances are pinned here.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::{add_term, Mutant, Mutation};
use linlam_core::coh::{clq, trace_probe, CAtom, CohBackend};
use linlam_core::model::{denote_ground, Backend, Eq3, Fuel, GroundResult, ObsSpec};
use linlam_core::parser::parse_term;
use linlam_core::reduce::{
    find_redexes, find_redexes_in_mode, join_probe, normalize, step_at, ExtRuleTag, RuleTag,
    Strategy,
};
use linlam_core::strict::StrictBackend;
use linlam_core::syntax::{numeral, Basis, Term, Ty};
use linlam_core::typecheck::infer;
use linlam_core::verify::{
    gen_closed, incompleteness_witness, law_suite, soundness_check, substitution_check,
    LawVerdict,
};
use linlam_core::Mode;

/// Corpus shape shared by the soundness and join criteria.
const CORPUS_TERMS: usize = 500;
const CORPUS_TERM_SIZE: u32 = 25;
const CORPUS_STEP_FUEL: u32 = 200;
/// Fraction of corpus terms allowed to skip a comparison while a fixed
/// point is still stabilising.
const INCONCLUSIVE_CAP: f64 = 0.05;
const SUBST_INSTANCES: u32 = 100;
const JOIN_TERMS: usize = 200;
const JOIN_FUEL: u32 = 200;
const JOIN_RATE_FLOOR: f64 = 0.95;
const WITNESS_FUEL: u32 = 1000;
const PRED_RANGE: u64 = 64;
const PRED_BUDGET_SECS: f64 = 1.0;
const ADD_BOUND: u64 = 5;
const ADD_BUDGET_SECS: f64 = 10.0;
const EXT_CORPUS_TERMS: usize = 100;

fn verdict(name: &str, ok: bool, detail: &str) -> bool {
    println!("{} {}: {}", if ok { "PASS" } else { "FAIL" }, name, detail);
    ok
}

fn obs() -> ObsSpec {
    ObsSpec::default()
}

/// Deterministic generated corpus: first `count` closed ground terms found
/// along the seed stream starting at `seed0`.
fn corpus(count: usize, seed0: u64, mode: Mode) -> Vec<Term> {
    let mut out = Vec::new();
    let mut seed = seed0;
    while out.len() < count && seed < seed0 + 40_000 {
        if let Ok(t) = gen_closed(&Ty::Iota, CORPUS_TERM_SIZE, seed, mode) {
            out.push(t);
        }
        seed += 1;
    }
    out
}

struct Tally {
    type_failures: usize,
    distinct_terms: usize,
    inconclusive_terms: usize,
}

fn soundness_tally<B: Backend>(b: &B, terms: &[Term], mode: Mode) -> Tally {
    let spec = obs();
    let mut tally = Tally {
        type_failures: 0,
        distinct_terms: 0,
        inconclusive_terms: 0,
    };
    for t in terms {
        let rep = soundness_check(b, t, CORPUS_STEP_FUEL, &spec, mode, true)
            .expect("soundness check runs");
        if !rep.type_preserved {
            tally.type_failures += 1;
        }
        if rep.distinct.is_some() {
            tally.distinct_terms += 1;
        }
        if rep.inconclusive > 0 {
            tally.inconclusive_terms += 1;
        }
    }
    tally
}

#[test]
fn numeral_predecessor_agreement() {
    let start = Instant::now();
    let spec = obs();
    let mut ok = true;
    for k in 0..PRED_RANGE {
        let t = Term::pred_of(Term::succ_of(numeral(k)));
        let sites = find_redexes(&t);
        ok &= sites.len() == 1;
        ok &= step_at(&t, &sites[0], Mode::Core).ok() == Some(numeral(k));
        ok &= matches!(
            denote_ground(&StrictBackend, &t, &spec, Mode::Core),
            Ok(GroundResult::Num(n)) if n == k
        );
        ok &= matches!(
            denote_ground(&CohBackend, &t, &spec, Mode::Core),
            Ok(GroundResult::Num(n)) if n == k
        );
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < PRED_BUDGET_SECS;
    assert!(verdict(
        "numeral-predecessor-agreement",
        ok,
        &format!(
            "one-step cancellation and both denotations for k < {} in {:.3}s",
            PRED_RANGE, secs
        ),
    ));
}

#[test]
fn stepwise_soundness_on_a_generated_corpus() {
    let terms = corpus(CORPUS_TERMS, 0, Mode::Core);
    let mut ok = terms.len() == CORPUS_TERMS;
    let strict = soundness_tally(&StrictBackend, &terms, Mode::Core);
    let coh = soundness_tally(&CohBackend, &terms, Mode::Core);
    let distinct = strict.distinct_terms + coh.distinct_terms;
    let type_failures = strict.type_failures + coh.type_failures;
    let worst_incon = strict.inconclusive_terms.max(coh.inconclusive_terms) as f64
        / CORPUS_TERMS as f64;
    ok &= distinct == 0;
    ok &= type_failures == 0;
    ok &= worst_incon < INCONCLUSIVE_CAP;
    assert!(verdict(
        "stepwise-soundness-corpus",
        ok,
        &format!(
            "{} terms x 2 backends, distinct={}, type-failures={}, \
             fix-stability skips on {:.1}% of terms (cap {:.0}%)",
            terms.len(),
            distinct,
            type_failures,
            100.0 * worst_incon,
            100.0 * INCONCLUSIVE_CAP
        ),
    ));
}

#[test]
fn substitution_clauses_hold_at_scale() {
    let spec = obs();
    let mut ok = true;
    let mut detail = String::new();
    let runs = [
        substitution_check(&StrictBackend, &spec, 3, SUBST_INSTANCES).expect("strict run"),
        substitution_check(&CohBackend, &spec, 5, SUBST_INSTANCES).expect("coherence run"),
    ];
    for (reports, backend) in runs.iter().zip(["strict", "coherence"]) {
        for r in reports {
            ok &= r.conclusive == SUBST_INSTANCES && r.failures.is_empty();
            detail.push_str(&format!(
                "{} clause {}: {} conclusive, {} failures; ",
                backend,
                r.clause,
                r.conclusive,
                r.failures.len()
            ));
        }
    }
    assert!(verdict("substitution-clauses", ok, detail.trim_end_matches("; ")));
}

#[test]
fn law_suite_passes_and_mutants_are_caught() {
    let spec = obs();
    let mut ok = true;
    let mut detail = String::new();
    for reports in [
        law_suite(&StrictBackend, &spec).expect("strict laws"),
        law_suite(&CohBackend, &spec).expect("coherence laws"),
    ] {
        let passed = reports.iter().filter(|r| r.passed()).count();
        ok &= passed == reports.len();
        let lif = reports
            .iter()
            .find(|r| r.law == "lif-selects-branch")
            .expect("conditional law present");
        let fix = reports
            .iter()
            .find(|r| r.law == "fix-unfolds-once")
            .expect("fixed-point law present");
        ok &= lif.samples >= 10 && fix.samples >= 10;
        detail.push_str(&format!(
            "{}: {}/{} laws (lif samples {}, fix samples {}); ",
            reports[0].backend,
            passed,
            reports.len(),
            lif.samples,
            fix.samples
        ));
    }
    for mutation in [
        Mutation::PredIdentity,
        Mutation::CopyRightZero,
        Mutation::LifSwapped,
    ] {
        let b = Mutant {
            inner: StrictBackend,
            mutation,
        };
        let reports = law_suite(&b, &spec).expect("mutant laws");
        let failed: Vec<_> = reports
            .iter()
            .filter(|r| {
                matches!(&r.verdict, LawVerdict::Fail { counterexample } if !counterexample.is_empty())
            })
            .collect();
        ok &= !failed.is_empty();
        if mutation == Mutation::CopyRightZero {
            ok &= failed.iter().any(|r| r.law == "ground-copy-commutative");
        }
        detail.push_str(&format!(
            "{} fails {} laws (first: {}); ",
            b.name(),
            failed.len(),
            failed
                .first()
                .map(|r| r.law.as_str())
                .unwrap_or("none")
        ));
    }
    assert!(verdict(
        "law-suite-and-mutants",
        ok,
        detail.trim_end_matches("; ")
    ));
}

#[test]
fn type_preservation_and_join_probe() {
    let terms = corpus(CORPUS_TERMS, 0, Mode::Core);
    let mut ok = terms.len() == CORPUS_TERMS;
    let mut preserved = 0usize;
    for t in &terms {
        let (ty0, _) = infer(&Basis::empty(), t).expect("corpus term types");
        let (steps, _) =
            linlam_core::reduce::trace_bounded(t, CORPUS_STEP_FUEL, 2000, Mode::Core);
        if steps
            .iter()
            .all(|s| matches!(infer(&Basis::empty(), &s.result), Ok((ty, _)) if ty == ty0))
        {
            preserved += 1;
        }
    }
    ok &= preserved == terms.len();

    let mut probed = 0usize;
    let mut joined = 0usize;
    let mut disproved = 0usize;
    let mut seed = 9_000_000u64;
    while probed < JOIN_TERMS && seed < 9_040_000 {
        if let Ok(t) = gen_closed(&Ty::Iota, CORPUS_TERM_SIZE, seed, Mode::Core) {
            if find_redexes(&t).len() >= 2 {
                let rep = join_probe(&t, JOIN_FUEL, seed, Mode::Core)
                    .expect("term has two redexes");
                probed += 1;
                if rep.joined {
                    joined += 1;
                } else if !rep.exhausted {
                    disproved += 1;
                }
            }
        }
        seed += 1;
    }
    ok &= probed == JOIN_TERMS;
    ok &= joined as f64 >= JOIN_RATE_FLOOR * probed as f64;
    ok &= disproved == 0;
    assert!(verdict(
        "preservation-and-joins",
        ok,
        &format!(
            "type preserved on {}/{} traces; joins {}/{} (floor {:.0}%), disproved={}",
            preserved,
            terms.len(),
            joined,
            probed,
            100.0 * JOIN_RATE_FLOOR,
            disproved
        ),
    ));
}

#[test]
fn equal_denotations_without_a_common_reduct() {
    let spec = obs();
    let strict = incompleteness_witness(&StrictBackend, &spec, WITNESS_FUEL)
        .expect("strict witness");
    let coh = incompleteness_witness(&CohBackend, &spec, WITNESS_FUEL).expect("coherence witness");
    let mut ok = true;
    for rep in [&strict, &coh] {
        ok &= matches!(rep.verdict, Eq3::Equal);
        ok &= !rep.joinable && rep.search_saturated;
    }
    ok &= matches!(strict.weakened_verdict, Eq3::Distinct { .. });
    assert!(verdict(
        "incompleteness-witness",
        ok,
        &format!(
            "both backends equal, no common reduct within fuel {} (search saturated); \
             weakened pair: {}",
            WITNESS_FUEL, strict.weakened_verdict
        ),
    ));
}

#[test]
fn coherence_web_probes() {
    let b = CohBackend;
    let fuel = Fuel { fix_iters: 16 };
    let mut ok = true;

    let got = trace_probe(&b.promote_n(), 5, fuel).expect("promotion trace");
    let mut want = BTreeSet::new();
    for n in 0..=5u64 {
        want.insert((CAtom::Nat(n), clq(vec![CAtom::Nat(n)])));
        want.insert((CAtom::Nat(n), clq(vec![])));
    }
    ok &= got == want;

    let out = b
        .zero()
        .apply(&BTreeSet::from([CAtom::Star]), fuel)
        .expect("zero applies");
    ok &= out == BTreeSet::from([CAtom::Nat(0)]);

    let samples = b.sample_inputs(&b.nat_obj(), &obs());
    let max_tokens = samples.iter().map(|v| v.len()).max().unwrap_or(0);
    ok &= max_tokens <= 1;

    assert!(verdict(
        "coherence-web-probes",
        ok,
        &format!(
            "promotion trace has {} pairs (expected {}), zero(*) = {{0}}, \
             largest ground sample clique {}",
            got.len(),
            want.len(),
            max_tokens
        ),
    ));
}

#[test]
fn recursive_addition_agrees_with_arithmetic() {
    let start = Instant::now();
    let spec = obs();
    let add = add_term();
    let mut ok = true;
    for m in 0..=ADD_BOUND {
        for n in 0..=ADD_BOUND {
            let t = Term::app(Term::app(add.clone(), numeral(m)), numeral(n));
            let norm = normalize(&t, Strategy::Leftmost, 500);
            ok &= !norm.exhausted && norm.term == numeral(m + n);
            ok &= matches!(
                denote_ground(&StrictBackend, &t, &spec, Mode::Core),
                Ok(GroundResult::Num(k)) if k == m + n
            );
            ok &= matches!(
                denote_ground(&CohBackend, &t, &spec, Mode::Core),
                Ok(GroundResult::Num(k)) if k == m + n
            );
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < ADD_BUDGET_SECS;
    assert!(verdict(
        "recursive-addition",
        ok,
        &format!(
            "normal forms and both denotations match m+n for m,n <= {} in {:.2}s",
            ADD_BOUND, secs
        ),
    ));
}

#[test]
fn extension_rewrites_fire_and_stay_sound() {
    let spec = obs();
    let mut ok = true;

    // Pinned single-step examples with exact results.
    let pinned: [(&str, ExtRuleTag, &str); 3] = [
        (
            "discard (succ 2) in 7",
            ExtRuleTag::DiscardSucc,
            "discard 2 in 7",
        ),
        (
            "copy 0 as x,y in lif x then y else 1",
            ExtRuleTag::CopyZero,
            "lif 0 then 0 else 1",
        ),
        ("derelict (promote!(3))", ExtRuleTag::DerelictPromote, "3"),
    ];
    for (src, tag, want) in pinned {
        let t = parse_term(src).expect("example parses");
        let want = parse_term(want).expect("result parses");
        let sites = find_redexes_in_mode(&t, Mode::Extended);
        let fired = sites
            .iter()
            .find(|s| s.tag == RuleTag::Ext(tag))
            .and_then(|s| step_at(&t, s, Mode::Extended).ok());
        ok &= fired == Some(want);
    }

    // Every extension rule fires somewhere.
    let firing: [(&str, ExtRuleTag); 5] = [
        ("discard 0 in 1", ExtRuleTag::DiscardZero),
        (
            "copy (succ 1) as x,y in lif x then y else 0",
            ExtRuleTag::CopySucc,
        ),
        (
            "discard (promote!(2)) in 5",
            ExtRuleTag::PromoteComonoidDiscard,
        ),
        (
            "copy (promote!(2)) as x,y in 0",
            ExtRuleTag::PromoteComonoidCopy,
        ),
        (
            "promote (promote!(1)) as $z in derelict (promote!(derelict $z))",
            ExtRuleTag::PromotePromote,
        ),
    ];
    for (src, tag) in firing {
        let t = parse_term(src).expect("example parses");
        let sites = find_redexes_in_mode(&t, Mode::Extended);
        let fired = sites
            .iter()
            .find(|s| s.tag == RuleTag::Ext(tag))
            .map(|s| step_at(&t, s, Mode::Extended).is_ok());
        ok &= fired == Some(true);
    }

    // Generated terms that exercise the extension stay sound.
    let mut count = 0usize;
    let mut bad = 0usize;
    let mut seed = 50_000u64;
    while count < EXT_CORPUS_TERMS && seed < 90_000 {
        if let Ok(t) = gen_closed(&Ty::Iota, CORPUS_TERM_SIZE, seed, Mode::Extended) {
            if t.uses_extension() {
                for rep in [
                    soundness_check(&StrictBackend, &t, CORPUS_STEP_FUEL, &spec, Mode::Extended, true)
                        .expect("strict run"),
                    soundness_check(&CohBackend, &t, CORPUS_STEP_FUEL, &spec, Mode::Extended, true)
                        .expect("coherence run"),
                ] {
                    if rep.distinct.is_some() || !rep.type_preserved {
                        bad += 1;
                    }
                }
                count += 1;
            }
        }
        seed += 1;
    }
    ok &= count == EXT_CORPUS_TERMS && bad == 0;
    assert!(verdict(
        "extension-rewrites",
        ok,
        &format!(
            "8 rewrite rules fire (3 with pinned results); {} extension terms \
             sound on both backends, violations={}",
            count, bad
        ),
    ));
}
