//! Operational semantics: redex discovery, single contextual steps,
//! reduction strategies, bounded normalization, and joinability probes.
//!
//! Beta at higher kind is call-by-name (any argument), while beta at ground
//! kind fires only once the argument is a literal numeral; `pred 0` and
//! ill-kinded applications are stuck normal forms. The extension rewrites
//! (discard/copy/promote/derelict) fire only in extended mode so the core
//! corpus stays exactly the base calculus.

use crate::parser::pretty;
use crate::syntax::{
    numeral, numeral_of, subst_ground, subst_higher, subst_stable, subst_var, Term, VarKind,
};
use crate::Mode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{HashSet, VecDeque};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtRuleTag {
    DiscardSucc,
    DiscardZero,
    CopySucc,
    CopyZero,
    PromoteComonoidDiscard,
    PromoteComonoidCopy,
    DerelictPromote,
    PromotePromote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleTag {
    BetaHigher,
    BetaIota,
    Y,
    DeltaPredSucc,
    DeltaIfZero,
    DeltaIfSucc,
    Ext(ExtRuleTag),
}

impl fmt::Display for ExtRuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExtRuleTag::DiscardSucc => "discard-succ",
            ExtRuleTag::DiscardZero => "discard-zero",
            ExtRuleTag::CopySucc => "copy-succ",
            ExtRuleTag::CopyZero => "copy-zero",
            ExtRuleTag::PromoteComonoidDiscard => "promote-comonoid-discard",
            ExtRuleTag::PromoteComonoidCopy => "promote-comonoid-copy",
            ExtRuleTag::DerelictPromote => "derelict-promote",
            ExtRuleTag::PromotePromote => "promote-promote",
        };
        f.write_str(s)
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleTag::BetaHigher => f.write_str("beta-higher"),
            RuleTag::BetaIota => f.write_str("beta-iota"),
            RuleTag::Y => f.write_str("y"),
            RuleTag::DeltaPredSucc => f.write_str("delta-pred-succ"),
            RuleTag::DeltaIfZero => f.write_str("delta-if-zero"),
            RuleTag::DeltaIfSucc => f.write_str("delta-if-succ"),
            RuleTag::Ext(e) => e.fmt(f),
        }
    }
}

/// Child indices from the root: 0 = function/condition/scrutinee/body-of-
/// binder, 1 = argument/then/continuation, 2 = else.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RedexSite {
    pub path: Vec<usize>,
    pub tag: RuleTag,
}

pub fn path_display(path: &[usize]) -> String {
    if path.is_empty() {
        "/".to_string()
    } else {
        path.iter().map(|i| format!("/{}", i)).collect()
    }
}

impl fmt::Display for RedexSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", path_display(&self.path), self.tag)
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error("no {tag} redex at {}", path_display(path))]
    InvalidSite { path: Vec<usize>, tag: RuleTag },
    #[error("join probe needs at least two redexes, found {found}")]
    NotEnoughRedexes { found: usize },
}

fn children(t: &Term) -> Vec<&Term> {
    match t {
        Term::Zero | Term::Succ | Term::Pred | Term::Var { .. } => Vec::new(),
        Term::Lam { body, .. } | Term::Mu { body, .. } => vec![body],
        Term::App(f, a) => vec![f, a],
        Term::LIf { cond, then_br, else_br } => vec![cond, then_br, else_br],
        Term::Promote(a) | Term::Derelict(a) => vec![a],
        Term::Discard { scrutinee, body }
        | Term::Copy { scrutinee, body, .. }
        | Term::PromoteIn { scrutinee, body, .. } => vec![scrutinee, body],
    }
}

fn replace_child(t: &Term, i: usize, new: Term) -> Term {
    match (t, i) {
        (Term::Lam { name, ann, .. }, 0) => Term::lam(name, ann.clone(), new),
        (Term::Mu { name, ann, .. }, 0) => Term::mu(name, ann.clone(), new),
        (Term::App(_, a), 0) => Term::app(new, (**a).clone()),
        (Term::App(f, _), 1) => Term::app((**f).clone(), new),
        (Term::LIf { then_br, else_br, .. }, 0) => {
            Term::lif(new, (**then_br).clone(), (**else_br).clone())
        }
        (Term::LIf { cond, else_br, .. }, 1) => {
            Term::lif((**cond).clone(), new, (**else_br).clone())
        }
        (Term::LIf { cond, then_br, .. }, 2) => {
            Term::lif((**cond).clone(), (**then_br).clone(), new)
        }
        (Term::Promote(_), 0) => Term::Promote(Box::new(new)),
        (Term::Derelict(_), 0) => Term::Derelict(Box::new(new)),
        (Term::Discard { body, .. }, 0) => {
            Term::Discard { scrutinee: Box::new(new), body: body.clone() }
        }
        (Term::Discard { scrutinee, .. }, 1) => {
            Term::Discard { scrutinee: scrutinee.clone(), body: Box::new(new) }
        }
        (Term::Copy { left, right, body, .. }, 0) => Term::Copy {
            scrutinee: Box::new(new),
            left: left.clone(),
            right: right.clone(),
            body: body.clone(),
        },
        (Term::Copy { scrutinee, left, right, .. }, 1) => Term::Copy {
            scrutinee: scrutinee.clone(),
            left: left.clone(),
            right: right.clone(),
            body: Box::new(new),
        },
        (Term::PromoteIn { name, body, .. }, 0) => Term::PromoteIn {
            scrutinee: Box::new(new),
            name: name.clone(),
            body: body.clone(),
        },
        (Term::PromoteIn { scrutinee, name, .. }, 1) => Term::PromoteIn {
            scrutinee: scrutinee.clone(),
            name: name.clone(),
            body: Box::new(new),
        },
        _ => unreachable!("child index out of range"),
    }
}

fn subterm_at<'a>(t: &'a Term, path: &[usize]) -> Option<&'a Term> {
    let mut cur = t;
    for &i in path {
        cur = *children(cur).get(i)?;
    }
    Some(cur)
}

fn rebuild_at(t: &Term, path: &[usize], new: Term) -> Term {
    match path.split_first() {
        None => new,
        Some((&i, rest)) => {
            let child = children(t)[i];
            replace_child(t, i, rebuild_at(child, rest, new))
        }
    }
}

/// True when `body` contains `promote!(derelict $z)` with `z` referring to
/// the enclosing promote-binder (occurrences under a shadowing rebind of the
/// same stable name do not count).
fn has_collapsible_promotion(t: &Term, z: &str) -> bool {
    if let Term::Promote(inner) = t {
        if let Term::Derelict(v) = &**inner {
            if **v == Term::var_s(z) {
                return true;
            }
        }
    }
    let shadows = match t {
        Term::Mu { name, .. } | Term::PromoteIn { name, .. } => name == z,
        _ => false,
    };
    match t {
        Term::Mu { body, .. } | Term::PromoteIn { body, .. } if shadows => {
            // Only the non-binding children stay in scope.
            if let Term::PromoteIn { scrutinee, .. } = t {
                has_collapsible_promotion(scrutinee, z)
            } else {
                let _ = body;
                false
            }
        }
        _ => children(t).iter().any(|c| has_collapsible_promotion(c, z)),
    }
}

/// Replaces every in-scope `promote!(derelict $z)` by `$z`.
fn collapse_promotions(t: &Term, z: &str) -> Term {
    if let Term::Promote(inner) = t {
        if let Term::Derelict(v) = &**inner {
            if **v == Term::var_s(z) {
                return Term::var_s(z);
            }
        }
    }
    match t {
        Term::Mu { name, .. } if name == z => t.clone(),
        Term::PromoteIn { scrutinee, name, body } if name == z => Term::PromoteIn {
            scrutinee: Box::new(collapse_promotions(scrutinee, z)),
            name: name.clone(),
            body: body.clone(),
        },
        _ => {
            let mut out = t.clone();
            for (i, c) in children(t).iter().enumerate() {
                out = replace_child(&out, i, collapse_promotions(c, z));
            }
            out
        }
    }
}

fn ext_redex_at(t: &Term) -> Option<ExtRuleTag> {
    match t {
        Term::Discard { scrutinee, .. } => match &**scrutinee {
            Term::App(f, _) if **f == Term::Succ => Some(ExtRuleTag::DiscardSucc),
            Term::Zero => Some(ExtRuleTag::DiscardZero),
            Term::Promote(_) => Some(ExtRuleTag::PromoteComonoidDiscard),
            _ => None,
        },
        Term::Copy { scrutinee, .. } => match &**scrutinee {
            Term::App(f, _) if **f == Term::Succ => Some(ExtRuleTag::CopySucc),
            Term::Zero => Some(ExtRuleTag::CopyZero),
            Term::Promote(_) => Some(ExtRuleTag::PromoteComonoidCopy),
            _ => None,
        },
        Term::Derelict(inner) => match &**inner {
            Term::Promote(_) => Some(ExtRuleTag::DerelictPromote),
            _ => None,
        },
        Term::PromoteIn { scrutinee, name, body } => match &**scrutinee {
            Term::Promote(_) if has_collapsible_promotion(body, name) => {
                Some(ExtRuleTag::PromotePromote)
            }
            _ => None,
        },
        _ => None,
    }
}

fn redex_at(t: &Term, mode: Mode) -> Option<RuleTag> {
    match t {
        Term::App(f, a) => match &**f {
            Term::Lam { ann, .. } => match ann.binder_kind() {
                Some(VarKind::Higher) => Some(RuleTag::BetaHigher),
                Some(VarKind::Ground) if numeral_of(a).is_some() => Some(RuleTag::BetaIota),
                _ => None,
            },
            Term::Pred => match numeral_of(a) {
                Some(k) if k >= 1 => Some(RuleTag::DeltaPredSucc),
                _ => None,
            },
            _ => None,
        },
        Term::LIf { cond, .. } => numeral_of(cond).map(|k| {
            if k == 0 {
                RuleTag::DeltaIfZero
            } else {
                RuleTag::DeltaIfSucc
            }
        }),
        Term::Mu { .. } => Some(RuleTag::Y),
        _ if mode == Mode::Extended => ext_redex_at(t).map(RuleTag::Ext),
        _ => None,
    }
}

/// Contracts a redex already verified to sit at the root of `t`.
fn contract(t: &Term, tag: RuleTag) -> Term {
    match (tag, t) {
        (RuleTag::BetaHigher, Term::App(f, a)) => {
            let Term::Lam { name, body, .. } = &**f else { unreachable!() };
            subst_higher(body, a, name)
        }
        (RuleTag::BetaIota, Term::App(f, a)) => {
            let Term::Lam { name, body, .. } = &**f else { unreachable!() };
            subst_ground(body, numeral_of(a).expect("checked"), name)
        }
        (RuleTag::DeltaPredSucc, Term::App(_, a)) => {
            numeral(numeral_of(a).expect("checked") - 1)
        }
        (RuleTag::DeltaIfZero, Term::LIf { then_br, .. }) => (**then_br).clone(),
        (RuleTag::DeltaIfSucc, Term::LIf { else_br, .. }) => (**else_br).clone(),
        (RuleTag::Y, Term::Mu { name, body, .. }) => subst_stable(body, t, name),
        (RuleTag::Ext(ext), t) => contract_ext(t, ext),
        _ => unreachable!("tag does not match term shape"),
    }
}

fn contract_ext(t: &Term, tag: ExtRuleTag) -> Term {
    match (tag, t) {
        (ExtRuleTag::DiscardSucc, Term::Discard { scrutinee, body }) => {
            let Term::App(_, m) = &**scrutinee else { unreachable!() };
            Term::Discard { scrutinee: m.clone(), body: body.clone() }
        }
        (ExtRuleTag::DiscardZero, Term::Discard { body, .. }) => (**body).clone(),
        (ExtRuleTag::CopySucc, Term::Copy { scrutinee, left, right, body }) => {
            let Term::App(_, m) = &**scrutinee else { unreachable!() };
            let pushed = subst_var(
                &subst_var(
                    body,
                    left,
                    VarKind::Ground,
                    &Term::succ_of(Term::var_g(left)),
                ),
                right,
                VarKind::Ground,
                &Term::succ_of(Term::var_g(right)),
            );
            Term::Copy {
                scrutinee: m.clone(),
                left: left.clone(),
                right: right.clone(),
                body: Box::new(pushed),
            }
        }
        (ExtRuleTag::CopyZero, Term::Copy { left, right, body, .. }) => {
            subst_ground(&subst_ground(body, 0, left), 0, right)
        }
        (ExtRuleTag::PromoteComonoidDiscard, Term::Discard { scrutinee, body }) => {
            let Term::Promote(m) = &**scrutinee else { unreachable!() };
            Term::Discard { scrutinee: m.clone(), body: body.clone() }
        }
        (ExtRuleTag::PromoteComonoidCopy, Term::Copy { scrutinee, left, right, body }) => {
            let Term::Promote(m) = &**scrutinee else { unreachable!() };
            let pushed = subst_var(
                &subst_var(
                    body,
                    left,
                    VarKind::Ground,
                    &Term::Promote(Box::new(Term::var_g(left))),
                ),
                right,
                VarKind::Ground,
                &Term::Promote(Box::new(Term::var_g(right))),
            );
            Term::Copy {
                scrutinee: m.clone(),
                left: left.clone(),
                right: right.clone(),
                body: Box::new(pushed),
            }
        }
        (ExtRuleTag::DerelictPromote, Term::Derelict(inner)) => {
            let Term::Promote(m) = &**inner else { unreachable!() };
            (**m).clone()
        }
        (ExtRuleTag::PromotePromote, Term::PromoteIn { scrutinee, name, body }) => {
            Term::PromoteIn {
                scrutinee: scrutinee.clone(),
                name: name.clone(),
                body: Box::new(collapse_promotions(body, name)),
            }
        }
        _ => unreachable!("tag does not match term shape"),
    }
}

/// Complete redex list, leftmost-outermost first (pre-order).
pub fn find_redexes(t: &Term) -> Vec<RedexSite> {
    find_redexes_in_mode(t, Mode::Core)
}

pub fn find_redexes_in_mode(t: &Term, mode: Mode) -> Vec<RedexSite> {
    fn walk(t: &Term, mode: Mode, path: &mut Vec<usize>, out: &mut Vec<RedexSite>) {
        if let Some(tag) = redex_at(t, mode) {
            out.push(RedexSite { path: path.clone(), tag });
        }
        for (i, c) in children(t).into_iter().enumerate() {
            path.push(i);
            walk(c, mode, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(t, mode, &mut Vec::new(), &mut out);
    out
}

/// True when `path` passes through a lambda or mu body. The leftmost
/// strategy deprioritizes such sites: unfolding a recursion under its own
/// binder forever is a divergence trap, while the same redex becomes safe
/// once the surrounding beta has fired.
fn under_binder(t: &Term, path: &[usize]) -> bool {
    let mut cur = t;
    for &i in path {
        if matches!(cur, Term::Lam { .. } | Term::Mu { .. }) {
            return true;
        }
        cur = children(cur)[i];
    }
    false
}

fn pick_leftmost<'a>(t: &Term, sites: &'a [RedexSite]) -> &'a RedexSite {
    sites
        .iter()
        .find(|s| !under_binder(t, &s.path))
        .unwrap_or(&sites[0])
}

/// Fires exactly the rule named by `site`.
pub fn step_at(t: &Term, site: &RedexSite, mode: Mode) -> Result<Term, ReduceError> {
    let invalid = || ReduceError::InvalidSite { path: site.path.clone(), tag: site.tag };
    let sub = subterm_at(t, &site.path).ok_or_else(invalid)?;
    if redex_at(sub, mode) != Some(site.tag) {
        return Err(invalid());
    }
    Ok(rebuild_at(t, &site.path, contract(sub, site.tag)))
}

/// Extension entry point: fires one of the eight listed rewrites.
pub fn step_ext(t: &Term, site: &RedexSite) -> Result<Term, ReduceError> {
    step_at(t, site, Mode::Extended)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub term: Term,
    pub steps: u32,
    pub exhausted: bool,
}

pub fn normalize(t: &Term, strategy: Strategy, fuel: u32) -> Normalized {
    normalize_in_mode(t, strategy, fuel, Mode::Core)
}

pub fn normalize_in_mode(t: &Term, strategy: Strategy, fuel: u32, mode: Mode) -> Normalized {
    let mut rng = match strategy {
        Strategy::Leftmost => None,
        Strategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut cur = t.clone();
    let mut steps = 0;
    while steps < fuel {
        let sites = find_redexes_in_mode(&cur, mode);
        if sites.is_empty() {
            return Normalized { term: cur, steps, exhausted: false };
        }
        let site = match rng.as_mut() {
            None => pick_leftmost(&cur, &sites),
            Some(rng) => &sites[rng.gen_range(0..sites.len())],
        };
        cur = step_at(&cur, site, mode).expect("site came from find_redexes");
        steps += 1;
    }
    let exhausted = !find_redexes_in_mode(&cur, mode).is_empty();
    Normalized { term: cur, steps, exhausted }
}

/// One reduction step on the trace: where, which rule, and the whole
/// resulting term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub path: Vec<usize>,
    pub tag: RuleTag,
    pub result: Term,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  {}  {}", path_display(&self.path), self.tag, pretty(&self.result))
    }
}

/// Leftmost-outermost trace up to `fuel` steps.
pub fn trace(t: &Term, fuel: u32, mode: Mode) -> (Vec<TraceStep>, Normalized) {
    trace_bounded(t, fuel, usize::MAX, mode)
}

/// Like `trace`, but also stops (reporting exhaustion) once the running term
/// outgrows `size_cap` nodes. Terms whose recursion binder occurs several
/// times can double in size per unfolding, so unbounded tracing of a
/// divergent term may exhaust memory long before it exhausts fuel.
pub fn trace_bounded(
    t: &Term,
    fuel: u32,
    size_cap: usize,
    mode: Mode,
) -> (Vec<TraceStep>, Normalized) {
    let mut cur = t.clone();
    let mut steps = Vec::new();
    while (steps.len() as u32) < fuel {
        if cur.size() > size_cap {
            let n = steps.len() as u32;
            return (steps, Normalized { term: cur, steps: n, exhausted: true });
        }
        let sites = find_redexes_in_mode(&cur, mode);
        if sites.is_empty() {
            let n = steps.len() as u32;
            return (steps, Normalized { term: cur, steps: n, exhausted: false });
        }
        let site = pick_leftmost(&cur, &sites).clone();
        cur = step_at(&cur, &site, mode).expect("site came from find_redexes");
        steps.push(TraceStep { path: site.path.clone(), tag: site.tag, result: cur.clone() });
    }
    let exhausted = !find_redexes_in_mode(&cur, mode).is_empty();
    let n = steps.len() as u32;
    (steps, Normalized { term: cur, steps: n, exhausted })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinReport {
    pub joined: bool,
    pub witness: Option<Term>,
    pub exhausted: bool,
    pub expansions: u32,
}

/// Picks two distinct one-step reducts of `t` and searches for a common
/// reduct breadth-first, spending at most `fuel` node expansions per side.
pub fn join_probe(t: &Term, fuel: u32, seed: u64, mode: Mode) -> Result<JoinReport, ReduceError> {
    let sites = find_redexes_in_mode(t, mode);
    if sites.len() < 2 {
        return Err(ReduceError::NotEnoughRedexes { found: sites.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let i = rng.gen_range(0..sites.len());
    let j = {
        let j = rng.gen_range(0..sites.len() - 1);
        if j >= i {
            j + 1
        } else {
            j
        }
    };
    let a = step_at(t, &sites[i], mode).expect("site came from find_redexes");
    let b = step_at(t, &sites[j], mode).expect("site came from find_redexes");

    let mut seen: [HashSet<Term>; 2] = [HashSet::new(), HashSet::new()];
    let mut queue: [VecDeque<Term>; 2] = [VecDeque::new(), VecDeque::new()];
    seen[0].insert(a.clone());
    queue[0].push_back(a.clone());
    seen[1].insert(b.clone());
    queue[1].push_back(b.clone());
    if seen[1].contains(&a) {
        return Ok(JoinReport { joined: true, witness: Some(a), exhausted: false, expansions: 0 });
    }

    let mut expansions = 0;
    let mut budget = [fuel, fuel];
    loop {
        let mut progressed = false;
        for side in 0..2 {
            if budget[side] == 0 {
                continue;
            }
            let Some(term) = queue[side].pop_front() else {
                continue;
            };
            budget[side] -= 1;
            expansions += 1;
            progressed = true;
            for site in find_redexes_in_mode(&term, mode) {
                let next = step_at(&term, &site, mode).expect("site came from find_redexes");
                if seen[1 - side].contains(&next) {
                    return Ok(JoinReport {
                        joined: true,
                        witness: Some(next),
                        exhausted: false,
                        expansions,
                    });
                }
                if seen[side].insert(next.clone()) {
                    queue[side].push_back(next);
                }
            }
        }
        if !progressed {
            break;
        }
    }
    let exhausted = !(queue[0].is_empty() && queue[1].is_empty());
    Ok(JoinReport { joined: false, witness: None, exhausted, expansions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;
    use crate::syntax::Basis;
    use crate::typecheck::infer;

    fn p(src: &str) -> Term {
        parse_term(src).unwrap()
    }

    #[test]
    fn redexes_are_listed_outermost_first() {
        let sites = find_redexes(&p("pred (succ 0)"));
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0], RedexSite { path: vec![], tag: RuleTag::DeltaPredSucc });

        // Beta at ground kind waits for a numeral argument.
        let sites = find_redexes(&p("(\\x:iota.x) (pred 1)"));
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0], RedexSite { path: vec![1], tag: RuleTag::DeltaPredSucc });

        let sites = find_redexes(&p("mu $f:iota.$f"));
        assert_eq!(sites, vec![RedexSite { path: vec![], tag: RuleTag::Y }]);
    }

    #[test]
    fn beta_higher_is_call_by_name() {
        let t = p("(\\f:iota-o iota. f 3) ((\\g:iota-o iota. g) succ)");
        let sites = find_redexes(&t);
        assert_eq!(sites[0].path, Vec::<usize>::new());
        assert_eq!(sites[0].tag, RuleTag::BetaHigher);
    }

    #[test]
    fn pred_zero_is_stuck() {
        assert!(find_redexes(&p("pred 0")).is_empty());
        let n = normalize(&p("pred 0"), Strategy::Leftmost, 10);
        assert_eq!(n.term, p("pred 0"));
        assert!(!n.exhausted);
    }

    #[test]
    fn step_at_fires_the_named_rule() {
        let root = |tag| RedexSite { path: vec![], tag };
        assert_eq!(
            step_at(&p("lif 0 then 1 else 2"), &root(RuleTag::DeltaIfZero), Mode::Core).unwrap(),
            p("1")
        );
        assert_eq!(
            step_at(&p("lif 3 then 1 else 2"), &root(RuleTag::DeltaIfSucc), Mode::Core).unwrap(),
            p("2")
        );
        assert_eq!(
            step_at(&p("(\\f:iota-o iota. f 0) succ"), &root(RuleTag::BetaHigher), Mode::Core)
                .unwrap(),
            p("succ 0")
        );
        let err =
            step_at(&p("lif 0 then 1 else 2"), &root(RuleTag::DeltaIfSucc), Mode::Core)
                .unwrap_err();
        assert!(matches!(err, ReduceError::InvalidSite { .. }));
    }

    #[test]
    fn y_unfolds_with_the_whole_mu_term() {
        let t = p("mu $f:iota -o iota.\\x:iota. $f x");
        let stepped = step_at(
            &t,
            &RedexSite { path: vec![], tag: RuleTag::Y },
            Mode::Core,
        )
        .unwrap();
        assert_eq!(stepped, p("\\x:iota. (mu $f:iota -o iota.\\x:iota. $f x) x"));
    }

    #[test]
    fn identity_applied_to_pred_one_normalizes_in_two_steps() {
        let n = normalize(&p("(\\x:iota.x) (pred 1)"), Strategy::Leftmost, 10);
        assert_eq!(n.term, Term::Zero);
        assert_eq!(n.steps, 2);
        assert!(!n.exhausted);
    }

    #[test]
    fn omega_exhausts_fuel() {
        let n = normalize(&p("mu $f:iota.$f"), Strategy::Leftmost, 50);
        assert!(n.exhausted);
        assert_eq!(n.steps, 50);
        assert_eq!(n.term, p("mu $f:iota.$f"));
    }

    const ADD: &str =
        "mu $a:iota-o iota-o iota.\\x:iota.\\y:iota. lif x then y else succ ($a (pred x) y)";

    #[test]
    fn addition_program_computes() {
        let t = Term::app(Term::app(p(ADD), numeral(2)), numeral(3));
        let n = normalize(&t, Strategy::Leftmost, 200);
        assert!(!n.exhausted);
        assert_eq!(numeral_of(&n.term), Some(5));
    }

    #[test]
    fn subject_reduction_along_the_addition_trace() {
        let t = Term::app(Term::app(p(ADD), numeral(2)), numeral(3));
        let (ty0, _) = infer(&Basis::empty(), &t).unwrap();
        let (steps, n) = trace(&t, 200, Mode::Core);
        assert!(!n.exhausted);
        for s in &steps {
            let (ty, _) = infer(&Basis::empty(), &s.result).unwrap();
            assert_eq!(ty, ty0, "type changed at step {}", s);
        }
    }

    #[test]
    fn random_strategy_reaches_the_same_normal_form() {
        // mu-free, so every reduction order terminates.
        let t = p("(\\f:iota-o iota. f (pred (succ 0))) (\\z:iota. lif z then 1 else pred (succ 2))");
        let left = normalize(&t, Strategy::Leftmost, 500);
        assert!(!left.exhausted);
        for seed in 0..5 {
            let r = normalize(&t, Strategy::Random(seed), 500);
            assert!(!r.exhausted);
            assert_eq!(r.term, left.term, "seed {}", seed);
        }
    }

    #[test]
    fn trace_lines_carry_path_tag_and_term() {
        let (steps, n) = trace(&p("(\\x:iota.x) (pred 1)"), 10, Mode::Core);
        assert_eq!(steps.len(), 2);
        assert_eq!(format!("{}", steps[0]), "/1  delta-pred-succ  (\\x:iota.x) 0");
        assert_eq!(format!("{}", steps[1]), "/  beta-iota  0");
        assert_eq!(n.term, Term::Zero);
    }

    #[test]
    fn join_probe_rejoins_a_two_redex_term() {
        let t = p("lif pred (succ 0) then pred (succ 1) else 2");
        let report = join_probe(&t, 100, 0, Mode::Core).unwrap();
        assert!(report.joined, "{:?}", report);
        let err = join_probe(&p("pred (succ 0)"), 100, 0, Mode::Core).unwrap_err();
        assert_eq!(err, ReduceError::NotEnoughRedexes { found: 1 });
    }

    #[test]
    fn extension_rewrites_are_gated_by_mode() {
        let t = p("discard (succ 2) in 7");
        assert!(find_redexes(&t).is_empty());
        let sites = find_redexes_in_mode(&t, Mode::Extended);
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].tag, RuleTag::Ext(ExtRuleTag::DiscardSucc));
    }

    #[test]
    fn discard_rewrites() {
        let t = p("discard (succ 2) in 7");
        let site = RedexSite { path: vec![], tag: RuleTag::Ext(ExtRuleTag::DiscardSucc) };
        assert_eq!(step_ext(&t, &site).unwrap(), p("discard 2 in 7"));

        let n = normalize_in_mode(&t, Strategy::Leftmost, 20, Mode::Extended);
        assert_eq!(n.term, numeral(7));
        assert_eq!(n.steps, 4); // peel succ three times, then discard zero
    }

    #[test]
    fn copy_rewrites() {
        let t = p("copy 0 as x, y in lif x then y else 1");
        let site = RedexSite { path: vec![], tag: RuleTag::Ext(ExtRuleTag::CopyZero) };
        assert_eq!(step_ext(&t, &site).unwrap(), p("lif 0 then 0 else 1"));

        let t = p("copy (succ 1) as x, y in lif x then y else 0");
        let site = RedexSite { path: vec![], tag: RuleTag::Ext(ExtRuleTag::CopySucc) };
        assert_eq!(
            step_ext(&t, &site).unwrap(),
            p("copy 1 as x, y in lif succ x then succ y else 0")
        );

        // copy n duplicates the numeral.
        let t = p("copy 2 as x, y in lif x then 9 else y");
        let n = normalize_in_mode(&t, Strategy::Leftmost, 20, Mode::Extended);
        assert_eq!(numeral_of(&n.term), Some(2));
    }

    #[test]
    fn promote_comonoid_rewrites() {
        let t = p("discard (promote!(2)) in 5");
        let site =
            RedexSite { path: vec![], tag: RuleTag::Ext(ExtRuleTag::PromoteComonoidDiscard) };
        assert_eq!(step_ext(&t, &site).unwrap(), p("discard 2 in 5"));

        let t = p("copy (promote!(1)) as x, y in x");
        let site = RedexSite { path: vec![], tag: RuleTag::Ext(ExtRuleTag::PromoteComonoidCopy) };
        assert_eq!(step_ext(&t, &site).unwrap(), p("copy 1 as x, y in promote!(x)"));
    }

    #[test]
    fn derelict_promote_cancels() {
        let t = p("derelict (promote!(3))");
        let site = RedexSite { path: vec![], tag: RuleTag::Ext(ExtRuleTag::DerelictPromote) };
        assert_eq!(step_ext(&t, &site).unwrap(), numeral(3));
    }

    #[test]
    fn promote_promote_collapses_coalgebra_expansions() {
        let t = p("promote (promote!(2)) as $z in succ (derelict (promote!(derelict $z)))");
        let sites = find_redexes_in_mode(&t, Mode::Extended);
        assert!(sites
            .iter()
            .any(|s| s.tag == RuleTag::Ext(ExtRuleTag::PromotePromote)), "{:?}", sites);
        let site = RedexSite { path: vec![], tag: RuleTag::Ext(ExtRuleTag::PromotePromote) };
        assert_eq!(
            step_ext(&t, &site).unwrap(),
            p("promote (promote!(2)) as $z in succ (derelict $z)")
        );
        // After collapsing, the coalgebra redex is gone.
        let again = step_ext(&step_ext(&t, &site).unwrap(), &site);
        assert!(again.is_err());
    }

    #[test]
    fn beta_iota_never_fires_on_non_numerals() {
        let t = p("(\\x:iota.x) (mu $f:iota.$f)");
        let sites = find_redexes(&t);
        assert!(sites.iter().all(|s| s.tag == RuleTag::Y), "{:?}", sites);
        let n = normalize(&t, Strategy::Leftmost, 100);
        assert!(n.exhausted);
    }
}
