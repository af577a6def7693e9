//! Abstract syntax: types, variable kinds, terms, and bases.
//!
//! Variables come in three kinds with different structural discipline:
//!
//! | kind   | surface form | bound by        | discipline                          |
//! |--------|--------------|-----------------|-------------------------------------|
//! | Ground | `x`          | `\x:iota.`      | duplicable and discardable          |
//! | Higher | `f`          | `\f:σ-oτ.`      | linear per multiplicative branch    |
//! | Stable | `$F`         | `mu $F:σ.`      | duplicable and discardable under !  |
//!
//! A variable's identity is the pair (name, kind): the stable `$x` and the
//! ground `x` are unrelated. Terms compare and hash up to alpha-equivalence;
//! binder names are display artifacts only.

use std::collections::BTreeSet;
use std::fmt;

/// Object-language types: the ground type of numerals and linear arrows.
/// `Bang` never appears in source syntax; it arises only in extension-mode
/// derivations (promotion at ground type) and in interpreter bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Iota,
    Arrow(Box<Ty>, Box<Ty>),
    Bang(Box<Ty>),
}

impl Ty {
    pub fn arrow(dom: Ty, cod: Ty) -> Ty {
        Ty::Arrow(Box::new(dom), Box::new(cod))
    }

    pub fn bang(inner: Ty) -> Ty {
        Ty::Bang(Box::new(inner))
    }

    pub fn is_arrow(&self) -> bool {
        matches!(self, Ty::Arrow(..))
    }

    /// Kind a lambda binder of this annotation receives. `Bang` annotations
    /// are not bindable (no surface syntax produces them).
    pub fn binder_kind(&self) -> Option<VarKind> {
        match self {
            Ty::Iota => Some(VarKind::Ground),
            Ty::Arrow(..) => Some(VarKind::Higher),
            Ty::Bang(..) => None,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Iota => write!(f, "iota"),
            Ty::Arrow(a, b) => {
                if a.is_arrow() {
                    write!(f, "({}) -o {}", a, b)
                } else {
                    write!(f, "{} -o {}", a, b)
                }
            }
            Ty::Bang(a) => match **a {
                Ty::Iota => write!(f, "!iota"),
                _ => write!(f, "!({})", a),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Ground,
    Higher,
    Stable,
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKind::Ground => write!(f, "ground"),
            VarKind::Higher => write!(f, "higher"),
            VarKind::Stable => write!(f, "stable"),
        }
    }
}

/// Terms. `Succ` and `Pred` are constants of type `iota -o iota`; numerals
/// are `Succ`-application chains over `Zero` (see [`numeral`]).
///
/// The last five constructors belong to the ground-type promotion extension.
/// `PromoteIn` (the general `promote M as $z in N` form) is parse- and
/// reduce-level only; it has no typing rule.
#[derive(Debug, Clone)]
pub enum Term {
    Zero,
    Succ,
    Pred,
    Var {
        name: String,
        kind: VarKind,
    },
    Lam {
        name: String,
        ann: Ty,
        body: Box<Term>,
    },
    App(Box<Term>, Box<Term>),
    LIf {
        cond: Box<Term>,
        then_br: Box<Term>,
        else_br: Box<Term>,
    },
    Mu {
        name: String,
        ann: Ty,
        body: Box<Term>,
    },
    Promote(Box<Term>),
    Discard {
        scrutinee: Box<Term>,
        body: Box<Term>,
    },
    Copy {
        scrutinee: Box<Term>,
        left: String,
        right: String,
        body: Box<Term>,
    },
    Derelict(Box<Term>),
    PromoteIn {
        scrutinee: Box<Term>,
        name: String,
        body: Box<Term>,
    },
}

impl Term {
    pub fn var(name: impl Into<String>, kind: VarKind) -> Term {
        Term::Var { name: name.into(), kind }
    }

    pub fn var_g(name: impl Into<String>) -> Term {
        Term::var(name, VarKind::Ground)
    }

    pub fn var_h(name: impl Into<String>) -> Term {
        Term::var(name, VarKind::Higher)
    }

    pub fn var_s(name: impl Into<String>) -> Term {
        Term::var(name, VarKind::Stable)
    }

    pub fn lam(name: impl Into<String>, ann: Ty, body: Term) -> Term {
        Term::Lam { name: name.into(), ann, body: Box::new(body) }
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    pub fn lif(cond: Term, then_br: Term, else_br: Term) -> Term {
        Term::LIf {
            cond: Box::new(cond),
            then_br: Box::new(then_br),
            else_br: Box::new(else_br),
        }
    }

    pub fn mu(name: impl Into<String>, ann: Ty, body: Term) -> Term {
        Term::Mu { name: name.into(), ann, body: Box::new(body) }
    }

    pub fn succ_of(arg: Term) -> Term {
        Term::app(Term::Succ, arg)
    }

    pub fn pred_of(arg: Term) -> Term {
        Term::app(Term::Pred, arg)
    }

    /// Node count, used as the size measure by the generator and its tests.
    pub fn size(&self) -> usize {
        match self {
            Term::Zero | Term::Succ | Term::Pred | Term::Var { .. } => 1,
            Term::Lam { body, .. } | Term::Mu { body, .. } => 1 + body.size(),
            Term::App(a, b) => 1 + a.size() + b.size(),
            Term::LIf { cond, then_br, else_br } => {
                1 + cond.size() + then_br.size() + else_br.size()
            }
            Term::Promote(a) | Term::Derelict(a) => 1 + a.size(),
            Term::Discard { scrutinee, body } => 1 + scrutinee.size() + body.size(),
            Term::Copy { scrutinee, body, .. } => 1 + scrutinee.size() + body.size(),
            Term::PromoteIn { scrutinee, body, .. } => 1 + scrutinee.size() + body.size(),
        }
    }

    /// True if the term uses any extension constructor.
    pub fn uses_extension(&self) -> bool {
        match self {
            Term::Zero | Term::Succ | Term::Pred | Term::Var { .. } => false,
            Term::Lam { body, .. } | Term::Mu { body, .. } => body.uses_extension(),
            Term::App(a, b) => a.uses_extension() || b.uses_extension(),
            Term::LIf { cond, then_br, else_br } => {
                cond.uses_extension() || then_br.uses_extension() || else_br.uses_extension()
            }
            Term::Promote(_)
            | Term::Discard { .. }
            | Term::Copy { .. }
            | Term::Derelict(_)
            | Term::PromoteIn { .. } => true,
        }
    }
}

/// The numeral for `k`: a chain of `k` `succ` applications over `0`.
pub fn numeral(k: u64) -> Term {
    let mut t = Term::Zero;
    for _ in 0..k {
        t = Term::succ_of(t);
    }
    t
}

/// Reads a term back as a numeral, if it is one.
pub fn numeral_of(t: &Term) -> Option<u64> {
    let mut k = 0u64;
    let mut cur = t;
    loop {
        match cur {
            Term::Zero => return Some(k),
            Term::App(f, a) if matches!(**f, Term::Succ) => {
                k += 1;
                cur = a;
            }
            _ => return None,
        }
    }
}

/// Free variables of a term, partitioned by kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreeVars {
    pub ground: BTreeSet<String>,
    pub higher: BTreeSet<String>,
    pub stable: BTreeSet<String>,
}

impl FreeVars {
    pub fn contains(&self, name: &str, kind: VarKind) -> bool {
        match kind {
            VarKind::Ground => self.ground.contains(name),
            VarKind::Higher => self.higher.contains(name),
            VarKind::Stable => self.stable.contains(name),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty() && self.higher.is_empty() && self.stable.is_empty()
    }

    pub fn all_names(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        s.extend(self.ground.iter().cloned());
        s.extend(self.higher.iter().cloned());
        s.extend(self.stable.iter().cloned());
        s
    }
}

pub fn free_vars(t: &Term) -> FreeVars {
    let mut fv = FreeVars::default();
    collect_free(t, &mut Vec::new(), &mut fv);
    fv
}

fn collect_free(t: &Term, bound: &mut Vec<(String, VarKind)>, out: &mut FreeVars) {
    match t {
        Term::Zero | Term::Succ | Term::Pred => {}
        Term::Var { name, kind } => {
            if !bound.iter().any(|(n, k)| n == name && k == kind) {
                match kind {
                    VarKind::Ground => out.ground.insert(name.clone()),
                    VarKind::Higher => out.higher.insert(name.clone()),
                    VarKind::Stable => out.stable.insert(name.clone()),
                };
            }
        }
        Term::Lam { name, ann, body } => {
            let kind = ann.binder_kind().unwrap_or(VarKind::Higher);
            bound.push((name.clone(), kind));
            collect_free(body, bound, out);
            bound.pop();
        }
        Term::Mu { name, body, .. } => {
            bound.push((name.clone(), VarKind::Stable));
            collect_free(body, bound, out);
            bound.pop();
        }
        Term::App(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Term::LIf { cond, then_br, else_br } => {
            collect_free(cond, bound, out);
            collect_free(then_br, bound, out);
            collect_free(else_br, bound, out);
        }
        Term::Promote(a) | Term::Derelict(a) => collect_free(a, bound, out),
        Term::Discard { scrutinee, body } => {
            collect_free(scrutinee, bound, out);
            collect_free(body, bound, out);
        }
        Term::Copy { scrutinee, left, right, body } => {
            collect_free(scrutinee, bound, out);
            bound.push((left.clone(), VarKind::Ground));
            bound.push((right.clone(), VarKind::Ground));
            collect_free(body, bound, out);
            bound.pop();
            bound.pop();
        }
        Term::PromoteIn { scrutinee, name, body } => {
            collect_free(scrutinee, bound, out);
            bound.push((name.clone(), VarKind::Stable));
            collect_free(body, bound, out);
            bound.pop();
        }
    }
}

/// Picks a name based on `base` that is absent from `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem: String = base.trim_end_matches(|c: char| c.is_ascii_digit()).to_string();
    let stem = if stem.is_empty() { "v".to_string() } else { stem };
    if !avoid.contains(base) {
        return base.to_string();
    }
    for i in 1.. {
        let cand = format!("{}{}", stem, i);
        if !avoid.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// Capture-avoiding substitution of `repl` for the variable (`name`, `kind`).
/// Binders that would capture a free variable of `repl` are renamed first.
pub fn subst_var(t: &Term, name: &str, kind: VarKind, repl: &Term) -> Term {
    match t {
        Term::Zero | Term::Succ | Term::Pred => t.clone(),
        Term::Var { name: n, kind: k } => {
            if n == name && *k == kind {
                repl.clone()
            } else {
                t.clone()
            }
        }
        Term::Lam { name: bn, ann, body } => {
            let bk = ann.binder_kind().unwrap_or(VarKind::Higher);
            let (bn, body) = rebind(bn, bk, body, name, kind, repl);
            match (bn, body) {
                (Some(bn), Some(body)) => Term::Lam { name: bn, ann: ann.clone(), body: Box::new(body) },
                _ => t.clone(),
            }
        }
        Term::Mu { name: bn, ann, body } => {
            let (bn, body) = rebind(bn, VarKind::Stable, body, name, kind, repl);
            match (bn, body) {
                (Some(bn), Some(body)) => Term::Mu { name: bn, ann: ann.clone(), body: Box::new(body) },
                _ => t.clone(),
            }
        }
        Term::App(a, b) => Term::app(
            subst_var(a, name, kind, repl),
            subst_var(b, name, kind, repl),
        ),
        Term::LIf { cond, then_br, else_br } => Term::lif(
            subst_var(cond, name, kind, repl),
            subst_var(then_br, name, kind, repl),
            subst_var(else_br, name, kind, repl),
        ),
        Term::Promote(a) => Term::Promote(Box::new(subst_var(a, name, kind, repl))),
        Term::Derelict(a) => Term::Derelict(Box::new(subst_var(a, name, kind, repl))),
        Term::Discard { scrutinee, body } => Term::Discard {
            scrutinee: Box::new(subst_var(scrutinee, name, kind, repl)),
            body: Box::new(subst_var(body, name, kind, repl)),
        },
        Term::Copy { scrutinee, left, right, body } => {
            let scrutinee = subst_var(scrutinee, name, kind, repl);
            // Two ground binders over the continuation; rebind one at a time.
            let shadowed = kind == VarKind::Ground && (left == name || right == name);
            if shadowed {
                return Term::Copy {
                    scrutinee: Box::new(scrutinee),
                    left: left.clone(),
                    right: right.clone(),
                    body: body.clone(),
                };
            }
            let rfv = free_vars(repl);
            let mut avoid: BTreeSet<String> = free_vars(body).all_names();
            avoid.extend(rfv.all_names());
            avoid.insert(name.to_string());
            let mut body2 = (**body).clone();
            let mut l2 = left.clone();
            let mut r2 = right.clone();
            if rfv.contains(left, VarKind::Ground) {
                l2 = fresh_name(left, &avoid);
                avoid.insert(l2.clone());
                body2 = subst_var(&body2, left, VarKind::Ground, &Term::var_g(l2.clone()));
            }
            if rfv.contains(right, VarKind::Ground) {
                r2 = fresh_name(right, &avoid);
                avoid.insert(r2.clone());
                body2 = subst_var(&body2, right, VarKind::Ground, &Term::var_g(r2.clone()));
            }
            Term::Copy {
                scrutinee: Box::new(scrutinee),
                left: l2,
                right: r2,
                body: Box::new(subst_var(&body2, name, kind, repl)),
            }
        }
        Term::PromoteIn { scrutinee, name: bn, body } => {
            let scrutinee = subst_var(scrutinee, name, kind, repl);
            let (bn2, body2) = rebind(bn, VarKind::Stable, body, name, kind, repl);
            match (bn2, body2) {
                (Some(bn2), Some(body2)) => Term::PromoteIn {
                    scrutinee: Box::new(scrutinee),
                    name: bn2,
                    body: Box::new(body2),
                },
                _ => Term::PromoteIn {
                    scrutinee: Box::new(scrutinee),
                    name: bn.clone(),
                    body: body.clone(),
                },
            }
        }
    }
}

/// Shared binder logic for substitution: returns the (possibly renamed)
/// binder and substituted body, or (None, None) when the binder shadows the
/// substitution target and the body is untouched.
fn rebind(
    bn: &str,
    bk: VarKind,
    body: &Term,
    name: &str,
    kind: VarKind,
    repl: &Term,
) -> (Option<String>, Option<Term>) {
    if bn == name && bk == kind {
        return (None, None);
    }
    let rfv = free_vars(repl);
    if rfv.contains(bn, bk) {
        let mut avoid = free_vars(body).all_names();
        avoid.extend(rfv.all_names());
        avoid.insert(name.to_string());
        let bn2 = fresh_name(bn, &avoid);
        let body2 = subst_var(body, bn, bk, &Term::var(bn2.clone(), bk));
        (Some(bn2), Some(subst_var(&body2, name, kind, repl)))
    } else {
        (Some(bn.to_string()), Some(subst_var(body, name, kind, repl)))
    }
}

/// Substitutes the numeral for `k` at a ground variable.
pub fn subst_ground(t: &Term, k: u64, name: &str) -> Term {
    subst_var(t, name, VarKind::Ground, &numeral(k))
}

/// Substitutes a term at a higher (linear) variable.
pub fn subst_higher(t: &Term, repl: &Term, name: &str) -> Term {
    subst_var(t, name, VarKind::Higher, repl)
}

/// Substitutes a term at a stable variable.
pub fn subst_stable(t: &Term, repl: &Term, name: &str) -> Term {
    subst_var(t, name, VarKind::Stable, repl)
}

// ---------------------------------------------------------------------------
// Alpha-equivalence. Terms are PartialEq/Eq/Hash up to renaming of bound
// variables; free variables compare by (name, kind).

type Scope<'a> = Vec<(&'a str, VarKind)>;

fn bound_index(scope: &Scope<'_>, name: &str, kind: VarKind) -> Option<usize> {
    scope
        .iter()
        .rev()
        .position(|(n, k)| *n == name && *k == kind)
}

fn alpha_rec<'a>(a: &'a Term, b: &'a Term, sa: &mut Scope<'a>, sb: &mut Scope<'a>) -> bool {
    // Scopes `sa` and `sb` always have equal length.
    match (a, b) {
        (Term::Zero, Term::Zero) | (Term::Succ, Term::Succ) | (Term::Pred, Term::Pred) => true,
        (Term::Var { name: na, kind: ka }, Term::Var { name: nb, kind: kb }) => {
            if ka != kb {
                return false;
            }
            match (bound_index(sa, na, *ka), bound_index(sb, nb, *kb)) {
                (Some(ia), Some(ib)) => ia == ib,
                (None, None) => na == nb,
                _ => false,
            }
        }
        (
            Term::Lam { name: na, ann: ta, body: ba },
            Term::Lam { name: nb, ann: tb, body: bb },
        ) => {
            if ta != tb {
                return false;
            }
            let k = ta.binder_kind().unwrap_or(VarKind::Higher);
            sa.push((na, k));
            sb.push((nb, k));
            let r = alpha_rec(ba, bb, sa, sb);
            sa.pop();
            sb.pop();
            r
        }
        (
            Term::Mu { name: na, ann: ta, body: ba },
            Term::Mu { name: nb, ann: tb, body: bb },
        ) => {
            if ta != tb {
                return false;
            }
            sa.push((na, VarKind::Stable));
            sb.push((nb, VarKind::Stable));
            let r = alpha_rec(ba, bb, sa, sb);
            sa.pop();
            sb.pop();
            r
        }
        (Term::App(fa, xa), Term::App(fb, xb)) => {
            alpha_rec(fa, fb, sa, sb) && alpha_rec(xa, xb, sa, sb)
        }
        (
            Term::LIf { cond: ca, then_br: ta, else_br: ea },
            Term::LIf { cond: cb, then_br: tb, else_br: eb },
        ) => alpha_rec(ca, cb, sa, sb) && alpha_rec(ta, tb, sa, sb) && alpha_rec(ea, eb, sa, sb),
        (Term::Promote(xa), Term::Promote(xb)) | (Term::Derelict(xa), Term::Derelict(xb)) => {
            alpha_rec(xa, xb, sa, sb)
        }
        (
            Term::Discard { scrutinee: ma, body: na },
            Term::Discard { scrutinee: mb, body: nb },
        ) => alpha_rec(ma, mb, sa, sb) && alpha_rec(na, nb, sa, sb),
        (
            Term::Copy { scrutinee: ma, left: la, right: ra, body: ba },
            Term::Copy { scrutinee: mb, left: lb, right: rb, body: bb },
        ) => {
            if !alpha_rec(ma, mb, sa, sb) {
                return false;
            }
            sa.push((la, VarKind::Ground));
            sa.push((ra, VarKind::Ground));
            sb.push((lb, VarKind::Ground));
            sb.push((rb, VarKind::Ground));
            let r = alpha_rec(ba, bb, sa, sb);
            sa.truncate(sa.len() - 2);
            sb.truncate(sb.len() - 2);
            r
        }
        (
            Term::PromoteIn { scrutinee: ma, name: na, body: ba },
            Term::PromoteIn { scrutinee: mb, name: nb, body: bb },
        ) => {
            if !alpha_rec(ma, mb, sa, sb) {
                return false;
            }
            sa.push((na, VarKind::Stable));
            sb.push((nb, VarKind::Stable));
            let r = alpha_rec(ba, bb, sa, sb);
            sa.pop();
            sb.pop();
            r
        }
        _ => false,
    }
}

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    alpha_rec(a, b, &mut Vec::new(), &mut Vec::new())
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        alpha_eq(self, other)
    }
}

impl Eq for Term {}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        hash_rec(self, &mut Vec::new(), state)
    }
}

fn hash_rec<'a, H: std::hash::Hasher>(t: &'a Term, scope: &mut Scope<'a>, state: &mut H) {
    use std::hash::Hash;
    match t {
        Term::Zero => 0u8.hash(state),
        Term::Succ => 1u8.hash(state),
        Term::Pred => 2u8.hash(state),
        Term::Var { name, kind } => {
            3u8.hash(state);
            kind.hash(state);
            match bound_index(scope, name, *kind) {
                Some(i) => {
                    true.hash(state);
                    i.hash(state);
                }
                None => {
                    false.hash(state);
                    name.hash(state);
                }
            }
        }
        Term::Lam { name, ann, body } => {
            4u8.hash(state);
            ann.hash(state);
            scope.push((name, ann.binder_kind().unwrap_or(VarKind::Higher)));
            hash_rec(body, scope, state);
            scope.pop();
        }
        Term::App(a, b) => {
            5u8.hash(state);
            hash_rec(a, scope, state);
            hash_rec(b, scope, state);
        }
        Term::LIf { cond, then_br, else_br } => {
            6u8.hash(state);
            hash_rec(cond, scope, state);
            hash_rec(then_br, scope, state);
            hash_rec(else_br, scope, state);
        }
        Term::Mu { name, ann, body } => {
            7u8.hash(state);
            ann.hash(state);
            scope.push((name, VarKind::Stable));
            hash_rec(body, scope, state);
            scope.pop();
        }
        Term::Promote(a) => {
            8u8.hash(state);
            hash_rec(a, scope, state);
        }
        Term::Discard { scrutinee, body } => {
            9u8.hash(state);
            hash_rec(scrutinee, scope, state);
            hash_rec(body, scope, state);
        }
        Term::Copy { scrutinee, left, right, body } => {
            10u8.hash(state);
            hash_rec(scrutinee, scope, state);
            scope.push((left, VarKind::Ground));
            scope.push((right, VarKind::Ground));
            hash_rec(body, scope, state);
            scope.pop();
            scope.pop();
        }
        Term::Derelict(a) => {
            11u8.hash(state);
            hash_rec(a, scope, state);
        }
        Term::PromoteIn { scrutinee, name, body } => {
            12u8.hash(state);
            hash_rec(scrutinee, scope, state);
            scope.push((name, VarKind::Stable));
            hash_rec(body, scope, state);
            scope.pop();
        }
    }
}

// ---------------------------------------------------------------------------
// Bases. An ordered list of typed, kinded names; the typing judgment's left
// side. Ground entries are iota-typed, higher entries arrow-typed.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisEntry {
    pub name: String,
    pub kind: VarKind,
    pub ty: Ty,
}

impl BasisEntry {
    pub fn ground(name: impl Into<String>) -> BasisEntry {
        BasisEntry { name: name.into(), kind: VarKind::Ground, ty: Ty::Iota }
    }

    pub fn higher(name: impl Into<String>, ty: Ty) -> BasisEntry {
        BasisEntry { name: name.into(), kind: VarKind::Higher, ty }
    }

    pub fn stable(name: impl Into<String>, ty: Ty) -> BasisEntry {
        BasisEntry { name: name.into(), kind: VarKind::Stable, ty }
    }
}

impl fmt::Display for BasisEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Stable => write!(f, "${}:{}", self.name, self.ty),
            _ => write!(f, "{}:{}", self.name, self.ty),
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum BasisError {
    #[error("duplicate basis name `{0}`")]
    DuplicateName(String),
    #[error("basis entry `{0}` has kind {1} but type {2}")]
    KindTypeMismatch(String, VarKind, Ty),
}

/// An ordered basis with pairwise-distinct names. Plain (ground/higher) names
/// share one namespace; stable names live in their own (`$`-prefixed) one.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Basis {
    entries: Vec<BasisEntry>,
}

impl Basis {
    pub fn empty() -> Basis {
        Basis::default()
    }

    pub fn new(entries: Vec<BasisEntry>) -> Result<Basis, BasisError> {
        let mut plain = BTreeSet::new();
        let mut stable = BTreeSet::new();
        for e in &entries {
            let ok = match e.kind {
                VarKind::Ground => e.ty == Ty::Iota,
                VarKind::Higher => e.ty.is_arrow(),
                VarKind::Stable => true,
            };
            if !ok {
                return Err(BasisError::KindTypeMismatch(e.name.clone(), e.kind, e.ty.clone()));
            }
            let set = if e.kind == VarKind::Stable { &mut stable } else { &mut plain };
            if !set.insert(e.name.clone()) {
                return Err(BasisError::DuplicateName(e.name.clone()));
            }
        }
        Ok(Basis { entries })
    }

    /// Builds without the duplicate check; for internal derivation plumbing
    /// where freshness is maintained by construction.
    pub(crate) fn from_entries_unchecked(entries: Vec<BasisEntry>) -> Basis {
        Basis { entries }
    }

    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, name: &str, kind: VarKind) -> Option<&BasisEntry> {
        self.entries.iter().find(|e| e.name == name && e.kind == kind)
    }

    pub fn position(&self, name: &str, kind: VarKind) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name && e.kind == kind)
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", e)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeral_roundtrip() {
        assert_eq!(
            numeral(3),
            Term::succ_of(Term::succ_of(Term::succ_of(Term::Zero)))
        );
        assert_eq!(numeral_of(&numeral(0)), Some(0));
        assert_eq!(numeral_of(&numeral(7)), Some(7));
        assert_eq!(numeral_of(&Term::succ_of(Term::Zero)), Some(1));
        // pred 0 is not a numeral, nor is succ applied to a non-numeral.
        assert_eq!(numeral_of(&Term::pred_of(Term::Zero)), None);
        assert_eq!(numeral_of(&Term::succ_of(Term::pred_of(Term::Zero))), None);
    }

    #[test]
    fn free_vars_partitions_by_kind() {
        // f x with f higher, x ground
        let t = Term::app(Term::var_h("f"), Term::var_g("x"));
        let fv = free_vars(&t);
        assert_eq!(fv.ground.iter().collect::<Vec<_>>(), vec!["x"]);
        assert_eq!(fv.higher.iter().collect::<Vec<_>>(), vec!["f"]);
        assert!(fv.stable.is_empty());

        // \x:iota. f x leaves only f free
        let t = Term::lam("x", Ty::Iota, Term::app(Term::var_h("f"), Term::var_g("x")));
        let fv = free_vars(&t);
        assert!(fv.ground.is_empty());
        assert_eq!(fv.higher.iter().collect::<Vec<_>>(), vec!["f"]);

        // mu $f:iota.$f is closed
        let t = Term::mu("f", Ty::Iota, Term::var_s("f"));
        assert!(free_vars(&t).is_empty());
    }

    #[test]
    fn ground_and_stable_names_are_distinct_variables() {
        assert_ne!(Term::var_g("x"), Term::var_s("x"));
        // A ground binder does not capture a stable occurrence of the same name.
        let t = Term::lam("x", Ty::Iota, Term::var_s("x"));
        let fv = free_vars(&t);
        assert!(fv.stable.contains("x"));
        assert!(fv.ground.is_empty());
    }

    #[test]
    fn subst_ground_hits_every_occurrence() {
        // lif x then x else succ x  [2/x]
        let t = Term::lif(
            Term::var_g("x"),
            Term::var_g("x"),
            Term::succ_of(Term::var_g("x")),
        );
        let got = subst_ground(&t, 2, "x");
        let want = Term::lif(numeral(2), numeral(2), Term::succ_of(numeral(2)));
        assert_eq!(got, want);
    }

    #[test]
    fn subst_higher_replaces_linear_variable() {
        let t = Term::app(Term::var_h("f"), Term::Zero);
        let got = subst_higher(&t, &Term::Succ, "f");
        assert_eq!(got, Term::succ_of(Term::Zero));
        assert_eq!(numeral_of(&got), Some(1));
    }

    #[test]
    fn subst_stable_unfolds_recursion() {
        // (mu $f:iota.$f) unfolds to itself
        let omega = Term::mu("f", Ty::Iota, Term::var_s("f"));
        let body = Term::var_s("f");
        let got = subst_stable(&body, &omega, "f");
        assert_eq!(got, omega);
    }

    #[test]
    fn subst_avoids_capture() {
        // (\y:iota. f y)[ (\w:iota. y) / f ]: the binder y must be renamed so
        // the free y of the replacement stays free.
        let body = Term::lam("y", Ty::Iota, Term::app(Term::var_h("f"), Term::var_g("y")));
        let repl = Term::lam("w", Ty::Iota, Term::var_g("y"));
        let got = subst_higher(&body, &repl, "f");
        let fv = free_vars(&got);
        assert!(fv.ground.contains("y"), "outer y must remain free, got {:?}", got);
        // And it is not the captured reading.
        let captured = Term::lam(
            "y",
            Ty::Iota,
            Term::app(
                Term::lam("w", Ty::Iota, Term::var_g("y")),
                Term::var_g("y"),
            ),
        );
        assert_ne!(got, captured);
        // It is alpha-equal to the correct reading with a fresh binder.
        let want = Term::lam(
            "y1",
            Ty::Iota,
            Term::app(
                Term::lam("w", Ty::Iota, Term::var_g("y")),
                Term::var_g("y1"),
            ),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn shadowing_binder_stops_substitution() {
        let t = Term::lam("x", Ty::Iota, Term::var_g("x"));
        assert_eq!(subst_ground(&t, 5, "x"), t);
    }

    #[test]
    fn alpha_eq_ignores_binder_names() {
        let a = Term::lam("x", Ty::Iota, Term::var_g("x"));
        let b = Term::lam("y", Ty::Iota, Term::var_g("y"));
        assert_eq!(a, b);
        let c = Term::mu("f", Ty::Iota, Term::var_s("f"));
        let d = Term::mu("g", Ty::Iota, Term::var_s("g"));
        assert_eq!(c, d);
        // Different annotations are different terms.
        let e = Term::lam("x", Ty::arrow(Ty::Iota, Ty::Iota), Term::var_h("x"));
        assert_ne!(a, e);
    }

    #[test]
    fn alpha_eq_respects_free_names() {
        assert_ne!(Term::var_g("x"), Term::var_g("y"));
        // Bound-vs-free mismatch.
        let a = Term::lam("x", Ty::Iota, Term::var_g("x"));
        let b = Term::lam("x", Ty::Iota, Term::var_g("z"));
        assert_ne!(a, b);
    }

    #[test]
    fn hash_agrees_with_alpha_eq() {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let h = |t: &Term| {
            let mut s = DefaultHasher::new();
            t.hash(&mut s);
            s.finish()
        };
        let a = Term::lam("x", Ty::Iota, Term::succ_of(Term::var_g("x")));
        let b = Term::lam("q", Ty::Iota, Term::succ_of(Term::var_g("q")));
        assert_eq!(h(&a), h(&b));
        let mut set = std::collections::HashSet::new();
        set.insert(a);
        assert!(set.contains(&b));
    }

    #[test]
    fn basis_rejects_duplicates_and_kind_mismatches() {
        let err = Basis::new(vec![BasisEntry::ground("x"), BasisEntry::ground("x")]);
        assert_eq!(err, Err(BasisError::DuplicateName("x".into())));
        let err = Basis::new(vec![BasisEntry {
            name: "f".into(),
            kind: VarKind::Higher,
            ty: Ty::Iota,
        }]);
        assert!(matches!(err, Err(BasisError::KindTypeMismatch(..))));
        // Ground x and stable $x can coexist.
        let ok = Basis::new(vec![
            BasisEntry::ground("x"),
            BasisEntry::stable("x", Ty::Iota),
        ]);
        assert!(ok.is_ok());
    }

    #[test]
    fn type_display_nests_arrows_right() {
        let t = Ty::arrow(Ty::Iota, Ty::arrow(Ty::Iota, Ty::Iota));
        assert_eq!(t.to_string(), "iota -o iota -o iota");
        let t = Ty::arrow(Ty::arrow(Ty::Iota, Ty::Iota), Ty::Iota);
        assert_eq!(t.to_string(), "(iota -o iota) -o iota");
    }
}
