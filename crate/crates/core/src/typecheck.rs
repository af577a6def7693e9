//! Algorithmic typechecker producing explicit declarative derivations.
//!
//! The checker is syntax-directed: it synthesizes, for each subterm, a
//! derivation whose conclusion basis lists exactly the free variables of the
//! subterm. Join points (application, conditional, discard/copy) then make
//! structural bookkeeping explicit: shared ground/stable variables are
//! renamed apart in the subderivations and rejoined with contraction nodes
//! (gc/sc), missing entries are weakened in (gw/sw), and order is normalized
//! with adjacent-exchange nodes (ex). Higher variables admit none of these,
//! which is what makes them linear: sharing one across the two sides of an
//! application is an error, while the two branches of `lif` must consume an
//! identical set (the branches are additive, sharing one basis).
//!
//! The resulting trees are consumed by the interpreter; `validate_derivation`
//! re-checks every node against its rule schema and serves as the trusted
//! kernel for property tests.

use crate::syntax::{
    free_vars, subst_var, Basis, BasisEntry, Term, Ty, VarKind,
};
use crate::Mode;
use std::collections::BTreeSet;
use std::fmt;

/// Rule tags. `Ex(i)` swaps basis slots `i` and `i+1` between premise and
/// conclusion. The last four belong to the ground-promotion extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Z,
    S,
    P,
    LIf,
    Ex(usize),
    Gv,
    Gw,
    Gc,
    Hv,
    Ap,
    Lam,
    Sv,
    Sc,
    Sw,
    Mu,
    Pr,
    Ds,
    Cp,
    Dr,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Z => write!(f, "z"),
            Rule::S => write!(f, "s"),
            Rule::P => write!(f, "p"),
            Rule::LIf => write!(f, "lif"),
            Rule::Ex(i) => write!(f, "ex@{}", i),
            Rule::Gv => write!(f, "gv"),
            Rule::Gw => write!(f, "gw"),
            Rule::Gc => write!(f, "gc"),
            Rule::Hv => write!(f, "hv"),
            Rule::Ap => write!(f, "ap"),
            Rule::Lam => write!(f, "lambda"),
            Rule::Sv => write!(f, "sv"),
            Rule::Sc => write!(f, "sc"),
            Rule::Sw => write!(f, "sw"),
            Rule::Mu => write!(f, "mu"),
            Rule::Pr => write!(f, "pr"),
            Rule::Ds => write!(f, "ds"),
            Rule::Cp => write!(f, "cp"),
            Rule::Dr => write!(f, "dr"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub basis: Basis,
    pub term: Term,
    pub ty: Ty,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.basis.is_empty() {
            write!(f, "|- {} : {}", self.term, self.ty)
        } else {
            write!(f, "{} |- {} : {}", self.basis, self.term, self.ty)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub concl: Judgment,
    pub premises: Vec<Derivation>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("unbound {kind} variable `{name}`")]
    UnboundVariable { name: String, kind: VarKind },
    #[error("variable `{name}`: {detail}")]
    KindMismatch { name: String, detail: String },
    #[error("`{subject}` is applied but has type {found}, not an arrow type")]
    NotAFunction { subject: String, found: Ty },
    #[error("in `{subject}`: expected argument type {expected}, found {found}")]
    ArgTypeMismatch { subject: String, expected: String, found: Ty },
    #[error("higher variable `{name}` is bound but never used (no weakening at arrow kind)")]
    LinearVariableUnused { name: String },
    #[error("higher variable `{name}` is used more than once in one multiplicative branch")]
    LinearVariableReused { name: String },
    #[error("lif branches consume different higher variables: {detail}")]
    BranchLinearityMismatch { detail: String },
    #[error("mu body has free higher variable `{name}`")]
    MuBodyHasLinearFreeVars { name: String },
    #[error("lif condition `{subject}` has type {found}, expected iota")]
    ConditionNotGround { subject: String, found: Ty },
    #[error("lif branch `{subject}` has type {found}, expected iota")]
    BranchNotGround { subject: String, found: Ty },
    #[error("type mismatch: found {found}, claimed {claimed}")]
    TypeMismatch { found: Ty, claimed: Ty },
    #[error("`{subject}` has no typing rule")]
    UntypableForm { subject: String },
    #[error("`{subject}` requires extended mode")]
    ExtensionDisabled { subject: String },
}

fn show(t: &Term) -> String {
    crate::parser::pretty(t)
}

impl Derivation {
    pub fn basis(&self) -> &Basis {
        &self.concl.basis
    }

    pub fn term(&self) -> &Term {
        &self.concl.term
    }

    pub fn ty(&self) -> &Ty {
        &self.concl.ty
    }

    fn leaf(rule: Rule, basis: Basis, term: Term, ty: Ty) -> Derivation {
        Derivation { rule, concl: Judgment { basis, term, ty }, premises: Vec::new() }
    }

    fn node(rule: Rule, basis: Basis, term: Term, ty: Ty, premises: Vec<Derivation>) -> Derivation {
        Derivation { rule, concl: Judgment { basis, term, ty }, premises }
    }

    /// Wraps in an (ex) node swapping slots i and i+1 of the current basis.
    fn with_ex(self, i: usize) -> Derivation {
        let mut entries = self.basis().entries().to_vec();
        entries.swap(i, i + 1);
        let concl = Judgment {
            basis: Basis::from_entries_unchecked(entries),
            term: self.concl.term.clone(),
            ty: self.concl.ty.clone(),
        };
        Derivation { rule: Rule::Ex(i), concl, premises: vec![self] }
    }

    /// Bubbles the entry at `from` to the last slot with (ex) nodes.
    fn move_to_end(self, from: usize) -> Derivation {
        let n = self.basis().len();
        let mut d = self;
        for i in from..n.saturating_sub(1) {
            d = d.with_ex(i);
        }
        d
    }

    /// Reorders the basis to `target` (a permutation of it) with (ex) nodes.
    fn reorder_to(self, target: &[(String, VarKind)]) -> Derivation {
        let mut d = self;
        for j in 0..target.len() {
            let (name, kind) = &target[j];
            let p = d
                .basis()
                .position(name, *kind)
                .expect("reorder target must be a permutation of the basis");
            debug_assert!(p >= j);
            // Bubble left from p down to slot j.
            for i in (j..p).rev() {
                d = d.with_ex(i);
            }
        }
        d
    }

    /// Appends a weakening node for a fresh ground variable.
    fn weaken_ground(self, name: String) -> Derivation {
        let mut entries = self.basis().entries().to_vec();
        entries.push(BasisEntry::ground(name));
        let concl = Judgment {
            basis: Basis::from_entries_unchecked(entries),
            term: self.concl.term.clone(),
            ty: self.concl.ty.clone(),
        };
        Derivation { rule: Rule::Gw, concl, premises: vec![self] }
    }

    /// Appends a weakening node for a fresh stable variable.
    fn weaken_stable(self, name: String, ty: Ty) -> Derivation {
        let mut entries = self.basis().entries().to_vec();
        entries.push(BasisEntry::stable(name, ty));
        let concl = Judgment {
            basis: Basis::from_entries_unchecked(entries),
            term: self.concl.term.clone(),
            ty: self.concl.ty.clone(),
        };
        Derivation { rule: Rule::Sw, concl, premises: vec![self] }
    }

    /// Renames a free variable everywhere in the tree. `new` must be fresh
    /// for every name occurring in the tree.
    fn rename_free(&self, old: &str, kind: VarKind, new: &str) -> Derivation {
        let repl = Term::var(new, kind);
        let entries = self
            .basis()
            .entries()
            .iter()
            .map(|e| {
                if e.name == old && e.kind == kind {
                    BasisEntry { name: new.to_string(), kind, ty: e.ty.clone() }
                } else {
                    e.clone()
                }
            })
            .collect();
        Derivation {
            rule: self.rule,
            concl: Judgment {
                basis: Basis::from_entries_unchecked(entries),
                term: subst_var(&self.concl.term, old, kind, &repl),
                ty: self.concl.ty.clone(),
            },
            premises: self.premises.iter().map(|p| p.rename_free(old, kind, new)).collect(),
        }
    }

    fn fmt_tree(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(f, "{}({}) {}", "  ".repeat(depth), self.rule, self.concl)?;
        for p in &self.premises {
            p.fmt_tree(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_tree(f, 0)
    }
}

// ---------------------------------------------------------------------------
// Synthesis.

struct NameGen {
    used: BTreeSet<String>,
}

impl NameGen {
    fn new(roots: impl IntoIterator<Item = String>) -> NameGen {
        NameGen { used: roots.into_iter().collect() }
    }

    fn fresh(&mut self, base: &str) -> String {
        let name = crate::syntax::fresh_name(
            &format!("{}1", base.trim_end_matches(|c: char| c.is_ascii_digit())),
            &self.used,
        );
        self.used.insert(name.clone());
        name
    }
}

/// Every identifier occurring in the term, bound or free, any kind.
fn all_names(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Zero | Term::Succ | Term::Pred => {}
        Term::Var { name, .. } => {
            out.insert(name.clone());
        }
        Term::Lam { name, body, .. } | Term::Mu { name, body, .. } => {
            out.insert(name.clone());
            all_names(body, out);
        }
        Term::App(a, b) => {
            all_names(a, out);
            all_names(b, out);
        }
        Term::LIf { cond, then_br, else_br } => {
            all_names(cond, out);
            all_names(then_br, out);
            all_names(else_br, out);
        }
        Term::Promote(a) | Term::Derelict(a) => all_names(a, out),
        Term::Discard { scrutinee, body } => {
            all_names(scrutinee, out);
            all_names(body, out);
        }
        Term::Copy { scrutinee, left, right, body } => {
            all_names(scrutinee, out);
            out.insert(left.clone());
            out.insert(right.clone());
            all_names(body, out);
        }
        Term::PromoteIn { scrutinee, name, body } => {
            all_names(scrutinee, out);
            out.insert(name.clone());
            all_names(body, out);
        }
    }
}

struct TyEnv<'a> {
    scopes: Vec<(String, VarKind, Ty)>,
    root: &'a Basis,
}

impl TyEnv<'_> {
    fn lookup(&self, name: &str, kind: VarKind) -> Option<Ty> {
        for (n, k, ty) in self.scopes.iter().rev() {
            if n == name && *k == kind {
                return Some(ty.clone());
            }
        }
        self.root.lookup(name, kind).map(|e| e.ty.clone())
    }
}

/// A ground or stable variable shared between multiplicative siblings,
/// renamed apart pending an explicit contraction node.
struct SharedVar {
    name: String,
    kind: VarKind,
    left: String,
    right: String,
}

struct Checker<'a> {
    env: TyEnv<'a>,
    gen: NameGen,
    mode: Mode,
}

impl Checker<'_> {
    fn synth(&mut self, t: &Term) -> Result<Derivation, TypeError> {
        match t {
            Term::Zero => Ok(Derivation::leaf(Rule::Z, Basis::empty(), Term::Zero, Ty::Iota)),
            Term::Succ => Ok(Derivation::leaf(
                Rule::S,
                Basis::empty(),
                Term::Succ,
                Ty::arrow(Ty::Iota, Ty::Iota),
            )),
            Term::Pred => Ok(Derivation::leaf(
                Rule::P,
                Basis::empty(),
                Term::Pred,
                Ty::arrow(Ty::Iota, Ty::Iota),
            )),
            Term::Var { name, kind } => {
                let ty = self.env.lookup(name, *kind).ok_or_else(|| {
                    TypeError::UnboundVariable { name: name.clone(), kind: *kind }
                })?;
                let (rule, entry) = match kind {
                    VarKind::Ground => (Rule::Gv, BasisEntry::ground(name.clone())),
                    VarKind::Higher => (Rule::Hv, BasisEntry::higher(name.clone(), ty.clone())),
                    VarKind::Stable => (Rule::Sv, BasisEntry::stable(name.clone(), ty.clone())),
                };
                Ok(Derivation::leaf(
                    rule,
                    Basis::from_entries_unchecked(vec![entry]),
                    t.clone(),
                    ty,
                ))
            }
            Term::Lam { name, ann, body } => {
                let kind = ann.binder_kind().ok_or_else(|| TypeError::KindMismatch {
                    name: name.clone(),
                    detail: format!("cannot bind a variable at type {}", ann),
                })?;
                self.env.scopes.push((name.clone(), kind, ann.clone()));
                let d_body = self.synth(body);
                self.env.scopes.pop();
                let d_body = d_body?;
                let body_ty = d_body.ty().clone();
                let d_prem = self.bind_last(d_body, name, kind, ann)?;
                let concl_entries =
                    d_prem.basis().entries()[..d_prem.basis().len() - 1].to_vec();
                Ok(Derivation::node(
                    Rule::Lam,
                    Basis::from_entries_unchecked(concl_entries),
                    t.clone(),
                    Ty::arrow(ann.clone(), body_ty),
                    vec![d_prem],
                ))
            }
            Term::App(fun, arg) => {
                let d_fun = self.synth(fun)?;
                let d_arg = self.synth(arg)?;
                let Ty::Arrow(dom, cod) = d_fun.ty().clone() else {
                    return Err(TypeError::NotAFunction {
                        subject: show(fun),
                        found: d_fun.ty().clone(),
                    });
                };
                if *d_arg.ty() != *dom {
                    return Err(TypeError::ArgTypeMismatch {
                        subject: show(t),
                        expected: dom.to_string(),
                        found: d_arg.ty().clone(),
                    });
                }
                let (d_fun, mut d_args, shared) = self.share(d_fun, vec![d_arg])?;
                let d_arg = d_args.pop().unwrap();
                let basis = concat_bases(d_fun.basis(), d_arg.basis())?;
                let term = Term::app(d_fun.term().clone(), d_arg.term().clone());
                let node = Derivation::node(Rule::Ap, basis, term, (*cod).clone(), vec![d_fun, d_arg]);
                Ok(self.contract(node, shared))
            }
            Term::LIf { cond, then_br, else_br } => {
                let d_cond = self.synth(cond)?;
                if *d_cond.ty() != Ty::Iota {
                    return Err(TypeError::ConditionNotGround {
                        subject: show(cond),
                        found: d_cond.ty().clone(),
                    });
                }
                let d_then = self.synth(then_br)?;
                let d_else = self.synth(else_br)?;
                for (d, src) in [(&d_then, then_br), (&d_else, else_br)] {
                    if *d.ty() != Ty::Iota {
                        return Err(TypeError::BranchNotGround {
                            subject: show(src),
                            found: d.ty().clone(),
                        });
                    }
                }
                let (d_then, d_else) = self.equalize_branches(d_then, d_else)?;
                let (d_cond, mut branches, shared) = self.share(d_cond, vec![d_then, d_else])?;
                let d_else = branches.pop().unwrap();
                let d_then = branches.pop().unwrap();
                let basis = concat_bases(d_cond.basis(), d_then.basis())?;
                let term = Term::lif(
                    d_cond.term().clone(),
                    d_then.term().clone(),
                    d_else.term().clone(),
                );
                let node = Derivation::node(
                    Rule::LIf,
                    basis,
                    term,
                    Ty::Iota,
                    vec![d_cond, d_then, d_else],
                );
                Ok(self.contract(node, shared))
            }
            Term::Mu { name, ann, body } => {
                self.env.scopes.push((name.clone(), VarKind::Stable, ann.clone()));
                let d_body = self.synth(body);
                self.env.scopes.pop();
                let d_body = d_body?;
                if *d_body.ty() != *ann {
                    return Err(TypeError::TypeMismatch {
                        found: d_body.ty().clone(),
                        claimed: ann.clone(),
                    });
                }
                if let Some(e) =
                    d_body.basis().entries().iter().find(|e| e.kind == VarKind::Higher)
                {
                    return Err(TypeError::MuBodyHasLinearFreeVars { name: e.name.clone() });
                }
                // Premise context shape: grounds, then stables, binder last.
                let d_body = if d_body.basis().lookup(name, VarKind::Stable).is_none() {
                    d_body.weaken_stable(name.clone(), ann.clone())
                } else {
                    d_body
                };
                let mut grounds: Vec<(String, VarKind)> = Vec::new();
                let mut stables: Vec<(String, VarKind)> = Vec::new();
                for e in d_body.basis().entries() {
                    if e.name == *name && e.kind == VarKind::Stable {
                        continue;
                    }
                    match e.kind {
                        VarKind::Ground => grounds.push((e.name.clone(), e.kind)),
                        VarKind::Stable => stables.push((e.name.clone(), e.kind)),
                        VarKind::Higher => unreachable!(),
                    }
                }
                let mut target = grounds;
                target.extend(stables);
                target.push((name.clone(), VarKind::Stable));
                let d_prem = d_body.reorder_to(&target);
                let concl_entries =
                    d_prem.basis().entries()[..d_prem.basis().len() - 1].to_vec();
                Ok(Derivation::node(
                    Rule::Mu,
                    Basis::from_entries_unchecked(concl_entries),
                    t.clone(),
                    ann.clone(),
                    vec![d_prem],
                ))
            }
            Term::Promote(inner) => {
                self.require_extended(t)?;
                let d = self.synth(inner)?;
                if *d.ty() != Ty::Iota {
                    return Err(TypeError::ArgTypeMismatch {
                        subject: show(t),
                        expected: Ty::Iota.to_string(),
                        found: d.ty().clone(),
                    });
                }
                let basis = d.basis().clone();
                Ok(Derivation::node(
                    Rule::Pr,
                    basis,
                    t.clone(),
                    Ty::bang(Ty::Iota),
                    vec![d],
                ))
            }
            Term::Discard { scrutinee, body } => {
                self.require_extended(t)?;
                let d_scr = self.synth(scrutinee)?;
                if *d_scr.ty() != Ty::Iota {
                    return Err(TypeError::ConditionNotGround {
                        subject: show(scrutinee),
                        found: d_scr.ty().clone(),
                    });
                }
                let d_body = self.synth(body)?;
                let ty = d_body.ty().clone();
                let (d_scr, mut bodies, shared) = self.share(d_scr, vec![d_body])?;
                let d_body = bodies.pop().unwrap();
                let basis = concat_bases(d_scr.basis(), d_body.basis())?;
                let term = Term::Discard {
                    scrutinee: Box::new(d_scr.term().clone()),
                    body: Box::new(d_body.term().clone()),
                };
                let node = Derivation::node(Rule::Ds, basis, term, ty, vec![d_scr, d_body]);
                Ok(self.contract(node, shared))
            }
            Term::Copy { scrutinee, left, right, body } => {
                self.require_extended(t)?;
                if left == right {
                    // The second binder shadows the first entirely; rename it
                    // apart so the premise basis can list both.
                    let fresh = self.gen.fresh(right);
                    let renamed = Term::Copy {
                        scrutinee: scrutinee.clone(),
                        left: left.clone(),
                        right: fresh.clone(),
                        body: Box::new(subst_var(
                            body,
                            right,
                            VarKind::Ground,
                            &Term::var_g(&fresh),
                        )),
                    };
                    return self.synth(&renamed);
                }
                let d_scr = self.synth(scrutinee)?;
                if *d_scr.ty() != Ty::Iota {
                    return Err(TypeError::ConditionNotGround {
                        subject: show(scrutinee),
                        found: d_scr.ty().clone(),
                    });
                }
                self.env.scopes.push((left.clone(), VarKind::Ground, Ty::Iota));
                self.env.scopes.push((right.clone(), VarKind::Ground, Ty::Iota));
                let d_body = self.synth(body);
                self.env.scopes.pop();
                self.env.scopes.pop();
                let d_body = d_body?;
                let ty = d_body.ty().clone();
                // Premise basis must end with the two copy binders in order.
                let d_body = self.bind_last(d_body, right, VarKind::Ground, &Ty::Iota)?;
                let n = d_body.basis().len();
                let d_body = match d_body.basis().position(left, VarKind::Ground) {
                    Some(p) if p + 2 == n => d_body,
                    Some(p) => {
                        let mut d = d_body;
                        for i in p..n - 2 {
                            d = d.with_ex(i);
                        }
                        d
                    }
                    // Unused left binder: weaken it in, then hop it over right.
                    None => d_body.weaken_ground(left.clone()).with_ex(n - 1),
                };
                let split_at = d_body.basis().len() - 2;
                // Sharing is resolved against the body minus its binders.
                let (d_scr, d_body, shared) = self.share_copy(d_scr, d_body, split_at)?;
                let basis = concat_bases(
                    d_scr.basis(),
                    &Basis::from_entries_unchecked(
                        d_body.basis().entries()[..split_at].to_vec(),
                    ),
                )?;
                let term = Term::Copy {
                    scrutinee: Box::new(d_scr.term().clone()),
                    left: left.clone(),
                    right: right.clone(),
                    body: Box::new(d_body.term().clone()),
                };
                let node = Derivation::node(Rule::Cp, basis, term, ty, vec![d_scr, d_body]);
                Ok(self.contract(node, shared))
            }
            Term::Derelict(inner) => {
                self.require_extended(t)?;
                let d = self.synth(inner)?;
                let Ty::Bang(sigma) = d.ty().clone() else {
                    return Err(TypeError::ArgTypeMismatch {
                        subject: show(t),
                        expected: "!-type".to_string(),
                        found: d.ty().clone(),
                    });
                };
                let basis = d.basis().clone();
                Ok(Derivation::node(Rule::Dr, basis, t.clone(), (*sigma).clone(), vec![d]))
            }
            Term::PromoteIn { .. } => Err(TypeError::UntypableForm { subject: show(t) }),
        }
    }

    fn require_extended(&self, t: &Term) -> Result<(), TypeError> {
        if self.mode == Mode::Extended {
            Ok(())
        } else {
            Err(TypeError::ExtensionDisabled { subject: show(t) })
        }
    }

    /// Moves binder `name` to the last basis slot, weakening it in if unused.
    /// Rejects unused higher binders and cross-kind name collisions.
    fn bind_last(
        &mut self,
        d: Derivation,
        name: &str,
        kind: VarKind,
        ann: &Ty,
    ) -> Result<Derivation, TypeError> {
        if kind != VarKind::Stable {
            // A plain binder must not collide with a free plain variable of
            // the other kind: the surface syntax could not express the result.
            let other = if kind == VarKind::Ground { VarKind::Higher } else { VarKind::Ground };
            if d.basis().lookup(name, other).is_some() {
                return Err(TypeError::KindMismatch {
                    name: name.to_string(),
                    detail: format!("used at both {} and {} kind", kind, other),
                });
            }
        }
        match d.basis().position(name, kind) {
            Some(p) => Ok(d.move_to_end(p)),
            None => match kind {
                VarKind::Higher => {
                    Err(TypeError::LinearVariableUnused { name: name.to_string() })
                }
                VarKind::Ground => Ok(d.weaken_ground(name.to_string())),
                VarKind::Stable => Ok(d.weaken_stable(name.to_string(), ann.clone())),
            },
        }
    }

    /// Renames ground/stable variables shared between the multiplicative
    /// `gamma` side and every `delta` side apart, recording the pending
    /// contractions. Shared higher variables are linearity errors.
    fn share(
        &mut self,
        gamma: Derivation,
        deltas: Vec<Derivation>,
    ) -> Result<(Derivation, Vec<Derivation>, Vec<SharedVar>), TypeError> {
        let delta_basis = deltas[0].basis().clone();
        let mut gamma = gamma;
        let mut deltas = deltas;
        let mut shared = Vec::new();
        for e in delta_basis.entries() {
            if gamma.basis().lookup(&e.name, e.kind).is_none() {
                continue;
            }
            if e.kind == VarKind::Higher {
                return Err(TypeError::LinearVariableReused { name: e.name.clone() });
            }
            let left = self.gen.fresh(&e.name);
            let right = self.gen.fresh(&e.name);
            gamma = gamma.rename_free(&e.name, e.kind, &left);
            deltas = deltas
                .into_iter()
                .map(|d| d.rename_free(&e.name, e.kind, &right))
                .collect();
            shared.push(SharedVar { name: e.name.clone(), kind: e.kind, left, right });
        }
        // Cross-kind plain-name collisions cannot be printed unambiguously.
        for e in delta_basis.entries() {
            if e.kind == VarKind::Stable {
                continue;
            }
            let other = if e.kind == VarKind::Ground { VarKind::Higher } else { VarKind::Ground };
            if gamma.basis().lookup(&e.name, other).is_some() {
                return Err(TypeError::KindMismatch {
                    name: e.name.clone(),
                    detail: format!("used at both {} and {} kind", e.kind, other),
                });
            }
        }
        Ok((gamma, deltas, shared))
    }

    /// `share` for copy nodes: the delta derivation carries its two binders
    /// in the last two slots; they never participate in sharing.
    fn share_copy(
        &mut self,
        gamma: Derivation,
        delta: Derivation,
        split_at: usize,
    ) -> Result<(Derivation, Derivation, Vec<SharedVar>), TypeError> {
        let mut gamma = gamma;
        let mut delta = delta;
        let mut shared = Vec::new();
        let free_entries = delta.basis().entries()[..split_at].to_vec();
        for e in &free_entries {
            if gamma.basis().lookup(&e.name, e.kind).is_none() {
                continue;
            }
            if e.kind == VarKind::Higher {
                return Err(TypeError::LinearVariableReused { name: e.name.clone() });
            }
            let left = self.gen.fresh(&e.name);
            let right = self.gen.fresh(&e.name);
            gamma = gamma.rename_free(&e.name, e.kind, &left);
            delta = delta.rename_free(&e.name, e.kind, &right);
            shared.push(SharedVar { name: e.name.clone(), kind: e.kind, left, right });
        }
        Ok((gamma, delta, shared))
    }

    /// Applies the pending contractions: bubbles each renamed pair to the
    /// end of the basis and adds a gc/sc node restoring the original name.
    fn contract(&mut self, node: Derivation, shared: Vec<SharedVar>) -> Derivation {
        let mut d = node;
        for sv in shared {
            let p_left = d.basis().position(&sv.left, sv.kind).expect("left copy present");
            d = d.move_to_end(p_left);
            let p_right = d.basis().position(&sv.right, sv.kind).expect("right copy present");
            d = d.move_to_end(p_right);
            let n = d.basis().len();
            debug_assert_eq!(d.basis().entries()[n - 2].name, sv.left);
            debug_assert_eq!(d.basis().entries()[n - 1].name, sv.right);
            let ty = d.basis().entries()[n - 1].ty.clone();
            let mut entries = d.basis().entries()[..n - 2].to_vec();
            entries.push(BasisEntry { name: sv.name.clone(), kind: sv.kind, ty });
            let term = subst_var(
                &subst_var(d.term(), &sv.left, sv.kind, &Term::var(&sv.name, sv.kind)),
                &sv.right,
                sv.kind,
                &Term::var(&sv.name, sv.kind),
            );
            let rule = if sv.kind == VarKind::Ground { Rule::Gc } else { Rule::Sc };
            let concl = Judgment {
                basis: Basis::from_entries_unchecked(entries),
                term,
                ty: d.concl.ty.clone(),
            };
            d = Derivation { rule, concl, premises: vec![d] };
        }
        d
    }

    /// Makes the two lif branch derivations share one identical basis:
    /// higher sets must already agree; ground/stable differences are
    /// weakened in and both bases are reordered to a common layout.
    fn equalize_branches(
        &mut self,
        l: Derivation,
        r: Derivation,
    ) -> Result<(Derivation, Derivation), TypeError> {
        let highers = |d: &Derivation| -> BTreeSet<String> {
            d.basis()
                .entries()
                .iter()
                .filter(|e| e.kind == VarKind::Higher)
                .map(|e| e.name.clone())
                .collect()
        };
        let hl = highers(&l);
        let hr = highers(&r);
        if hl != hr {
            let only_l: Vec<_> = hl.difference(&hr).cloned().collect();
            let only_r: Vec<_> = hr.difference(&hl).cloned().collect();
            return Err(TypeError::BranchLinearityMismatch {
                detail: format!(
                    "then-branch only: [{}]; else-branch only: [{}]",
                    only_l.join(", "),
                    only_r.join(", ")
                ),
            });
        }
        let mut l = l;
        let mut r = r;
        let l_basis = l.basis().clone();
        let r_basis = r.basis().clone();
        for e in r_basis.entries() {
            if l.basis().lookup(&e.name, e.kind).is_none() {
                l = match e.kind {
                    VarKind::Ground => l.weaken_ground(e.name.clone()),
                    VarKind::Stable => l.weaken_stable(e.name.clone(), e.ty.clone()),
                    VarKind::Higher => unreachable!("higher sets agree"),
                };
            }
        }
        for e in l_basis.entries() {
            if r.basis().lookup(&e.name, e.kind).is_none() {
                r = match e.kind {
                    VarKind::Ground => r.weaken_ground(e.name.clone()),
                    VarKind::Stable => r.weaken_stable(e.name.clone(), e.ty.clone()),
                    VarKind::Higher => unreachable!("higher sets agree"),
                };
            }
        }
        // Common order: left's entries first, then right-only entries.
        let mut target: Vec<(String, VarKind)> = l_basis
            .entries()
            .iter()
            .map(|e| (e.name.clone(), e.kind))
            .collect();
        for e in r_basis.entries() {
            if l_basis.lookup(&e.name, e.kind).is_none() {
                target.push((e.name.clone(), e.kind));
            }
        }
        Ok((l.reorder_to(&target), r.reorder_to(&target)))
    }
}

/// Concatenates multiplicative bases, enforcing disjointness.
fn concat_bases(gamma: &Basis, delta: &Basis) -> Result<Basis, TypeError> {
    let mut entries = gamma.entries().to_vec();
    for e in delta.entries() {
        if gamma.lookup(&e.name, e.kind).is_some() {
            // share() renames these away; reaching here is a checker bug
            // for ground/stable, and a linearity error for higher.
            return Err(TypeError::LinearVariableReused { name: e.name.clone() });
        }
        entries.push(e.clone());
    }
    Ok(Basis::from_entries_unchecked(entries))
}

fn run_checker(basis: &Basis, t: &Term, mode: Mode) -> Result<Derivation, TypeError> {
    let mut roots = BTreeSet::new();
    all_names(t, &mut roots);
    for e in basis.entries() {
        roots.insert(e.name.clone());
    }
    let mut ck = Checker {
        env: TyEnv { scopes: Vec::new(), root: basis },
        gen: NameGen::new(roots),
        mode,
    };
    let d = ck.synth(t)?;
    // Reconcile with the declared basis: weaken in unused ground/stable
    // entries, reject unused higher entries, and match the declared order.
    let mut d = d;
    for e in basis.entries() {
        if d.basis().lookup(&e.name, e.kind).is_some() {
            continue;
        }
        d = match e.kind {
            VarKind::Ground => d.weaken_ground(e.name.clone()),
            VarKind::Stable => d.weaken_stable(e.name.clone(), e.ty.clone()),
            VarKind::Higher => {
                return Err(TypeError::LinearVariableUnused { name: e.name.clone() })
            }
        };
    }
    let target: Vec<(String, VarKind)> =
        basis.entries().iter().map(|e| (e.name.clone(), e.kind)).collect();
    debug_assert_eq!(d.basis().len(), target.len());
    Ok(d.reorder_to(&target))
}

/// Infers the type of `t` under `basis` (core mode) and returns the
/// elaborated derivation.
pub fn infer(basis: &Basis, t: &Term) -> Result<(Ty, Derivation), TypeError> {
    infer_in_mode(basis, t, Mode::Core)
}

/// `infer` with the ground-promotion extension enabled.
pub fn infer_ext(basis: &Basis, t: &Term) -> Result<(Ty, Derivation), TypeError> {
    infer_in_mode(basis, t, Mode::Extended)
}

pub fn infer_in_mode(basis: &Basis, t: &Term, mode: Mode) -> Result<(Ty, Derivation), TypeError> {
    let d = run_checker(basis, t, mode)?;
    Ok((d.ty().clone(), d))
}

/// Checks `t` against a claimed type.
pub fn check(basis: &Basis, t: &Term, claimed: &Ty) -> Result<Derivation, TypeError> {
    check_in_mode(basis, t, claimed, Mode::Core)
}

pub fn check_in_mode(
    basis: &Basis,
    t: &Term,
    claimed: &Ty,
    mode: Mode,
) -> Result<Derivation, TypeError> {
    let (ty, d) = infer_in_mode(basis, t, mode)?;
    if ty == *claimed {
        Ok(d)
    } else {
        Err(TypeError::TypeMismatch { found: ty, claimed: claimed.clone() })
    }
}

// ---------------------------------------------------------------------------
// The validation kernel: every node must instantiate its rule schema.

pub fn validate_derivation(d: &Derivation) -> bool {
    validate_derivation_report(d).is_ok()
}

pub fn validate_derivation_report(d: &Derivation) -> Result<(), String> {
    for p in &d.premises {
        validate_derivation_report(p)?;
    }
    validate_node(d).map_err(|msg| format!("({}) {}: {}", d.rule, d.concl, msg))
}

fn well_formed_basis(b: &Basis) -> Result<(), String> {
    let mut plain = BTreeSet::new();
    let mut stable = BTreeSet::new();
    for e in b.entries() {
        let ok = match e.kind {
            VarKind::Ground => e.ty == Ty::Iota,
            VarKind::Higher => e.ty.is_arrow(),
            VarKind::Stable => true,
        };
        if !ok {
            return Err(format!("entry `{}` has kind {} but type {}", e.name, e.kind, e.ty));
        }
        let set = if e.kind == VarKind::Stable { &mut stable } else { &mut plain };
        if !set.insert(e.name.clone()) {
            return Err(format!("duplicate basis name `{}`", e.name));
        }
    }
    Ok(())
}

fn disjoint(a: &Basis, b: &Basis) -> bool {
    b.entries().iter().all(|e| a.lookup(&e.name, e.kind).is_none())
}

fn expect_premises(d: &Derivation, n: usize) -> Result<(), String> {
    if d.premises.len() == n {
        Ok(())
    } else {
        Err(format!("expected {} premises, found {}", n, d.premises.len()))
    }
}

fn validate_node(d: &Derivation) -> Result<(), String> {
    let c = &d.concl;
    well_formed_basis(&c.basis)?;
    match d.rule {
        Rule::Z => {
            expect_premises(d, 0)?;
            if !c.basis.is_empty() || c.term != Term::Zero || c.ty != Ty::Iota {
                return Err("schema is `|- 0 : iota`".into());
            }
        }
        Rule::S | Rule::P => {
            expect_premises(d, 0)?;
            let want = if d.rule == Rule::S { Term::Succ } else { Term::Pred };
            if !c.basis.is_empty() || c.term != want || c.ty != Ty::arrow(Ty::Iota, Ty::Iota) {
                return Err("schema is `|- succ/pred : iota -o iota`".into());
            }
        }
        Rule::Gv | Rule::Hv | Rule::Sv => {
            expect_premises(d, 0)?;
            let want_kind = match d.rule {
                Rule::Gv => VarKind::Ground,
                Rule::Hv => VarKind::Higher,
                _ => VarKind::Stable,
            };
            let [e] = c.basis.entries() else {
                return Err("variable axiom needs a one-entry basis".into());
            };
            let Term::Var { name, kind } = &c.term else {
                return Err("subject must be a variable".into());
            };
            if *kind != want_kind || e.kind != want_kind || *name != e.name || c.ty != e.ty {
                return Err("basis entry must match the variable and type".into());
            }
            if d.rule == Rule::Gv && c.ty != Ty::Iota {
                return Err("ground variables have type iota".into());
            }
            if d.rule == Rule::Hv && !c.ty.is_arrow() {
                return Err("higher variables have arrow type".into());
            }
        }
        Rule::Lam => {
            expect_premises(d, 1)?;
            let p = &d.premises[0];
            let Term::Lam { name, ann, body } = &c.term else {
                return Err("subject must be a lambda".into());
            };
            let n = p.concl.basis.len();
            if n == 0 {
                return Err("premise basis must end with the binder".into());
            }
            let last = &p.concl.basis.entries()[n - 1];
            let Some(kind) = ann.binder_kind() else {
                return Err("unbindable annotation".into());
            };
            if last.kind != kind || last.ty != *ann {
                return Err("binder entry must match the annotation".into());
            }
            if c.basis.entries() != &p.concl.basis.entries()[..n - 1] {
                return Err("conclusion basis must drop exactly the binder".into());
            }
            let expected_body =
                subst_var(body, name, kind, &Term::var(&last.name, kind));
            if p.concl.term != expected_body {
                return Err("premise subject must be the body".into());
            }
            if c.ty != Ty::arrow(ann.clone(), p.concl.ty.clone()) {
                return Err("conclusion type must be ann -o body type".into());
            }
        }
        Rule::Ap => {
            expect_premises(d, 2)?;
            let (f, a) = (&d.premises[0].concl, &d.premises[1].concl);
            let Term::App(tf, ta) = &c.term else {
                return Err("subject must be an application".into());
            };
            if **tf != f.term || **ta != a.term {
                return Err("premise subjects must be the function and argument".into());
            }
            let Ty::Arrow(dom, cod) = &f.ty else {
                return Err("function premise must have arrow type".into());
            };
            if a.ty != **dom || c.ty != **cod {
                return Err("argument/result types must line up".into());
            }
            if !disjoint(&f.basis, &a.basis) {
                return Err("contexts must be disjoint".into());
            }
            let mut entries = f.basis.entries().to_vec();
            entries.extend(a.basis.entries().iter().cloned());
            if c.basis.entries() != entries.as_slice() {
                return Err("conclusion basis must concatenate the premises'".into());
            }
        }
        Rule::LIf => {
            expect_premises(d, 3)?;
            let (m, l, r) =
                (&d.premises[0].concl, &d.premises[1].concl, &d.premises[2].concl);
            let Term::LIf { cond, then_br, else_br } = &c.term else {
                return Err("subject must be a lif".into());
            };
            if **cond != m.term || **then_br != l.term || **else_br != r.term {
                return Err("premise subjects must be condition and branches".into());
            }
            if m.ty != Ty::Iota || l.ty != Ty::Iota || r.ty != Ty::Iota || c.ty != Ty::Iota {
                return Err("lif types at iota".into());
            }
            if l.basis != r.basis {
                return Err("branch bases must be identical".into());
            }
            if !disjoint(&m.basis, &l.basis) {
                return Err("contexts must be disjoint".into());
            }
            let mut entries = m.basis.entries().to_vec();
            entries.extend(l.basis.entries().iter().cloned());
            if c.basis.entries() != entries.as_slice() {
                return Err("conclusion basis must concatenate condition and branch bases".into());
            }
        }
        Rule::Ex(i) => {
            expect_premises(d, 1)?;
            let p = &d.premises[0].concl;
            if p.term != c.term || p.ty != c.ty {
                return Err("exchange preserves subject and type".into());
            }
            let n = c.basis.len();
            if i + 1 >= n || p.basis.len() != n {
                return Err("exchange position out of range".into());
            }
            let mut swapped = p.basis.entries().to_vec();
            swapped.swap(i, i + 1);
            if c.basis.entries() != swapped.as_slice() {
                return Err("conclusion must swap exactly the two adjacent entries".into());
            }
        }
        Rule::Gw | Rule::Sw => {
            expect_premises(d, 1)?;
            let p = &d.premises[0].concl;
            if p.term != c.term || p.ty != c.ty {
                return Err("weakening preserves subject and type".into());
            }
            let n = c.basis.len();
            if n == 0 || p.basis.entries() != &c.basis.entries()[..n - 1] {
                return Err("weakening appends one entry".into());
            }
            let e = &c.basis.entries()[n - 1];
            let want = if d.rule == Rule::Gw { VarKind::Ground } else { VarKind::Stable };
            if e.kind != want {
                return Err("weakened entry has the wrong kind".into());
            }
            if free_vars(&c.term).contains(&e.name, e.kind) {
                return Err("weakened variable occurs free in the subject".into());
            }
        }
        Rule::Gc | Rule::Sc => {
            expect_premises(d, 1)?;
            let p = &d.premises[0].concl;
            if p.ty != c.ty {
                return Err("contraction preserves the type".into());
            }
            let want = if d.rule == Rule::Gc { VarKind::Ground } else { VarKind::Stable };
            let n = p.basis.len();
            if n < 2 || c.basis.len() != n - 1 {
                return Err("contraction merges the last two entries".into());
            }
            let (e1, e2) = (&p.basis.entries()[n - 2], &p.basis.entries()[n - 1]);
            let e = &c.basis.entries()[n - 2];
            if e1.kind != want || e2.kind != want || e.kind != want {
                return Err("contracted entries have the wrong kind".into());
            }
            if e1.ty != e2.ty || e.ty != e1.ty {
                return Err("contracted entries must share one type".into());
            }
            if c.basis.entries()[..n - 2] != p.basis.entries()[..n - 2] {
                return Err("contraction only touches the last two entries".into());
            }
            let merged = subst_var(
                &subst_var(&p.term, &e1.name, want, &Term::var(&e.name, want)),
                &e2.name,
                want,
                &Term::var(&e.name, want),
            );
            if merged != c.term {
                return Err("conclusion subject must identify the two copies".into());
            }
        }
        Rule::Mu => {
            expect_premises(d, 1)?;
            let p = &d.premises[0].concl;
            let Term::Mu { name, ann, body } = &c.term else {
                return Err("subject must be a mu".into());
            };
            if *ann != c.ty || p.ty != c.ty {
                return Err("mu types at its annotation".into());
            }
            let n = p.basis.len();
            if n == 0 {
                return Err("premise basis must end with the bound stable variable".into());
            }
            let last = &p.basis.entries()[n - 1];
            if last.kind != VarKind::Stable || last.ty != *ann {
                return Err("bound variable must be stable at the annotation type".into());
            }
            if c.basis.entries() != &p.basis.entries()[..n - 1] {
                return Err("conclusion basis must drop exactly the binder".into());
            }
            // Context restriction: grounds first, then stables, nothing else.
            let mut seen_stable = false;
            for e in c.basis.entries() {
                match e.kind {
                    VarKind::Higher => return Err("mu context admits no higher variables".into()),
                    VarKind::Stable => seen_stable = true,
                    VarKind::Ground => {
                        if seen_stable {
                            return Err("mu context lists grounds before stables".into());
                        }
                    }
                }
            }
            let expected_body =
                subst_var(body, name, VarKind::Stable, &Term::var_s(&last.name));
            if p.term != expected_body {
                return Err("premise subject must be the body".into());
            }
        }
        Rule::Pr => {
            expect_premises(d, 1)?;
            let p = &d.premises[0].concl;
            let Term::Promote(inner) = &c.term else {
                return Err("subject must be a promotion".into());
            };
            if **inner != p.term || p.ty != Ty::Iota || c.ty != Ty::bang(Ty::Iota) {
                return Err("schema is promote : iota => !iota".into());
            }
            if c.basis != p.basis {
                return Err("promotion preserves the basis".into());
            }
        }
        Rule::Ds => {
            expect_premises(d, 2)?;
            let (m, nb) = (&d.premises[0].concl, &d.premises[1].concl);
            let Term::Discard { scrutinee, body } = &c.term else {
                return Err("subject must be a discard".into());
            };
            if **scrutinee != m.term || **body != nb.term {
                return Err("premise subjects must be scrutinee and body".into());
            }
            if m.ty != Ty::Iota || c.ty != nb.ty {
                return Err("discard scrutinee is iota; result type is the body's".into());
            }
            if !disjoint(&m.basis, &nb.basis) {
                return Err("contexts must be disjoint".into());
            }
            let mut entries = m.basis.entries().to_vec();
            entries.extend(nb.basis.entries().iter().cloned());
            if c.basis.entries() != entries.as_slice() {
                return Err("conclusion basis must concatenate the premises'".into());
            }
        }
        Rule::Cp => {
            expect_premises(d, 2)?;
            let (m, nb) = (&d.premises[0].concl, &d.premises[1].concl);
            let Term::Copy { scrutinee, left, right, body } = &c.term else {
                return Err("subject must be a copy".into());
            };
            if **scrutinee != m.term || m.ty != Ty::Iota || c.ty != nb.ty {
                return Err("copy scrutinee is iota; result type is the body's".into());
            }
            let n = nb.basis.len();
            if n < 2 {
                return Err("body premise must end with the two copy binders".into());
            }
            let (e1, e2) = (&nb.basis.entries()[n - 2], &nb.basis.entries()[n - 1]);
            if e1.kind != VarKind::Ground || e2.kind != VarKind::Ground {
                return Err("copy binders are ground".into());
            }
            let expected_body = subst_var(
                &subst_var(body, left, VarKind::Ground, &Term::var_g(&e1.name)),
                right,
                VarKind::Ground,
                &Term::var_g(&e2.name),
            );
            if nb.term != expected_body {
                return Err("body premise subject must be the continuation".into());
            }
            let delta = Basis::from_entries_unchecked(nb.basis.entries()[..n - 2].to_vec());
            if !disjoint(&m.basis, &delta) {
                return Err("contexts must be disjoint".into());
            }
            let mut entries = m.basis.entries().to_vec();
            entries.extend(delta.entries().iter().cloned());
            if c.basis.entries() != entries.as_slice() {
                return Err("conclusion basis drops the binders and concatenates".into());
            }
        }
        Rule::Dr => {
            expect_premises(d, 1)?;
            let p = &d.premises[0].concl;
            let Term::Derelict(inner) = &c.term else {
                return Err("subject must be a dereliction".into());
            };
            if **inner != p.term {
                return Err("premise subject must be the argument".into());
            }
            if p.ty != Ty::bang(c.ty.clone()) {
                return Err("dereliction strips one !".into());
            }
            if c.basis != p.basis {
                return Err("dereliction preserves the basis".into());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_judgment, parse_term};
    use crate::syntax::numeral;

    fn infer_closed(src: &str) -> Result<(Ty, Derivation), TypeError> {
        infer(&Basis::empty(), &parse_term(src).unwrap())
    }

    fn infer_j(src: &str) -> Result<(Ty, Derivation), TypeError> {
        let j = parse_judgment(src).unwrap();
        infer(&j.basis, &j.term)
    }

    #[test]
    fn constants() {
        let (ty, d) = infer_closed("succ").unwrap();
        assert_eq!(ty, Ty::arrow(Ty::Iota, Ty::Iota));
        assert!(validate_derivation(&d));
        let (ty, _) = infer_closed("0").unwrap();
        assert_eq!(ty, Ty::Iota);
        let (ty, _) = infer_closed("pred").unwrap();
        assert_eq!(ty, Ty::arrow(Ty::Iota, Ty::Iota));
    }

    #[test]
    fn numerals_type_at_iota() {
        for k in [0u64, 1, 5] {
            let (ty, d) = infer(&Basis::empty(), &numeral(k)).unwrap();
            assert_eq!(ty, Ty::Iota);
            assert!(validate_derivation(&d));
        }
    }

    #[test]
    fn higher_reuse_is_rejected() {
        let err = infer_closed("\\f:iota-o iota.\\x:iota. f (f x)").unwrap_err();
        assert_eq!(err, TypeError::LinearVariableReused { name: "f".into() });
    }

    #[test]
    fn higher_weakening_is_rejected() {
        let err = infer_closed("\\f:iota-o iota. 0").unwrap_err();
        assert_eq!(err, TypeError::LinearVariableUnused { name: "f".into() });
    }

    #[test]
    fn ground_sharing_elaborates_to_gc() {
        let (ty, d) = infer_closed("\\x:iota. lif x then x else succ x").unwrap();
        assert_eq!(ty, Ty::arrow(Ty::Iota, Ty::Iota));
        assert!(validate_derivation(&d), "{}", d);
        fn count_rule(d: &Derivation, r: fn(&Rule) -> bool) -> usize {
            d.premises.iter().map(|p| count_rule(p, r)).sum::<usize>()
                + usize::from(r(&d.rule))
        }
        // One contraction joins the condition copy with the branches' copy;
        // the two branches share x additively, needing no contraction.
        assert_eq!(count_rule(&d, |r| matches!(r, Rule::Gc)), 1);
    }

    #[test]
    fn mu_rejects_free_higher_variables() {
        let err = infer_j("h:iota-o iota |- mu $g:iota. h 0 : iota").unwrap_err();
        assert_eq!(err, TypeError::MuBodyHasLinearFreeVars { name: "h".into() });
    }

    #[test]
    fn mu_with_stable_recursion() {
        let (ty, d) = infer_closed("mu $f:iota.$f").unwrap();
        assert_eq!(ty, Ty::Iota);
        assert!(validate_derivation(&d), "{}", d);
    }

    #[test]
    fn add_term_types() {
        let (ty, d) = infer_closed(
            "mu $a:iota-o iota-o iota.\\x:iota.\\y:iota. lif x then y else succ ($a (pred x) y)",
        )
        .unwrap();
        assert_eq!(ty, Ty::arrow(Ty::Iota, Ty::arrow(Ty::Iota, Ty::Iota)));
        assert!(validate_derivation(&d), "{}", d);
    }

    #[test]
    fn stable_sharing_elaborates_to_sc() {
        let j = parse_judgment("$f:iota |- lif $f then $f else $f : iota").unwrap();
        let d = check(&j.basis, &j.term, &j.ty).unwrap();
        assert!(validate_derivation(&d), "{}", d);
        fn has_sc(d: &Derivation) -> bool {
            matches!(d.rule, Rule::Sc) || d.premises.iter().any(has_sc)
        }
        assert!(has_sc(&d));
    }

    #[test]
    fn check_rejects_wrong_claim() {
        let t = parse_term("0").unwrap();
        assert!(check(&Basis::empty(), &t, &Ty::Iota).is_ok());
        let err = check(&Basis::empty(), &t, &Ty::arrow(Ty::Iota, Ty::Iota)).unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }));
    }

    #[test]
    fn lif_requires_ground_types() {
        let err = infer_closed("lif succ then 0 else 1").unwrap_err();
        assert!(matches!(err, TypeError::ConditionNotGround { .. }));
        let err = infer_closed("lif 0 then succ else succ").unwrap_err();
        assert!(matches!(err, TypeError::BranchNotGround { .. }));
    }

    #[test]
    fn branch_linearity_mismatch() {
        let err =
            infer_j("f:iota-o iota |- \\x:iota. lif x then f x else 0 : iota -o iota")
                .unwrap_err();
        assert!(matches!(err, TypeError::BranchLinearityMismatch { .. }), "{:?}", err);
    }

    #[test]
    fn branches_share_higher_additively() {
        let (ty, d) =
            infer_j("f:iota-o iota |- \\x:iota. lif x then f 0 else f 1 : iota").unwrap();
        assert_eq!(ty, Ty::arrow(Ty::Iota, Ty::Iota));
        assert!(validate_derivation(&d), "{}", d);
    }

    #[test]
    fn condition_cannot_share_a_higher_variable_with_branches() {
        let err = infer_j("f:iota-o iota |- lif f 0 then f 1 else f 2 : iota").unwrap_err();
        assert_eq!(err, TypeError::LinearVariableReused { name: "f".into() });
    }

    #[test]
    fn root_reconciliation_honors_declared_basis() {
        // Unused ground/stable entries are weakened in, order is respected.
        let j = parse_judgment("x:iota, y:iota, $F:iota |- succ y : iota").unwrap();
        let (ty, d) = infer(&j.basis, &j.term).unwrap();
        assert_eq!(ty, Ty::Iota);
        assert_eq!(d.basis(), &j.basis);
        assert!(validate_derivation(&d), "{}", d);
        // Unused higher entries are linearity errors.
        let j = parse_judgment("f:iota-o iota |- 0 : iota").unwrap();
        let err = infer(&j.basis, &j.term).unwrap_err();
        assert_eq!(err, TypeError::LinearVariableUnused { name: "f".into() });
    }

    #[test]
    fn unbound_variables_are_reported() {
        let t = Term::var_g("nope");
        let err = infer(&Basis::empty(), &t).unwrap_err();
        assert_eq!(
            err,
            TypeError::UnboundVariable { name: "nope".into(), kind: VarKind::Ground }
        );
    }

    #[test]
    fn determinism_of_elaboration() {
        let src = "\\x:iota. lif x then x else succ x";
        let t = parse_term(src).unwrap();
        let (_, d1) = infer(&Basis::empty(), &t).unwrap();
        let (_, d2) = infer(&Basis::empty(), &t).unwrap();
        assert_eq!(format!("{}", d1), format!("{}", d2));
    }

    #[test]
    fn extension_gating() {
        let t = parse_term("discard 0 in 1").unwrap();
        let err = infer(&Basis::empty(), &t).unwrap_err();
        assert!(matches!(err, TypeError::ExtensionDisabled { .. }));
        let (ty, d) = infer_ext(&Basis::empty(), &t).unwrap();
        assert_eq!(ty, Ty::Iota);
        assert!(validate_derivation(&d), "{}", d);
    }

    #[test]
    fn extension_typing() {
        let (ty, d) =
            infer_ext(&Basis::empty(), &parse_term("copy 2 as x, y in lif x then y else 0").unwrap())
                .unwrap();
        assert_eq!(ty, Ty::Iota);
        assert!(validate_derivation(&d), "{}", d);

        let (ty, d) = infer_ext(&Basis::empty(), &parse_term("promote succ 0").unwrap()).unwrap();
        assert_eq!(ty, Ty::bang(Ty::Iota));
        assert!(validate_derivation(&d), "{}", d);

        let (ty, d) =
            infer_ext(&Basis::empty(), &parse_term("derelict (promote 3)").unwrap()).unwrap();
        assert_eq!(ty, Ty::Iota);
        assert!(validate_derivation(&d), "{}", d);

        // The general promote-in form has no typing rule.
        let t = parse_term("promote 1 as $z in derelict $z").unwrap();
        let err = infer_ext(&Basis::empty(), &t).unwrap_err();
        assert!(matches!(err, TypeError::UntypableForm { .. }));
    }

    #[test]
    fn validation_kernel_rejects_corrupted_nodes() {
        // Overlapping contexts in an ap node.
        let x = BasisEntry::ground("x");
        let bad = Derivation {
            rule: Rule::Ap,
            concl: Judgment {
                basis: Basis::from_entries_unchecked(vec![x.clone(), x.clone()]),
                term: Term::app(Term::var_h("x"), Term::var_g("x")),
                ty: Ty::Iota,
            },
            premises: vec![
                Derivation::leaf(
                    Rule::Hv,
                    Basis::from_entries_unchecked(vec![BasisEntry::higher(
                        "x",
                        Ty::arrow(Ty::Iota, Ty::Iota),
                    )]),
                    Term::var_h("x"),
                    Ty::arrow(Ty::Iota, Ty::Iota),
                ),
                Derivation::leaf(
                    Rule::Gv,
                    Basis::from_entries_unchecked(vec![x.clone()]),
                    Term::var_g("x"),
                    Ty::Iota,
                ),
            ],
        };
        assert!(!validate_derivation(&bad));

        // Higher entry in a mu context.
        let f = BasisEntry::higher("f", Ty::arrow(Ty::Iota, Ty::Iota));
        let body = Term::app(Term::var_h("f"), Term::Zero);
        let prem = Derivation::leaf(
            Rule::Ap, // contents do not matter; node check is local
            Basis::from_entries_unchecked(vec![
                f.clone(),
                BasisEntry::stable("g", Ty::Iota),
            ]),
            body.clone(),
            Ty::Iota,
        );
        let bad = Derivation {
            rule: Rule::Mu,
            concl: Judgment {
                basis: Basis::from_entries_unchecked(vec![f]),
                term: Term::mu("g", Ty::Iota, body),
                ty: Ty::Iota,
            },
            premises: vec![prem],
        };
        assert!(!validate_derivation(&bad));
    }

    #[test]
    fn derivation_display_is_indented() {
        let (_, d) = infer_closed("succ 0").unwrap();
        let text = format!("{}", d);
        assert!(text.contains("(ap)"), "{}", text);
        assert!(text.contains("\n  "), "{}", text);
    }
}
