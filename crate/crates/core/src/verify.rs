//! Verification harness: a seeded generator for well-typed terms, the
//! categorical law suite, substitution and soundness checks, and the
//! incompleteness witness pair.

use std::collections::{HashSet, VecDeque};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::model::{
    compose, insert_entry, interp_entries, interpret, pipeline, promote_entries, semantic_eq,
    Backend, Eq3, ModelError, Mor, ObsSpec,
};
use crate::reduce::{find_redexes_in_mode, step_at, trace_bounded};
use crate::syntax::{numeral, subst_var, Basis, BasisEntry, Term, Ty, VarKind};
use crate::typecheck::infer_in_mode;
use crate::Mode;

// ---------------------------------------------------------------------------
// Term generation.

/// Attempts per `gen_term` call before giving up.
const GEN_ATTEMPTS: u32 = 128;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum GenError {
    #[error("no well-typed term of type `{target}` found within {attempts} attempts")]
    Exhausted { target: Ty, attempts: u32 },
}

/// The generator's view of the basis: ground and stable entries may be used
/// any number of times, higher entries must each be consumed exactly once in
/// the subtree they are routed to.
#[derive(Clone, Default)]
struct Scope {
    shared: Vec<BasisEntry>,
    linear: Vec<BasisEntry>,
}

impl Scope {
    fn from_basis(basis: &Basis) -> Scope {
        let mut sc = Scope::default();
        for e in basis.entries() {
            match e.kind {
                VarKind::Higher => sc.linear.push(e.clone()),
                _ => sc.shared.push(e.clone()),
            }
        }
        sc
    }

    fn with_shared(&self, e: BasisEntry) -> Scope {
        let mut sc = self.clone();
        sc.shared.push(e);
        sc
    }

    fn with_linear(&self, e: BasisEntry) -> Scope {
        let mut sc = self.clone();
        sc.linear.push(e);
        sc
    }
}

struct Gen {
    rng: ChaCha8Rng,
    mode: Mode,
    numeral_bound: u64,
    fresh: u32,
    depth_cap: u32,
}

impl Gen {
    fn fresh_name(&mut self, stem: &str) -> String {
        self.fresh += 1;
        format!("{}{}", stem, self.fresh)
    }

    fn rand_numeral(&mut self) -> Term {
        // A numeral k costs k+1 nodes, so lean small to stay within size
        // budgets; reach the full bound occasionally.
        let cap = if self.rng.gen_bool(0.2) { self.numeral_bound } else { self.numeral_bound.min(2) };
        numeral(self.rng.gen_range(0..=cap))
    }

    /// Routes each higher entry to one of two children of a multiplicative
    /// node.
    fn split_linear(&mut self, linear: &[BasisEntry]) -> (Vec<BasisEntry>, Vec<BasisEntry>) {
        let mut l = Vec::new();
        let mut r = Vec::new();
        for e in linear {
            if self.rng.gen_bool(0.5) {
                l.push(e.clone());
            } else {
                r.push(e.clone());
            }
        }
        (l, r)
    }

    /// A minimal term of the target type. Consumes at most one pending
    /// higher entry, by applying it to closed arguments until its type
    /// bottoms out at the target.
    fn close(&mut self, sc: &Scope, target: &Ty, depth: u32) -> Option<Term> {
        if depth > 24 || sc.linear.len() > 1 {
            return None;
        }
        if let Some(f) = sc.linear.first() {
            let inner = Scope { shared: sc.shared.clone(), linear: Vec::new() };
            let mut head = Term::var_h(&f.name);
            let mut cur = f.ty.clone();
            loop {
                if cur == *target {
                    return Some(head);
                }
                match cur {
                    Ty::Arrow(a, b) => {
                        let arg = self.close(&inner, &a, depth + 1)?;
                        head = Term::app(head, arg);
                        cur = *b;
                    }
                    _ => return None,
                }
            }
        }
        match target {
            Ty::Iota => {
                let mut opts: Vec<Term> = sc
                    .shared
                    .iter()
                    .filter(|e| e.ty == Ty::Iota)
                    .map(|e| Term::var(&e.name, e.kind))
                    .collect();
                opts.push(self.rand_numeral());
                let i = self.rng.gen_range(0..opts.len());
                Some(opts.swap_remove(i))
            }
            Ty::Arrow(a, b) => {
                let mut opts: Vec<Term> = sc
                    .shared
                    .iter()
                    .filter(|e| e.kind == VarKind::Stable && e.ty == *target)
                    .map(|e| Term::var_s(&e.name))
                    .collect();
                if **a == Ty::Iota && **b == Ty::Iota {
                    opts.push(Term::Succ);
                    opts.push(Term::Pred);
                }
                if opts.is_empty() || self.rng.gen_bool(0.3) {
                    let (name, kind) = match a.binder_kind() {
                        Some(VarKind::Ground) => (self.fresh_name("x"), VarKind::Ground),
                        _ => (self.fresh_name("f"), VarKind::Higher),
                    };
                    let entry = BasisEntry { name: name.clone(), kind, ty: (**a).clone() };
                    let body_sc = match kind {
                        VarKind::Higher => sc.with_linear(entry),
                        _ => sc.with_shared(entry),
                    };
                    let body = self.close(&body_sc, b, depth + 1)?;
                    opts.push(Term::lam(name, (**a).clone(), body));
                }
                let i = self.rng.gen_range(0..opts.len());
                Some(opts.swap_remove(i))
            }
            Ty::Bang(s) => {
                if self.mode != Mode::Extended || **s != Ty::Iota {
                    return None;
                }
                let inner = self.close(sc, s, depth + 1)?;
                Some(Term::Promote(Box::new(inner)))
            }
        }
    }

    fn gen(&mut self, sc: Scope, target: &Ty, size: u32, depth: u32) -> Option<Term> {
        if depth >= self.depth_cap || size <= 1 {
            return self.close(&sc, target, depth);
        }
        for _ in 0..6 {
            let roll = self.rng.gen_range(0u32..100);
            let got = match target {
                Ty::Iota => self.gen_iota(&sc, size, depth, roll),
                Ty::Arrow(..) => self.gen_arrow(&sc, target, size, depth, roll),
                Ty::Bang(..) => self.close(&sc, target, depth),
            };
            if got.is_some() {
                return got;
            }
        }
        self.close(&sc, target, depth)
    }

    fn gen_iota(&mut self, sc: &Scope, size: u32, depth: u32, roll: u32) -> Option<Term> {
        let d = depth + 1;
        match roll {
            0..=13 => Some(Term::succ_of(self.gen(sc.clone(), &Ty::Iota, size - 1, d)?)),
            14..=21 if size >= 3 => {
                let inner = self.gen(sc.clone(), &Ty::Iota, size - 2, d)?;
                Some(Term::pred_of(Term::succ_of(inner)))
            }
            22..=27 => Some(Term::pred_of(self.gen(sc.clone(), &Ty::Iota, size - 1, d)?)),
            28..=43 if size >= 4 => {
                // Conditional; the scrutinee leans numeral-ward so both
                // branch rules fire often.
                let (for_cond, for_branches) = self.split_linear(&sc.linear);
                let cond_sc = Scope { shared: sc.shared.clone(), linear: for_cond };
                let br_sc = Scope { shared: sc.shared.clone(), linear: for_branches };
                let budget = (size - 1) / 3;
                let cond = if self.rng.gen_bool(0.5) {
                    self.close(&cond_sc, &Ty::Iota, d)?
                } else {
                    self.gen(cond_sc, &Ty::Iota, budget.max(1), d)?
                };
                let then_br = self.gen(br_sc.clone(), &Ty::Iota, budget.max(1), d)?;
                let else_br = self.gen(br_sc, &Ty::Iota, budget.max(1), d)?;
                Some(Term::lif(cond, then_br, else_br))
            }
            44..=67 if size >= 4 => {
                let arg_ty = if self.rng.gen_bool(0.7) {
                    Ty::Iota
                } else {
                    Ty::arrow(Ty::Iota, Ty::Iota)
                };
                let (for_fun, for_arg) = self.split_linear(&sc.linear);
                let fun_sc = Scope { shared: sc.shared.clone(), linear: for_fun };
                let arg_sc = Scope { shared: sc.shared.clone(), linear: for_arg };
                let s1 = self.rng.gen_range(1..size - 1);
                let s2 = size - 1 - s1;
                let fun = self.gen(fun_sc, &Ty::arrow(arg_ty.clone(), Ty::Iota), s1.max(1), d)?;
                let arg = self.gen(arg_sc, &arg_ty, s2.max(1), d)?;
                Some(Term::app(fun, arg))
            }
            68..=75 if size >= 4 => {
                // An immediate ground redex: (\x. body) applied to a numeral.
                let name = self.fresh_name("x");
                let body_sc = sc.with_shared(BasisEntry::ground(&name));
                let body = self.gen(body_sc, &Ty::Iota, size - 3, d)?;
                Some(Term::app(Term::lam(name, Ty::Iota, body), self.rand_numeral()))
            }
            76..=83 if size >= 5 => {
                // An immediate higher redex: (\f. body) applied to an arrow.
                let name = self.fresh_name("f");
                let fun_ty = Ty::arrow(Ty::Iota, Ty::Iota);
                let body_sc = sc.with_linear(BasisEntry::higher(&name, fun_ty.clone()));
                let body = self.gen(body_sc, &Ty::Iota, size - 3, d)?;
                let arg_sc = Scope { shared: sc.shared.clone(), linear: Vec::new() };
                let arg = self.close(&arg_sc, &fun_ty, d)?;
                Some(Term::app(Term::lam(name, fun_ty, body), arg))
            }
            84..=88 if sc.linear.is_empty() && size >= 3 => {
                let name = self.fresh_name("F");
                let body_sc = sc.with_shared(BasisEntry::stable(&name, Ty::Iota));
                let body = self.gen(body_sc, &Ty::Iota, size - 1, d)?;
                Some(Term::mu(name, Ty::Iota, body))
            }
            89..=92 if self.mode == Mode::Extended && size >= 4 => {
                let (for_scr, for_body) = self.split_linear(&sc.linear);
                let scr_sc = Scope { shared: sc.shared.clone(), linear: for_scr };
                let body_sc = Scope { shared: sc.shared.clone(), linear: for_body };
                let scr = if self.rng.gen_bool(0.6) {
                    self.close(&scr_sc, &Ty::Iota, d)?
                } else {
                    self.gen(scr_sc, &Ty::Iota, (size - 1) / 2, d)?
                };
                let body = self.gen(body_sc, &Ty::Iota, (size - 1) / 2, d)?;
                Some(Term::Discard { scrutinee: Box::new(scr), body: Box::new(body) })
            }
            93..=96 if self.mode == Mode::Extended && size >= 5 => {
                let (for_scr, for_body) = self.split_linear(&sc.linear);
                let scr_sc = Scope { shared: sc.shared.clone(), linear: for_scr };
                let scr = if self.rng.gen_bool(0.6) {
                    self.close(&scr_sc, &Ty::Iota, d)?
                } else {
                    self.gen(scr_sc, &Ty::Iota, (size - 1) / 2, d)?
                };
                let left = self.fresh_name("x");
                let right = self.fresh_name("x");
                let body_sc = Scope { shared: sc.shared.clone(), linear: for_body }
                    .with_shared(BasisEntry::ground(&left))
                    .with_shared(BasisEntry::ground(&right));
                let body = self.gen(body_sc, &Ty::Iota, (size - 1) / 2, d)?;
                Some(Term::Copy {
                    scrutinee: Box::new(scr),
                    left,
                    right,
                    body: Box::new(body),
                })
            }
            // Promotion premises admit no higher entries, so this arm only
            // fires once every pending higher has been routed elsewhere.
            97..=99 if self.mode == Mode::Extended && size >= 3 && sc.linear.is_empty() => {
                let inner = self.gen(sc.clone(), &Ty::Iota, size - 2, d)?;
                Some(Term::Derelict(Box::new(Term::Promote(Box::new(inner)))))
            }
            _ => self.close(sc, &Ty::Iota, d),
        }
    }

    fn gen_arrow(
        &mut self,
        sc: &Scope,
        target: &Ty,
        size: u32,
        depth: u32,
        roll: u32,
    ) -> Option<Term> {
        let d = depth + 1;
        let Ty::Arrow(a, b) = target else { return None };
        match roll {
            0..=54 => {
                let (name, kind) = match a.binder_kind() {
                    Some(VarKind::Ground) => (self.fresh_name("x"), VarKind::Ground),
                    _ => (self.fresh_name("f"), VarKind::Higher),
                };
                let entry = BasisEntry { name: name.clone(), kind, ty: (**a).clone() };
                let body_sc = match kind {
                    VarKind::Higher => sc.with_linear(entry),
                    _ => sc.with_shared(entry),
                };
                let body = self.gen(body_sc, b, size - 1, d)?;
                Some(Term::lam(name, (**a).clone(), body))
            }
            55..=62 if size >= 4 => {
                let (for_fun, for_arg) = self.split_linear(&sc.linear);
                let fun_sc = Scope { shared: sc.shared.clone(), linear: for_fun };
                let arg_sc = Scope { shared: sc.shared.clone(), linear: for_arg };
                let s1 = self.rng.gen_range(1..size - 1);
                let s2 = size - 1 - s1;
                let fun = self.gen(fun_sc, &Ty::arrow(Ty::Iota, target.clone()), s1.max(1), d)?;
                let arg = self.gen(arg_sc, &Ty::Iota, s2.max(1), d)?;
                Some(Term::app(fun, arg))
            }
            63..=70 if size >= 4 => {
                let (for_cond, for_branches) = self.split_linear(&sc.linear);
                let cond_sc = Scope { shared: sc.shared.clone(), linear: for_cond };
                let br_sc = Scope { shared: sc.shared.clone(), linear: for_branches };
                let budget = ((size - 1) / 3).max(1);
                let cond = self.gen(cond_sc, &Ty::Iota, budget, d)?;
                let then_br = self.gen(br_sc.clone(), target, budget, d)?;
                let else_br = self.gen(br_sc, target, budget, d)?;
                Some(Term::lif(cond, then_br, else_br))
            }
            71..=78 if sc.linear.is_empty() && size >= 3 => {
                let name = self.fresh_name("F");
                let body_sc = sc.with_shared(BasisEntry::stable(&name, target.clone()));
                let body = self.gen(body_sc, target, size - 1, d)?;
                Some(Term::mu(name, target.clone(), body))
            }
            _ => self.close(sc, target, d),
        }
    }
}

/// Draws a term of type `target` over `basis`, retrying with perturbed
/// streams until the result typechecks (in `mode`) at the requested type and
/// fits the size budget.
pub fn gen_term(
    basis: &Basis,
    target: &Ty,
    size: u32,
    seed: u64,
    mode: Mode,
) -> Result<Term, GenError> {
    for round in 0..GEN_ATTEMPTS {
        let mut g = Gen {
            rng: ChaCha8Rng::seed_from_u64(seed ^ ((round as u64 + 1) << 40)),
            mode,
            numeral_bound: 6,
            fresh: 0,
            depth_cap: 12,
        };
        let sc = Scope::from_basis(basis);
        let Some(t) = g.gen(sc, target, size.max(1), 0) else { continue };
        if t.size() > size as usize {
            continue;
        }
        match infer_in_mode(basis, &t, mode) {
            Ok((ty, _)) if ty == *target => return Ok(t),
            _ => continue,
        }
    }
    Err(GenError::Exhausted { target: target.clone(), attempts: GEN_ATTEMPTS })
}

pub fn gen_closed(target: &Ty, size: u32, seed: u64, mode: Mode) -> Result<Term, GenError> {
    gen_term(&Basis::empty(), target, size, seed, mode)
}

// ---------------------------------------------------------------------------
// The categorical law suite.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LawVerdict {
    Pass,
    Fail { counterexample: String },
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct LawReport {
    pub law: String,
    pub backend: &'static str,
    pub samples: usize,
    pub verdict: LawVerdict,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        matches!(self.verdict, LawVerdict::Pass)
    }
}

fn eq_law<B: Backend + ?Sized>(
    b: &B,
    obs: &ObsSpec,
    name: &str,
    lhs: &Mor<B>,
    rhs: &Mor<B>,
) -> Result<LawReport, ModelError> {
    let samples = b.sample_inputs(&lhs.dom, obs).len();
    let verdict = match semantic_eq(b, lhs, rhs, obs)? {
        Eq3::Equal => LawVerdict::Pass,
        Eq3::Distinct { witness } => LawVerdict::Fail { counterexample: witness },
        Eq3::Inconclusive { .. } => LawVerdict::Inconclusive,
    };
    Ok(LawReport { law: name.to_string(), backend: b.name(), samples, verdict })
}

/// Checks the structural laws the interpretation relies on: the ground and
/// promoted duplication comonoids, zero/succ/promotion being comonoid
/// morphisms, the promotion coalgebra, numeral predecessor, branch
/// selection, one-step fixpoint unfolding, the comonad equations, and the
/// monoidality of promotion.
pub fn law_suite<B: Backend + ?Sized>(b: &B, obs: &ObsSpec) -> Result<Vec<LawReport>, ModelError> {
    let mut out = Vec::new();
    let one = b.unit_obj();
    let n = b.nat_obj();
    let nn = b.tensor_obj(&n, &n);
    let bn = b.bang_obj(&n);
    let id_1 = b.identity(&one);
    let id_n = b.identity(&n);
    let id_bn = b.identity(&bn);
    let c = b.copy_n();
    let w = b.weak_n();
    let du = b.dup(&n);
    let er = b.erase(&n);
    let zero = b.zero();
    let succ = b.succ_m();
    let p = b.promote_n();

    // Ground duplication is a cocommutative comonoid on the numeral object.
    let lhs = compose(&b.tensor_mor(&id_n, &c), &c)?;
    let rhs = pipeline(&[c.clone(), b.tensor_mor(&c, &id_n), b.assoc_right(&n, &n, &n)])?;
    out.push(eq_law(b, obs, "ground-copy-coassociative", &lhs, &rhs)?);
    let lhs = pipeline(&[c.clone(), b.tensor_mor(&w, &id_n), b.lunit(&n)])?;
    out.push(eq_law(b, obs, "ground-copy-counit-left", &lhs, &id_n)?);
    let lhs = pipeline(&[c.clone(), b.tensor_mor(&id_n, &w), b.runit(&n)])?;
    out.push(eq_law(b, obs, "ground-copy-counit-right", &lhs, &id_n)?);
    let lhs = compose(&b.symmetry(&n, &n), &c)?;
    out.push(eq_law(b, obs, "ground-copy-commutative", &lhs, &c)?);

    // So is promoted duplication on the promoted numeral object.
    let lhs = compose(&b.tensor_mor(&id_bn, &du), &du)?;
    let rhs = pipeline(&[du.clone(), b.tensor_mor(&du, &id_bn), b.assoc_right(&bn, &bn, &bn)])?;
    out.push(eq_law(b, obs, "promoted-copy-coassociative", &lhs, &rhs)?);
    let lhs = pipeline(&[du.clone(), b.tensor_mor(&er, &id_bn), b.lunit(&bn)])?;
    out.push(eq_law(b, obs, "promoted-copy-counit-left", &lhs, &id_bn)?);
    let lhs = pipeline(&[du.clone(), b.tensor_mor(&id_bn, &er), b.runit(&bn)])?;
    out.push(eq_law(b, obs, "promoted-copy-counit-right", &lhs, &id_bn)?);
    let lhs = compose(&b.symmetry(&bn, &bn), &du)?;
    out.push(eq_law(b, obs, "promoted-copy-commutative", &lhs, &du)?);

    // Zero and successor are comonoid morphisms.
    let lhs = compose(&c, &zero)?;
    let rhs = pipeline(&[b.lunit_inv(&one), b.tensor_mor(&zero, &zero)])?;
    out.push(eq_law(b, obs, "zero-copyable", &lhs, &rhs)?);
    let lhs = compose(&w, &zero)?;
    out.push(eq_law(b, obs, "zero-discardable", &lhs, &id_1)?);
    let lhs = compose(&c, &succ)?;
    let rhs = pipeline(&[c.clone(), b.tensor_mor(&succ, &succ)])?;
    out.push(eq_law(b, obs, "succ-copyable", &lhs, &rhs)?);
    let lhs = compose(&w, &succ)?;
    out.push(eq_law(b, obs, "succ-discardable", &lhs, &w)?);

    // Numeral promotion is a coalgebra for the comonad...
    let lhs = compose(&b.bang_mor(&p), &p)?;
    let rhs = compose(&b.delta(&n), &p)?;
    out.push(eq_law(b, obs, "promotion-coalgebra-square", &lhs, &rhs)?);
    let lhs = compose(&b.epsilon(&n), &p)?;
    out.push(eq_law(b, obs, "promotion-coalgebra-counit", &lhs, &id_n)?);

    // ...and a comonoid morphism from ground to promoted duplication.
    let lhs = compose(&du, &p)?;
    let rhs = pipeline(&[c.clone(), b.tensor_mor(&p, &p)])?;
    out.push(eq_law(b, obs, "promotion-copyable", &lhs, &rhs)?);
    let lhs = compose(&er, &p)?;
    out.push(eq_law(b, obs, "promotion-discardable", &lhs, &w)?);

    // Predecessor peels exactly one successor off every numeral.
    {
        let mut verdict = LawVerdict::Pass;
        let mut samples = 0usize;
        for k in 0..=obs.numeral_bound {
            samples += 1;
            let lhs = compose(&b.pred_m(), &b.num(k + 1))?;
            match semantic_eq(b, &lhs, &b.num(k), obs)? {
                Eq3::Equal => {}
                Eq3::Distinct { witness } => {
                    verdict = LawVerdict::Fail { counterexample: format!("k={}: {}", k, witness) };
                    break;
                }
                Eq3::Inconclusive { .. } => verdict = LawVerdict::Inconclusive,
            }
        }
        out.push(LawReport {
            law: "pred-peels-successor".to_string(),
            backend: b.name(),
            samples,
            verdict,
        });
    }

    // Branching selects the left component at zero, the right otherwise.
    {
        let pairs: [(u64, u64); 10] =
            [(0, 1), (1, 0), (2, 5), (3, 3), (4, 0), (0, 6), (5, 2), (6, 1), (1, 6), (2, 2)];
        let mut verdict = LawVerdict::Pass;
        let mut samples = 0usize;
        'outer: for cond in [0u64, 1, 4] {
            for (i, j) in pairs {
                samples += 1;
                let branches = b.pairing(&b.num(i), &b.num(j))?;
                let lhs = pipeline(&[
                    b.lunit_inv(&one),
                    b.tensor_mor(&b.num(cond), &branches),
                    b.lif_m(),
                ])?;
                let rhs = b.num(if cond == 0 { i } else { j });
                match semantic_eq(b, &lhs, &rhs, obs)? {
                    Eq3::Equal => {}
                    Eq3::Distinct { witness } => {
                        verdict = LawVerdict::Fail {
                            counterexample: format!("cond={} l={} r={}: {}", cond, i, j, witness),
                        };
                        break 'outer;
                    }
                    Eq3::Inconclusive { .. } => verdict = LawVerdict::Inconclusive,
                }
            }
        }
        out.push(LawReport {
            law: "lif-selects-branch".to_string(),
            backend: b.name(),
            samples,
            verdict,
        });
    }

    // The fixpoint satisfies its one-step unfolding diagram on a family of
    // explicit functionals.
    {
        let arrow = b.arrow_obj(&bn, &n);
        let mut functionals: Vec<(String, Mor<B>)> = Vec::new();
        for k in 0..=6u64 {
            let body = pipeline(&[b.lunit(&bn), b.erase(&n), b.num(k)])?;
            functionals.push((format!("const-{}", k), b.curry(&body, &one, &bn)?));
        }
        let body = pipeline(&[b.lunit(&bn), b.epsilon(&n), succ.clone()])?;
        functionals.push(("succ-after-call".to_string(), b.curry(&body, &one, &bn)?));
        let body = pipeline(&[b.lunit(&bn), b.epsilon(&n), succ.clone(), succ.clone()])?;
        functionals.push(("succ-succ-after-call".to_string(), b.curry(&body, &one, &bn)?));
        let body = pipeline(&[b.lunit(&bn), b.epsilon(&n), b.pred_m()])?;
        functionals.push(("pred-after-call".to_string(), b.curry(&body, &one, &bn)?));

        let fx = b.fix(&n);
        let unfold = pipeline(&[
            b.dup(&arrow),
            b.tensor_mor(
                &b.epsilon(&arrow),
                &compose(&b.bang_mor(&fx), &b.delta(&arrow))?,
            ),
            b.eval(&bn, &n),
        ])?;
        let mut verdict = LawVerdict::Pass;
        let mut samples = 0usize;
        for (fname, phi) in &functionals {
            samples += 1;
            let inp = compose(&b.bang_mor(phi), &b.q_unit())?;
            let lhs = compose(&fx, &inp)?;
            let rhs = compose(&unfold, &inp)?;
            match semantic_eq(b, &lhs, &rhs, obs)? {
                Eq3::Equal => {}
                Eq3::Distinct { witness } => {
                    verdict =
                        LawVerdict::Fail { counterexample: format!("{}: {}", fname, witness) };
                    break;
                }
                Eq3::Inconclusive { .. } => verdict = LawVerdict::Inconclusive,
            }
        }
        out.push(LawReport {
            law: "fix-unfolds-once".to_string(),
            backend: b.name(),
            samples,
            verdict,
        });
    }

    // Comonad equations at the numeral object.
    let dl = b.delta(&n);
    let lhs = compose(&b.epsilon(&bn), &dl)?;
    out.push(eq_law(b, obs, "comonad-counit-outer", &lhs, &id_bn)?);
    let lhs = compose(&b.bang_mor(&b.epsilon(&n)), &dl)?;
    out.push(eq_law(b, obs, "comonad-counit-inner", &lhs, &id_bn)?);
    let lhs = compose(&b.bang_mor(&dl), &dl)?;
    let rhs = compose(&b.delta(&bn), &dl)?;
    out.push(eq_law(b, obs, "comonad-coassociative", &lhs, &rhs)?);
    let lhs = compose(&b.epsilon(&n), &b.bang_mor(&succ))?;
    let rhs = compose(&succ, &b.epsilon(&n))?;
    out.push(eq_law(b, obs, "counit-natural-at-succ", &lhs, &rhs)?);
    let lhs = compose(&b.bang_mor(&b.bang_mor(&succ)), &dl)?;
    let rhs = compose(&dl, &b.bang_mor(&succ))?;
    out.push(eq_law(b, obs, "comultiplication-natural-at-succ", &lhs, &rhs)?);

    // Monoidality of promotion.
    let q = b.q_tensor(&n, &n);
    let lhs = compose(&b.epsilon(&nn), &q)?;
    let rhs = b.tensor_mor(&b.epsilon(&n), &b.epsilon(&n));
    out.push(eq_law(b, obs, "monoidal-counit", &lhs, &rhs)?);
    let lhs = compose(&b.bang_mor(&b.tensor_mor(&succ, &succ)), &q)?;
    let rhs = compose(&q, &b.tensor_mor(&b.bang_mor(&succ), &b.bang_mor(&succ)))?;
    out.push(eq_law(b, obs, "monoidal-natural-at-succ", &lhs, &rhs)?);
    let lhs = compose(&b.epsilon(&one), &b.q_unit())?;
    out.push(eq_law(b, obs, "monoidal-unit", &lhs, &id_1)?);
    let lhs = compose(&b.delta(&nn), &q)?;
    let rhs = pipeline(&[
        b.tensor_mor(&b.delta(&n), &b.delta(&n)),
        b.q_tensor(&bn, &bn),
        b.bang_mor(&q),
    ])?;
    out.push(eq_law(b, obs, "monoidal-comultiplication", &lhs, &rhs)?);

    Ok(out)
}

// ---------------------------------------------------------------------------
// Substitution invariance.

#[derive(Debug, Clone)]
pub struct SubstReport {
    pub clause: u8,
    pub conclusive: u32,
    pub skipped_inconclusive: u32,
    pub failures: Vec<String>,
}

impl SubstReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that syntactic substitution matches semantic plugging, one clause
/// per substitutable kind: numerals for ground variables, closed arrow terms
/// for higher variables, and promoted closed derivations for stable
/// variables. Runs until `per_clause` conclusive instances are gathered per
/// clause (failures count as conclusive).
pub fn substitution_check<B: Backend + ?Sized>(
    b: &B,
    obs: &ObsSpec,
    seed: u64,
    per_clause: u32,
) -> Result<Vec<SubstReport>, ModelError> {
    let mut out = Vec::new();
    let one = b.unit_obj();

    // Clause 1: a numeral for a ground variable.
    {
        let mut rep = SubstReport {
            clause: 1,
            conclusive: 0,
            skipped_inconclusive: 0,
            failures: Vec::new(),
        };
        let mut inst: u64 = 0;
        while rep.conclusive < per_clause && inst < per_clause as u64 * 12 {
            inst += 1;
            let subseed = seed ^ inst.wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let with_y = inst % 2 == 0;
            let entries = if with_y {
                vec![BasisEntry::ground("y"), BasisEntry::ground("x")]
            } else {
                vec![BasisEntry::ground("x")]
            };
            let basis = Basis::new(entries).expect("distinct names");
            let Ok(m) = gen_term(&basis, &Ty::Iota, 14, subseed, Mode::Core) else { continue };
            let k = inst % (obs.numeral_bound + 1);

            let plugged = subst_var(&m, "x", VarKind::Ground, &numeral(k));
            let reduced = if with_y {
                Basis::new(vec![BasisEntry::ground("y")]).expect("distinct names")
            } else {
                Basis::empty()
            };
            let (_, d_lhs) = infer_in_mode(&reduced, &plugged, Mode::Core)?;
            let lhs = interpret(b, &d_lhs)?;

            let (_, d_m) = infer_in_mode(&basis, &m, Mode::Core)?;
            let mm = interpret(b, &d_m)?;
            let pos = usize::from(with_y);
            let all = basis.entries();
            let ins = insert_entry(b, &all[..pos], &all[pos + 1..], &b.num(k))?;
            let rhs = compose(&mm, &ins)?;

            match semantic_eq(b, &lhs, &rhs, obs)? {
                Eq3::Equal => rep.conclusive += 1,
                Eq3::Distinct { witness } => {
                    rep.conclusive += 1;
                    rep.failures.push(format!("M={} k={}: {}", m, k, witness));
                }
                Eq3::Inconclusive { .. } => rep.skipped_inconclusive += 1,
            }
        }
        out.push(rep);
    }

    // Clause 2: a closed arrow term for a higher variable.
    {
        let mut rep = SubstReport {
            clause: 2,
            conclusive: 0,
            skipped_inconclusive: 0,
            failures: Vec::new(),
        };
        let fun_ty = Ty::arrow(Ty::Iota, Ty::Iota);
        let mut inst: u64 = 0;
        while rep.conclusive < per_clause && inst < per_clause as u64 * 12 {
            inst += 1;
            let subseed = seed ^ inst.wrapping_mul(0xD134_2543_DE82_EF95);
            let with_y = inst % 2 == 0;
            let entries = if with_y {
                vec![BasisEntry::ground("y"), BasisEntry::higher("f", fun_ty.clone())]
            } else {
                vec![BasisEntry::higher("f", fun_ty.clone())]
            };
            let basis = Basis::new(entries).expect("distinct names");
            let Ok(m) = gen_term(&basis, &Ty::Iota, 14, subseed, Mode::Core) else { continue };
            let Ok(arg) = gen_closed(&fun_ty, 10, subseed ^ 0xFFFF, Mode::Core) else { continue };

            let plugged = subst_var(&m, "f", VarKind::Higher, &arg);
            let reduced = if with_y {
                Basis::new(vec![BasisEntry::ground("y")]).expect("distinct names")
            } else {
                Basis::empty()
            };
            let Ok((_, d_lhs)) = infer_in_mode(&reduced, &plugged, Mode::Core) else { continue };
            let lhs = interpret(b, &d_lhs)?;

            let (_, d_m) = infer_in_mode(&basis, &m, Mode::Core)?;
            let mm = interpret(b, &d_m)?;
            let (_, d_arg) = infer_in_mode(&Basis::empty(), &arg, Mode::Core)?;
            let arg_m = interpret(b, &d_arg)?;
            let pos = usize::from(with_y);
            let all = basis.entries();
            let ins = insert_entry(b, &all[..pos], &all[pos + 1..], &arg_m)?;
            let rhs = compose(&mm, &ins)?;

            match semantic_eq(b, &lhs, &rhs, obs)? {
                Eq3::Equal => rep.conclusive += 1,
                Eq3::Distinct { witness } => {
                    rep.conclusive += 1;
                    rep.failures.push(format!("M={} N={}: {}", m, arg, witness));
                }
                Eq3::Inconclusive { .. } => rep.skipped_inconclusive += 1,
            }
        }
        out.push(rep);
    }

    // Clause 3: a promoted closed derivation for a stable variable.
    {
        let mut rep = SubstReport {
            clause: 3,
            conclusive: 0,
            skipped_inconclusive: 0,
            failures: Vec::new(),
        };
        let fun_ty = Ty::arrow(Ty::Iota, Ty::Iota);
        let mut inst: u64 = 0;
        while rep.conclusive < per_clause && inst < per_clause as u64 * 12 {
            inst += 1;
            let subseed = seed ^ inst.wrapping_mul(0x2545_F491_4F6C_DD1D);
            let sigma = if inst % 2 == 0 { Ty::Iota } else { fun_ty.clone() };
            let m_basis = Basis::new(vec![BasisEntry::stable("F", sigma.clone())])
                .expect("distinct names");
            let Ok(m) = gen_term(&m_basis, &Ty::Iota, 12, subseed, Mode::Core) else { continue };

            // Rotate the residual basis through empty, ground, stable, and
            // mixed shapes so both promotion legs (p and delta) are hit.
            let delta_entries = match inst % 4 {
                0 => vec![BasisEntry::ground("y")],
                1 => Vec::new(),
                2 => vec![BasisEntry::stable("G", Ty::Iota)],
                _ => vec![BasisEntry::ground("y"), BasisEntry::stable("G", Ty::Iota)],
            };
            let delta = Basis::new(delta_entries.clone()).expect("distinct names");
            let Ok(arg) = gen_term(&delta, &sigma, 10, subseed ^ 0xAAAA, Mode::Core) else {
                continue;
            };

            let plugged = subst_var(&m, "F", VarKind::Stable, &arg);
            let Ok((_, d_lhs)) = infer_in_mode(&delta, &plugged, Mode::Core) else { continue };
            let lhs = interpret(b, &d_lhs)?;

            let (_, d_m) = infer_in_mode(&m_basis, &m, Mode::Core)?;
            let mm = interpret(b, &d_m)?;
            let (_, d_arg) = infer_in_mode(&delta, &arg, Mode::Core)?;
            let arg_m = interpret(b, &d_arg)?;
            let chain = pipeline(&[promote_entries(b, &delta_entries)?, b.bang_mor(&arg_m)])?;
            let delta_obj = interp_entries(b, &delta_entries);
            let rhs = pipeline(&[
                b.runit_inv(&delta_obj),
                b.tensor_mor(&chain, &b.identity(&one)),
                mm,
            ])?;

            match semantic_eq(b, &lhs, &rhs, obs)? {
                Eq3::Equal => rep.conclusive += 1,
                Eq3::Distinct { witness } => {
                    rep.conclusive += 1;
                    rep.failures.push(format!("M={} N={}: {}", m, arg, witness));
                }
                Eq3::Inconclusive { .. } => rep.skipped_inconclusive += 1,
            }
        }
        out.push(rep);
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// Soundness along reduction.

#[derive(Debug, Clone)]
pub struct SoundnessReport {
    pub term: Term,
    pub steps: u32,
    pub exhausted: bool,
    pub type_preserved: bool,
    pub comparisons: u32,
    pub inconclusive: u32,
    pub distinct: Option<String>,
}

impl SoundnessReport {
    pub fn ok(&self) -> bool {
        self.type_preserved && self.distinct.is_none()
    }
}

/// Tracing stops once a term outgrows this many nodes; a recursion binder
/// used twice doubles the term per unfolding, so divergent terms can
/// otherwise outgrow memory well before exhausting fuel.
const SOUND_SIZE_CAP: usize = 2_000;

/// Interpretation cost grows like fix-iterations to the power of the
/// recursion-binder nesting depth, so only checkpoints below these bounds
/// are compared semantically. Every step is still type-checked.
const CHECK_MU_DEPTH: u32 = 3;
const CHECK_SIZE: usize = 400;

/// Nesting depth of recursion binders.
fn mu_depth(t: &Term) -> u32 {
    match t {
        Term::Zero | Term::Succ | Term::Pred | Term::Var { .. } => 0,
        Term::Lam { body, .. } => mu_depth(body),
        Term::Mu { body, .. } => 1 + mu_depth(body),
        Term::App(a, b) => mu_depth(a).max(mu_depth(b)),
        Term::LIf { cond, then_br, else_br } => {
            mu_depth(cond).max(mu_depth(then_br)).max(mu_depth(else_br))
        }
        Term::Promote(a) | Term::Derelict(a) => mu_depth(a),
        Term::Discard { scrutinee, body }
        | Term::PromoteIn { scrutinee, body, .. }
        | Term::Copy { scrutinee, body, .. } => mu_depth(scrutinee).max(mu_depth(body)),
    }
}

fn comparable(t: &Term) -> bool {
    t.size() <= CHECK_SIZE && mu_depth(t) <= CHECK_MU_DEPTH
}

/// Reduces a closed term and checks that every step preserves its type and
/// that the denotation never changes. With `dense` set, adjacent comparable
/// trace entries are compared pairwise; otherwise the start is compared
/// against the last comparable term reached.
pub fn soundness_check<B: Backend + ?Sized>(
    b: &B,
    t: &Term,
    fuel: u32,
    obs: &ObsSpec,
    mode: Mode,
    dense: bool,
) -> Result<SoundnessReport, ModelError> {
    let (ty0, d0) = infer_in_mode(&Basis::empty(), t, mode)?;
    let (steps, norm) = trace_bounded(t, fuel, SOUND_SIZE_CAP, mode);
    let mut report = SoundnessReport {
        term: t.clone(),
        steps: norm.steps,
        exhausted: norm.exhausted,
        type_preserved: true,
        comparisons: 0,
        inconclusive: 0,
        distinct: None,
    };

    let mut checkpoints: Vec<&Term> = Vec::new();
    for s in &steps {
        match infer_in_mode(&Basis::empty(), &s.result, mode) {
            Ok((ty, _)) if ty == ty0 => {}
            Ok((ty, _)) => {
                report.type_preserved = false;
                report.distinct =
                    Some(format!("type changed from {} to {} at {}", ty0, ty, s.result));
                return Ok(report);
            }
            Err(e) => {
                report.type_preserved = false;
                report.distinct = Some(format!("step no longer typechecks: {} ({})", s.result, e));
                return Ok(report);
            }
        }
        if dense && comparable(&s.result) {
            checkpoints.push(&s.result);
        }
    }
    if !dense {
        if let Some(last) = steps.iter().rev().find(|s| comparable(&s.result)) {
            checkpoints.push(&last.result);
        }
    }

    let mut prev = interpret(b, &d0)?;
    for cur in checkpoints {
        let (_, d_cur) = infer_in_mode(&Basis::empty(), cur, mode)?;
        let m_cur = interpret(b, &d_cur)?;
        report.comparisons += 1;
        match semantic_eq(b, &prev, &m_cur, obs)? {
            Eq3::Equal => {}
            Eq3::Inconclusive { .. } => report.inconclusive += 1,
            Eq3::Distinct { witness } => {
                report.distinct = Some(format!("at {}: {}", cur, witness));
                return Ok(report);
            }
        }
        prev = m_cur;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// The incompleteness witness.

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub left: Term,
    pub right: Term,
    pub verdict: Eq3,
    pub joinable: bool,
    pub search_saturated: bool,
    pub weakened_left: Term,
    pub weakened_right: Term,
    pub weakened_verdict: Eq3,
}

/// The canonical pair: an identity applied to the looping term, against the
/// looping term itself. Neither reduces to the other, yet both denote
/// bottom.
pub fn witness_terms() -> (Term, Term) {
    let omega = Term::mu("f", Ty::Iota, Term::var_s("f"));
    let left = Term::app(Term::lam("x", Ty::Iota, Term::var_g("x")), omega.clone());
    (left, omega)
}

/// Every term reachable from `t`, up to `cap` distinct terms. The second
/// component reports whether the search closed off (no frontier left).
fn reachable(t: &Term, cap: usize, mode: Mode) -> (HashSet<Term>, bool) {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(t.clone());
    queue.push_back(t.clone());
    while let Some(cur) = queue.pop_front() {
        for site in find_redexes_in_mode(&cur, mode) {
            let Ok(next) = step_at(&cur, &site, mode) else { continue };
            if seen.len() >= cap && !seen.contains(&next) {
                return (seen, false);
            }
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    (seen, true)
}

/// Demonstrates that observational equality outruns joinability: the witness
/// pair is semantically equal yet has disjoint reduction cones. Also reports
/// the (expected, informational) semantic gap at weakened arguments, where a
/// discarding function applied to a looping term denotes bottom rather than
/// its result.
pub fn incompleteness_witness<B: Backend + ?Sized>(
    b: &B,
    obs: &ObsSpec,
    fuel: u32,
) -> Result<WitnessReport, ModelError> {
    let (left, right) = witness_terms();
    let (_, d_left) = infer_in_mode(&Basis::empty(), &left, Mode::Core)?;
    let (_, d_right) = infer_in_mode(&Basis::empty(), &right, Mode::Core)?;
    let m_left = interpret(b, &d_left)?;
    let m_right = interpret(b, &d_right)?;
    let verdict = semantic_eq(b, &m_left, &m_right, obs)?;

    let cap = (fuel as usize).max(1);
    let (r_left, sat_left) = reachable(&left, cap, Mode::Core);
    let (r_right, sat_right) = reachable(&right, cap, Mode::Core);
    let joinable = r_left.intersection(&r_right).next().is_some();

    let omega = right.clone();
    let weakened_left = Term::app(Term::lam("x", Ty::Iota, numeral(0)), omega);
    let weakened_right = numeral(0);
    let (_, d_wl) = infer_in_mode(&Basis::empty(), &weakened_left, Mode::Core)?;
    let (_, d_wr) = infer_in_mode(&Basis::empty(), &weakened_right, Mode::Core)?;
    let weakened_verdict =
        semantic_eq(b, &interpret(b, &d_wl)?, &interpret(b, &d_wr)?, obs)?;

    Ok(WitnessReport {
        left,
        right,
        verdict,
        joinable,
        search_saturated: sat_left && sat_right,
        weakened_left,
        weakened_right,
        weakened_verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coh::CohBackend;
    use crate::parser::parse_term;
    use crate::reduce::{trace, ExtRuleTag, RuleTag};
    use crate::strict::StrictBackend;
    use crate::syntax::free_vars;

    fn obs() -> ObsSpec {
        ObsSpec::default()
    }

    #[test]
    fn generator_produces_well_typed_terms_within_budget() {
        let mut ok = 0;
        for seed in 0..60u64 {
            let t = gen_closed(&Ty::Iota, 25, seed, Mode::Core).expect("generator succeeds");
            assert!(t.size() <= 25, "size {} over budget: {}", t.size(), t);
            let (ty, _) = infer_in_mode(&Basis::empty(), &t, Mode::Core).expect("typechecks");
            assert_eq!(ty, Ty::Iota);
            ok += 1;
        }
        assert_eq!(ok, 60);
    }

    #[test]
    fn generator_consumes_higher_entries_from_the_basis() {
        let fun_ty = Ty::arrow(Ty::Iota, Ty::Iota);
        let basis =
            Basis::new(vec![BasisEntry::higher("f", fun_ty.clone())]).expect("distinct names");
        for seed in 0..20u64 {
            let t = gen_term(&basis, &Ty::Iota, 18, seed, Mode::Core).expect("generator succeeds");
            assert!(
                free_vars(&t).contains("f", VarKind::Higher),
                "higher entry unused in {}",
                t
            );
            infer_in_mode(&basis, &t, Mode::Core).expect("typechecks at the given basis");
        }
    }

    #[test]
    fn generator_reaches_every_core_rule() {
        let mut tags = HashSet::new();
        for seed in 0..400u64 {
            let Ok(t) = gen_closed(&Ty::Iota, 25, seed, Mode::Core) else { continue };
            let (steps, _) = trace(&t, 50, Mode::Core);
            for s in &steps {
                tags.insert(s.tag);
            }
        }
        for want in [
            RuleTag::BetaHigher,
            RuleTag::BetaIota,
            RuleTag::Y,
            RuleTag::DeltaPredSucc,
            RuleTag::DeltaIfZero,
            RuleTag::DeltaIfSucc,
        ] {
            assert!(tags.contains(&want), "rule {:?} never generated", want);
        }
    }

    #[test]
    fn generator_reaches_the_typed_extension_rules() {
        let mut tags = HashSet::new();
        for seed in 0..600u64 {
            let Ok(t) = gen_closed(&Ty::Iota, 25, seed, Mode::Extended) else { continue };
            let (steps, _) = trace(&t, 50, Mode::Extended);
            for s in &steps {
                if let RuleTag::Ext(e) = s.tag {
                    tags.insert(e);
                }
            }
        }
        for want in [
            ExtRuleTag::DiscardSucc,
            ExtRuleTag::DiscardZero,
            ExtRuleTag::CopySucc,
            ExtRuleTag::CopyZero,
            ExtRuleTag::DerelictPromote,
        ] {
            assert!(tags.contains(&want), "extension rule {:?} never generated", want);
        }
    }

    #[test]
    fn law_suite_passes_on_the_strict_backend() {
        let reports = law_suite(&StrictBackend, &obs()).expect("suite runs");
        assert!(reports.len() >= 25);
        for r in &reports {
            assert!(r.passed(), "law {} failed: {:?}", r.law, r.verdict);
        }
    }

    #[test]
    fn law_suite_passes_on_the_coherence_backend() {
        let reports = law_suite(&CohBackend, &obs()).expect("suite runs");
        assert!(reports.len() >= 25);
        for r in &reports {
            assert!(r.passed(), "law {} failed: {:?}", r.law, r.verdict);
        }
    }

    #[test]
    fn substitution_clauses_hold_on_the_strict_backend() {
        let reports = substitution_check(&StrictBackend, &obs(), 7, 12).expect("check runs");
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert!(r.ok(), "clause {} failures: {:?}", r.clause, r.failures);
            assert_eq!(r.conclusive, 12, "clause {} starved", r.clause);
        }
    }

    #[test]
    fn substitution_clauses_hold_on_the_coherence_backend() {
        let reports = substitution_check(&CohBackend, &obs(), 11, 8).expect("check runs");
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert!(r.ok(), "clause {} failures: {:?}", r.clause, r.failures);
            assert_eq!(r.conclusive, 8, "clause {} starved", r.clause);
        }
    }

    #[test]
    fn soundness_holds_densely_along_an_addition_trace() {
        let add = parse_term(
            "mu $a:iota -o iota -o iota. \\x:iota. \\y:iota. \
             lif x then y else succ ($a (pred x) y)",
        )
        .expect("parses");
        let t = Term::app(Term::app(add, numeral(2)), numeral(3));
        let rep = soundness_check(&StrictBackend, &t, 200, &obs(), Mode::Core, true)
            .expect("check runs");
        assert!(rep.ok(), "report: {:?}", rep);
        assert!(rep.steps > 0 && !rep.exhausted);
        assert_eq!(rep.inconclusive, 0);
    }

    #[test]
    fn witness_pair_is_equal_but_never_joins() {
        let rep = incompleteness_witness(&StrictBackend, &obs(), 1000).expect("witness runs");
        assert_eq!(rep.verdict, Eq3::Equal);
        assert!(!rep.joinable);
        assert!(rep.search_saturated);
        assert!(
            matches!(rep.weakened_verdict, Eq3::Distinct { .. }),
            "weakened pair should expose the semantic gap: {:?}",
            rep.weakened_verdict
        );

        let rep = incompleteness_witness(&CohBackend, &obs(), 1000).expect("witness runs");
        assert_eq!(rep.verdict, Eq3::Equal);
        assert!(!rep.joinable);
        assert!(rep.search_saturated);
    }
}
