//! Interpretation layer: the backend capability signature, morphism values,
//! interpretation of typing derivations, and observational equality.
//!
//! A backend supplies the objects and primitive morphisms of a linear
//! category with an exponential comonad, an object of numerals, a
//! conditional, and a fixpoint operator. `interpret` folds a derivation into
//! one morphism using only those capabilities, so the same clauses drive
//! every backend. Morphism equality is never structural: `semantic_eq`
//! compares observations at explicit budgets, and a fixpoint that has not
//! stabilized between the budget and twice the budget downgrades the verdict
//! to inconclusive instead of reporting a spurious difference.

use crate::syntax::{Basis, BasisEntry, Term, Ty, VarKind};
use crate::typecheck::{Derivation, Rule, TypeError};
use crate::Mode;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, thiserror::Error)]
pub enum ModelError {
    #[error("object mismatch in {context}: {left} vs {right}")]
    ObjectMismatch { context: String, left: String, right: String },
    #[error("ill-shaped element: {0}")]
    IllShaped(String),
    #[error("incoherent clique: {0}")]
    IncoherentClique(String),
    #[error(transparent)]
    Typing(#[from] TypeError),
}

/// Application-time budgets. Fixpoints unroll at most `fix_iters` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fuel {
    pub fix_iters: u32,
}

/// Observation budgets for semantic comparisons.
#[derive(Debug, Clone)]
pub struct ObsSpec {
    /// Numeral bound: ground sample points are 0..=numeral_bound.
    pub numeral_bound: u64,
    /// Token budget for trace probing and clique enumeration.
    pub budget: u32,
    /// Fixpoint iteration count; stability is re-checked at twice this.
    pub fix_iters: u32,
    /// Cap on sampled inputs per domain object.
    pub samples: u32,
    pub seed: u64,
    /// Closed well-typed terms whose denotations extend function-type
    /// sample families.
    pub fn_samples: Vec<Term>,
}

impl ObsSpec {
    pub fn new(numeral_bound: u64, budget: u32, fix_iters: u32, samples: u32, seed: u64) -> ObsSpec {
        ObsSpec {
            numeral_bound: numeral_bound.max(1),
            budget: budget.max(1),
            fix_iters: fix_iters.max(1),
            samples: samples.max(1),
            seed,
            fn_samples: default_fn_samples(),
        }
    }
}

impl Default for ObsSpec {
    fn default() -> ObsSpec {
        ObsSpec::new(8, 3, 16, 100, 0)
    }
}

fn default_fn_samples() -> Vec<Term> {
    [
        "succ",
        "pred",
        "\\x:iota.x",
        "\\x:iota.0",
        "\\x:iota.succ (succ x)",
        "\\x:iota.lif x then 1 else 0",
        "\\f:iota -o iota. f 1",
    ]
    .iter()
    .map(|s| crate::parser::parse_term(s).expect("built-in sample terms parse"))
    .collect()
}

/// Combinator tree recording how a morphism was assembled; used for
/// structured dumps and debugging, never for equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CombTree {
    Leaf(String),
    Node(&'static str, Vec<CombTree>),
}

impl CombTree {
    pub fn leaf(name: impl Into<String>) -> CombTree {
        CombTree::Leaf(name.into())
    }
}

impl fmt::Display for CombTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CombTree::Leaf(s) => f.write_str(s),
            CombTree::Node(name, kids) => {
                write!(f, "{}(", name)?;
                for (i, k) in kids.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", k)?;
                }
                write!(f, ")")
            }
        }
    }
}

type ApplyFn<B> =
    Arc<dyn Fn(&<B as Backend>::Val, Fuel) -> Result<<B as Backend>::Val, ModelError> + Send + Sync>;

/// A morphism of a backend category: domain/codomain objects, a combinator
/// tree for dumps, and an opaque application procedure.
pub struct Mor<B: Backend + ?Sized> {
    pub dom: B::Obj,
    pub cod: B::Obj,
    pub tree: CombTree,
    apply: ApplyFn<B>,
}

impl<B: Backend + ?Sized> Clone for Mor<B> {
    fn clone(&self) -> Self {
        Mor {
            dom: self.dom.clone(),
            cod: self.cod.clone(),
            tree: self.tree.clone(),
            apply: Arc::clone(&self.apply),
        }
    }
}

impl<B: Backend + ?Sized> fmt::Debug for Mor<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} -> {:?} [{}]", self.dom, self.cod, self.tree)
    }
}

impl<B: Backend + ?Sized> Mor<B> {
    pub fn new(
        tree: CombTree,
        dom: B::Obj,
        cod: B::Obj,
        apply: impl Fn(&B::Val, Fuel) -> Result<B::Val, ModelError> + Send + Sync + 'static,
    ) -> Mor<B> {
        Mor { dom, cod, tree, apply: Arc::new(apply) }
    }

    pub fn prim(
        name: &str,
        dom: B::Obj,
        cod: B::Obj,
        apply: impl Fn(&B::Val, Fuel) -> Result<B::Val, ModelError> + Send + Sync + 'static,
    ) -> Mor<B> {
        Mor::new(CombTree::leaf(name), dom, cod, apply)
    }

    pub fn apply(&self, v: &B::Val, fuel: Fuel) -> Result<B::Val, ModelError> {
        (self.apply)(v, fuel)
    }
}

/// Finite comparable description of an observed value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    Atom(String),
    Seq(Vec<Observation>),
    Set(BTreeSet<String>),
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Atom(s) => f.write_str(s),
            Observation::Seq(items) => {
                write!(f, "[")?;
                for (i, o) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", o)?;
                }
                write!(f, "]")
            }
            Observation::Set(items) => {
                write!(f, "{{")?;
                for (i, s) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    f.write_str(s)?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// The capability signature every backend implements. Object bookkeeping is
/// explicit: every morphism carries its domain and codomain.
pub trait Backend: Send + Sync {
    type Obj: Clone + PartialEq + fmt::Debug + Send + Sync + 'static;
    type Val: Clone + fmt::Debug + Send + Sync + 'static;

    fn name(&self) -> &'static str;

    // Objects.
    fn unit_obj(&self) -> Self::Obj;
    fn nat_obj(&self) -> Self::Obj;
    fn tensor_obj(&self, a: &Self::Obj, b: &Self::Obj) -> Self::Obj;
    fn arrow_obj(&self, a: &Self::Obj, b: &Self::Obj) -> Self::Obj;
    fn bang_obj(&self, a: &Self::Obj) -> Self::Obj;
    fn product_obj(&self, a: &Self::Obj, b: &Self::Obj) -> Self::Obj;

    // Symmetric monoidal closed structure.
    fn identity(&self, a: &Self::Obj) -> Mor<Self>;
    fn tensor_mor(&self, f: &Mor<Self>, g: &Mor<Self>) -> Mor<Self>;
    fn symmetry(&self, a: &Self::Obj, b: &Self::Obj) -> Mor<Self>;
    fn assoc_right(&self, a: &Self::Obj, b: &Self::Obj, c: &Self::Obj) -> Mor<Self>;
    fn assoc_left(&self, a: &Self::Obj, b: &Self::Obj, c: &Self::Obj) -> Mor<Self>;
    fn lunit(&self, a: &Self::Obj) -> Mor<Self>;
    fn lunit_inv(&self, a: &Self::Obj) -> Mor<Self>;
    fn runit(&self, a: &Self::Obj) -> Mor<Self>;
    fn runit_inv(&self, a: &Self::Obj) -> Mor<Self>;
    /// Currying of f : C⊗A → B into C → (A⊸B).
    fn curry(&self, f: &Mor<Self>, c: &Self::Obj, a: &Self::Obj) -> Result<Mor<Self>, ModelError>;
    fn eval(&self, a: &Self::Obj, b: &Self::Obj) -> Mor<Self>;
    fn pairing(&self, f: &Mor<Self>, g: &Mor<Self>) -> Result<Mor<Self>, ModelError>;
    fn proj1(&self, a: &Self::Obj, b: &Self::Obj) -> Mor<Self>;
    fn proj2(&self, a: &Self::Obj, b: &Self::Obj) -> Mor<Self>;

    // Exponential comonad.
    fn bang_mor(&self, f: &Mor<Self>) -> Mor<Self>;
    fn delta(&self, a: &Self::Obj) -> Mor<Self>;
    fn epsilon(&self, a: &Self::Obj) -> Mor<Self>;
    fn q_tensor(&self, a: &Self::Obj, b: &Self::Obj) -> Mor<Self>;
    fn q_unit(&self) -> Mor<Self>;
    fn dup(&self, a: &Self::Obj) -> Mor<Self>;
    fn erase(&self, a: &Self::Obj) -> Mor<Self>;

    // Numerals.
    fn zero(&self) -> Mor<Self>;
    fn succ_m(&self) -> Mor<Self>;
    fn pred_m(&self) -> Mor<Self>;
    fn num(&self, k: u64) -> Mor<Self>;
    fn promote_n(&self) -> Mor<Self>;
    fn copy_n(&self) -> Mor<Self>;
    fn weak_n(&self) -> Mor<Self>;

    // Control.
    fn lif_m(&self) -> Mor<Self>;
    fn fix(&self, b: &Self::Obj) -> Mor<Self>;

    // Observation.
    fn global_point(&self) -> Self::Val;
    /// Reads a value at the ground object: None is bottom/empty.
    fn observe_nat(&self, v: &Self::Val) -> Result<Option<u64>, ModelError>;
    fn sample_inputs(&self, obj: &Self::Obj, obs: &ObsSpec) -> Vec<Self::Val>;
    fn observe(
        &self,
        obj: &Self::Obj,
        v: &Self::Val,
        obs: &ObsSpec,
        fuel: Fuel,
    ) -> Result<Observation, ModelError>;
}

// ---------------------------------------------------------------------------
// Generic plumbing.

/// Composition f ∘ g with object bookkeeping.
pub fn compose<B: Backend + ?Sized>(f: &Mor<B>, g: &Mor<B>) -> Result<Mor<B>, ModelError> {
    if f.dom != g.cod {
        return Err(ModelError::ObjectMismatch {
            context: "compose".to_string(),
            left: format!("{:?}", f.dom),
            right: format!("{:?}", g.cod),
        });
    }
    let (fa, ga) = (Arc::clone(&f.apply), Arc::clone(&g.apply));
    Ok(Mor {
        dom: g.dom.clone(),
        cod: f.cod.clone(),
        tree: CombTree::Node("compose", vec![f.tree.clone(), g.tree.clone()]),
        apply: Arc::new(move |v, fuel| fa(&ga(v, fuel)?, fuel)),
    })
}

/// Folds a nonempty chain f_n ∘ ... ∘ f_1 given in application order
/// (first applied first).
pub fn pipeline<B: Backend + ?Sized>(stages: &[Mor<B>]) -> Result<Mor<B>, ModelError> {
    let mut it = stages.iter();
    let first = it.next().expect("pipeline needs at least one stage").clone();
    it.try_fold(first, |acc, next| compose(next, &acc))
}

pub fn interp_ty<B: Backend + ?Sized>(b: &B, ty: &Ty) -> B::Obj {
    match ty {
        Ty::Iota => b.nat_obj(),
        Ty::Arrow(s, t) => {
            let (s, t) = (interp_ty(b, s), interp_ty(b, t));
            b.arrow_obj(&s, &t)
        }
        Ty::Bang(s) => {
            let s = interp_ty(b, s);
            b.bang_obj(&s)
        }
    }
}

pub fn interp_entry<B: Backend + ?Sized>(b: &B, e: &BasisEntry) -> B::Obj {
    let ty = interp_ty(b, &e.ty);
    match e.kind {
        VarKind::Stable => b.bang_obj(&ty),
        _ => ty,
    }
}

/// Right-nested tensor with a unit terminator: ⟦x:ι⟧ = N⊗1, ⟦∅⟧ = 1.
pub fn interp_entries<B: Backend + ?Sized>(b: &B, entries: &[BasisEntry]) -> B::Obj {
    match entries.split_first() {
        None => b.unit_obj(),
        Some((e, rest)) => {
            let head = interp_entry(b, e);
            let tail = interp_entries(b, rest);
            b.tensor_obj(&head, &tail)
        }
    }
}

pub fn interp_basis<B: Backend + ?Sized>(b: &B, basis: &Basis) -> B::Obj {
    interp_entries(b, basis.entries())
}

/// ⟦pre ++ suf⟧ → ⟦pre⟧ ⊗ ⟦suf⟧.
fn split_entries<B: Backend + ?Sized>(
    b: &B,
    pre: &[BasisEntry],
    suf: &[BasisEntry],
) -> Result<Mor<B>, ModelError> {
    match pre.split_first() {
        None => Ok(b.lunit_inv(&interp_entries(b, suf))),
        Some((e, rest)) => {
            let e_obj = interp_entry(b, e);
            let inner = split_entries(b, rest, suf)?;
            let step = b.tensor_mor(&b.identity(&e_obj), &inner);
            let fix_up = b.assoc_left(&e_obj, &interp_entries(b, rest), &interp_entries(b, suf));
            compose(&fix_up, &step)
        }
    }
}

/// ⟦b1⟧ ⊗ ⟦b2⟧ → ⟦b1 ++ b2⟧.
fn merge_entries<B: Backend + ?Sized>(
    b: &B,
    b1: &[BasisEntry],
    b2: &[BasisEntry],
) -> Result<Mor<B>, ModelError> {
    match b1.split_first() {
        None => Ok(b.lunit(&interp_entries(b, b2))),
        Some((e, rest)) => {
            let e_obj = interp_entry(b, e);
            let step = b.assoc_right(&e_obj, &interp_entries(b, rest), &interp_entries(b, b2));
            let inner = merge_entries(b, rest, b2)?;
            compose(&b.tensor_mor(&b.identity(&e_obj), &inner), &step)
        }
    }
}

/// Applies `inner` to the basis tail after `prefix`, under identities.
fn in_context<B: Backend + ?Sized>(b: &B, prefix: &[BasisEntry], inner: Mor<B>) -> Mor<B> {
    let mut m = inner;
    for e in prefix.iter().rev() {
        m = b.tensor_mor(&b.identity(&interp_entry(b, e)), &m);
    }
    m
}

/// ⟦..., κ_i, κ_{i+1}, ...⟧ → same basis with slots i and i+1 swapped.
fn swap_adjacent<B: Backend + ?Sized>(
    b: &B,
    entries: &[BasisEntry],
    i: usize,
) -> Result<Mor<B>, ModelError> {
    let x = interp_entry(b, &entries[i]);
    let y = interp_entry(b, &entries[i + 1]);
    let rest = interp_entries(b, &entries[i + 2..]);
    let local = pipeline(&[
        b.assoc_left(&x, &y, &rest),
        b.tensor_mor(&b.symmetry(&x, &y), &b.identity(&rest)),
        b.assoc_right(&y, &x, &rest),
    ])?;
    Ok(in_context(b, &entries[..i], local))
}

/// The promotion of a ground/stable basis: ⟦Γ⟧ → !⟦Γ⟧, folding the
/// entrywise coalgebra maps (p on ground, δ on stable) with q.
pub fn promote_entries<B: Backend + ?Sized>(
    b: &B,
    entries: &[BasisEntry],
) -> Result<Mor<B>, ModelError> {
    match entries.split_first() {
        None => Ok(b.q_unit()),
        Some((e, rest)) => {
            let head_step = match e.kind {
                VarKind::Ground => b.promote_n(),
                VarKind::Stable => b.delta(&interp_ty(b, &e.ty)),
                VarKind::Higher => {
                    return Err(ModelError::IllShaped(format!(
                        "cannot promote higher entry `{}`",
                        e.name
                    )))
                }
            };
            let tail_step = promote_entries(b, rest)?;
            let pointwise = b.tensor_mor(&head_step, &tail_step);
            let q = b.q_tensor(&interp_entry(b, e), &interp_entries(b, rest));
            compose(&q, &pointwise)
        }
    }
}

/// ⟦pre ++ suf⟧ → ⟦pre ++ [entry] ++ suf⟧, feeding `src : 1 → ⟦entry⟧` into
/// the inserted slot.
pub fn insert_entry<B: Backend + ?Sized>(
    b: &B,
    pre: &[BasisEntry],
    suf: &[BasisEntry],
    src: &Mor<B>,
) -> Result<Mor<B>, ModelError> {
    let suf_obj = interp_entries(b, suf);
    let local = pipeline(&[
        b.lunit_inv(&suf_obj),
        b.tensor_mor(src, &b.identity(&suf_obj)),
    ])?;
    Ok(in_context(b, pre, local))
}

// ---------------------------------------------------------------------------
// Interpretation of derivations.

pub fn interpret<B: Backend + ?Sized>(b: &B, d: &Derivation) -> Result<Mor<B>, ModelError> {
    let concl = &d.concl;
    let entries = concl.basis.entries();
    let m = match d.rule {
        Rule::Z => b.zero(),
        Rule::S => {
            let n = b.nat_obj();
            let body = compose(&b.succ_m(), &b.lunit(&n))?;
            b.curry(&body, &b.unit_obj(), &n)?
        }
        Rule::P => {
            let n = b.nat_obj();
            let body = compose(&b.pred_m(), &b.lunit(&n))?;
            b.curry(&body, &b.unit_obj(), &n)?
        }
        Rule::Gv | Rule::Hv => b.runit(&interp_entry(b, &entries[0])),
        Rule::Sv => {
            let bang = interp_entry(b, &entries[0]);
            let sigma = interp_ty(b, &concl.ty);
            compose(&b.epsilon(&sigma), &b.runit(&bang))?
        }
        Rule::Lam => {
            let prem = &d.premises[0];
            let prem_entries = prem.basis().entries();
            let binder = prem_entries.last().expect("lambda premise ends in the binder");
            let gamma = &prem_entries[..prem_entries.len() - 1];
            let binder_obj = interp_entry(b, binder);
            let body = interpret(b, prem)?;
            let f = pipeline(&[
                b.tensor_mor(&b.identity(&interp_entries(b, gamma)), &b.runit_inv(&binder_obj)),
                merge_entries(b, gamma, std::slice::from_ref(binder))?,
                body,
            ])?;
            b.curry(&f, &interp_entries(b, gamma), &binder_obj)?
        }
        Rule::Ap => {
            let (pf, pa) = (&d.premises[0], &d.premises[1]);
            let f = interpret(b, pf)?;
            let a = interpret(b, pa)?;
            let split = split_entries(b, pf.basis().entries(), pa.basis().entries())?;
            let Ty::Arrow(s, t) = pf.ty() else {
                return Err(ModelError::IllShaped("application of a non-arrow".into()));
            };
            pipeline(&[
                split,
                b.tensor_mor(&f, &a),
                b.eval(&interp_ty(b, s), &interp_ty(b, t)),
            ])?
        }
        Rule::LIf => {
            let (pc, pl, pr) = (&d.premises[0], &d.premises[1], &d.premises[2]);
            let cond = interpret(b, pc)?;
            let l = interpret(b, pl)?;
            let r = interpret(b, pr)?;
            let split = split_entries(b, pc.basis().entries(), pl.basis().entries())?;
            pipeline(&[split, b.tensor_mor(&cond, &b.pairing(&l, &r)?), b.lif_m()])?
        }
        Rule::Ex(i) => {
            let prem = interpret(b, &d.premises[0])?;
            compose(&prem, &swap_adjacent(b, entries, i)?)?
        }
        Rule::Gw | Rule::Sw => {
            let prem = interpret(b, &d.premises[0])?;
            let last = entries.last().expect("weakening appends an entry");
            let unit = b.unit_obj();
            let kill = match d.rule {
                Rule::Gw => b.weak_n(),
                _ => b.erase(&interp_ty(b, &last.ty)),
            };
            let local = pipeline(&[
                b.tensor_mor(&kill, &b.identity(&unit)),
                b.lunit(&unit),
            ])?;
            compose(&prem, &in_context(b, &entries[..entries.len() - 1], local))?
        }
        Rule::Gc | Rule::Sc => {
            let prem = interpret(b, &d.premises[0])?;
            let last = entries.last().expect("contraction keeps the merged entry");
            let shared_obj = interp_entry(b, last);
            let unit = b.unit_obj();
            let share = match d.rule {
                Rule::Gc => b.copy_n(),
                _ => b.dup(&interp_ty(b, &last.ty)),
            };
            let local = pipeline(&[
                b.tensor_mor(&share, &b.identity(&unit)),
                b.assoc_right(&shared_obj, &shared_obj, &unit),
            ])?;
            compose(&prem, &in_context(b, &entries[..entries.len() - 1], local))?
        }
        Rule::Mu => {
            let prem = &d.premises[0];
            let prem_entries = prem.basis().entries();
            let binder = prem_entries.last().expect("mu premise ends in the binder");
            let context = &prem_entries[..prem_entries.len() - 1];
            let sigma = interp_ty(b, &concl.ty);
            let bang_sigma = b.bang_obj(&sigma);
            let body = interpret(b, prem)?;
            let f = pipeline(&[
                b.tensor_mor(&b.identity(&interp_entries(b, context)), &b.runit_inv(&bang_sigma)),
                merge_entries(b, context, std::slice::from_ref(binder))?,
                body,
            ])?;
            let cur = b.curry(&f, &interp_entries(b, context), &bang_sigma)?;
            pipeline(&[promote_entries(b, context)?, b.bang_mor(&cur), b.fix(&sigma)])?
        }
        Rule::Pr => {
            let prem = interpret(b, &d.premises[0])?;
            compose(&b.promote_n(), &prem)?
        }
        Rule::Dr => {
            let prem = interpret(b, &d.premises[0])?;
            let sigma = interp_ty(b, &concl.ty);
            compose(&b.epsilon(&sigma), &prem)?
        }
        Rule::Ds => {
            let (pm, pn) = (&d.premises[0], &d.premises[1]);
            let m = interpret(b, pm)?;
            let n = interpret(b, pn)?;
            let delta_obj = interp_basis(b, pn.basis());
            let split = split_entries(b, pm.basis().entries(), pn.basis().entries())?;
            pipeline(&[
                split,
                b.tensor_mor(&compose(&b.weak_n(), &m)?, &b.identity(&delta_obj)),
                b.lunit(&delta_obj),
                n,
            ])?
        }
        Rule::Cp => {
            let (pm, pn) = (&d.premises[0], &d.premises[1]);
            let m = interpret(b, pm)?;
            let n = interpret(b, pn)?;
            let body_entries = pn.basis().entries();
            let delta = &body_entries[..body_entries.len() - 2];
            let binders = &body_entries[body_entries.len() - 2..];
            let nat = b.nat_obj();
            let nn = b.tensor_obj(&nat, &nat);
            let delta_obj = interp_entries(b, delta);
            let split = split_entries(b, pm.basis().entries(), delta)?;
            let re_nest = b.tensor_mor(
                &b.identity(&delta_obj),
                &b.tensor_mor(&b.identity(&nat), &b.runit_inv(&nat)),
            );
            pipeline(&[
                split,
                b.tensor_mor(&compose(&b.copy_n(), &m)?, &b.identity(&delta_obj)),
                b.symmetry(&nn, &delta_obj),
                re_nest,
                merge_entries(b, delta, binders)?,
                n,
            ])?
        }
    };
    // Object bookkeeping: the result must match the judgment.
    let want_dom = interp_basis(b, &concl.basis);
    let want_cod = interp_ty(b, &concl.ty);
    if m.dom != want_dom || m.cod != want_cod {
        return Err(ModelError::ObjectMismatch {
            context: format!("interpret({})", d.rule),
            left: format!("{:?} -> {:?}", m.dom, m.cod),
            right: format!("{:?} -> {:?}", want_dom, want_cod),
        });
    }
    Ok(m)
}

/// Renders the combinator tree of an interpreted morphism.
pub fn combinator_tree<B: Backend + ?Sized>(m: &Mor<B>) -> String {
    m.tree.to_string()
}

// ---------------------------------------------------------------------------
// Observation.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundResult {
    Bottom,
    Num(u64),
    Unstable,
}

impl fmt::Display for GroundResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundResult::Bottom => f.write_str("bottom"),
            GroundResult::Num(k) => write!(f, "{}", k),
            GroundResult::Unstable => f.write_str("unstable"),
        }
    }
}

/// Interprets a closed ground term and reads the numeral (or bottom) at the
/// global point, guarding against unstabilized fixpoints.
pub fn denote_ground<B: Backend + ?Sized>(
    b: &B,
    t: &Term,
    obs: &ObsSpec,
    mode: Mode,
) -> Result<GroundResult, ModelError> {
    let (ty, d) = crate::typecheck::infer_in_mode(&Basis::empty(), t, mode)?;
    if ty != Ty::Iota {
        return Err(ModelError::Typing(TypeError::TypeMismatch { found: ty, claimed: Ty::Iota }));
    }
    let m = interpret(b, &d)?;
    let point = b.global_point();
    let at = |k: u32| -> Result<Option<u64>, ModelError> {
        let v = m.apply(&point, Fuel { fix_iters: k })?;
        b.observe_nat(&v)
    };
    let lo = at(obs.fix_iters)?;
    let hi = at(obs.fix_iters.saturating_mul(2))?;
    if lo != hi {
        return Ok(GroundResult::Unstable);
    }
    Ok(match lo {
        None => GroundResult::Bottom,
        Some(k) => GroundResult::Num(k),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Eq3 {
    Equal,
    Distinct { witness: String },
    Inconclusive { unstable_fix: bool },
}

impl fmt::Display for Eq3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eq3::Equal => f.write_str("equal"),
            Eq3::Distinct { witness } => write!(f, "distinct ({})", witness),
            Eq3::Inconclusive { unstable_fix } => {
                write!(f, "inconclusive (unstable_fix={})", unstable_fix)
            }
        }
    }
}

/// Observational equality at matched budgets. Samples the shared domain,
/// observes both sides at `fix_iters` and at twice that, and only reports
/// Distinct from samples where both sides have stabilized.
pub fn semantic_eq<B: Backend + ?Sized>(
    b: &B,
    f: &Mor<B>,
    g: &Mor<B>,
    obs: &ObsSpec,
) -> Result<Eq3, ModelError> {
    if f.dom != g.dom || f.cod != g.cod {
        return Err(ModelError::ObjectMismatch {
            context: "semantic_eq".to_string(),
            left: format!("{:?} -> {:?}", f.dom, f.cod),
            right: format!("{:?} -> {:?}", g.dom, g.cod),
        });
    }
    let lo = Fuel { fix_iters: obs.fix_iters };
    let hi = Fuel { fix_iters: obs.fix_iters.saturating_mul(2) };
    let mut unstable = false;
    let inputs = b.sample_inputs(&f.dom, obs);
    for v in &inputs {
        let f_lo = b.observe(&f.cod, &f.apply(v, lo)?, obs, lo)?;
        let g_lo = b.observe(&g.cod, &g.apply(v, lo)?, obs, lo)?;
        let f_hi = b.observe(&f.cod, &f.apply(v, hi)?, obs, hi)?;
        let g_hi = b.observe(&g.cod, &g.apply(v, hi)?, obs, hi)?;
        if f_lo != f_hi || g_lo != g_hi {
            unstable = true;
            continue;
        }
        if f_lo != g_lo {
            return Ok(Eq3::Distinct {
                witness: format!("at input {:?}: {} vs {}", v, f_lo, g_lo),
            });
        }
    }
    if unstable {
        Ok(Eq3::Inconclusive { unstable_fix: true })
    } else {
        Ok(Eq3::Equal)
    }
}

/// Interprets closed sample terms whose type maps to `obj`; used by
/// backends to extend their function-space sample families.
pub fn term_denotation_samples<B: Backend + ?Sized>(
    b: &B,
    obj: &B::Obj,
    obs: &ObsSpec,
) -> Vec<B::Val> {
    let mut out = Vec::new();
    for t in &obs.fn_samples {
        let Ok((ty, d)) = crate::typecheck::infer(&Basis::empty(), t) else {
            continue;
        };
        if interp_ty(b, &ty) != *obj {
            continue;
        }
        let Ok(m) = interpret(b, &d) else { continue };
        if let Ok(v) = m.apply(&b.global_point(), Fuel { fix_iters: obs.fix_iters }) {
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obs_spec_clamps_bounds() {
        let o = ObsSpec::new(0, 0, 0, 0, 7);
        assert_eq!(o.numeral_bound, 1);
        assert_eq!(o.budget, 1);
        assert_eq!(o.fix_iters, 1);
        assert_eq!(o.samples, 1);
        assert_eq!(o.seed, 7);
    }

    #[test]
    fn comb_tree_renders_nested() {
        let t = CombTree::Node(
            "compose",
            vec![CombTree::leaf("eval"), CombTree::Node("tensor", vec![
                CombTree::leaf("curry(succ)"),
                CombTree::leaf("id"),
            ])],
        );
        assert_eq!(t.to_string(), "compose(eval, tensor(curry(succ), id))");
    }

    #[test]
    fn observation_display_is_stable() {
        let o = Observation::Seq(vec![
            Observation::Atom("bot".into()),
            Observation::Set(["(0, 1)".to_string(), "(1, 2)".to_string()].into_iter().collect()),
        ]);
        assert_eq!(o.to_string(), "[bot, {(0, 1), (1, 2)}]");
    }
}
