//! Coherence backend: webs, cliques, and trace-determined linear maps.
//!
//! Objects carry a countable web of tokens with a reflexive-symmetric
//! coherence relation; a value is a finite clique. The ground web is flat
//! (tokens coherent only with themselves), the tensor web is the
//! componentwise product, the arrow web pairs argument and result tokens,
//! the bang web consists of finite cliques, and the product web is a tagged
//! union. Morphisms act tokenwise and preserve unions, so they are
//! determined by their values on singletons.
//!
//! Function values mix explicit trace tokens with closure atoms; a closure
//! atom stands for the full (possibly infinite) trace of a function and is
//! expanded into real trace tokens only when a value is observed, which
//! keeps application exact at any argument size while probing stays within
//! the token budget.

use crate::model::{Backend, CombTree, Fuel, ModelError, Mor, ObsSpec, Observation};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CObj {
    Unit,
    Nat,
    Tensor(Box<CObj>, Box<CObj>),
    Arrow(Box<CObj>, Box<CObj>),
    Bang(Box<CObj>),
    Prod(Box<CObj>, Box<CObj>),
}

static FUN_ID: AtomicU64 = AtomicU64::new(0);

type CFunBody = Arc<dyn Fn(&CVal, Fuel) -> Result<CVal, ModelError> + Send + Sync>;

/// A closure atom: an opaque total description of a linear map's trace.
/// Identity (and hence ordering inside cliques) is by allocation id.
#[derive(Clone)]
pub struct CFun {
    pub id: u64,
    body: CFunBody,
}

impl CFun {
    fn new(body: impl Fn(&CVal, Fuel) -> Result<CVal, ModelError> + Send + Sync + 'static) -> CFun {
        CFun { id: FUN_ID.fetch_add(1, Ordering::Relaxed), body: Arc::new(body) }
    }

    pub fn apply(&self, v: &CVal, fuel: Fuel) -> Result<CVal, ModelError> {
        (self.body)(v, fuel)
    }
}

impl PartialEq for CFun {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for CFun {}
impl PartialOrd for CFun {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for CFun {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}
impl std::hash::Hash for CFun {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}
impl fmt::Debug for CFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<fun#{}>", self.id)
    }
}

/// A web token. `Clq` payloads are kept sorted and deduplicated so tokens
/// compare canonically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CAtom {
    Star,
    Nat(u64),
    Pair(Box<CAtom>, Box<CAtom>),
    /// Explicit arrow-web token (argument, result).
    Trace(Box<CAtom>, Box<CAtom>),
    /// Bang-web token: a finite clique.
    Clq(Vec<CAtom>),
    InL(Box<CAtom>),
    InR(Box<CAtom>),
    Fun(CFun),
}

impl fmt::Debug for CAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CAtom::Star => f.write_str("*"),
            CAtom::Nat(k) => write!(f, "{}", k),
            CAtom::Pair(a, b) => write!(f, "({:?}, {:?})", a, b),
            CAtom::Trace(a, b) => write!(f, "({:?}, {:?})", a, b),
            CAtom::Clq(xs) => {
                write!(f, "{{")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{:?}", x)?;
                }
                write!(f, "}}")
            }
            CAtom::InL(a) => write!(f, "inl {:?}", a),
            CAtom::InR(a) => write!(f, "inr {:?}", a),
            CAtom::Fun(p) => write!(f, "{:?}", p),
        }
    }
}

pub fn clq(mut xs: Vec<CAtom>) -> CAtom {
    xs.sort();
    xs.dedup();
    CAtom::Clq(xs)
}

fn pair(a: CAtom, b: CAtom) -> CAtom {
    CAtom::Pair(Box::new(a), Box::new(b))
}

/// A value: a finite clique of the web, as a token set.
pub type CVal = BTreeSet<CAtom>;

fn ill(msg: impl Into<String>) -> ModelError {
    ModelError::IllShaped(msg.into())
}

const SUBSET_GUARD: usize = 16;
const COMBO_GUARD: usize = 1 << 14;
const TOKEN_CAP: usize = 128;

fn subsets(xs: &[CAtom]) -> Result<Vec<Vec<CAtom>>, ModelError> {
    if xs.len() > SUBSET_GUARD {
        return Err(ill(format!("clique of {} tokens is too large to expand", xs.len())));
    }
    let mut out = Vec::with_capacity(1 << xs.len());
    for mask in 0u32..(1u32 << xs.len()) {
        let mut s = Vec::new();
        for (i, x) in xs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s.push(x.clone());
            }
        }
        out.push(s);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Coherence.

/// Reflexive coherence of two tokens of the same web. Closure atoms carry
/// no finite description, so they are optimistically coherent.
pub fn coherent(obj: &CObj, a: &CAtom, b: &CAtom) -> bool {
    match (obj, a, b) {
        (_, CAtom::Fun(_), _) | (_, _, CAtom::Fun(_)) => true,
        (CObj::Unit, CAtom::Star, CAtom::Star) => true,
        (CObj::Nat, CAtom::Nat(n), CAtom::Nat(m)) => n == m,
        (CObj::Tensor(x, y), CAtom::Pair(a1, a2), CAtom::Pair(b1, b2)) => {
            coherent(x, a1, b1) && coherent(y, a2, b2)
        }
        (CObj::Arrow(x, y), CAtom::Trace(a1, a2), CAtom::Trace(b1, b2)) => {
            // Coherent arguments force coherent results, and a shared result
            // forces a shared argument.
            !coherent(x, a1, b1) || (coherent(y, a2, b2) && (a2 != b2 || a1 == b1))
        }
        (CObj::Bang(x), CAtom::Clq(xs), CAtom::Clq(ys)) => {
            xs.iter().all(|a| ys.iter().all(|b| coherent(x, a, b)))
        }
        (CObj::Prod(x, _), CAtom::InL(a1), CAtom::InL(b1)) => coherent(x, a1, b1),
        (CObj::Prod(_, y), CAtom::InR(a1), CAtom::InR(b1)) => coherent(y, a1, b1),
        (CObj::Prod(..), CAtom::InL(_), CAtom::InR(_)) => true,
        (CObj::Prod(..), CAtom::InR(_), CAtom::InL(_)) => true,
        _ => false,
    }
}

fn check_clique(obj: &CObj, tokens: &BTreeSet<CAtom>) -> Result<(), ModelError> {
    let v: Vec<&CAtom> = tokens.iter().collect();
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            if !coherent(obj, v[i], v[j]) {
                return Err(ModelError::IncoherentClique(format!(
                    "{:?} and {:?} at {:?}",
                    v[i], v[j], obj
                )));
            }
        }
    }
    Ok(())
}

/// Deterministic token enumeration: numerals ascend, bang cliques are
/// ordered by size and then lexicographically, pairs nest left to right.
pub fn enumerate_tokens(obj: &CObj, budget: u32) -> Vec<CAtom> {
    let mut out = match obj {
        CObj::Unit => vec![CAtom::Star],
        CObj::Nat => (0..=u64::from(budget)).map(CAtom::Nat).collect(),
        CObj::Tensor(a, b) => {
            let mut v = Vec::new();
            'outer: for x in enumerate_tokens(a, budget) {
                for y in enumerate_tokens(b, budget) {
                    v.push(pair(x.clone(), y));
                    if v.len() >= TOKEN_CAP {
                        break 'outer;
                    }
                }
            }
            v
        }
        CObj::Arrow(a, b) => {
            let mut v = Vec::new();
            'outer: for x in enumerate_tokens(a, budget) {
                for y in enumerate_tokens(b, budget) {
                    v.push(CAtom::Trace(Box::new(x.clone()), Box::new(y)));
                    if v.len() >= TOKEN_CAP {
                        break 'outer;
                    }
                }
            }
            v
        }
        CObj::Bang(a) => {
            let base = enumerate_tokens(a, budget);
            let mut v: Vec<CAtom> = vec![clq(vec![])];
            // Grow cliques size by size so the output is size-then-lex.
            let mut layer: Vec<Vec<CAtom>> = vec![vec![]];
            for _ in 0..budget {
                let mut next = Vec::new();
                for partial in &layer {
                    for t in &base {
                        if partial.last().map_or(false, |l| t <= l) {
                            continue;
                        }
                        if partial.iter().all(|p| coherent(a, p, t)) {
                            let mut grown = partial.clone();
                            grown.push(t.clone());
                            next.push(grown);
                        }
                    }
                }
                for g in &next {
                    v.push(clq(g.clone()));
                    if v.len() >= TOKEN_CAP {
                        return v;
                    }
                }
                layer = next;
            }
            v
        }
        CObj::Prod(a, b) => {
            let mut v: Vec<CAtom> =
                enumerate_tokens(a, budget).into_iter().map(|x| CAtom::InL(Box::new(x))).collect();
            v.extend(enumerate_tokens(b, budget).into_iter().map(|x| CAtom::InR(Box::new(x))));
            v
        }
    };
    out.truncate(TOKEN_CAP);
    out
}

// ---------------------------------------------------------------------------
// Morphism construction.

#[derive(Debug, Clone, Copy, Default)]
pub struct CohBackend;

type M = Mor<CohBackend>;

/// Lifts a tokenwise step to a union-preserving map on cliques.
fn per_token(
    name: &str,
    dom: CObj,
    cod: CObj,
    step: impl Fn(&CAtom, Fuel) -> Result<CVal, ModelError> + Send + Sync + 'static,
) -> M {
    Mor::prim(name, dom, cod, move |v: &CVal, fuel| {
        let mut out = CVal::new();
        for a in v {
            out.extend(step(a, fuel)?);
        }
        Ok(out)
    })
}

fn per_token_tree(
    tree: CombTree,
    dom: CObj,
    cod: CObj,
    step: impl Fn(&CAtom, Fuel) -> Result<CVal, ModelError> + Send + Sync + 'static,
) -> M {
    Mor::new(tree, dom, cod, move |v: &CVal, fuel| {
        let mut out = CVal::new();
        for a in v {
            out.extend(step(a, fuel)?);
        }
        Ok(out)
    })
}

fn one(a: CAtom) -> CVal {
    [a].into_iter().collect()
}

fn product(x: &CVal, y: &CVal) -> CVal {
    let mut out = CVal::new();
    for a in x {
        for b in y {
            out.insert(pair(a.clone(), b.clone()));
        }
    }
    out
}

/// Applies one arrow-position atom to an argument clique.
pub fn apply_atom(f: &CAtom, arg: &CVal, fuel: Fuel) -> Result<CVal, ModelError> {
    match f {
        CAtom::Fun(p) => p.apply(arg, fuel),
        CAtom::Trace(a, b) => {
            Ok(if arg.contains(a) { one((**b).clone()) } else { CVal::new() })
        }
        _ => Err(ill(format!("expected an arrow token, got {:?}", f))),
    }
}

/// Applies a function value (union of its atoms' traces) to an argument.
pub fn apply_val(f: &CVal, arg: &CVal, fuel: Fuel) -> Result<CVal, ModelError> {
    let mut out = CVal::new();
    for a in f {
        out.extend(apply_atom(a, arg, fuel)?);
    }
    Ok(out)
}

fn expect_clq(a: &CAtom) -> Result<&Vec<CAtom>, ModelError> {
    match a {
        CAtom::Clq(xs) => Ok(xs),
        _ => Err(ill(format!("expected a bang token, got {:?}", a))),
    }
}

fn expect_pair(a: &CAtom) -> Result<(&CAtom, &CAtom), ModelError> {
    match a {
        CAtom::Pair(x, y) => Ok((x, y)),
        _ => Err(ill(format!("expected a tensor token, got {:?}", a))),
    }
}

// ---------------------------------------------------------------------------
// Fixpoints.

/// Condenses a function value into a single closure atom so that the
/// promoted recursive resource stays one token wide per iteration.
fn condense(obj: &CObj, v: &CVal) -> CVal {
    if v.is_empty() {
        return CVal::new();
    }
    match obj {
        CObj::Arrow(..) => {
            let copy = v.clone();
            one(CAtom::Fun(CFun::new(move |arg, fuel| apply_val(&copy, arg, fuel))))
        }
        _ => v.clone(),
    }
}

/// Bounded Kleene iteration from the empty clique. The chain of
/// approximants is trace-increasing: at ground objects tokens accumulate
/// directly, while at arrow objects each fresh approximant closure subsumes
/// the previous one, which keeps later applications linear in the
/// iteration count instead of replaying the whole chain.
pub fn iter_fix(
    functional: &[CAtom],
    body_obj: &CObj,
    iters: u32,
    fuel: Fuel,
) -> Result<CVal, ModelError> {
    let mut x = CVal::new();
    for _ in 0..iters {
        let mut promoted = one(clq(vec![]));
        let packed = condense(body_obj, &x);
        if !packed.is_empty() {
            promoted.insert(clq(packed.into_iter().collect()));
        }
        let mut next = CVal::new();
        for phi in functional {
            next.extend(apply_atom(phi, &promoted, fuel)?);
        }
        if matches!(body_obj, CObj::Arrow(..)) {
            x = next;
        } else {
            let merged: CVal = x.union(&next).cloned().collect();
            if merged == x {
                break;
            }
            x = merged;
        }
    }
    Ok(x)
}

impl Backend for CohBackend {
    type Obj = CObj;
    type Val = CVal;

    fn name(&self) -> &'static str {
        "coh"
    }

    fn unit_obj(&self) -> CObj {
        CObj::Unit
    }
    fn nat_obj(&self) -> CObj {
        CObj::Nat
    }
    fn tensor_obj(&self, a: &CObj, b: &CObj) -> CObj {
        CObj::Tensor(Box::new(a.clone()), Box::new(b.clone()))
    }
    fn arrow_obj(&self, a: &CObj, b: &CObj) -> CObj {
        CObj::Arrow(Box::new(a.clone()), Box::new(b.clone()))
    }
    fn bang_obj(&self, a: &CObj) -> CObj {
        CObj::Bang(Box::new(a.clone()))
    }
    fn product_obj(&self, a: &CObj, b: &CObj) -> CObj {
        CObj::Prod(Box::new(a.clone()), Box::new(b.clone()))
    }

    fn identity(&self, a: &CObj) -> M {
        Mor::prim("id", a.clone(), a.clone(), |v: &CVal, _| Ok(v.clone()))
    }

    fn tensor_mor(&self, f: &M, g: &M) -> M {
        let (fc, gc) = (f.clone(), g.clone());
        per_token_tree(
            CombTree::Node("tensor", vec![f.tree.clone(), g.tree.clone()]),
            self.tensor_obj(&f.dom, &g.dom),
            self.tensor_obj(&f.cod, &g.cod),
            move |t, fuel| {
                let (a, b) = expect_pair(t)?;
                Ok(product(&fc.apply(&one(a.clone()), fuel)?, &gc.apply(&one(b.clone()), fuel)?))
            },
        )
    }

    fn symmetry(&self, a: &CObj, b: &CObj) -> M {
        per_token("sym", self.tensor_obj(a, b), self.tensor_obj(b, a), |t, _| {
            let (x, y) = expect_pair(t)?;
            Ok(one(pair(y.clone(), x.clone())))
        })
    }

    fn assoc_right(&self, a: &CObj, b: &CObj, c: &CObj) -> M {
        let dom = self.tensor_obj(&self.tensor_obj(a, b), c);
        let cod = self.tensor_obj(a, &self.tensor_obj(b, c));
        per_token("assocR", dom, cod, |t, _| {
            let (ab, z) = expect_pair(t)?;
            let (x, y) = expect_pair(ab)?;
            Ok(one(pair(x.clone(), pair(y.clone(), z.clone()))))
        })
    }

    fn assoc_left(&self, a: &CObj, b: &CObj, c: &CObj) -> M {
        let dom = self.tensor_obj(a, &self.tensor_obj(b, c));
        let cod = self.tensor_obj(&self.tensor_obj(a, b), c);
        per_token("assocL", dom, cod, |t, _| {
            let (x, yz) = expect_pair(t)?;
            let (y, z) = expect_pair(yz)?;
            Ok(one(pair(pair(x.clone(), y.clone()), z.clone())))
        })
    }

    fn lunit(&self, a: &CObj) -> M {
        per_token("lunit", self.tensor_obj(&CObj::Unit, a), a.clone(), |t, _| {
            let (s, x) = expect_pair(t)?;
            if *s != CAtom::Star {
                return Err(ill(format!("expected the unit token, got {:?}", s)));
            }
            Ok(one(x.clone()))
        })
    }

    fn lunit_inv(&self, a: &CObj) -> M {
        per_token("lunitInv", a.clone(), self.tensor_obj(&CObj::Unit, a), |t, _| {
            Ok(one(pair(CAtom::Star, t.clone())))
        })
    }

    fn runit(&self, a: &CObj) -> M {
        per_token("runit", self.tensor_obj(a, &CObj::Unit), a.clone(), |t, _| {
            let (x, s) = expect_pair(t)?;
            if *s != CAtom::Star {
                return Err(ill(format!("expected the unit token, got {:?}", s)));
            }
            Ok(one(x.clone()))
        })
    }

    fn runit_inv(&self, a: &CObj) -> M {
        per_token("runitInv", a.clone(), self.tensor_obj(a, &CObj::Unit), |t, _| {
            Ok(one(pair(t.clone(), CAtom::Star)))
        })
    }

    fn curry(&self, f: &M, c: &CObj, a: &CObj) -> Result<M, ModelError> {
        let expect = self.tensor_obj(c, a);
        if f.dom != expect {
            return Err(ModelError::ObjectMismatch {
                context: "curry".to_string(),
                left: format!("{:?}", f.dom),
                right: format!("{:?}", expect),
            });
        }
        let body = f.clone();
        // Memoize one closure atom per environment token, so re-applying the
        // same morphism to the same token yields the same atom.
        let memo: Arc<Mutex<HashMap<CAtom, CAtom>>> = Arc::new(Mutex::new(HashMap::new()));
        Ok(per_token_tree(
            CombTree::Node("curry", vec![f.tree.clone()]),
            c.clone(),
            self.arrow_obj(a, &f.cod),
            move |env, _| {
                let mut cache = memo.lock().expect("curry memo lock");
                let atom = cache
                    .entry(env.clone())
                    .or_insert_with(|| {
                        let body = body.clone();
                        let env = env.clone();
                        CAtom::Fun(CFun::new(move |arg, fuel| {
                            body.apply(&product(&one(env.clone()), arg), fuel)
                        }))
                    })
                    .clone();
                Ok(one(atom))
            },
        ))
    }

    fn eval(&self, a: &CObj, b: &CObj) -> M {
        let dom = self.tensor_obj(&self.arrow_obj(a, b), a);
        per_token("eval", dom, b.clone(), |t, fuel| {
            let (f, arg) = expect_pair(t)?;
            apply_atom(f, &one(arg.clone()), fuel)
        })
    }

    fn pairing(&self, f: &M, g: &M) -> Result<M, ModelError> {
        if f.dom != g.dom {
            return Err(ModelError::ObjectMismatch {
                context: "pairing".to_string(),
                left: format!("{:?}", f.dom),
                right: format!("{:?}", g.dom),
            });
        }
        let (fc, gc) = (f.clone(), g.clone());
        Ok(Mor::new(
            CombTree::Node("pair", vec![f.tree.clone(), g.tree.clone()]),
            f.dom.clone(),
            self.product_obj(&f.cod, &g.cod),
            move |v: &CVal, fuel| {
                let mut out = CVal::new();
                for t in fc.apply(v, fuel)? {
                    out.insert(CAtom::InL(Box::new(t)));
                }
                for t in gc.apply(v, fuel)? {
                    out.insert(CAtom::InR(Box::new(t)));
                }
                Ok(out)
            },
        ))
    }

    fn proj1(&self, a: &CObj, b: &CObj) -> M {
        per_token("p1", self.product_obj(a, b), a.clone(), |t, _| match t {
            CAtom::InL(x) => Ok(one((**x).clone())),
            CAtom::InR(_) => Ok(CVal::new()),
            _ => Err(ill(format!("expected a product token, got {:?}", t))),
        })
    }

    fn proj2(&self, a: &CObj, b: &CObj) -> M {
        per_token("p2", self.product_obj(a, b), b.clone(), |t, _| match t {
            CAtom::InR(x) => Ok(one((**x).clone())),
            CAtom::InL(_) => Ok(CVal::new()),
            _ => Err(ill(format!("expected a product token, got {:?}", t))),
        })
    }

    fn bang_mor(&self, f: &M) -> M {
        let fc = f.clone();
        per_token_tree(
            CombTree::Node("bang", vec![f.tree.clone()]),
            self.bang_obj(&f.dom),
            self.bang_obj(&f.cod),
            move |t, fuel| {
                let xs = expect_clq(t)?;
                // Every input token must be used: the output cliques are the
                // unions of one nonempty subset of each tokenwise image.
                let mut images = Vec::new();
                let mut combos: usize = 1;
                for a in xs {
                    let img: Vec<CAtom> = fc.apply(&one(a.clone()), fuel)?.into_iter().collect();
                    if img.is_empty() {
                        return Ok(CVal::new());
                    }
                    combos = combos.saturating_mul((1 << img.len().min(SUBSET_GUARD)) - 1);
                    images.push(img);
                }
                if combos > COMBO_GUARD {
                    return Err(ill("bang image expansion is too large".to_string()));
                }
                let mut acc: Vec<Vec<CAtom>> = vec![vec![]];
                for img in &images {
                    let picks = subsets(img)?;
                    let mut next = Vec::new();
                    for base in &acc {
                        for p in picks.iter().filter(|p| !p.is_empty()) {
                            let mut grown = base.clone();
                            grown.extend(p.iter().cloned());
                            next.push(grown);
                        }
                    }
                    acc = next;
                    if acc.len() > COMBO_GUARD {
                        return Err(ill("bang image expansion is too large".to_string()));
                    }
                }
                Ok(acc.into_iter().map(clq).collect())
            },
        )
    }

    fn delta(&self, a: &CObj) -> M {
        let ba = self.bang_obj(a);
        per_token("delta", ba.clone(), self.bang_obj(&ba), |t, _| {
            let xs = expect_clq(t)?;
            // All decompositions: sets of subcliques whose union is the token.
            let parts = subsets(xs)?;
            let mut out = CVal::new();
            if parts.len() > SUBSET_GUARD {
                return Err(ill("bang token is too large to decompose".to_string()));
            }
            for mask in 0u32..(1u32 << parts.len()) {
                let mut chosen = Vec::new();
                let mut union: BTreeSet<CAtom> = BTreeSet::new();
                for (i, p) in parts.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        chosen.push(clq(p.clone()));
                        union.extend(p.iter().cloned());
                    }
                }
                if union.len() == xs.len() && union.iter().zip(xs.iter()).all(|(u, x)| u == x) {
                    out.insert(clq(chosen));
                }
            }
            if xs.is_empty() {
                out.insert(clq(vec![]));
                out.insert(clq(vec![clq(vec![])]));
            }
            Ok(out)
        })
    }

    fn epsilon(&self, a: &CObj) -> M {
        per_token("eps", self.bang_obj(a), a.clone(), |t, _| {
            let xs = expect_clq(t)?;
            Ok(if xs.len() == 1 { one(xs[0].clone()) } else { CVal::new() })
        })
    }

    fn q_tensor(&self, a: &CObj, b: &CObj) -> M {
        let dom = self.tensor_obj(&self.bang_obj(a), &self.bang_obj(b));
        let cod = self.bang_obj(&self.tensor_obj(a, b));
        per_token("q", dom, cod, |t, _| {
            let (x, y) = expect_pair(t)?;
            let xs = expect_clq(x)?;
            let ys = expect_clq(y)?;
            if xs.is_empty() || ys.is_empty() {
                return Ok(if xs.is_empty() && ys.is_empty() {
                    one(clq(vec![]))
                } else {
                    CVal::new()
                });
            }
            // Pair cliques covering both projections.
            let mut all_pairs = Vec::new();
            for xa in xs {
                for yb in ys {
                    all_pairs.push(pair(xa.clone(), yb.clone()));
                }
            }
            if all_pairs.len() > SUBSET_GUARD {
                return Err(ill("pairing expansion is too large".to_string()));
            }
            let mut out = CVal::new();
            for z in subsets(&all_pairs)? {
                if z.is_empty() {
                    continue;
                }
                let mut px = BTreeSet::new();
                let mut py = BTreeSet::new();
                for p in &z {
                    let (l, r) = expect_pair(p)?;
                    px.insert(l.clone());
                    py.insert(r.clone());
                }
                if px.len() == xs.len() && py.len() == ys.len() {
                    out.insert(clq(z));
                }
            }
            Ok(out)
        })
    }

    fn q_unit(&self) -> M {
        per_token("q1", CObj::Unit, self.bang_obj(&CObj::Unit), |t, _| {
            if *t != CAtom::Star {
                return Err(ill(format!("expected the unit token, got {:?}", t)));
            }
            Ok([clq(vec![]), clq(vec![CAtom::Star])].into_iter().collect())
        })
    }

    fn dup(&self, a: &CObj) -> M {
        let ba = self.bang_obj(a);
        per_token("d", ba.clone(), self.tensor_obj(&ba, &ba), |t, _| {
            let xs = expect_clq(t)?;
            // All ordered splittings whose union is the token; overlap is
            // allowed because bang tokens are reusable resources.
            let parts = subsets(xs)?;
            let mut out = CVal::new();
            for l in &parts {
                for r in &parts {
                    let mut union: Vec<CAtom> = l.iter().chain(r.iter()).cloned().collect();
                    union.sort();
                    union.dedup();
                    if union == *xs {
                        out.insert(pair(clq(l.clone()), clq(r.clone())));
                    }
                }
            }
            Ok(out)
        })
    }

    fn erase(&self, a: &CObj) -> M {
        per_token("e", self.bang_obj(a), CObj::Unit, |t, _| {
            let xs = expect_clq(t)?;
            Ok(if xs.is_empty() { one(CAtom::Star) } else { CVal::new() })
        })
    }

    fn zero(&self) -> M {
        per_token("zero", CObj::Unit, CObj::Nat, |_, _| Ok(one(CAtom::Nat(0))))
    }

    fn succ_m(&self) -> M {
        per_token("succ", CObj::Nat, CObj::Nat, |t, _| match t {
            CAtom::Nat(k) => Ok(one(CAtom::Nat(k + 1))),
            _ => Err(ill(format!("expected a numeral token, got {:?}", t))),
        })
    }

    fn pred_m(&self) -> M {
        per_token("pred", CObj::Nat, CObj::Nat, |t, _| match t {
            CAtom::Nat(k) => Ok(one(CAtom::Nat(k.saturating_sub(1)))),
            _ => Err(ill(format!("expected a numeral token, got {:?}", t))),
        })
    }

    fn num(&self, k: u64) -> M {
        per_token(&format!("num({})", k), CObj::Unit, CObj::Nat, move |_, _| {
            Ok(one(CAtom::Nat(k)))
        })
    }

    fn promote_n(&self) -> M {
        per_token("p", CObj::Nat, self.bang_obj(&CObj::Nat), |t, _| {
            Ok([clq(vec![t.clone()]), clq(vec![])].into_iter().collect())
        })
    }

    fn copy_n(&self) -> M {
        per_token("c_N", CObj::Nat, self.tensor_obj(&CObj::Nat, &CObj::Nat), |t, _| {
            Ok(one(pair(t.clone(), t.clone())))
        })
    }

    fn weak_n(&self) -> M {
        per_token("w_N", CObj::Nat, CObj::Unit, |_, _| Ok(one(CAtom::Star)))
    }

    fn lif_m(&self) -> M {
        let nn = self.product_obj(&CObj::Nat, &CObj::Nat);
        let dom = self.tensor_obj(&CObj::Nat, &nn);
        per_token("lif", dom, CObj::Nat, |t, _| {
            let (c, branch) = expect_pair(t)?;
            let CAtom::Nat(c) = c else {
                return Err(ill(format!("expected a numeral condition, got {:?}", c)));
            };
            Ok(match branch {
                CAtom::InL(l) if *c == 0 => one((**l).clone()),
                CAtom::InR(r) if *c > 0 => one((**r).clone()),
                CAtom::InL(_) | CAtom::InR(_) => CVal::new(),
                _ => return Err(ill(format!("expected a branch token, got {:?}", branch))),
            })
        })
    }

    fn fix(&self, b: &CObj) -> M {
        let dom = self.bang_obj(&self.arrow_obj(&self.bang_obj(b), b));
        let body_obj = b.clone();
        per_token("fix", dom, b.clone(), move |t, fuel| {
            let xs = expect_clq(t)?;
            iter_fix(xs, &body_obj, fuel.fix_iters, fuel)
        })
    }

    fn global_point(&self) -> CVal {
        one(CAtom::Star)
    }

    fn observe_nat(&self, v: &CVal) -> Result<Option<u64>, ModelError> {
        check_clique(&CObj::Nat, v)?;
        match v.len() {
            0 => Ok(None),
            1 => match v.iter().next().unwrap() {
                CAtom::Nat(k) => Ok(Some(*k)),
                t => Err(ill(format!("expected a numeral token, got {:?}", t))),
            },
            n => Err(ModelError::IncoherentClique(format!(
                "{} tokens in a flat ground clique",
                n
            ))),
        }
    }

    fn sample_inputs(&self, obj: &CObj, obs: &ObsSpec) -> Vec<CVal> {
        let cap = obs.samples.max(1) as usize;
        let mut out = vec![CVal::new()];
        for t in enumerate_tokens(obj, obs.budget) {
            out.push(one(t));
            if out.len() >= cap {
                break;
            }
        }
        if matches!(obj, CObj::Arrow(..)) {
            out.extend(crate::model::term_denotation_samples(self, obj, obs));
            out.truncate(cap.max(2));
        }
        out
    }

    fn observe(&self, obj: &CObj, v: &CVal, obs: &ObsSpec, fuel: Fuel) -> Result<Observation, ModelError> {
        let tokens = reify_val(obj, v, obs.budget, fuel)?;
        check_clique(obj, &tokens)?;
        Ok(Observation::Set(tokens.into_iter().map(|t| format!("{:?}", t)).collect()))
    }
}

// ---------------------------------------------------------------------------
// Reification: expanding closure atoms into budget-bounded trace tokens.

fn reify_val(obj: &CObj, v: &CVal, budget: u32, fuel: Fuel) -> Result<BTreeSet<CAtom>, ModelError> {
    let mut out = BTreeSet::new();
    for a in v {
        out.extend(reify_atom(obj, a, budget, fuel)?);
    }
    Ok(out)
}

fn reify_atom(obj: &CObj, a: &CAtom, budget: u32, fuel: Fuel) -> Result<BTreeSet<CAtom>, ModelError> {
    match (obj, a) {
        (CObj::Arrow(x, y), CAtom::Fun(p)) => {
            let mut out = BTreeSet::new();
            for t in enumerate_tokens(x, budget) {
                let img = p.apply(&one(t.clone()), fuel)?;
                for r in reify_val(y, &img, budget, fuel)? {
                    out.insert(CAtom::Trace(Box::new(t.clone()), Box::new(r)));
                }
            }
            Ok(out)
        }
        (CObj::Arrow(x, y), CAtom::Trace(ta, tb)) => {
            let mut out = BTreeSet::new();
            for r in reify_atom(y, tb, budget, fuel)? {
                let _ = x;
                out.insert(CAtom::Trace(ta.clone(), Box::new(r)));
            }
            Ok(out)
        }
        (CObj::Tensor(x, y), CAtom::Pair(pa, pb)) => {
            let mut out = BTreeSet::new();
            for ra in reify_atom(x, pa, budget, fuel)? {
                for rb in reify_atom(y, pb, budget, fuel)? {
                    out.insert(pair(ra.clone(), rb));
                }
            }
            Ok(out)
        }
        (CObj::Bang(x), CAtom::Clq(xs)) => {
            // A clique member that reifies to several trace tokens stands
            // for their joint use, so the expansions are unioned in place.
            let mut grown = Vec::new();
            for m in xs {
                grown.extend(reify_atom(x, m, budget, fuel)?);
            }
            Ok([clq(grown)].into_iter().collect())
        }
        (CObj::Prod(x, _), CAtom::InL(i)) => Ok(reify_atom(x, i, budget, fuel)?
            .into_iter()
            .map(|t| CAtom::InL(Box::new(t)))
            .collect()),
        (CObj::Prod(_, y), CAtom::InR(i)) => Ok(reify_atom(y, i, budget, fuel)?
            .into_iter()
            .map(|t| CAtom::InR(Box::new(t)))
            .collect()),
        (CObj::Unit, CAtom::Star)
        | (CObj::Nat, CAtom::Nat(_)) => Ok([a.clone()].into_iter().collect()),
        _ => Err(ill(format!("token {:?} does not inhabit {:?}", a, obj))),
    }
}

/// The budget-bounded trace of a morphism: all (argument token, result
/// token) pairs observable from singleton probes of enumerated tokens.
pub fn trace_probe(m: &M, budget: u32, fuel: Fuel) -> Result<BTreeSet<(CAtom, CAtom)>, ModelError> {
    let mut out = BTreeSet::new();
    for t in enumerate_tokens(&m.dom, budget) {
        let img = m.apply(&one(t.clone()), fuel)?;
        for r in reify_val(&m.cod, &img, budget, fuel)? {
            out.insert((t.clone(), r));
        }
    }
    Ok(out)
}
