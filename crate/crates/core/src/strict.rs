//! Domain backend: pointed partial orders with strict continuous maps.
//!
//! Objects are interpreted as pointed domains. The tensor is the smash
//! product, the unit is the two-point domain, the exponential is lifting,
//! and the arrow is the strict continuous function space. Every primitive
//! maps bottom to bottom; function payloads are intensional procedures, so
//! equality of function values is only ever observational.

use crate::model::{Backend, CombTree, Fuel, ModelError, Mor, ObsSpec, Observation};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SObj {
    Unit,
    Nat,
    Smash(Box<SObj>, Box<SObj>),
    Fun(Box<SObj>, Box<SObj>),
    Lift(Box<SObj>),
    Prod(Box<SObj>, Box<SObj>),
}

type SFun = Arc<dyn Fn(&SVal, Fuel) -> Result<SVal, ModelError> + Send + Sync>;

#[derive(Clone)]
pub enum SVal {
    Bot,
    Top,
    Nat(u64),
    /// Smash pair; both components are non-bottom by construction.
    Pair(Box<SVal>, Box<SVal>),
    /// Lifted element; the payload may itself be bottom.
    Up(Box<SVal>),
    ProdPair(Box<SVal>, Box<SVal>),
    Fun(SFun),
}

impl fmt::Debug for SVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SVal::Bot => f.write_str("bot"),
            SVal::Top => f.write_str("top"),
            SVal::Nat(k) => write!(f, "{}", k),
            SVal::Pair(a, b) => write!(f, "({:?} (x) {:?})", a, b),
            SVal::Up(a) => write!(f, "up({:?})", a),
            SVal::ProdPair(a, b) => write!(f, "<{:?}, {:?}>", a, b),
            SVal::Fun(_) => f.write_str("<fun>"),
        }
    }
}

/// Bottom test up to the product identification (bottom of a product is the
/// pair of bottoms). Function values are never treated as bottom.
pub fn is_bot(v: &SVal) -> bool {
    match v {
        SVal::Bot => true,
        SVal::ProdPair(a, b) => is_bot(a) && is_bot(b),
        _ => false,
    }
}

fn smash(a: SVal, b: SVal) -> SVal {
    if is_bot(&a) || is_bot(&b) {
        SVal::Bot
    } else {
        SVal::Pair(Box::new(a), Box::new(b))
    }
}

fn ill(msg: impl Into<String>) -> ModelError {
    ModelError::IllShaped(msg.into())
}

/// Kleene iteration of a functional value at !B ⊸ B from bottom.
pub fn kleene_fix(functional: &SVal, iters: u32, fuel: Fuel) -> Result<SVal, ModelError> {
    let SVal::Fun(p) = functional else {
        return Err(ill("fixpoint of a non-function"));
    };
    let mut x = SVal::Bot;
    for _ in 0..iters {
        x = p(&SVal::Up(Box::new(x)), fuel)?;
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StrictBackend;

type M = Mor<StrictBackend>;

/// Builds a primitive that is strict in its argument.
fn strict_prim(
    name: &str,
    dom: SObj,
    cod: SObj,
    step: impl Fn(&SVal, Fuel) -> Result<SVal, ModelError> + Send + Sync + 'static,
) -> M {
    Mor::prim(name, dom, cod, move |v, fuel| {
        if is_bot(v) {
            return Ok(SVal::Bot);
        }
        step(v, fuel)
    })
}

fn strict_tree(
    tree: CombTree,
    dom: SObj,
    cod: SObj,
    step: impl Fn(&SVal, Fuel) -> Result<SVal, ModelError> + Send + Sync + 'static,
) -> M {
    Mor::new(tree, dom, cod, move |v, fuel| {
        if is_bot(v) {
            return Ok(SVal::Bot);
        }
        step(v, fuel)
    })
}

fn as_pair(v: &SVal) -> Result<(&SVal, &SVal), ModelError> {
    match v {
        SVal::Pair(a, b) => Ok((a, b)),
        _ => Err(ill(format!("expected a tensor pair, got {:?}", v))),
    }
}

impl Backend for StrictBackend {
    type Obj = SObj;
    type Val = SVal;

    fn name(&self) -> &'static str {
        "strict"
    }

    fn unit_obj(&self) -> SObj {
        SObj::Unit
    }
    fn nat_obj(&self) -> SObj {
        SObj::Nat
    }
    fn tensor_obj(&self, a: &SObj, b: &SObj) -> SObj {
        SObj::Smash(Box::new(a.clone()), Box::new(b.clone()))
    }
    fn arrow_obj(&self, a: &SObj, b: &SObj) -> SObj {
        SObj::Fun(Box::new(a.clone()), Box::new(b.clone()))
    }
    fn bang_obj(&self, a: &SObj) -> SObj {
        SObj::Lift(Box::new(a.clone()))
    }
    fn product_obj(&self, a: &SObj, b: &SObj) -> SObj {
        SObj::Prod(Box::new(a.clone()), Box::new(b.clone()))
    }

    fn identity(&self, a: &SObj) -> M {
        Mor::prim("id", a.clone(), a.clone(), |v: &SVal, _| Ok(v.clone()))
    }

    fn tensor_mor(&self, f: &M, g: &M) -> M {
        let (fc, gc) = (f.clone(), g.clone());
        strict_tree(
            CombTree::Node("tensor", vec![f.tree.clone(), g.tree.clone()]),
            self.tensor_obj(&f.dom, &g.dom),
            self.tensor_obj(&f.cod, &g.cod),
            move |v, fuel| {
                let (a, b) = as_pair(v)?;
                Ok(smash(fc.apply(a, fuel)?, gc.apply(b, fuel)?))
            },
        )
    }

    fn symmetry(&self, a: &SObj, b: &SObj) -> M {
        strict_prim("sym", self.tensor_obj(a, b), self.tensor_obj(b, a), |v, _| {
            let (x, y) = as_pair(v)?;
            Ok(smash(y.clone(), x.clone()))
        })
    }

    fn assoc_right(&self, a: &SObj, b: &SObj, c: &SObj) -> M {
        let dom = self.tensor_obj(&self.tensor_obj(a, b), c);
        let cod = self.tensor_obj(a, &self.tensor_obj(b, c));
        strict_prim("assocR", dom, cod, |v, _| {
            let (ab, c) = as_pair(v)?;
            let (a, b) = as_pair(ab)?;
            Ok(smash(a.clone(), smash(b.clone(), c.clone())))
        })
    }

    fn assoc_left(&self, a: &SObj, b: &SObj, c: &SObj) -> M {
        let dom = self.tensor_obj(a, &self.tensor_obj(b, c));
        let cod = self.tensor_obj(&self.tensor_obj(a, b), c);
        strict_prim("assocL", dom, cod, |v, _| {
            let (a, bc) = as_pair(v)?;
            let (b, c) = as_pair(bc)?;
            Ok(smash(smash(a.clone(), b.clone()), c.clone()))
        })
    }

    fn lunit(&self, a: &SObj) -> M {
        strict_prim("lunit", self.tensor_obj(&SObj::Unit, a), a.clone(), |v, _| {
            Ok(as_pair(v)?.1.clone())
        })
    }

    fn lunit_inv(&self, a: &SObj) -> M {
        strict_prim("lunitInv", a.clone(), self.tensor_obj(&SObj::Unit, a), |v, _| {
            Ok(smash(SVal::Top, v.clone()))
        })
    }

    fn runit(&self, a: &SObj) -> M {
        strict_prim("runit", self.tensor_obj(a, &SObj::Unit), a.clone(), |v, _| {
            Ok(as_pair(v)?.0.clone())
        })
    }

    fn runit_inv(&self, a: &SObj) -> M {
        strict_prim("runitInv", a.clone(), self.tensor_obj(a, &SObj::Unit), |v, _| {
            Ok(smash(v.clone(), SVal::Top))
        })
    }

    fn curry(&self, f: &M, c: &SObj, a: &SObj) -> Result<M, ModelError> {
        let expect = self.tensor_obj(c, a);
        if f.dom != expect {
            return Err(ModelError::ObjectMismatch {
                context: "curry".to_string(),
                left: format!("{:?}", f.dom),
                right: format!("{:?}", expect),
            });
        }
        let body = f.clone();
        Ok(strict_tree(
            CombTree::Node("curry", vec![f.tree.clone()]),
            c.clone(),
            self.arrow_obj(a, &f.cod),
            move |cv, _| {
                let cv = cv.clone();
                let body = body.clone();
                Ok(SVal::Fun(Arc::new(move |av, fuel| {
                    if is_bot(av) {
                        return Ok(SVal::Bot);
                    }
                    body.apply(&smash(cv.clone(), av.clone()), fuel)
                })))
            },
        ))
    }

    fn eval(&self, a: &SObj, b: &SObj) -> M {
        let dom = self.tensor_obj(&self.arrow_obj(a, b), a);
        strict_prim("eval", dom, b.clone(), |v, fuel| {
            let (f, arg) = as_pair(v)?;
            match f {
                SVal::Fun(p) => p(arg, fuel),
                _ => Err(ill(format!("expected a function, got {:?}", f))),
            }
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
            move |v, fuel| {
                Ok(SVal::ProdPair(
                    Box::new(fc.apply(v, fuel)?),
                    Box::new(gc.apply(v, fuel)?),
                ))
            },
        ))
    }

    fn proj1(&self, a: &SObj, b: &SObj) -> M {
        strict_prim("p1", self.product_obj(a, b), a.clone(), |v, _| match v {
            SVal::ProdPair(x, _) => Ok((**x).clone()),
            _ => Err(ill(format!("expected a product pair, got {:?}", v))),
        })
    }

    fn proj2(&self, a: &SObj, b: &SObj) -> M {
        strict_prim("p2", self.product_obj(a, b), b.clone(), |v, _| match v {
            SVal::ProdPair(_, y) => Ok((**y).clone()),
            _ => Err(ill(format!("expected a product pair, got {:?}", v))),
        })
    }

    fn bang_mor(&self, f: &M) -> M {
        let fc = f.clone();
        strict_tree(
            CombTree::Node("bang", vec![f.tree.clone()]),
            self.bang_obj(&f.dom),
            self.bang_obj(&f.cod),
            move |v, fuel| match v {
                SVal::Up(a) => Ok(SVal::Up(Box::new(fc.apply(a, fuel)?))),
                _ => Err(ill(format!("expected a lifted element, got {:?}", v))),
            },
        )
    }

    fn delta(&self, a: &SObj) -> M {
        let ba = self.bang_obj(a);
        strict_prim("delta", ba.clone(), self.bang_obj(&ba), |v, _| match v {
            SVal::Up(_) => Ok(SVal::Up(Box::new(v.clone()))),
            _ => Err(ill(format!("expected a lifted element, got {:?}", v))),
        })
    }

    fn epsilon(&self, a: &SObj) -> M {
        strict_prim("eps", self.bang_obj(a), a.clone(), |v, _| match v {
            SVal::Up(x) => Ok((**x).clone()),
            _ => Err(ill(format!("expected a lifted element, got {:?}", v))),
        })
    }

    fn q_tensor(&self, a: &SObj, b: &SObj) -> M {
        let dom = self.tensor_obj(&self.bang_obj(a), &self.bang_obj(b));
        let cod = self.bang_obj(&self.tensor_obj(a, b));
        strict_prim("q", dom, cod, |v, _| {
            let (x, y) = as_pair(v)?;
            match (x, y) {
                (SVal::Up(xa), SVal::Up(yb)) => {
                    Ok(SVal::Up(Box::new(smash((**xa).clone(), (**yb).clone()))))
                }
                _ => Err(ill(format!("expected lifted components, got {:?}", v))),
            }
        })
    }

    fn q_unit(&self) -> M {
        strict_prim("q1", SObj::Unit, self.bang_obj(&SObj::Unit), |_, _| {
            Ok(SVal::Up(Box::new(SVal::Top)))
        })
    }

    fn dup(&self, a: &SObj) -> M {
        let ba = self.bang_obj(a);
        strict_prim("d", ba.clone(), self.tensor_obj(&ba, &ba), |v, _| match v {
            SVal::Up(_) => Ok(smash(v.clone(), v.clone())),
            _ => Err(ill(format!("expected a lifted element, got {:?}", v))),
        })
    }

    fn erase(&self, a: &SObj) -> M {
        strict_prim("e", self.bang_obj(a), SObj::Unit, |v, _| match v {
            SVal::Up(_) => Ok(SVal::Top),
            _ => Err(ill(format!("expected a lifted element, got {:?}", v))),
        })
    }

    fn zero(&self) -> M {
        strict_prim("zero", SObj::Unit, SObj::Nat, |_, _| Ok(SVal::Nat(0)))
    }

    fn succ_m(&self) -> M {
        strict_prim("succ", SObj::Nat, SObj::Nat, |v, _| match v {
            SVal::Nat(k) => Ok(SVal::Nat(k + 1)),
            _ => Err(ill(format!("expected a numeral, got {:?}", v))),
        })
    }

    fn pred_m(&self) -> M {
        strict_prim("pred", SObj::Nat, SObj::Nat, |v, _| match v {
            SVal::Nat(k) => Ok(SVal::Nat(k.saturating_sub(1))),
            _ => Err(ill(format!("expected a numeral, got {:?}", v))),
        })
    }

    fn num(&self, k: u64) -> M {
        strict_prim(&format!("num({})", k), SObj::Unit, SObj::Nat, move |_, _| Ok(SVal::Nat(k)))
    }

    fn promote_n(&self) -> M {
        strict_prim("p", SObj::Nat, self.bang_obj(&SObj::Nat), |v, _| {
            Ok(SVal::Up(Box::new(v.clone())))
        })
    }

    fn copy_n(&self) -> M {
        strict_prim("c_N", SObj::Nat, self.tensor_obj(&SObj::Nat, &SObj::Nat), |v, _| {
            Ok(smash(v.clone(), v.clone()))
        })
    }

    fn weak_n(&self) -> M {
        strict_prim("w_N", SObj::Nat, SObj::Unit, |_, _| Ok(SVal::Top))
    }

    fn lif_m(&self) -> M {
        let nn = self.product_obj(&SObj::Nat, &SObj::Nat);
        let dom = self.tensor_obj(&SObj::Nat, &nn);
        strict_prim("lif", dom, SObj::Nat, |v, _| {
            let (c, branches) = as_pair(v)?;
            let SVal::Nat(c) = c else {
                return Err(ill(format!("expected a numeral condition, got {:?}", c)));
            };
            match branches {
                SVal::ProdPair(l, r) => Ok(if *c == 0 { (**l).clone() } else { (**r).clone() }),
                _ => Err(ill(format!("expected branch pair, got {:?}", branches))),
            }
        })
    }

    fn fix(&self, b: &SObj) -> M {
        let dom = self.bang_obj(&self.arrow_obj(&self.bang_obj(b), b));
        strict_prim("fix", dom, b.clone(), |v, fuel| match v {
            SVal::Up(f) => kleene_fix(f, fuel.fix_iters, fuel),
            _ => Err(ill(format!("expected a lifted functional, got {:?}", v))),
        })
    }

    fn global_point(&self) -> SVal {
        SVal::Top
    }

    fn observe_nat(&self, v: &SVal) -> Result<Option<u64>, ModelError> {
        match v {
            SVal::Bot => Ok(None),
            SVal::Nat(k) => Ok(Some(*k)),
            _ => Err(ill(format!("expected a numeral or bottom, got {:?}", v))),
        }
    }

    fn sample_inputs(&self, obj: &SObj, obs: &ObsSpec) -> Vec<SVal> {
        let cap = obs.samples.max(1) as usize;
        let mut out = sample_elems(self, obj, obs);
        out.truncate(cap);
        out
    }

    fn observe(&self, obj: &SObj, v: &SVal, obs: &ObsSpec, fuel: Fuel) -> Result<Observation, ModelError> {
        match obj {
            SObj::Unit => match v {
                SVal::Bot => Ok(Observation::Atom("bot".into())),
                SVal::Top => Ok(Observation::Atom("top".into())),
                _ => Err(ill(format!("expected a unit element, got {:?}", v))),
            },
            SObj::Nat => Ok(match self.observe_nat(v)? {
                None => Observation::Atom("bot".into()),
                Some(k) => Observation::Atom(k.to_string()),
            }),
            SObj::Smash(a, b) => {
                if is_bot(v) {
                    return Ok(Observation::Atom("bot".into()));
                }
                let (x, y) = as_pair(v)?;
                Ok(Observation::Seq(vec![
                    self.observe(a, x, obs, fuel)?,
                    self.observe(b, y, obs, fuel)?,
                ]))
            }
            SObj::Lift(a) => match v {
                SVal::Bot => Ok(Observation::Atom("bot".into())),
                SVal::Up(x) => Ok(Observation::Seq(vec![
                    Observation::Atom("up".into()),
                    self.observe(a, x, obs, fuel)?,
                ])),
                _ => Err(ill(format!("expected a lifted element, got {:?}", v))),
            },
            SObj::Prod(a, b) => {
                let (x, y) = match v {
                    SVal::Bot => (SVal::Bot, SVal::Bot),
                    SVal::ProdPair(x, y) => ((**x).clone(), (**y).clone()),
                    _ => return Err(ill(format!("expected a product pair, got {:?}", v))),
                };
                Ok(Observation::Seq(vec![
                    self.observe(a, &x, obs, fuel)?,
                    self.observe(b, &y, obs, fuel)?,
                ]))
            }
            SObj::Fun(a, b) => {
                // A function is observed through its value table on the
                // sample inputs of its domain; bottom at a function object
                // coincides with the constant-bottom table.
                let mut rows = Vec::new();
                for s in self.sample_inputs(a, obs) {
                    let r = match v {
                        SVal::Bot => SVal::Bot,
                        SVal::Fun(p) => {
                            if is_bot(&s) {
                                SVal::Bot
                            } else {
                                p(&s, fuel)?
                            }
                        }
                        _ => return Err(ill(format!("expected a function, got {:?}", v))),
                    };
                    rows.push(self.observe(b, &r, obs, fuel)?);
                }
                Ok(Observation::Seq(rows))
            }
        }
    }
}

/// Deterministic sample elements of a domain: bottom, numerals up to the
/// bound, lifted and paired combinations, and for function spaces a family
/// of strict constants, matching primitives, and denotations of the sample
/// terms from the observation spec.
pub fn sample_elems(b: &StrictBackend, obj: &SObj, obs: &ObsSpec) -> Vec<SVal> {
    let cap = obs.samples.max(1) as usize;
    match obj {
        SObj::Unit => vec![SVal::Bot, SVal::Top],
        SObj::Nat => {
            let mut out = vec![SVal::Bot];
            out.extend((0..=obs.numeral_bound).map(SVal::Nat));
            out
        }
        SObj::Smash(x, y) => {
            let mut out = vec![SVal::Bot];
            let xs = sample_elems(b, x, obs);
            let ys = sample_elems(b, y, obs);
            'outer: for xv in xs.iter().filter(|v| !is_bot(v)) {
                for yv in ys.iter().filter(|v| !is_bot(v)) {
                    out.push(smash(xv.clone(), yv.clone()));
                    if out.len() >= cap {
                        break 'outer;
                    }
                }
            }
            out
        }
        SObj::Lift(x) => {
            let mut out = vec![SVal::Bot];
            for xv in sample_elems(b, x, obs) {
                out.push(SVal::Up(Box::new(xv)));
                if out.len() >= cap {
                    break;
                }
            }
            out
        }
        SObj::Prod(x, y) => {
            let mut out = Vec::new();
            let xs = sample_elems(b, x, obs);
            let ys = sample_elems(b, y, obs);
            'outer: for xv in &xs {
                for yv in &ys {
                    out.push(SVal::ProdPair(Box::new(xv.clone()), Box::new(yv.clone())));
                    if out.len() >= cap {
                        break 'outer;
                    }
                }
            }
            out
        }
        SObj::Fun(x, y) => {
            let mut out = vec![SVal::Bot];
            // Strict constants into each non-bottom codomain sample.
            for c in sample_elems(b, y, obs).into_iter().filter(|v| !is_bot(v)).take(4) {
                out.push(SVal::Fun(Arc::new(move |v, _| {
                    Ok(if is_bot(v) { SVal::Bot } else { c.clone() })
                })));
            }
            if x == y {
                out.push(SVal::Fun(Arc::new(|v, _| Ok(v.clone()))));
            }
            if **x == SObj::Nat && **y == SObj::Nat {
                out.push(SVal::Fun(Arc::new(|v, _| match v {
                    SVal::Nat(k) => Ok(SVal::Nat(k + 1)),
                    _ => Ok(SVal::Bot),
                })));
                out.push(SVal::Fun(Arc::new(|v, _| match v {
                    SVal::Nat(k) => Ok(SVal::Nat(k.saturating_sub(1))),
                    _ => Ok(SVal::Bot),
                })));
            }
            out.extend(crate::model::term_denotation_samples(b, obj, obs));
            out.truncate(cap);
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{denote_ground, interpret, semantic_eq, Eq3, GroundResult};
    use crate::parser::parse_term;
    use crate::syntax::Basis;
    use crate::typecheck::infer;
    use crate::Mode;

    const B: StrictBackend = StrictBackend;

    fn ground(src: &str, obs: &ObsSpec) -> GroundResult {
        let t = parse_term(src).expect("parse");
        denote_ground(&B, &t, obs, Mode::Core).expect("denote")
    }

    fn morph(src: &str) -> Mor<StrictBackend> {
        let t = parse_term(src).expect("parse");
        let (_, d) = infer(&Basis::empty(), &t).expect("infer");
        interpret(&B, &d).expect("interpret")
    }

    #[test]
    fn numerals_and_arithmetic_denote() {
        let obs = ObsSpec::default();
        assert_eq!(ground("0", &obs), GroundResult::Num(0));
        assert_eq!(ground("succ (succ 0)", &obs), GroundResult::Num(2));
        assert_eq!(ground("pred (succ 0)", &obs), GroundResult::Num(0));
        assert_eq!(ground("pred 0", &obs), GroundResult::Num(0));
        assert_eq!(ground("pred 7", &obs), GroundResult::Num(6));
    }

    #[test]
    fn conditional_is_strict_and_selects_branches() {
        let obs = ObsSpec::default();
        assert_eq!(ground("lif 0 then 1 else 2", &obs), GroundResult::Num(1));
        assert_eq!(ground("lif 3 then 1 else 2", &obs), GroundResult::Num(2));
        assert_eq!(
            ground("lif (mu $f:iota.$f) then 1 else 2", &obs),
            GroundResult::Bottom
        );
    }

    #[test]
    fn divergence_denotes_bottom() {
        let obs = ObsSpec::default();
        assert_eq!(ground("mu $f:iota.$f", &obs), GroundResult::Bottom);
        assert_eq!(ground("(\\x:iota.x) (mu $f:iota.$f)", &obs), GroundResult::Bottom);
    }

    #[test]
    fn weakened_argument_is_still_forced() {
        // The interpretation is strict in every basis slot, so a discarded
        // diverging argument still yields bottom even though the calculus
        // never reduces it.
        let obs = ObsSpec::default();
        assert_eq!(ground("(\\x:iota.0) (mu $f:iota.$f)", &obs), GroundResult::Bottom);
        assert_eq!(ground("(\\x:iota.0) 5", &obs), GroundResult::Num(0));
    }

    #[test]
    fn beta_redexes_denote_their_contracta() {
        let obs = ObsSpec::default();
        assert_eq!(ground("(\\x:iota. succ x) 4", &obs), GroundResult::Num(5));
        assert_eq!(
            ground("(\\f:iota -o iota. f 0) (\\x:iota. succ x)", &obs),
            GroundResult::Num(1)
        );
        assert_eq!(ground("(\\f:iota -o iota. f (succ 0)) pred", &obs), GroundResult::Num(0));
        assert_eq!(
            ground("(\\x:iota. lif x then x else succ x) 3", &obs),
            GroundResult::Num(4)
        );
    }

    #[test]
    fn addition_denotes_and_is_unstable_beyond_budget() {
        let obs = ObsSpec::default();
        let add = "mu $a:iota -o iota -o iota.\\x:iota.\\y:iota.\
                   lif x then y else succ ($a (pred x) y)";
        assert_eq!(ground(&format!("({}) 2 3", add), &obs), GroundResult::Num(5));
        assert_eq!(ground(&format!("({}) 5 4", add), &obs), GroundResult::Num(9));
        // Sixteen unrollings cannot finish a depth-20 recursion, but thirty
        // two can, so the stability guard reports the mismatch.
        assert_eq!(ground(&format!("({}) 20 3", add), &obs), GroundResult::Unstable);
    }

    #[test]
    fn eta_expanded_successor_is_equal_and_shifted_is_distinct() {
        let obs = ObsSpec::default();
        let succ = morph("succ");
        let eta = morph("\\x:iota. succ x");
        let two = morph("\\x:iota. succ (succ x)");
        assert_eq!(semantic_eq(&B, &succ, &eta, &obs).unwrap(), Eq3::Equal);
        assert!(matches!(
            semantic_eq(&B, &succ, &two, &obs).unwrap(),
            Eq3::Distinct { .. }
        ));
    }

    #[test]
    fn combinator_tree_of_zero_mentions_the_primitive() {
        let m = morph("0");
        assert!(crate::model::combinator_tree(&m).contains("zero"));
    }

    #[test]
    fn sample_elements_are_deterministic() {
        let obs = ObsSpec::default();
        let a = sample_elems(&B, &SObj::Nat, &obs);
        let bm = sample_elems(&B, &SObj::Nat, &obs);
        assert_eq!(a.len(), bm.len());
        assert_eq!(a.len() as u64, 2 + obs.numeral_bound);
        let funs = sample_elems(&B, &SObj::Fun(Box::new(SObj::Nat), Box::new(SObj::Nat)), &obs);
        assert!(funs.len() >= 6);
    }
}
