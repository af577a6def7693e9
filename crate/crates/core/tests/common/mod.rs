//! Shared fixtures for the integration suites: deliberately broken backend
//! wrappers used to show the law suite has teeth, plus the recursive
//! addition program.

#![allow(dead_code)]

use linlam_core::model::{
    compose, pipeline, Backend, Fuel, ModelError, Mor, Observation, ObsSpec,
};
use linlam_core::parser::parse_term;
use linlam_core::syntax::Term;

/// Recursive addition by induction on the first argument.
pub fn add_term() -> Term {
    parse_term(
        "mu $a:iota -o iota -o iota. \\x:iota. \\y:iota. \
         lif x then y else succ ($a (pred x) y)",
    )
    .expect("addition program parses")
}

/// Re-types a morphism between backends that share object and value
/// representations. The wrapper below delegates everything structural to
/// its inner backend, so its morphisms are inner morphisms in disguise.
fn recast<A, B>(m: Mor<A>) -> Mor<B>
where
    A: Backend + 'static,
    B: Backend<Obj = A::Obj, Val = A::Val>,
{
    Mor::new(m.tree.clone(), m.dom.clone(), m.cod.clone(), move |v, f| {
        m.apply(v, f)
    })
}

/// Which primitive the wrapper sabotages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Predecessor becomes the identity on naturals.
    PredIdentity,
    /// Ground copy yields `(n, 0)` instead of `(n, n)`.
    CopyRightZero,
    /// Branch selection consults the swapped pair.
    LifSwapped,
}

/// A backend that agrees with `inner` everywhere except one primitive.
pub struct Mutant<B> {
    pub inner: B,
    pub mutation: Mutation,
}

impl<B: Backend + 'static> Backend for Mutant<B> {
    type Obj = B::Obj;
    type Val = B::Val;

    fn name(&self) -> &'static str {
        match self.mutation {
            Mutation::PredIdentity => "mutant-pred-identity",
            Mutation::CopyRightZero => "mutant-copy-right-zero",
            Mutation::LifSwapped => "mutant-lif-swapped",
        }
    }

    fn unit_obj(&self) -> Self::Obj {
        self.inner.unit_obj()
    }

    fn nat_obj(&self) -> Self::Obj {
        self.inner.nat_obj()
    }

    fn tensor_obj(&self, a: &Self::Obj, b: &Self::Obj) -> Self::Obj {
        self.inner.tensor_obj(a, b)
    }

    fn arrow_obj(&self, a: &Self::Obj, b: &Self::Obj) -> Self::Obj {
        self.inner.arrow_obj(a, b)
    }

    fn bang_obj(&self, a: &Self::Obj) -> Self::Obj {
        self.inner.bang_obj(a)
    }

    fn product_obj(&self, a: &Self::Obj, b: &Self::Obj) -> Self::Obj {
        self.inner.product_obj(a, b)
    }

    fn identity(&self, a: &Self::Obj) -> Mor<Self> {
        recast(self.inner.identity(a))
    }

    fn tensor_mor(&self, f: &Mor<Self>, g: &Mor<Self>) -> Mor<Self> {
        recast(
            self.inner
                .tensor_mor(&recast(f.clone()), &recast(g.clone())),
        )
    }

    fn symmetry(&self, a: &Self::Obj, b: &Self::Obj) -> Mor<Self> {
        recast(self.inner.symmetry(a, b))
    }

    fn assoc_right(&self, a: &Self::Obj, b: &Self::Obj, c: &Self::Obj) -> Mor<Self> {
        recast(self.inner.assoc_right(a, b, c))
    }

    fn assoc_left(&self, a: &Self::Obj, b: &Self::Obj, c: &Self::Obj) -> Mor<Self> {
        recast(self.inner.assoc_left(a, b, c))
    }

    fn lunit(&self, a: &Self::Obj) -> Mor<Self> {
        recast(self.inner.lunit(a))
    }

    fn lunit_inv(&self, a: &Self::Obj) -> Mor<Self> {
        recast(self.inner.lunit_inv(a))
    }

    fn runit(&self, a: &Self::Obj) -> Mor<Self> {
        recast(self.inner.runit(a))
    }

    fn runit_inv(&self, a: &Self::Obj) -> Mor<Self> {
        recast(self.inner.runit_inv(a))
    }

    fn curry(
        &self,
        f: &Mor<Self>,
        c: &Self::Obj,
        a: &Self::Obj,
    ) -> Result<Mor<Self>, ModelError> {
        Ok(recast(self.inner.curry(&recast(f.clone()), c, a)?))
    }

    fn eval(&self, a: &Self::Obj, b: &Self::Obj) -> Mor<Self> {
        recast(self.inner.eval(a, b))
    }

    fn pairing(&self, f: &Mor<Self>, g: &Mor<Self>) -> Result<Mor<Self>, ModelError> {
        Ok(recast(
            self.inner
                .pairing(&recast(f.clone()), &recast(g.clone()))?,
        ))
    }

    fn proj1(&self, a: &Self::Obj, b: &Self::Obj) -> Mor<Self> {
        recast(self.inner.proj1(a, b))
    }

    fn proj2(&self, a: &Self::Obj, b: &Self::Obj) -> Mor<Self> {
        recast(self.inner.proj2(a, b))
    }

    fn bang_mor(&self, f: &Mor<Self>) -> Mor<Self> {
        recast(self.inner.bang_mor(&recast(f.clone())))
    }

    fn delta(&self, a: &Self::Obj) -> Mor<Self> {
        recast(self.inner.delta(a))
    }

    fn epsilon(&self, a: &Self::Obj) -> Mor<Self> {
        recast(self.inner.epsilon(a))
    }

    fn q_tensor(&self, a: &Self::Obj, b: &Self::Obj) -> Mor<Self> {
        recast(self.inner.q_tensor(a, b))
    }

    fn q_unit(&self) -> Mor<Self> {
        recast(self.inner.q_unit())
    }

    fn dup(&self, a: &Self::Obj) -> Mor<Self> {
        recast(self.inner.dup(a))
    }

    fn erase(&self, a: &Self::Obj) -> Mor<Self> {
        recast(self.inner.erase(a))
    }

    fn zero(&self) -> Mor<Self> {
        recast(self.inner.zero())
    }

    fn succ_m(&self) -> Mor<Self> {
        recast(self.inner.succ_m())
    }

    fn pred_m(&self) -> Mor<Self> {
        let b = &self.inner;
        match self.mutation {
            Mutation::PredIdentity => recast(b.identity(&b.nat_obj())),
            _ => recast(b.pred_m()),
        }
    }

    fn num(&self, k: u64) -> Mor<Self> {
        recast(self.inner.num(k))
    }

    fn promote_n(&self) -> Mor<Self> {
        recast(self.inner.promote_n())
    }

    fn copy_n(&self) -> Mor<Self> {
        let b = &self.inner;
        match self.mutation {
            Mutation::CopyRightZero => {
                let n = b.nat_obj();
                let zero_right =
                    compose(&b.zero(), &b.weak_n()).expect("object bookkeeping");
                let m = pipeline(&[
                    b.copy_n(),
                    b.tensor_mor(&b.identity(&n), &zero_right),
                ])
                .expect("object bookkeeping");
                recast(m)
            }
            _ => recast(b.copy_n()),
        }
    }

    fn weak_n(&self) -> Mor<Self> {
        recast(self.inner.weak_n())
    }

    fn lif_m(&self) -> Mor<Self> {
        let b = &self.inner;
        match self.mutation {
            Mutation::LifSwapped => {
                let n = b.nat_obj();
                let swap = b
                    .pairing(&b.proj2(&n, &n), &b.proj1(&n, &n))
                    .expect("object bookkeeping");
                let m = compose(&b.lif_m(), &b.tensor_mor(&b.identity(&n), &swap))
                    .expect("object bookkeeping");
                recast(m)
            }
            _ => recast(b.lif_m()),
        }
    }

    fn fix(&self, obj: &Self::Obj) -> Mor<Self> {
        recast(self.inner.fix(obj))
    }

    fn global_point(&self) -> Self::Val {
        self.inner.global_point()
    }

    fn observe_nat(&self, v: &Self::Val) -> Result<Option<u64>, ModelError> {
        self.inner.observe_nat(v)
    }

    fn sample_inputs(&self, obj: &Self::Obj, obs: &ObsSpec) -> Vec<Self::Val> {
        self.inner.sample_inputs(obj, obs)
    }

    fn observe(
        &self,
        obj: &Self::Obj,
        v: &Self::Val,
        obs: &ObsSpec,
        fuel: Fuel,
    ) -> Result<Observation, ModelError> {
        self.inner.observe(obj, v, obs, fuel)
    }
}
