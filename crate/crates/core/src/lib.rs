//! Workbench for a linear lambda-calculus with numerals: parsing, typing,
//! reduction, and two denotational backends with an equivalence checker.

pub mod cli;
pub mod coh;
pub mod model;
pub mod parser;
pub mod reduce;
pub mod strict;
pub mod syntax;
pub mod typecheck;
pub mod verify;

/// Language mode. `Core` is the base calculus; `Extended` additionally
/// accepts ground-type promotion, discard, copy, and dereliction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Core,
    Extended,
}

pub use syntax::{
    alpha_eq, free_vars, numeral, numeral_of, subst_ground, subst_higher, subst_stable, Basis,
    BasisEntry, FreeVars, Term, Ty, VarKind,
};
