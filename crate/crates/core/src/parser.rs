//! Concrete syntax.
//!
//! ```text
//! ty    ::= ty-atom [ "-o" ty ]                 (right associative)
//! ty-atom ::= "iota" | "!" ty-atom | "(" ty ")"
//!
//! term  ::= "\" ident ":" ty "." term
//!         | "mu" "$" ident ":" ty "." term
//!         | "lif" term "then" term "else" term
//!         | "promote" "!" atom                          (numeral-level)
//!         | "promote" term [ "as" "$" ident "in" term ]
//!         | "derelict" term
//!         | "discard" term "in" term
//!         | "copy" term "as" ident "," ident "in" term
//!         | app
//! app   ::= atom { atom }                       (left associative)
//! atom  ::= nat | "succ" | "pred" | ident | "$" ident | "(" term ")"
//!
//! judgment ::= [ basis ] "|-" term ":" ty
//! basis    ::= entry { "," entry }
//! entry    ::= ident ":" ty | "$" ident ":" ty
//! ```
//!
//! Natural-number literals abbreviate `succ`-chains over `0`. Keywords
//! terminate the greedy right-extending forms, so `lif`/`then`/`else` and
//! `as`/`in` nest without parentheses. A plain identifier takes the kind of
//! its nearest binder or basis entry (ground when annotated `iota`, higher at
//! arrow type); `$`-identifiers are stable and may occur free in a bare term.

use crate::syntax::{Basis, BasisEntry, Term, Ty, VarKind};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Lambda,
    Colon,
    Dot,
    Comma,
    Dollar,
    Bang,
    LParen,
    RParen,
    Lollipop,
    Turnstile,
    Kw(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{}`", s),
            Tok::Nat(n) => write!(f, "literal `{}`", n),
            Tok::Lambda => write!(f, "`\\`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dollar => write!(f, "`$`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Lollipop => write!(f, "`-o`"),
            Tok::Turnstile => write!(f, "`|-`"),
            Tok::Kw(k) => write!(f, "`{}`", k),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "iota", "mu", "lif", "then", "else", "succ", "pred", "promote", "derelict", "discard",
    "copy", "as", "in",
];

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = *self.src.get(self.pos)?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = match c {
                b'\\' => {
                    self.bump();
                    Tok::Lambda
                }
                b':' => {
                    self.bump();
                    Tok::Colon
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'$' => {
                    self.bump();
                    Tok::Dollar
                }
                b'!' => {
                    self.bump();
                    Tok::Bang
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'-' => {
                    self.bump();
                    if self.peek() == Some(b'o') {
                        self.bump();
                        Tok::Lollipop
                    } else {
                        return Err(self.err("expected `-o`"));
                    }
                }
                b'|' => {
                    self.bump();
                    if self.peek() == Some(b'-') {
                        self.bump();
                        Tok::Turnstile
                    } else {
                        return Err(self.err("expected `|-`"));
                    }
                }
                b'0'..=b'9' => {
                    let mut n: u64 = 0;
                    while let Some(d @ b'0'..=b'9') = self.peek() {
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(u64::from(d - b'0')))
                            .ok_or_else(|| self.err("numeral literal too large"))?;
                        self.bump();
                    }
                    Tok::Nat(n)
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_')
                    {
                        self.bump();
                    }
                    let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    match KEYWORDS.iter().find(|k| **k == s) {
                        Some(k) => Tok::Kw(k),
                        None => Tok::Ident(s.to_string()),
                    }
                }
                c => return Err(self.err(format!("unexpected character `{}`", c as char))),
            };
            out.push((tok, line, col));
        }
    }
}

/// Identifier environment while parsing: binder stack plus basis entries.
struct Env<'a> {
    scope: Vec<(String, VarKind)>,
    basis: Option<&'a Basis>,
}

impl Env<'_> {
    fn kind_of_plain(&self, name: &str) -> Option<VarKind> {
        for (n, k) in self.scope.iter().rev() {
            if n == name && *k != VarKind::Stable {
                return Some(*k);
            }
        }
        let b = self.basis?;
        for k in [VarKind::Ground, VarKind::Higher] {
            if b.lookup(name, k).is_some() {
                return Some(k);
            }
        }
        None
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    env: Env<'a>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        let (_, l, c) = self.toks[self.pos];
        (l, c)
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError { line, col, msg: msg.into() }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<(), ParseError> {
        if self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.err_here(format!("expected {}, found {}", want, self.peek())))
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => Err(self.err_here(format!("expected identifier, found {}", t))),
        }
    }

    fn ty(&mut self) -> Result<Ty, ParseError> {
        let lhs = self.ty_atom()?;
        if *self.peek() == Tok::Lollipop {
            self.bump();
            let rhs = self.ty()?;
            Ok(Ty::arrow(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn ty_atom(&mut self) -> Result<Ty, ParseError> {
        match self.peek().clone() {
            Tok::Kw("iota") => {
                self.bump();
                Ok(Ty::Iota)
            }
            Tok::Bang => {
                self.bump();
                Ok(Ty::bang(self.ty_atom()?))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            t => Err(self.err_here(format!("expected a type, found {}", t))),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Lambda => {
                self.bump();
                let name = self.expect_ident()?;
                self.expect(&Tok::Colon)?;
                let ann = self.ty()?;
                let (line, col) = self.here();
                let kind = ann.binder_kind().ok_or(ParseError {
                    line,
                    col,
                    msg: format!("cannot bind `{}` at type {}", name, ann),
                })?;
                self.expect(&Tok::Dot)?;
                self.env.scope.push((name.clone(), kind));
                let body = self.term()?;
                self.env.scope.pop();
                Ok(Term::lam(name, ann, body))
            }
            Tok::Kw("mu") => {
                self.bump();
                self.expect(&Tok::Dollar)?;
                let name = self.expect_ident()?;
                self.expect(&Tok::Colon)?;
                let ann = self.ty()?;
                self.expect(&Tok::Dot)?;
                self.env.scope.push((name.clone(), VarKind::Stable));
                let body = self.term()?;
                self.env.scope.pop();
                Ok(Term::mu(name, ann, body))
            }
            Tok::Kw("lif") => {
                self.bump();
                let cond = self.term()?;
                self.expect(&Tok::Kw("then"))?;
                let then_br = self.term()?;
                self.expect(&Tok::Kw("else"))?;
                let else_br = self.term()?;
                Ok(Term::lif(cond, then_br, else_br))
            }
            Tok::Kw("promote") => {
                self.bump();
                // Numeral-level promotion is written `promote!(M)`.
                if *self.peek() == Tok::Bang {
                    self.bump();
                    return Ok(Term::Promote(Box::new(self.atom()?)));
                }
                let scrutinee = self.term()?;
                if *self.peek() == Tok::Kw("as") {
                    self.bump();
                    self.expect(&Tok::Dollar)?;
                    let name = self.expect_ident()?;
                    self.expect(&Tok::Kw("in"))?;
                    self.env.scope.push((name.clone(), VarKind::Stable));
                    let body = self.term()?;
                    self.env.scope.pop();
                    Ok(Term::PromoteIn {
                        scrutinee: Box::new(scrutinee),
                        name,
                        body: Box::new(body),
                    })
                } else {
                    Ok(Term::Promote(Box::new(scrutinee)))
                }
            }
            Tok::Kw("derelict") => {
                self.bump();
                Ok(Term::Derelict(Box::new(self.term()?)))
            }
            Tok::Kw("discard") => {
                self.bump();
                let scrutinee = self.term()?;
                self.expect(&Tok::Kw("in"))?;
                let body = self.term()?;
                Ok(Term::Discard { scrutinee: Box::new(scrutinee), body: Box::new(body) })
            }
            Tok::Kw("copy") => {
                self.bump();
                let scrutinee = self.term()?;
                self.expect(&Tok::Kw("as"))?;
                let left = self.expect_ident()?;
                self.expect(&Tok::Comma)?;
                let right = self.expect_ident()?;
                self.expect(&Tok::Kw("in"))?;
                self.env.scope.push((left.clone(), VarKind::Ground));
                self.env.scope.push((right.clone(), VarKind::Ground));
                let body = self.term()?;
                self.env.scope.pop();
                self.env.scope.pop();
                Ok(Term::Copy {
                    scrutinee: Box::new(scrutinee),
                    left,
                    right,
                    body: Box::new(body),
                })
            }
            _ => self.app(),
        }
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            t = Term::app(t, arg);
        }
        Ok(t)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Nat(_)
                | Tok::Ident(_)
                | Tok::Dollar
                | Tok::LParen
                | Tok::Kw("succ")
                | Tok::Kw("pred")
        )
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(crate::syntax::numeral(n))
            }
            Tok::Kw("succ") => {
                self.bump();
                Ok(Term::Succ)
            }
            Tok::Kw("pred") => {
                self.bump();
                Ok(Term::Pred)
            }
            Tok::Ident(name) => {
                let kind = self.env.kind_of_plain(&name).ok_or_else(|| {
                    self.err_here(format!(
                        "unbound identifier `{}` (bind it or list it in a basis)",
                        name
                    ))
                })?;
                self.bump();
                Ok(Term::var(name, kind))
            }
            Tok::Dollar => {
                self.bump();
                let name = self.expect_ident()?;
                Ok(Term::var_s(name))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            t => Err(self.err_here(format!("expected a term, found {}", t))),
        }
    }

    fn basis_entries(&mut self) -> Result<Vec<BasisEntry>, ParseError> {
        let mut entries = Vec::new();
        if *self.peek() == Tok::Turnstile {
            return Ok(entries);
        }
        loop {
            let (kindhint, name) = match self.peek().clone() {
                Tok::Dollar => {
                    self.bump();
                    (Some(VarKind::Stable), self.expect_ident()?)
                }
                Tok::Ident(s) => {
                    self.bump();
                    (None, s)
                }
                t => return Err(self.err_here(format!("expected a basis entry, found {}", t))),
            };
            self.expect(&Tok::Colon)?;
            let (line, col) = self.here();
            let ty = self.ty()?;
            let kind = match kindhint {
                Some(k) => k,
                None => ty.binder_kind().ok_or(ParseError {
                    line,
                    col,
                    msg: format!("basis entry `{}` cannot have type {}", name, ty),
                })?,
            };
            entries.push(BasisEntry { name, kind, ty });
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                return Ok(entries);
            }
        }
    }
}

fn parser_for(src: &str) -> Result<Parser<'static>, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    Ok(Parser { toks, pos: 0, env: Env { scope: Vec::new(), basis: None } })
}

/// Parses a closed-or-stable term: plain identifiers must be bound.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = parser_for(src)?;
    let t = p.term()?;
    p.expect(&Tok::Eof)?;
    Ok(t)
}

/// Parses a term whose free plain identifiers resolve against `basis`.
pub fn parse_term_in(src: &str, basis: &Basis) -> Result<Term, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser { toks, pos: 0, env: Env { scope: Vec::new(), basis: Some(basis) } };
    let t = p.term()?;
    p.expect(&Tok::Eof)?;
    Ok(t)
}

pub fn parse_ty(src: &str) -> Result<Ty, ParseError> {
    let mut p = parser_for(src)?;
    let t = p.ty()?;
    p.expect(&Tok::Eof)?;
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedJudgment {
    pub basis: Basis,
    pub term: Term,
    pub ty: Ty,
}

/// Parses `basis |- term : ty`. The basis may be empty.
pub fn parse_judgment(src: &str) -> Result<ParsedJudgment, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser { toks, pos: 0, env: Env { scope: Vec::new(), basis: None } };
    let entries = p.basis_entries()?;
    let (line, col) = p.here();
    let basis = Basis::new(entries)
        .map_err(|e| ParseError { line, col, msg: e.to_string() })?;
    p.expect(&Tok::Turnstile)?;
    let mut q = Parser {
        toks: std::mem::take(&mut p.toks),
        pos: p.pos,
        env: Env { scope: Vec::new(), basis: Some(&basis) },
    };
    let term = q.term()?;
    q.expect(&Tok::Colon)?;
    let ty = q.ty()?;
    q.expect(&Tok::Eof)?;
    Ok(ParsedJudgment { basis, term, ty })
}

// ---------------------------------------------------------------------------
// Pretty-printing. Inverse of the grammar above with minimal parentheses;
// numerals render as literals.

fn is_atom(t: &Term) -> bool {
    crate::syntax::numeral_of(t).is_some()
        || matches!(t, Term::Zero | Term::Succ | Term::Pred | Term::Var { .. })
}

fn pp(t: &Term, out: &mut String) {
    if let Some(k) = crate::syntax::numeral_of(t) {
        out.push_str(&k.to_string());
        return;
    }
    match t {
        Term::Zero => out.push('0'),
        Term::Succ => out.push_str("succ"),
        Term::Pred => out.push_str("pred"),
        Term::Var { name, kind } => {
            if *kind == VarKind::Stable {
                out.push('$');
            }
            out.push_str(name);
        }
        Term::Lam { name, ann, body } => {
            out.push('\\');
            out.push_str(name);
            out.push(':');
            out.push_str(&ann.to_string());
            out.push('.');
            pp(body, out);
        }
        Term::Mu { name, ann, body } => {
            out.push_str("mu $");
            out.push_str(name);
            out.push(':');
            out.push_str(&ann.to_string());
            out.push('.');
            pp(body, out);
        }
        Term::App(f, a) => {
            // Function position admits nested applications unparenthesized.
            if is_atom(f) || matches!(**f, Term::App(..)) {
                pp(f, out);
            } else {
                pp_paren(f, out);
            }
            out.push(' ');
            pp_atom(a, out);
        }
        Term::LIf { cond, then_br, else_br } => {
            out.push_str("lif ");
            pp_arg(cond, out);
            out.push_str(" then ");
            pp_arg(then_br, out);
            out.push_str(" else ");
            pp_arg(else_br, out);
        }
        Term::Promote(a) => {
            out.push_str("promote!(");
            pp(a, out);
            out.push(')');
        }
        Term::Derelict(a) => {
            out.push_str("derelict ");
            pp_arg(a, out);
        }
        Term::Discard { scrutinee, body } => {
            out.push_str("discard ");
            pp_arg(scrutinee, out);
            out.push_str(" in ");
            pp(body, out);
        }
        Term::Copy { scrutinee, left, right, body } => {
            out.push_str("copy ");
            pp_arg(scrutinee, out);
            out.push_str(" as ");
            out.push_str(left);
            out.push_str(", ");
            out.push_str(right);
            out.push_str(" in ");
            pp(body, out);
        }
        Term::PromoteIn { scrutinee, name, body } => {
            out.push_str("promote ");
            pp_arg(scrutinee, out);
            out.push_str(" as $");
            out.push_str(name);
            out.push_str(" in ");
            pp(body, out);
        }
    }
}

/// Application and scrutinee positions: parenthesize the right-extending
/// forms, keep applications bare.
fn pp_arg(t: &Term, out: &mut String) {
    if is_atom(t) || matches!(t, Term::App(..)) {
        pp(t, out);
    } else {
        pp_paren(t, out);
    }
}

/// Argument position: atoms only.
fn pp_atom(t: &Term, out: &mut String) {
    if is_atom(t) {
        pp(t, out);
    } else {
        pp_paren(t, out);
    }
}

fn pp_paren(t: &Term, out: &mut String) {
    out.push('(');
    pp(t, out);
    out.push(')');
}

pub fn pretty(t: &Term) -> String {
    let mut s = String::new();
    pp(t, &mut s);
    s
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", pretty(self))
    }
}
