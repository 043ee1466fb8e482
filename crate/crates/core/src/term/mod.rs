//! Order-sorted terms, signatures, substitutions and normalization.

mod normalize;
mod signature;
mod subst;
mod syntax;
mod theory;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use normalize::{canonical, normalize, normalize_with_budget, xor_sum};
pub use signature::{OpDecl, Signature};
pub use subst::{compose_sorted, rename_apart, Substitution, VarGen};
pub use syntax::{infix_precedence, is_infix};
pub use theory::{AxiomSet, EquationalTheory, RewriteRule, XorInfo};

/// Interned-ish identifier. Cheap to clone, ordered by its text.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(s: &str) -> Sym {
        Sym(Arc::from(s))
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl serde::Serialize for Sym {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> serde::Deserialize<'de> for Sym {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Sym, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Sym::new(&s))
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Sym {
        Sym::new(s)
    }
}

/// A sort name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Sort(pub Sym);

impl Sort {
    pub fn new(s: &str) -> Sort {
        Sort(Sym::new(s))
    }
    pub fn msg() -> Sort {
        Sort::new(MSG)
    }
    pub fn fresh() -> Sort {
        Sort::new(FRESH)
    }
    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0.as_str())
    }
}

pub const MSG: &str = "Msg";
pub const FRESH: &str = "Fresh";

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Var {
    pub name: Sym,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: &str) -> Var {
        Var { name: Sym::new(name), sort: Sort::new(sort) }
    }

    /// Name without any `#k` renaming suffix.
    pub fn base(&self) -> &str {
        let s = self.name.as_str();
        match s.find('#') {
            Some(i) if i > 0 => &s[..i],
            _ => s,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name.as_str())
    }
}

/// A fresh value minted when a strand is instantiated. Never in the domain
/// of a substitution.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct FreshConst {
    pub strand: u32,
    pub index: u32,
}

impl fmt::Display for FreshConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}.{}", self.strand, self.index)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct App {
    pub op: Sym,
    pub args: Vec<Term>,
}

/// A term. The derived order (variables, then fresh constants, then
/// applications compared by operator and arguments) is the total order used
/// for canonical forms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(Var),
    Fresh(FreshConst),
    App(Arc<App>),
}

/// Path to a subterm, 1-based argument indices. Empty is the root.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("ill-typed term: {0}")]
    IllTyped(String),
    #[error("sort clash: {0}")]
    SortClash(String),
    #[error("invalid position {0:?}")]
    InvalidPosition(Vec<usize>),
    #[error("normalization exceeded the step budget of {0} rewrites")]
    StepBudgetExceeded(usize),
    #[error("unknown operator {0}")]
    UnknownOperator(String),
    #[error("undeclared sort {0}")]
    UndeclaredSort(String),
    #[error("subsort cycle through {0}")]
    SubsortCycle(String),
    #[error("operator {0} declared twice with different profiles")]
    OperatorClash(String),
    #[error("axiom is not regular: {0}")]
    NonRegularAxiom(String),
    #[error("unsupported equation: {0}")]
    UnsupportedEquation(String),
    #[error("sorts with no ground terms: {0}")]
    EmptySorts(String),
}

impl Term {
    pub fn var(name: &str, sort: &str) -> Term {
        Term::Var(Var::new(name, sort))
    }

    pub fn app(op: &str, args: Vec<Term>) -> Term {
        Term::App(Arc::new(App { op: Sym::new(op), args }))
    }

    pub fn app_sym(op: Sym, args: Vec<Term>) -> Term {
        Term::App(Arc::new(App { op, args }))
    }

    pub fn constant(op: &str) -> Term {
        Term::app(op, Vec::new())
    }

    pub fn fresh(strand: u32, index: u32) -> Term {
        Term::Fresh(FreshConst { strand, index })
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn head(&self) -> Option<&Sym> {
        match self {
            Term::App(a) => Some(&a.op),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(a) => &a.args,
            _ => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Fresh(_) => true,
            Term::App(a) => a.args.iter().all(Term::is_ground),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Fresh(_) => {}
            Term::App(a) => a.args.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    pub fn collect_fresh(&self, out: &mut BTreeSet<FreshConst>) {
        match self {
            Term::Var(_) => {}
            Term::Fresh(c) => {
                out.insert(*c);
            }
            Term::App(a) => a.args.iter().for_each(|t| t.collect_fresh(out)),
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::Fresh(_) => false,
            Term::App(a) => a.args.iter().any(|t| t.occurs(v)),
        }
    }

    pub fn contains_fresh(&self, c: FreshConst) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Fresh(d) => *d == c,
            Term::App(a) => a.args.iter().any(|t| t.contains_fresh(c)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::App(a) => 1 + a.args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::App(a) => 1 + a.args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// Subterm at `p`.
    pub fn subterm_at(&self, p: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &i in &p.0 {
            match cur {
                Term::App(a) if i >= 1 && i <= a.args.len() => cur = &a.args[i - 1],
                _ => return Err(TermError::InvalidPosition(p.0.clone())),
            }
        }
        Ok(cur)
    }

    /// `self` with the subterm at `p` replaced by `u`. No sort check; see
    /// [`Signature::replace_at`] for the checked variant.
    pub fn replace_at(&self, p: &Position, u: Term) -> Result<Term, TermError> {
        fn go(t: &Term, path: &[usize], u: Term, full: &[usize]) -> Result<Term, TermError> {
            let Some((&i, rest)) = path.split_first() else {
                return Ok(u);
            };
            match t {
                Term::App(a) if i >= 1 && i <= a.args.len() => {
                    let mut args = a.args.clone();
                    args[i - 1] = go(&a.args[i - 1], rest, u, full)?;
                    Ok(Term::app_sym(a.op.clone(), args))
                }
                _ => Err(TermError::InvalidPosition(full.to_vec())),
            }
        }
        go(self, &p.0, u, &p.0)
    }

    /// All positions of non-variable subterms, pre-order.
    pub fn positions(&self) -> Vec<Position> {
        fn go(t: &Term, cur: &mut Vec<usize>, out: &mut Vec<Position>) {
            if let Term::App(a) = t {
                out.push(Position(cur.clone()));
                for (i, s) in a.args.iter().enumerate() {
                    cur.push(i + 1);
                    go(s, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Bottom-up map over variables.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Fresh(_) => self.clone(),
            Term::App(a) => {
                if a.args.is_empty() {
                    return self.clone();
                }
                Term::app_sym(a.op.clone(), a.args.iter().map(|t| t.map_vars(f)).collect())
            }
        }
    }

    /// Bottom-up map over fresh constants.
    pub fn map_fresh(&self, f: &mut impl FnMut(FreshConst) -> Term) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::Fresh(c) => f(*c),
            Term::App(a) => {
                if a.args.is_empty() {
                    return self.clone();
                }
                Term::app_sym(a.op.clone(), a.args.iter().map(|t| t.map_fresh(f)).collect())
            }
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "lowercase")]
enum TermRef<'a> {
    Var(&'a Var),
    Fresh(&'a FreshConst),
    App(&'a Sym, &'a [Term]),
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum TermRepr {
    Var(Var),
    Fresh(FreshConst),
    App(Sym, Vec<Term>),
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Term::Var(v) => TermRef::Var(v),
            Term::Fresh(c) => TermRef::Fresh(c),
            Term::App(a) => TermRef::App(&a.op, &a.args),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Term, D::Error> {
        Ok(match TermRepr::deserialize(d)? {
            TermRepr::Var(v) => Term::Var(v),
            TermRepr::Fresh(c) => Term::Fresh(c),
            TermRepr::App(op, args) => Term::app_sym(op, args),
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        syntax::write_term(f, self)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pk(a: Term, b: Term) -> Term {
        Term::app("pk", vec![a, b])
    }
    fn n(a: Term, r: Term) -> Term {
        Term::app("n", vec![a, r])
    }

    #[test]
    fn subterm_and_replace() {
        let na = n(Term::var("A", "Name"), Term::var("r", FRESH));
        let t = pk(Term::var("B", "Name"), na.clone());
        assert_eq!(t.subterm_at(&Position(vec![2])).unwrap(), &na);
        assert_eq!(t.subterm_at(&Position::root()).unwrap(), &t);
        assert!(t.subterm_at(&Position(vec![3])).is_err());
        let open = pk(Term::var("B", "Name"), Term::var("X", MSG));
        assert_eq!(open.replace_at(&Position(vec![2]), na).unwrap(), t);
    }

    #[test]
    fn term_order_puts_variables_first() {
        let v = Term::var("Z", MSG);
        let c = Term::fresh(0, 0);
        let a = Term::constant("a");
        assert!(v < c && c < a);
    }

    #[test]
    fn positions_are_preorder() {
        let t = pk(Term::constant("b"), n(Term::constant("a"), Term::fresh(1, 0)));
        let ps = t.positions();
        assert_eq!(ps[0], Position::root());
        assert_eq!(ps[1], Position(vec![1]));
        assert_eq!(ps[2], Position(vec![2]));
        assert_eq!(ps[3], Position(vec![2, 1]));
    }
}
