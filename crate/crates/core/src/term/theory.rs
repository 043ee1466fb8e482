use std::collections::{BTreeMap, BTreeSet};

use super::{normalize::canonical, Sym, Term, TermError, Var};

/// Axioms attached to one operator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomSet {
    pub assoc: bool,
    pub comm: bool,
    pub identity: Option<Term>,
}

impl AxiomSet {
    pub fn is_ac(&self) -> bool {
        self.assoc && self.comm
    }
    pub fn is_empty(&self) -> bool {
        !self.assoc && !self.comm && self.identity.is_none()
    }
}

/// An equation oriented left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub lhs: Term,
    pub rhs: Term,
}

/// The exclusive-or operator and its unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorInfo {
    pub op: Sym,
    pub zero: Term,
}

/// Oriented equations plus per-operator axioms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationalTheory {
    pub rules: Vec<RewriteRule>,
    pub axioms: BTreeMap<Sym, AxiomSet>,
    pub xor: Option<XorInfo>,
    pub step_budget: usize,
    /// Raw equations recognized as nilpotence laws, kept for printing.
    pub xor_equations: Vec<(Term, Term)>,
}

pub const DEFAULT_STEP_BUDGET: usize = 10_000;

impl Default for EquationalTheory {
    fn default() -> Self {
        EquationalTheory::new()
    }
}

impl EquationalTheory {
    pub fn new() -> EquationalTheory {
        EquationalTheory {
            rules: Vec::new(),
            axioms: BTreeMap::new(),
            xor: None,
            step_budget: DEFAULT_STEP_BUDGET,
            xor_equations: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.axioms.values().all(AxiomSet::is_empty)
    }

    pub fn axioms_of(&self, op: &Sym) -> Option<&AxiomSet> {
        self.axioms.get(op).filter(|a| !a.is_empty())
    }

    pub fn is_xor(&self, op: &Sym) -> bool {
        self.xor.as_ref().is_some_and(|x| &x.op == op)
    }

    pub fn xor_op(&self) -> Option<&Sym> {
        self.xor.as_ref().map(|x| &x.op)
    }

    pub fn is_comm(&self, op: &Sym) -> bool {
        self.axioms.get(op).is_some_and(|a| a.comm)
    }

    pub fn is_assoc(&self, op: &Sym) -> bool {
        self.axioms.get(op).is_some_and(|a| a.assoc)
    }

    pub fn declare(&mut self, op: &str, ax: AxiomSet) {
        let e = self.axioms.entry(Sym::new(op)).or_default();
        e.assoc |= ax.assoc;
        e.comm |= ax.comm;
        if ax.identity.is_some() {
            e.identity = ax.identity;
        }
    }

    /// Add an axiom written as an equation. Recognized shapes are
    /// commutativity, associativity (either orientation) and a right or
    /// left identity.
    pub fn add_axiom_equation(&mut self, lhs: &Term, rhs: &Term) -> Result<(), TermError> {
        if lhs.vars() != rhs.vars() {
            return Err(TermError::NonRegularAxiom(format!("{lhs} = {rhs}")));
        }
        let bad = || TermError::UnsupportedEquation(format!("{lhs} = {rhs}"));
        let (Term::App(l), r) = (lhs, rhs) else {
            return Err(bad());
        };
        // identity: f(X, e) = X or f(e, X) = X
        if let Term::Var(x) = r {
            if l.args.len() == 2 {
                let (a, b) = (&l.args[0], &l.args[1]);
                let unit = if a.as_var() == Some(x) && b.is_ground() {
                    Some(b.clone())
                } else if b.as_var() == Some(x) && a.is_ground() {
                    Some(a.clone())
                } else {
                    None
                };
                if let Some(u) = unit {
                    self.declare(l.op.as_str(), AxiomSet { identity: Some(u), ..Default::default() });
                    return Ok(());
                }
            }
            return Err(bad());
        }
        let Term::App(ra) = r else { return Err(bad()) };
        if l.op != ra.op || l.args.len() != 2 || ra.args.len() != 2 {
            return Err(bad());
        }
        let vars_of = |t: &Term| t.as_var().cloned();
        // comm: f(X,Y) = f(Y,X)
        if let (Some(x), Some(y), Some(y2), Some(x2)) =
            (vars_of(&l.args[0]), vars_of(&l.args[1]), vars_of(&ra.args[0]), vars_of(&ra.args[1]))
        {
            if x == x2 && y == y2 && x != y {
                self.declare(l.op.as_str(), AxiomSet { comm: true, ..Default::default() });
                return Ok(());
            }
            return Err(bad());
        }
        // assoc: f(f(X,Y),Z) = f(X,f(Y,Z)) or the mirror image
        let leftnest = |t: &Term| -> Option<[Var; 3]> {
            let a = t.args();
            let inner = a.first()?;
            if inner.head() != Some(&l.op) {
                return None;
            }
            Some([vars_of(&inner.args()[0])?, vars_of(&inner.args()[1])?, vars_of(&a[1])?])
        };
        let rightnest = |t: &Term| -> Option<[Var; 3]> {
            let a = t.args();
            let inner = a.get(1)?;
            if inner.head() != Some(&l.op) {
                return None;
            }
            Some([vars_of(&a[0])?, vars_of(&inner.args()[0])?, vars_of(&inner.args()[1])?])
        };
        let ok = matches!((leftnest(lhs), rightnest(rhs)), (Some(p), Some(q)) if p == q)
            || matches!((rightnest(lhs), leftnest(rhs)), (Some(p), Some(q)) if p == q);
        if ok {
            self.declare(l.op.as_str(), AxiomSet { assoc: true, ..Default::default() });
            return Ok(());
        }
        Err(bad())
    }

    /// Add an oriented equation. Nilpotence laws over an ACU operator turn
    /// that operator into exclusive-or; any other equation whose left side
    /// is headed by an associative-commutative operator is rejected.
    pub fn add_equation(&mut self, lhs: Term, rhs: Term) -> Result<(), TermError> {
        let Term::App(l) = &lhs else {
            return Err(TermError::UnsupportedEquation(format!("variable left-hand side in {lhs} = {rhs}")));
        };
        if !rhs.vars().is_subset(&lhs.vars()) {
            return Err(TermError::UnsupportedEquation(format!(
                "right-hand side of {lhs} = {rhs} has extra variables"
            )));
        }
        let op = l.op.clone();
        if let Some(ax) = self.axioms.get(&op).cloned() {
            if ax.is_ac() {
                if let Some(zero) = &ax.identity {
                    if self.is_nilpotence(&op, zero, &lhs, &rhs) {
                        self.xor = Some(XorInfo { op: op.clone(), zero: zero.clone() });
                        self.xor_equations.push((lhs, rhs));
                        return Ok(());
                    }
                }
                return Err(TermError::UnsupportedEquation(format!(
                    "{lhs} = {rhs} is headed by an associative-commutative operator"
                )));
            }
        }
        let lhs = canonical(&lhs, self);
        let rhs = canonical(&rhs, self);
        self.rules.push(RewriteRule { lhs, rhs });
        Ok(())
    }

    fn is_nilpotence(&self, op: &Sym, zero: &Term, lhs: &Term, rhs: &Term) -> bool {
        let mut args = Vec::new();
        flatten_into(op, lhs, &mut args);
        let mut counts: BTreeMap<&Term, usize> = BTreeMap::new();
        for a in &args {
            if !a.is_var() {
                return false;
            }
            *counts.entry(a).or_default() += 1;
        }
        match rhs {
            // X ⊕ X = zero
            t if t == zero => counts.len() == 1 && counts.values().all(|&c| c == 2),
            // X ⊕ X ⊕ Y = Y
            Term::Var(y) => {
                counts.len() == 2
                    && counts.get(&Term::Var(y.clone())) == Some(&1)
                    && counts.values().filter(|&&c| c == 2).count() == 1
            }
            _ => false,
        }
    }

    /// Operators that occur at the head of some rule's left-hand side.
    pub fn defined_symbols(&self) -> BTreeSet<Sym> {
        self.rules.iter().filter_map(|r| r.lhs.head().cloned()).collect()
    }

    /// Union with another theory. Conflicting axiom declarations merge.
    pub fn merge(&self, other: &EquationalTheory) -> EquationalTheory {
        let mut out = self.clone();
        for (op, ax) in &other.axioms {
            out.declare(op.as_str(), ax.clone());
        }
        for r in &other.rules {
            if !out.rules.contains(r) {
                out.rules.push(r.clone());
            }
        }
        if out.xor.is_none() {
            out.xor = other.xor.clone();
        }
        for e in &other.xor_equations {
            if !out.xor_equations.contains(e) {
                out.xor_equations.push(e.clone());
            }
        }
        out
    }
}

pub(crate) fn flatten_into(op: &Sym, t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::App(a) if &a.op == op && a.args.len() >= 2 => {
            for s in &a.args {
                flatten_into(op, s, out);
            }
        }
        _ => out.push(t.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor(a: Term, b: Term) -> Term {
        Term::app("⊕", vec![a, b])
    }

    fn acu() -> EquationalTheory {
        let mut th = EquationalTheory::new();
        let (x, y, z) = (Term::var("X", "Msg"), Term::var("Y", "Msg"), Term::var("Z", "Msg"));
        th.add_axiom_equation(&xor(x.clone(), y.clone()), &xor(y.clone(), x.clone())).unwrap();
        th.add_axiom_equation(&xor(xor(x.clone(), y.clone()), z.clone()), &xor(x.clone(), xor(y, z)))
            .unwrap();
        th.add_axiom_equation(&xor(x.clone(), Term::constant("zero")), &x).unwrap();
        th
    }

    #[test]
    fn recognizes_xor() {
        let mut th = acu();
        let (x, y) = (Term::var("X", "Msg"), Term::var("Y", "Msg"));
        th.add_equation(xor(x.clone(), x.clone()), Term::constant("zero")).unwrap();
        th.add_equation(xor(x.clone(), xor(x, y.clone())), y).unwrap();
        assert!(th.is_xor(&Sym::new("⊕")));
        assert!(th.rules.is_empty());
    }

    #[test]
    fn rejects_other_ac_equations() {
        let mut th = acu();
        let x = Term::var("X", "Msg");
        let r = th.add_equation(xor(x.clone(), Term::constant("one")), x);
        assert!(matches!(r, Err(TermError::UnsupportedEquation(_))));
    }

    #[test]
    fn non_regular_axiom() {
        let mut th = EquationalTheory::new();
        let (x, y) = (Term::var("X", "Msg"), Term::var("Y", "Msg"));
        let r = th.add_axiom_equation(&Term::app("f", vec![x.clone(), y]), &x);
        assert!(matches!(r, Err(TermError::NonRegularAxiom(_))));
    }
}
