use std::collections::BTreeMap;

use super::theory::flatten_into;
use super::{EquationalTheory, Substitution, Sym, Term, TermError, Var};

/// Normal form of `t` under the theory's rules modulo its axioms, with the
/// theory's own step budget.
pub fn normalize(t: &Term, th: &EquationalTheory) -> Result<Term, TermError> {
    normalize_with_budget(t, th, th.step_budget)
}

pub fn normalize_with_budget(t: &Term, th: &EquationalTheory, budget: usize) -> Result<Term, TermError> {
    let mut steps = 0usize;
    norm(t, th, true, budget, &mut steps)
}

/// Canonical representative under the axioms alone (no rewriting).
pub fn canonical(t: &Term, th: &EquationalTheory) -> Term {
    let mut steps = 0;
    norm(t, th, false, usize::MAX, &mut steps).expect("axiom canonicalization cannot run out of budget")
}

fn norm(t: &Term, th: &EquationalTheory, rules: bool, budget: usize, steps: &mut usize) -> Result<Term, TermError> {
    let Term::App(a) = t else { return Ok(t.clone()) };
    if a.args.is_empty() {
        return if rules { rewrite_top(t.clone(), th, budget, steps) } else { Ok(t.clone()) };
    }
    let mut args = Vec::with_capacity(a.args.len());
    for s in &a.args {
        args.push(norm(s, th, rules, budget, steps)?);
    }
    let t = canon_app(&a.op, args, th);
    if rules {
        rewrite_top(t, th, budget, steps)
    } else {
        Ok(t)
    }
}

/// Rebuild `op(args)` in canonical form, assuming the arguments already are.
pub(crate) fn canon_app(op: &Sym, args: Vec<Term>, th: &EquationalTheory) -> Term {
    let Some(ax) = th.axioms_of(op) else {
        return Term::app_sym(op.clone(), args);
    };
    let mut args = if ax.assoc {
        let mut flat = Vec::with_capacity(args.len());
        for s in &args {
            flatten_into(op, s, &mut flat);
        }
        flat
    } else {
        args
    };
    if ax.assoc {
        if let Some(unit) = &ax.identity {
            args.retain(|s| s != unit);
        }
    } else if let Some(unit) = &ax.identity {
        if args.len() == 2 {
            if &args[1] == unit {
                return args.swap_remove(0);
            }
            if &args[0] == unit {
                return args.swap_remove(1);
            }
        }
    }
    if ax.comm {
        args.sort();
    }
    if th.is_xor(op) {
        let mut kept: Vec<Term> = Vec::with_capacity(args.len());
        for s in args {
            if kept.last() == Some(&s) {
                kept.pop();
            } else {
                kept.push(s);
            }
        }
        args = kept;
    }
    if ax.assoc {
        match args.len() {
            0 => return ax.identity.clone().unwrap_or_else(|| Term::app_sym(op.clone(), args)),
            1 => return args.pop().expect("one argument"),
            _ => {}
        }
    }
    Term::app_sym(op.clone(), args)
}

/// Canonical exclusive-or of `parts` (any length). Panics if the theory has
/// no exclusive-or operator.
pub fn xor_sum(parts: Vec<Term>, th: &EquationalTheory) -> Term {
    let x = th.xor.as_ref().expect("theory has exclusive-or");
    if parts.is_empty() {
        return x.zero.clone();
    }
    if parts.len() == 1 {
        // still flatten and cancel if it is itself a sum
        return canon_app(&x.op, vec![parts[0].clone(), x.zero.clone()], th);
    }
    canon_app(&x.op, parts, th)
}

fn rewrite_top(t: Term, th: &EquationalTheory, budget: usize, steps: &mut usize) -> Result<Term, TermError> {
    for r in &th.rules {
        if let Some(s) = match_term(&r.lhs, &t, th, Bindings::new()) {
            *steps += 1;
            if *steps > budget {
                return Err(TermError::StepBudgetExceeded(budget));
            }
            let next = Substitution::from_pairs(s).apply(&r.rhs);
            return norm(&next, th, true, budget, steps);
        }
    }
    Ok(t)
}

/// One-sided matching of a canonical pattern against a canonical term,
/// modulo commutativity. Other axioms are handled by comparing canonical
/// forms, which is enough for rule left-hand sides without associative
/// operators.
///
/// Bindings live in a plain map: a rule variable bound to a subject variable
/// of the same name must stay bound.
type Bindings = BTreeMap<Var, Term>;

fn match_term(p: &Term, t: &Term, th: &EquationalTheory, s: Bindings) -> Option<Bindings> {
    match p {
        Term::Var(v) => match s.get(v) {
            Some(bound) => (bound == t).then_some(s),
            None => {
                let mut s = s;
                s.insert(v.clone(), t.clone());
                Some(s)
            }
        },
        Term::Fresh(_) => (p == t).then_some(s),
        Term::App(pa) => {
            let Term::App(ta) = t else { return None };
            if pa.op != ta.op || pa.args.len() != ta.args.len() {
                return None;
            }
            let straight = match_args(&pa.args, &ta.args, th, s.clone());
            if straight.is_some() || !(th.is_comm(&pa.op) && pa.args.len() == 2 && !th.is_assoc(&pa.op)) {
                return straight;
            }
            let swapped = [ta.args[1].clone(), ta.args[0].clone()];
            match_args(&pa.args, &swapped, th, s)
        }
    }
}

fn match_args(ps: &[Term], ts: &[Term], th: &EquationalTheory, mut s: Bindings) -> Option<Bindings> {
    for (p, t) in ps.iter().zip(ts) {
        s = match_term(p, t, th, s)?;
    }
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::AxiomSet;

    fn t2(op: &str, a: Term, b: Term) -> Term {
        Term::app(op, vec![a, b])
    }
    fn c(s: &str) -> Term {
        Term::constant(s)
    }

    fn nsl() -> EquationalTheory {
        let mut th = EquationalTheory::new();
        let (a, m) = (Term::var("A", "Name"), Term::var("M", "Msg"));
        th.add_equation(t2("sk", a.clone(), t2("pk", a.clone(), m.clone())), m.clone()).unwrap();
        th.add_equation(t2("pk", a.clone(), t2("sk", a, m.clone())), m).unwrap();
        th
    }

    fn xor_th() -> EquationalTheory {
        let mut th = EquationalTheory::new();
        th.declare("⊕", AxiomSet { assoc: true, comm: true, identity: Some(c("zero")) });
        let (x, y) = (Term::var("X", "Msg"), Term::var("Y", "Msg"));
        th.add_equation(t2("⊕", x.clone(), x.clone()), c("zero")).unwrap();
        th.add_equation(t2("⊕", x.clone(), t2("⊕", x, y.clone())), y).unwrap();
        th
    }

    #[test]
    fn pk_sk_cancel() {
        let t = t2("sk", c("a"), t2("pk", c("a"), c("m")));
        assert_eq!(normalize(&t, &nsl()).unwrap(), c("m"));
        let stuck = t2("sk", c("b"), t2("pk", c("a"), c("m")));
        assert_eq!(normalize(&stuck, &nsl()).unwrap(), stuck);
    }

    #[test]
    fn rule_variable_named_like_subject_variable() {
        let t = t2("pk", Term::var("A", "Name"), t2("sk", Term::var("B", "Name"), Term::var("X", "Msg")));
        assert_eq!(normalize(&t, &nsl()).unwrap(), t);
    }

    #[test]
    fn ed_cancel() {
        let mut th = EquationalTheory::new();
        let (x, z) = (Term::var("X", "Msg"), Term::var("Z", "Msg"));
        th.add_equation(t2("d", x.clone(), t2("e", x.clone(), z.clone())), z.clone()).unwrap();
        th.add_equation(t2("e", x.clone(), t2("d", x, z.clone())), z).unwrap();
        assert_eq!(normalize(&t2("d", c("k"), t2("e", c("k"), c("z"))), &th).unwrap(), c("z"));
    }

    #[test]
    fn xor_cancels_pairs() {
        let th = xor_th();
        let na = t2("n", c("a"), Term::fresh(0, 0));
        let nb = t2("n", c("b"), Term::fresh(1, 0));
        let t = t2("⊕", na.clone(), t2("⊕", nb.clone(), na.clone()));
        assert_eq!(normalize(&t, &th).unwrap(), nb);
        assert_eq!(normalize(&t2("⊕", na.clone(), na.clone()), &th).unwrap(), c("zero"));
        assert_eq!(normalize(&t2("⊕", na.clone(), c("zero")), &th).unwrap(), na);
    }

    #[test]
    fn budget_is_enforced() {
        let mut th = EquationalTheory::new();
        // f(X) -> f(g(X)) never terminates
        let x = Term::var("X", "Msg");
        th.add_equation(Term::app("f", vec![x.clone()]), Term::app("f", vec![Term::app("g", vec![x])]))
            .unwrap();
        let r = normalize_with_budget(&Term::app("f", vec![c("a")]), &th, 50);
        assert_eq!(r, Err(TermError::StepBudgetExceeded(50)));
    }
}
