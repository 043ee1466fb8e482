//! Folding variant narrowing with the theory's oriented rules modulo the
//! axioms.

use std::collections::BTreeSet;

use crate::term::{canonical, Sym, Substitution, Term, Var, VarGen};

use super::engine::Engine;
use super::Algebra;

/// One variant: a normal form together with the substitution that produced
/// it, restricted to the original variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variant {
    pub term: Term,
    pub subst: Substitution,
}

impl Algebra {
    /// Variants of `t` up to the configured narrowing depth. The flag is
    /// false when the depth bound cut off live branches.
    pub fn variants_rigid(&self, t: &Term, rigid: &BTreeSet<Var>) -> (Vec<Variant>, bool) {
        let Ok(t0) = self.normalize(t) else {
            return (vec![Variant { term: t.clone(), subst: Substitution::new() }], false);
        };
        let root = Variant { term: t0, subst: Substitution::new() };
        if self.th.rules.is_empty() || !self.could_narrow(&root.term, rigid) {
            return (vec![root], true);
        }
        let vars0: BTreeSet<Var> = t.vars();
        let defined: BTreeSet<Sym> = self.th.defined_symbols();
        let mut all = vec![root.clone()];
        let mut frontier = vec![root];
        let mut complete = true;
        for _ in 0..self.budget.variant_depth {
            let mut next = Vec::new();
            for v in &frontier {
                for cand in self.narrow_once(v, &vars0, &defined, rigid, &mut complete) {
                    if all.iter().any(|old| self.variant_subsumes(old, &cand, &vars0)) {
                        continue;
                    }
                    all.push(cand.clone());
                    next.push(cand);
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
            if all.len() > self.budget.max_variants {
                complete = false;
                break;
            }
        }
        if !frontier.is_empty() && frontier.iter().any(|v| self.could_narrow(&v.term, rigid)) {
            complete = false;
        }
        (all, complete)
    }

    fn narrow_once(
        &self,
        v: &Variant,
        vars0: &BTreeSet<Var>,
        defined: &BTreeSet<Sym>,
        rigid: &BTreeSet<Var>,
        complete: &mut bool,
    ) -> Vec<Variant> {
        let mut out = Vec::new();
        for p in v.term.positions() {
            let sub = v.term.subterm_at(&p).expect("own position");
            let Some(head) = sub.head() else { continue };
            if !defined.contains(head) {
                continue;
            }
            for rule in self.th.rules.iter().filter(|r| r.lhs.head() == Some(head)) {
                if !self.shallow_compatible(&rule.lhs, sub, rigid) {
                    continue;
                }
                let mut gen = VarGen::new();
                gen.reserve_vars(v.term.vars().iter());
                gen.reserve_vars(vars0.iter());
                gen.reserve_vars(v.subst.range_vars().iter());
                gen.reserve_vars(rigid.iter());
                let ren = gen.renaming(rule.lhs.vars().iter());
                let lhs = ren.apply(&rule.lhs);
                let mut eng = Engine::new(&self.sig, &self.th, rigid, &self.budget, gen);
                let sols = eng.solve(vec![(sub.clone(), lhs)], Substitution::new());
                *complete &= eng.complete;
                for theta in sols {
                    let subst = v.subst.compose(&theta).restrict(vars0).map_range(|t| canonical(t, &self.th));
                    // keep only normalized substitutions
                    let irreducible = subst.iter().all(|(_, r)| self.normalize(r).is_ok_and(|n| &n == r));
                    if !irreducible {
                        continue;
                    }
                    let Ok(term) = self.normalize(&theta.apply(&v.term)) else {
                        *complete = false;
                        continue;
                    };
                    out.push(Variant { term, subst });
                }
            }
        }
        out
    }

    /// Cheap test for the existence of a narrowing redex.
    pub(crate) fn could_narrow(&self, t: &Term, rigid: &BTreeSet<Var>) -> bool {
        let defined = self.th.defined_symbols();
        t.positions().into_iter().any(|p| {
            let sub = t.subterm_at(&p).expect("own position");
            sub.head().is_some_and(|h| defined.contains(h))
                && self
                    .th
                    .rules
                    .iter()
                    .any(|r| r.lhs.head() == sub.head() && self.shallow_compatible(&r.lhs, sub, rigid))
        })
    }

    /// Heads agree wherever both sides are applications, ignoring
    /// exclusive-or sums which can take any shape.
    fn shallow_compatible(&self, pat: &Term, t: &Term, rigid: &BTreeSet<Var>) -> bool {
        match (pat, t) {
            (Term::Var(v), _) => {
                // the rule variable must accept something of the target sort
                match self.sig.least_sort(t) {
                    Ok(s) => self.sig.leq(&s, &v.sort) || !self.sig.glb(&s, &v.sort).is_empty() || t.is_var(),
                    Err(_) => true,
                }
            }
            (_, Term::Var(x)) => !rigid.contains(x) || pat.is_var(),
            (Term::App(a), Term::App(b)) => {
                if self.th.is_xor(&a.op) || self.th.is_xor(&b.op) {
                    return true;
                }
                a.op == b.op
                    && a.args.len() == b.args.len()
                    && (self.th.is_comm(&a.op)
                        || a.args.iter().zip(&b.args).all(|(p, s)| self.shallow_compatible(p, s, rigid)))
            }
            (Term::Fresh(_), _) | (_, Term::Fresh(_)) => pat == t,
        }
    }

    /// Does `old` cover `new`: some instance of `old` equals `new` on the
    /// term and on every original variable.
    fn variant_subsumes(&self, old: &Variant, new: &Variant, vars0: &BTreeSet<Var>) -> bool {
        let tuple = |v: &Variant| {
            let mut parts = vec![v.term.clone()];
            for x in vars0 {
                parts.push(v.subst.get(x).cloned().unwrap_or_else(|| Term::Var(x.clone())));
            }
            Term::app(super::TUPLE, parts)
        };
        self.is_instance_b(&tuple(old), &tuple(new))
    }
}
