//! Complete sets of unifiers modulo an equational theory.
//!
//! Unification modulo the axioms (commutativity, exclusive-or) is done by a
//! worklist engine; the oriented rules are handled by computing variants
//! first and unifying the variant pairs modulo the axioms.

mod engine;
mod variants;

use std::collections::BTreeSet;

use crate::term::{
    canonical, normalize, EquationalTheory, Signature, Substitution, Sym, Term, TermError, Var, VarGen,
};

use engine::Engine;
pub use variants::Variant;

/// Operator used internally to bundle several terms into one.
pub const TUPLE: &str = "⟨⟩";

/// Per-call bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    pub variant_depth: usize,
    pub max_variants: usize,
    pub max_unifiers: usize,
    pub max_work: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { variant_depth: 5, max_variants: 512, max_unifiers: 4096, max_work: 200_000 }
    }
}

/// A list of unifiers plus whether the list is known to be complete.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnifierSet {
    pub unifiers: Vec<Substitution>,
    pub complete: bool,
}

impl UnifierSet {
    pub fn empty() -> UnifierSet {
        UnifierSet { unifiers: Vec::new(), complete: true }
    }
    pub fn is_empty(&self) -> bool {
        self.unifiers.is_empty()
    }
    pub fn len(&self) -> usize {
        self.unifiers.len()
    }
}

/// Signature, theory and budget bundled together; the entry point for all
/// unification work.
#[derive(Clone, Debug)]
pub struct Algebra {
    pub sig: Signature,
    pub th: EquationalTheory,
    pub budget: Budget,
}

impl Algebra {
    pub fn new(sig: Signature, th: EquationalTheory) -> Algebra {
        Algebra { sig, th, budget: Budget::default() }
    }

    pub fn normalize(&self, t: &Term) -> Result<Term, TermError> {
        normalize(t, &self.th)
    }

    pub fn canonical(&self, t: &Term) -> Term {
        canonical(t, &self.th)
    }

    /// Equality modulo the whole theory.
    pub fn equal(&self, a: &Term, b: &Term) -> bool {
        match (self.normalize(a), self.normalize(b)) {
            (Ok(x), Ok(y)) => x == y,
            _ => false,
        }
    }

    /// Unifiers modulo the axioms only.
    pub fn b_unify(&self, eqs: &[(Term, Term)], rigid: &BTreeSet<Var>) -> UnifierSet {
        let mut gen = VarGen::new();
        for (l, r) in eqs {
            gen.reserve_vars(l.vars().iter());
            gen.reserve_vars(r.vars().iter());
        }
        gen.reserve_vars(rigid.iter());
        let mut eng = Engine::new(&self.sig, &self.th, rigid, &self.budget, gen);
        let unifiers = eng.solve(eqs.to_vec(), Substitution::new());
        UnifierSet { unifiers, complete: eng.complete }
    }

    pub fn variants(&self, t: &Term) -> (Vec<Variant>, bool) {
        self.variants_rigid(t, &BTreeSet::new())
    }

    /// Simultaneous unifiers of every pair in `eqs` modulo the theory.
    /// Variables in `rigid` behave as constants.
    pub fn unify_eqs(&self, eqs: &[(Term, Term)], rigid: &BTreeSet<Var>) -> UnifierSet {
        let mut all_vars = BTreeSet::new();
        let mut parts = Vec::with_capacity(eqs.len() * 2);
        for (l, r) in eqs {
            l.collect_vars(&mut all_vars);
            r.collect_vars(&mut all_vars);
            parts.push(l.clone());
            parts.push(r.clone());
        }
        let bundle = Term::app(TUPLE, parts);
        let (vs, mut complete) = self.variants_rigid(&bundle, rigid);
        let mut found = Vec::new();
        for v in vs {
            let pairs: Vec<(Term, Term)> = v.term.args().chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
            let mut gen = VarGen::new();
            gen.reserve_vars(all_vars.iter());
            gen.reserve_vars(v.term.vars().iter());
            gen.reserve_vars(v.subst.range_vars().iter());
            gen.reserve_vars(rigid.iter());
            let mut eng = Engine::new(&self.sig, &self.th, rigid, &self.budget, gen);
            let sols = eng.solve(pairs, Substitution::new());
            complete &= eng.complete;
            for theta in sols {
                let u = v.subst.compose(&theta).restrict(&all_vars).map_range(|t| canonical(t, &self.th));
                found.push(u);
            }
        }
        let unifiers = self.minimize(found, &all_vars);
        debug_assert!(unifiers.iter().all(|u| self.check_unifier(eqs, u)), "unsound unifier");
        UnifierSet { unifiers, complete }
    }

    pub fn unify(&self, a: &Term, b: &Term) -> UnifierSet {
        self.unify_eqs(&[(a.clone(), b.clone())], &BTreeSet::new())
    }

    /// Substitute, normalize, compare.
    pub fn check_unifier(&self, eqs: &[(Term, Term)], u: &Substitution) -> bool {
        eqs.iter().all(|(l, r)| match (self.normalize(&u.apply(l)), self.normalize(&u.apply(r))) {
            (Ok(x), Ok(y)) => x == y,
            _ => true,
        })
    }

    /// All `σ` with domain in the pattern's variables such that `pattern σ`
    /// equals `target` modulo the theory. Target variables are constants.
    pub fn match_modulo(&self, pattern: &Term, target: &Term) -> UnifierSet {
        self.match_eqs(&[(pattern.clone(), target.clone())])
    }

    /// Simultaneous matching of several pattern/target pairs.
    pub fn match_eqs(&self, pairs: &[(Term, Term)]) -> UnifierSet {
        let mut rigid = BTreeSet::new();
        let mut pvars = BTreeSet::new();
        for (p, t) in pairs {
            t.collect_vars(&mut rigid);
            p.collect_vars(&mut pvars);
        }
        // pattern variables that clash with target variables are renamed
        let clash: Vec<Var> = pvars.intersection(&rigid).cloned().collect();
        let mut gen = VarGen::avoiding(rigid.iter().chain(pvars.iter()).map(|v| v.name.clone()));
        let ren = gen.renaming(clash.iter());
        let eqs: Vec<(Term, Term)> = pairs.iter().map(|(p, t)| (ren.apply(p), t.clone())).collect();
        let set = self.unify_eqs(&eqs, &rigid);
        let unifiers = set
            .unifiers
            .into_iter()
            .map(|u| {
                let back = Substitution::from_pairs(
                    pvars.iter().map(|v| (v.clone(), canonical(&u.apply(&ren.apply(&Term::Var(v.clone()))), &self.th))),
                );
                Substitution::from_pairs(back.iter().filter(|(v, t)| t.as_var() != Some(v)).map(|(v, t)| (v.clone(), t.clone())))
            })
            .collect();
        UnifierSet { unifiers, complete: set.complete }
    }

    /// Is `specific` an instance of `general` modulo the axioms?
    pub fn is_instance_b(&self, general: &Term, specific: &Term) -> bool {
        let rigid = specific.vars();
        let gvars = general.vars();
        let mut gen = VarGen::avoiding(rigid.iter().chain(gvars.iter()).map(|v| v.name.clone()));
        let ren = gen.renaming(gvars.iter().filter(|v| rigid.contains(*v)));
        let g = ren.apply(general);
        let mut tiny = self.budget.clone();
        tiny.max_unifiers = 1;
        let mut eng = Engine::new(&self.sig, &self.th, &rigid, &tiny, gen);
        !eng.solve(vec![(g, specific.clone())], Substitution::new()).is_empty()
    }

    /// Drop unifiers that are instances of others on `vars`.
    pub fn minimize(&self, found: Vec<Substitution>, vars: &BTreeSet<Var>) -> Vec<Substitution> {
        let as_tuple = |s: &Substitution| {
            Term::app(TUPLE, vars.iter().map(|v| s.apply(&Term::Var(v.clone()))).collect())
        };
        let mut keep: Vec<(Substitution, Term)> = Vec::new();
        for s in found {
            let t = as_tuple(&s);
            if keep.iter().any(|(_, k)| self.is_instance_b(k, &t)) {
                continue;
            }
            keep.retain(|(_, k)| !self.is_instance_b(&t, k));
            keep.push((s, t));
        }
        keep.into_iter().map(|(s, _)| s).collect()
    }
}

/// Most general syntactic unifier, order-sorted, with occurs check.
pub fn syntactic_unify(t1: &Term, t2: &Term, sig: &Signature) -> UnifierSet {
    let alg = Algebra::new(sig.clone(), EquationalTheory::new());
    alg.b_unify(&[(t1.clone(), t2.clone())], &BTreeSet::new())
}

/// Unifiers over the exclusive-or fragment; non-sum subterms are atoms that
/// unify only syntactically.
pub fn xor_unify(t1: &Term, t2: &Term, sig: &Signature, th: &EquationalTheory) -> UnifierSet {
    let alg = Algebra::new(sig.clone(), th.clone());
    let set = alg.b_unify(&[(t1.clone(), t2.clone())], &BTreeSet::new());
    let mut vars = t1.vars();
    vars.extend(t2.vars());
    let unifiers = alg.minimize(set.unifiers.into_iter().map(|u| u.restrict(&vars)).collect(), &vars);
    UnifierSet { unifiers, complete: set.complete }
}

pub fn variants(t: &Term, alg: &Algebra) -> (Vec<Variant>, bool) {
    alg.variants(t)
}

pub fn unify_modulo(t1: &Term, t2: &Term, alg: &Algebra) -> UnifierSet {
    alg.unify(t1, t2)
}

pub fn match_modulo(pattern: &Term, target: &Term, alg: &Algebra) -> UnifierSet {
    alg.match_modulo(pattern, target)
}

/// Name of the exclusive-or operator, if any.
pub fn xor_symbol(th: &EquationalTheory) -> Option<&Sym> {
    th.xor_op()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{AxiomSet, OpDecl};

    fn c(s: &str) -> Term {
        Term::constant(s)
    }
    fn v(s: &str) -> Term {
        Term::var(s, "Msg")
    }
    fn f2(op: &str, a: Term, b: Term) -> Term {
        Term::app(op, vec![a, b])
    }

    fn msg_sig(ops: &[(&str, usize)]) -> Signature {
        let mut sig = Signature::new();
        sig.add_sort("Name");
        sig.add_subsort("Name", "Msg").unwrap();
        for (op, n) in ops {
            let args = vec!["Msg"; *n];
            sig.add_op(OpDecl::new(op, &args, "Msg")).unwrap();
        }
        sig
    }

    fn ed() -> Algebra {
        let sig = msg_sig(&[("e", 2), ("d", 2), ("a", 0), ("b", 0), ("k", 0)]);
        let mut th = EquationalTheory::new();
        th.add_equation(f2("d", v("X"), f2("e", v("X"), v("Z"))), v("Z")).unwrap();
        th.add_equation(f2("e", v("X"), f2("d", v("X"), v("Z"))), v("Z")).unwrap();
        Algebra::new(sig, th)
    }

    fn xor() -> Algebra {
        let sig = msg_sig(&[("⊕", 2), ("zero", 0), ("a", 0), ("b", 0), ("c", 0), ("f", 1)]);
        let mut th = EquationalTheory::new();
        th.declare("⊕", AxiomSet { assoc: true, comm: true, identity: Some(c("zero")) });
        th.add_equation(f2("⊕", v("X"), v("X")), c("zero")).unwrap();
        th.add_equation(f2("⊕", v("X"), f2("⊕", v("X"), v("Y"))), v("Y")).unwrap();
        Algebra::new(sig, th)
    }

    #[test]
    fn syntactic_basics() {
        let sig = msg_sig(&[("pk", 2), ("n", 2), ("f", 1), ("a", 0), ("b", 0)]);
        let s = syntactic_unify(&f2("pk", v("B"), v("N")), &f2("pk", c("b"), f2("n", c("a"), c("b"))), &sig);
        assert_eq!(s.len(), 1);
        let x = v("X");
        assert!(syntactic_unify(&x, &Term::app("f", vec![x.clone()]), &sig).is_empty());
        let name = Term::var("A", "Name");
        assert!(syntactic_unify(&name, &f2("pk", v("K"), v("M")), &sig).is_empty());
    }

    #[test]
    fn ed_csu_has_two_unifiers() {
        let alg = ed();
        let set = alg.unify(&f2("d", v("K"), v("X")), &v("Y"));
        assert!(set.complete);
        assert_eq!(set.len(), 2, "{:?}", set.unifiers.iter().map(|u| u.to_string()).collect::<Vec<_>>());
    }

    #[test]
    fn xor_solves_by_elimination() {
        let alg = xor();
        let set = xor_unify(&f2("⊕", v("X"), c("a")), &c("b"), &alg.sig, &alg.th);
        assert_eq!(set.len(), 1);
        assert_eq!(set.unifiers[0].get(&Var::new("X", "Msg")), Some(&f2("⊕", c("a"), c("b"))));
        let none = xor_unify(&f2("⊕", c("a"), c("b")), &c("zero"), &alg.sig, &alg.th);
        assert!(none.is_empty() && none.complete);
    }

    #[test]
    fn match_is_one_sided() {
        let alg = ed();
        let m = alg.match_modulo(&v("X"), &f2("e", v("X"), c("a")));
        assert_eq!(m.len(), 1);
        assert!(alg.match_modulo(&c("a"), &c("b")).is_empty());
    }
}
