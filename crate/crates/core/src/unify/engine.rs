//! Unification modulo the axioms: free symbols, commutativity and
//! exclusive-or. Rewrite rules are not used here; see `variants`.

use std::collections::BTreeSet;

use crate::term::{EquationalTheory, Signature, Sort, Substitution, Term, Var, VarGen};

use crate::term::{canonical, xor_sum};

use super::Budget;

pub(crate) struct Engine<'a> {
    pub sig: &'a Signature,
    pub th: &'a EquationalTheory,
    pub rigid: &'a BTreeSet<Var>,
    pub budget: &'a Budget,
    pub gen: VarGen,
    pub complete: bool,
    pub work: usize,
}

impl<'a> Engine<'a> {
    pub fn new(
        sig: &'a Signature,
        th: &'a EquationalTheory,
        rigid: &'a BTreeSet<Var>,
        budget: &'a Budget,
        gen: VarGen,
    ) -> Engine<'a> {
        Engine { sig, th, rigid, budget, gen, complete: true, work: 0 }
    }

    /// All most general solutions of the system `eqs` extending `sigma`.
    pub fn solve(&mut self, eqs: Vec<(Term, Term)>, sigma: Substitution) -> Vec<Substitution> {
        let mut out = Vec::new();
        self.go(eqs, sigma, &mut out);
        out
    }

    fn go(&mut self, mut eqs: Vec<(Term, Term)>, mut sigma: Substitution, out: &mut Vec<Substitution>) {
        self.work += 1;
        if self.work > self.budget.max_work || out.len() >= self.budget.max_unifiers {
            self.complete = false;
            return;
        }
        while let Some((l, r)) = eqs.pop() {
            let l = canonical(&sigma.apply(&l), self.th);
            let r = canonical(&sigma.apply(&r), self.th);
            if l == r {
                continue;
            }
            let xl = self.is_sum(&l);
            let xr = self.is_sum(&r);
            if xl || xr {
                self.solve_xor(l, r, eqs, sigma, out);
                return;
            }
            match (&l, &r) {
                (Term::Var(x), Term::Var(y)) => {
                    let fx = !self.rigid.contains(x);
                    let fy = !self.rigid.contains(y);
                    if !fx && !fy {
                        return;
                    }
                    if fx && fy && !self.sig.leq(&y.sort, &x.sort) && !self.sig.leq(&x.sort, &y.sort) {
                        // meet at every maximal common subsort
                        let lows = self.sig.glb(&x.sort, &y.sort);
                        for s in lows {
                            let z = Term::Var(self.gen.fresh(x.base(), &s));
                            let mut sg = sigma.clone();
                            if !self.bind(&mut sg, x, &z) || !self.bind(&mut sg, y, &z) {
                                continue;
                            }
                            self.go(eqs.clone(), sg, out);
                        }
                        return;
                    }
                    // bind the variable whose sort is larger
                    let (v, t) = if fy && (!fx || self.sig.leq(&x.sort, &y.sort)) {
                        (y, &l)
                    } else {
                        (x, &r)
                    };
                    if !self.bind(&mut sigma, v, t) {
                        return;
                    }
                }
                (Term::Var(x), _) if !self.rigid.contains(x) => {
                    if !self.bind(&mut sigma, x, &r) {
                        return;
                    }
                }
                (_, Term::Var(y)) if !self.rigid.contains(y) => {
                    if !self.bind(&mut sigma, y, &l) {
                        return;
                    }
                }
                (Term::App(a), Term::App(b)) => {
                    if a.op != b.op || a.args.len() != b.args.len() {
                        return;
                    }
                    let comm = self.th.is_comm(&a.op);
                    if comm && !self.th.is_assoc(&a.op) && a.args.len() == 2 {
                        let mut swapped = eqs.clone();
                        swapped.push((a.args[0].clone(), b.args[1].clone()));
                        swapped.push((a.args[1].clone(), b.args[0].clone()));
                        self.go(swapped, sigma.clone(), out);
                    } else if comm {
                        // associative-commutative symbols other than
                        // exclusive-or are compared argument by argument
                        self.complete = false;
                    }
                    for (s, t) in a.args.iter().zip(b.args.iter()) {
                        eqs.push((s.clone(), t.clone()));
                    }
                }
                _ => return,
            }
        }
        out.push(sigma.map_range(|t| canonical(t, self.th)));
    }

    fn is_sum(&self, t: &Term) -> bool {
        matches!((t.head(), self.th.xor_op()), (Some(h), Some(x)) if h == x)
    }

    /// Bind `v ↦ t` after occurs and sort checks, keeping `sigma`
    /// idempotent.
    fn bind(&mut self, sigma: &mut Substitution, v: &Var, t: &Term) -> bool {
        if self.rigid.contains(v) || t.occurs(v) {
            return false;
        }
        if !self.fits(t, &v.sort) {
            return false;
        }
        let one = Substitution::singleton(v.clone(), t.clone());
        *sigma = sigma.compose(&one).map_range(|u| canonical(u, self.th));
        true
    }

    fn fits(&self, t: &Term, s: &Sort) -> bool {
        match self.sig.least_sort(t) {
            Ok(ls) => self.sig.leq(&ls, s),
            Err(_) => false,
        }
    }

    /// Solve `l ⊕ r = 0` over the exclusive-or fragment.
    fn solve_xor(
        &mut self,
        l: Term,
        r: Term,
        eqs: Vec<(Term, Term)>,
        sigma: Substitution,
        out: &mut Vec<Substitution>,
    ) {
        let sum = xor_sum(vec![l, r], self.th);
        let parts = self.summands(&sum);
        if parts.is_empty() {
            self.go(eqs, sigma, out);
            return;
        }
        let xor_sort = self.xor_sort();
        // a variable that occurs once at top level and nowhere else can
        // absorb the rest of the sum
        let mut nested = false;
        for (i, p) in parts.iter().enumerate() {
            let Term::Var(v) = p else { continue };
            if self.rigid.contains(v) {
                continue;
            }
            let inside = parts.iter().enumerate().any(|(j, q)| j != i && !q.is_var() && q.occurs(v));
            if inside {
                if self.sig.leq(&xor_sort, &v.sort) {
                    nested = true;
                }
                continue;
            }
            let rest: Vec<Term> = parts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, q)| q.clone()).collect();
            let value = xor_sum(rest, self.th);
            if !self.fits(&value, &v.sort) {
                continue;
            }
            let mut sg = sigma;
            if self.bind(&mut sg, v, &value) {
                self.go(eqs, sg, out);
            }
            return;
        }
        if nested {
            // a sum could hide inside an alien subterm; beyond our scope
            self.complete = false;
        }
        // otherwise every summand stays an atom under any instance, so the
        // atoms must cancel in pairs
        if parts.len() % 2 == 1 {
            return;
        }
        self.pair_off(parts, eqs, sigma, out);
    }

    fn pair_off(&mut self, parts: Vec<Term>, eqs: Vec<(Term, Term)>, sigma: Substitution, out: &mut Vec<Substitution>) {
        if parts.is_empty() {
            self.go(eqs, sigma, out);
            return;
        }
        self.work += 1;
        if self.work > self.budget.max_work {
            self.complete = false;
            return;
        }
        let first = parts[0].clone();
        for j in 1..parts.len() {
            let mut rest = parts.clone();
            let partner = rest.remove(j);
            rest.remove(0);
            // solve the pair first, then the remaining atoms under it
            let pair_solutions = {
                let sub = vec![(first.clone(), partner.clone())];
                let mut tmp = Vec::new();
                self.go(sub, sigma.clone(), &mut tmp);
                tmp
            };
            for sg in pair_solutions {
                let remaining: Vec<Term> = rest.iter().map(|t| canonical(&sg.apply(t), self.th)).collect();
                let resum = xor_sum(remaining, self.th);
                if resum == self.zero() {
                    self.go(eqs.clone(), sg, out);
                } else {
                    let mut e2 = eqs.clone();
                    e2.push((resum, self.zero()));
                    self.go(e2, sg, out);
                }
            }
        }
    }

    fn summands(&self, t: &Term) -> Vec<Term> {
        if self.is_sum(t) {
            t.args().to_vec()
        } else if *t == self.zero() {
            Vec::new()
        } else {
            vec![t.clone()]
        }
    }

    fn zero(&self) -> Term {
        self.th.xor.as_ref().map(|x| x.zero.clone()).expect("exclusive-or theory")
    }

    fn xor_sort(&self) -> Sort {
        let op = self.th.xor_op().expect("exclusive-or theory");
        self.sig.op(op.as_str(), 2).map(|d| d.result.clone()).unwrap_or_else(Sort::msg)
    }
}
