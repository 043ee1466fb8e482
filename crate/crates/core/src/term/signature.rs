use std::collections::{BTreeMap, BTreeSet};

use super::{Position, Sort, Substitution, Sym, Term, TermError, FRESH, MSG};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct OpDecl {
    pub name: Sym,
    pub args: Vec<Sort>,
    pub result: Sort,
}

impl OpDecl {
    pub fn new(name: &str, args: &[&str], result: &str) -> OpDecl {
        OpDecl {
            name: Sym::new(name),
            args: args.iter().map(|s| Sort::new(s)).collect(),
            result: Sort::new(result),
        }
    }
}

/// Order-sorted signature. Operators are keyed by name and arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    sorts: BTreeSet<Sort>,
    subsorts: BTreeSet<(Sort, Sort)>,
    ops: BTreeMap<(Sym, usize), OpDecl>,
    /// Reflexive-transitive upward closure.
    above: BTreeMap<Sort, BTreeSet<Sort>>,
}

impl Default for Signature {
    fn default() -> Self {
        Signature::new()
    }
}

impl Signature {
    pub fn new() -> Signature {
        let mut sig = Signature {
            sorts: BTreeSet::new(),
            subsorts: BTreeSet::new(),
            ops: BTreeMap::new(),
            above: BTreeMap::new(),
        };
        sig.add_sort(MSG);
        sig.add_sort(FRESH);
        sig
    }

    pub fn add_sort(&mut self, name: &str) {
        let s = Sort::new(name);
        if self.sorts.insert(s.clone()) {
            self.above.insert(s.clone(), BTreeSet::from([s]));
        }
    }

    pub fn has_sort(&self, s: &Sort) -> bool {
        self.sorts.contains(s)
    }

    pub fn sorts(&self) -> impl Iterator<Item = &Sort> {
        self.sorts.iter()
    }

    pub fn subsort_pairs(&self) -> impl Iterator<Item = &(Sort, Sort)> {
        self.subsorts.iter()
    }

    pub fn ops(&self) -> impl Iterator<Item = &OpDecl> {
        self.ops.values()
    }

    pub fn add_subsort(&mut self, sub: &str, sup: &str) -> Result<(), TermError> {
        let (a, b) = (Sort::new(sub), Sort::new(sup));
        for s in [&a, &b] {
            if !self.sorts.contains(s) {
                return Err(TermError::UndeclaredSort(s.to_string()));
            }
        }
        if a != b && self.leq(&b, &a) {
            return Err(TermError::SubsortCycle(format!("{a} < {b}")));
        }
        if a == b {
            return Err(TermError::SubsortCycle(format!("{a} < {a}")));
        }
        self.subsorts.insert((a, b));
        self.recompute_closure();
        Ok(())
    }

    fn recompute_closure(&mut self) {
        let mut above: BTreeMap<Sort, BTreeSet<Sort>> =
            self.sorts.iter().map(|s| (s.clone(), BTreeSet::from([s.clone()]))).collect();
        loop {
            let mut changed = false;
            for (a, b) in &self.subsorts {
                let ups: Vec<Sort> = above[b].iter().cloned().collect();
                let set = above.get_mut(a).expect("declared sort");
                for u in ups {
                    changed |= set.insert(u);
                }
            }
            if !changed {
                break;
            }
        }
        self.above = above;
    }

    pub fn add_op(&mut self, decl: OpDecl) -> Result<(), TermError> {
        for s in decl.args.iter().chain(std::iter::once(&decl.result)) {
            if !self.sorts.contains(s) {
                return Err(TermError::UndeclaredSort(s.to_string()));
            }
        }
        let key = (decl.name.clone(), decl.args.len());
        match self.ops.get(&key) {
            Some(old) if *old != decl => Err(TermError::OperatorClash(decl.name.to_string())),
            _ => {
                self.ops.insert(key, decl);
                Ok(())
            }
        }
    }

    pub fn op(&self, name: &str, arity: usize) -> Option<&OpDecl> {
        self.ops.get(&(Sym::new(name), arity))
    }

    pub fn has_op_named(&self, name: &str) -> bool {
        self.ops.keys().any(|(n, _)| n.as_str() == name)
    }

    /// `a ≤ b` in the subsort order.
    pub fn leq(&self, a: &Sort, b: &Sort) -> bool {
        a == b || self.above.get(a).is_some_and(|s| s.contains(b))
    }

    /// Maximal common lower bounds of `a` and `b`.
    pub fn glb(&self, a: &Sort, b: &Sort) -> Vec<Sort> {
        let common: Vec<&Sort> =
            self.sorts.iter().filter(|c| self.leq(c, a) && self.leq(c, b)).collect();
        common
            .iter()
            .filter(|c| !common.iter().any(|d| d != *c && self.leq(c, d)))
            .map(|c| (*c).clone())
            .collect()
    }

    /// Least sort of a sort-correct term.
    pub fn least_sort(&self, t: &Term) -> Result<Sort, TermError> {
        match t {
            Term::Var(v) => Ok(v.sort.clone()),
            Term::Fresh(_) => Ok(Sort::fresh()),
            Term::App(a) => {
                let n = a.args.len();
                let decl = match self.ops.get(&(a.op.clone(), n)) {
                    Some(d) => d,
                    // flattened associative operators keep their binary profile
                    None if n > 2 => match self.ops.get(&(a.op.clone(), 2)) {
                        Some(d) if d.args[0] == d.args[1] => d,
                        _ => return Err(TermError::UnknownOperator(format!("{}/{}", a.op, n))),
                    },
                    None => return Err(TermError::UnknownOperator(format!("{}/{}", a.op, n))),
                };
                for (i, arg) in a.args.iter().enumerate() {
                    let want = &decl.args[i.min(decl.args.len() - 1)];
                    let got = self.least_sort(arg)?;
                    if !self.leq(&got, want) {
                        return Err(TermError::IllTyped(format!(
                            "argument {} of {} has sort {got}, expected {want}",
                            i + 1,
                            a.op
                        )));
                    }
                }
                Ok(decl.result.clone())
            }
        }
    }

    /// Is `t` well sorted with least sort at most `s`?
    pub fn fits(&self, t: &Term, s: &Sort) -> bool {
        self.least_sort(t).is_ok_and(|ls| self.leq(&ls, s))
    }

    /// Sort-checked replacement.
    pub fn replace_at(&self, t: &Term, p: &Position, u: Term) -> Result<Term, TermError> {
        let old = t.subterm_at(p)?;
        let want = self.least_sort(old)?;
        let got = self.least_sort(&u)?;
        let out = t.replace_at(p, u)?;
        if self.least_sort(&out).is_err() {
            return Err(TermError::SortClash(format!("{got} does not fit where {want} is expected")));
        }
        Ok(out)
    }

    /// Every binding maps a variable to a term of smaller or equal sort.
    pub fn check_subst(&self, s: &Substitution) -> Result<(), TermError> {
        for (v, t) in s.iter() {
            let ls = self.least_sort(t)?;
            if !self.leq(&ls, &v.sort) {
                return Err(TermError::SortClash(format!("{v}:{} bound to {t}:{ls}", v.sort)));
            }
        }
        Ok(())
    }

    /// Sorts that have at least one ground term. `Fresh` is inhabited by
    /// minted constants.
    pub fn inhabited_sorts(&self) -> BTreeSet<Sort> {
        let mut inh: BTreeSet<Sort> = BTreeSet::from([Sort::fresh()]);
        loop {
            let mut changed = false;
            for d in self.ops.values() {
                let ok = d.args.iter().all(|a| inh.iter().any(|s| self.leq(s, a)));
                if ok {
                    for up in self.above[&d.result].iter() {
                        changed |= inh.insert(up.clone());
                    }
                }
            }
            let snapshot: Vec<Sort> = inh.iter().cloned().collect();
            for s in snapshot {
                for up in self.above[&s].iter() {
                    changed |= inh.insert(up.clone());
                }
            }
            if !changed {
                return inh;
            }
        }
    }

    /// Connected components of the sort poset that contain no inhabited
    /// sort.
    pub fn check_emptiness(&self) -> Result<(), TermError> {
        let inh = self.inhabited_sorts();
        let mut seen: BTreeSet<Sort> = BTreeSet::new();
        let mut bad = Vec::new();
        for s in &self.sorts {
            if seen.contains(s) {
                continue;
            }
            let mut comp = BTreeSet::from([s.clone()]);
            let mut stack = vec![s.clone()];
            while let Some(c) = stack.pop() {
                for (a, b) in &self.subsorts {
                    for (x, y) in [(a, b), (b, a)] {
                        if *x == c && comp.insert(y.clone()) {
                            stack.push(y.clone());
                        }
                    }
                }
            }
            if !comp.iter().any(|c| inh.contains(c)) {
                bad.push(comp.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("/"));
            }
            seen.extend(comp);
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(TermError::EmptySorts(bad.join(", ")))
        }
    }

    /// Union of two signatures; an operator declared in both with different
    /// profiles is an error.
    pub fn merge(&self, other: &Signature) -> Result<Signature, TermError> {
        let mut out = self.clone();
        for s in &other.sorts {
            out.add_sort(s.as_str());
        }
        for (a, b) in &other.subsorts {
            if !out.subsorts.contains(&(a.clone(), b.clone())) {
                out.add_subsort(a.as_str(), b.as_str())?;
            }
        }
        for d in other.ops.values() {
            out.add_op(d.clone())?;
        }
        Ok(out)
    }

    /// Constants (nullary operators) whose result sort is at most `s`.
    pub fn constants_of(&self, s: &Sort) -> Vec<&OpDecl> {
        self.ops.values().filter(|d| d.args.is_empty() && self.leq(&d.result, s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nsl_sig() -> Signature {
        let mut sig = Signature::new();
        sig.add_sort("Name");
        sig.add_sort("Nonce");
        sig.add_subsort("Name", "Msg").unwrap();
        sig.add_subsort("Nonce", "Msg").unwrap();
        sig.add_op(OpDecl::new("n", &["Name", "Fresh"], "Nonce")).unwrap();
        sig.add_op(OpDecl::new("pk", &["Name", "Msg"], "Msg")).unwrap();
        sig.add_op(OpDecl::new("a", &[], "Name")).unwrap();
        sig.add_op(OpDecl::new("b", &[], "Name")).unwrap();
        sig
    }

    #[test]
    fn least_sorts() {
        let sig = nsl_sig();
        assert_eq!(sig.least_sort(&Term::var("A", "Name")).unwrap(), Sort::new("Name"));
        let na = Term::app("n", vec![Term::constant("a"), Term::fresh(1, 0)]);
        assert_eq!(sig.least_sort(&na).unwrap(), Sort::new("Nonce"));
        let t = Term::app("pk", vec![Term::constant("b"), na]);
        assert_eq!(sig.least_sort(&t).unwrap(), Sort::msg());
        let bad = Term::app("pk", vec![Term::var("X", "Msg"), Term::constant("a")]);
        assert!(matches!(sig.least_sort(&bad), Err(TermError::IllTyped(_))));
    }

    #[test]
    fn cycles_are_rejected() {
        let mut sig = nsl_sig();
        assert!(matches!(sig.add_subsort("Msg", "Name"), Err(TermError::SubsortCycle(_))));
    }

    #[test]
    fn op_clash() {
        let mut sig = nsl_sig();
        assert!(sig.add_op(OpDecl::new("pk", &["Name", "Msg"], "Msg")).is_ok());
        assert!(matches!(
            sig.add_op(OpDecl::new("pk", &["Msg", "Msg"], "Msg")),
            Err(TermError::OperatorClash(_))
        ));
    }

    #[test]
    fn emptiness() {
        let mut sig = nsl_sig();
        assert!(sig.check_emptiness().is_ok());
        sig.add_sort("Ghost");
        sig.add_op(OpDecl::new("g", &["Ghost"], "Ghost")).unwrap();
        assert!(matches!(sig.check_emptiness(), Err(TermError::EmptySorts(_))));
    }

    #[test]
    fn glb_of_unrelated_sorts() {
        let sig = nsl_sig();
        assert_eq!(sig.glb(&Sort::new("Name"), &Sort::msg()), vec![Sort::new("Name")]);
        assert!(sig.glb(&Sort::new("Name"), &Sort::new("Nonce")).is_empty());
    }
}
