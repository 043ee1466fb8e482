use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::term::{FreshConst, Substitution, Sym, Term, Var, VarGen};

use super::{Item, StrandSchema};

/// A strand in a state: its items and the bar. Items before the bar are the
/// past.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct StrandInstance {
    pub role: Sym,
    pub items: Vec<Item>,
    pub bar: usize,
    pub fresh: Vec<FreshConst>,
}

impl StrandInstance {
    pub fn past(&self) -> &[Item] {
        &self.items[..self.bar]
    }

    pub fn future(&self) -> &[Item] {
        &self.items[self.bar..]
    }

    pub fn is_done(&self) -> bool {
        self.bar == self.items.len()
    }

    /// Item just before the bar.
    pub fn last_past(&self) -> Option<&Item> {
        self.bar.checked_sub(1).map(|i| &self.items[i])
    }

    /// Item just after the bar.
    pub fn next(&self) -> Option<&Item> {
        self.items.get(self.bar)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        for it in &self.items {
            for t in it.terms() {
                t.collect_vars(out);
            }
        }
    }

    pub fn collect_fresh(&self, out: &mut BTreeSet<FreshConst>) {
        out.extend(self.fresh.iter().copied());
        for it in &self.items {
            for t in it.terms() {
                t.collect_fresh(out);
            }
        }
    }

    pub fn apply(&self, s: &Substitution) -> StrandInstance {
        self.map_terms(|t| s.apply(t))
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> StrandInstance {
        StrandInstance {
            role: self.role.clone(),
            items: self.items.iter().map(|i| i.map_terms(&mut f)).collect(),
            bar: self.bar,
            fresh: self.fresh.clone(),
        }
    }

    pub fn with_bar(&self, bar: usize) -> StrandInstance {
        StrandInstance { bar, ..self.clone() }
    }
}

/// Instantiate `schema`: fresh variables become new constants numbered from
/// `next_id`, the other variables are renamed through `gen`.
pub fn instantiate(schema: &StrandSchema, next_id: &mut u32, gen: &mut VarGen, bar: usize) -> StrandInstance {
    let id = *next_id;
    let mut s = Substitution::new();
    let mut fresh = Vec::new();
    if !schema.fresh.is_empty() {
        *next_id += 1;
    }
    for (i, v) in schema.fresh.iter().enumerate() {
        let c = FreshConst { strand: id, index: i as u32 };
        fresh.push(c);
        s.insert(v.clone(), Term::Fresh(c));
    }
    let others: Vec<Var> = schema.vars().into_iter().filter(|v| !schema.fresh.contains(v)).collect();
    let ren = gen.renaming(others.iter());
    let s = s.compose(&ren);
    StrandInstance {
        role: schema.role.clone(),
        items: schema.items.iter().map(|i| i.apply(&s)).collect(),
        bar: bar.min(schema.items.len()),
        fresh,
    }
}

impl fmt::Display for StrandInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) ", self.role)?;
        if !self.fresh.is_empty() {
            let fr: Vec<String> = self.fresh.iter().map(|c| c.to_string()).collect();
            write!(f, ":: {} :: ", fr.join(", "))?;
        }
        let past: Vec<String> = self.past().iter().map(|i| i.to_string()).collect();
        let fut: Vec<String> = self.future().iter().map(|i| i.to_string()).collect();
        write!(f, "[nil")?;
        for p in &past {
            write!(f, ", {p}")?;
        }
        write!(f, " | ")?;
        for (i, p) in fut.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        if fut.is_empty() {
            write!(f, "nil")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn init_schema() -> StrandSchema {
        let (a, b, r) = (Term::var("A", "Name"), Term::var("B", "Name"), Var::new("r", "Fresh"));
        let na = Term::app("n", vec![a.clone(), Term::Var(r.clone())]);
        StrandSchema {
            role: Sym::new("NSL.init"),
            fresh: vec![r],
            items: vec![Item::send(Term::app("pk", vec![b, Term::app(";", vec![na, a])]))],
            intruder: false,
        }
    }

    #[test]
    fn instantiation_mints_distinct_constants() {
        let sch = init_schema();
        let mut next = 5;
        let mut gen = VarGen::new();
        let i1 = instantiate(&sch, &mut next, &mut gen, 0);
        let i2 = instantiate(&sch, &mut next, &mut gen, 0);
        assert_eq!(i1.fresh, vec![FreshConst { strand: 5, index: 0 }]);
        assert_eq!(i2.fresh, vec![FreshConst { strand: 6, index: 0 }]);
        assert!(i1.vars().is_disjoint(&i2.vars()));
        assert_eq!(i1.to_string(), "(NSL.init) :: @5.0 :: [nil | +(pk(B#1, n(A#1, @5.0) ; A#1))]");
    }
}
