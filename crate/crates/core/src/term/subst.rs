use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Signature, Sort, Sym, Term, TermError, Var};

/// Finite map from variables to terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Substitution(BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Substitution {
        Substitution(BTreeMap::new())
    }

    pub fn singleton(v: Var, t: Term) -> Substitution {
        let mut s = Substitution::new();
        s.insert(v, t);
        s
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Substitution {
        Substitution(pairs.into_iter().collect())
    }

    /// Raw insert; the caller keeps the map idempotent.
    pub fn insert(&mut self, v: Var, t: Term) {
        if t.as_var() == Some(&v) {
            self.0.remove(&v);
        } else {
            self.0.insert(v, t);
        }
    }

    pub fn remove(&mut self, v: &Var) -> Option<Term> {
        self.0.remove(v)
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.0.contains_key(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    /// Variables occurring in the range.
    pub fn range_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for t in self.0.values() {
            t.collect_vars(&mut out);
        }
        out
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.0.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| self.0.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone())))
    }

    /// `self` followed by `other`: `x(self.compose(other)) = (x self) other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = BTreeMap::new();
        for (v, t) in &self.0 {
            let u = other.apply(t);
            if u.as_var() != Some(v) {
                out.insert(v.clone(), u);
            }
        }
        for (v, t) in &other.0 {
            if !self.0.contains_key(v) {
                out.insert(v.clone(), t.clone());
            }
        }
        Substitution(out)
    }

    /// Keep only bindings for the given variables.
    pub fn restrict(&self, vars: &BTreeSet<Var>) -> Substitution {
        Substitution(
            self.0.iter().filter(|(v, _)| vars.contains(v)).map(|(v, t)| (v.clone(), t.clone())).collect(),
        )
    }

    pub fn map_range(&self, mut f: impl FnMut(&Term) -> Term) -> Substitution {
        Substitution(self.0.iter().map(|(v, t)| (v.clone(), f(t))).collect())
    }

    pub fn is_idempotent(&self) -> bool {
        let rv = self.range_vars();
        self.0.keys().all(|v| !rv.contains(v))
    }

    /// Is this a bijective variable-to-variable renaming?
    pub fn is_renaming(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0.values().all(|t| matches!(t, Term::Var(w) if seen.insert(w.clone())))
    }
}

impl serde::Serialize for Substitution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl<'de> serde::Deserialize<'de> for Substitution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Substitution, D::Error> {
        let pairs = Vec::<(Var, Term)>::deserialize(d)?;
        Ok(Substitution::from_pairs(pairs))
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} ↦ {t}")?;
        }
        write!(f, "}}")
    }
}

/// Composition with a sort check on every resulting binding.
pub fn compose_sorted(
    sig: &Signature,
    s1: &Substitution,
    s2: &Substitution,
) -> Result<Substitution, TermError> {
    let out = s1.compose(s2);
    sig.check_subst(&out)?;
    Ok(out)
}

/// Generator of variable names that avoid a set of used names. New names
/// have the form `base#k` with the smallest free `k`.
#[derive(Clone, Debug, Default)]
pub struct VarGen {
    used: BTreeSet<Sym>,
}

impl VarGen {
    pub fn new() -> VarGen {
        VarGen::default()
    }

    pub fn avoiding(names: impl IntoIterator<Item = Sym>) -> VarGen {
        VarGen { used: names.into_iter().collect() }
    }

    pub fn reserve(&mut self, name: Sym) {
        self.used.insert(name);
    }

    pub fn reserve_vars<'a>(&mut self, vars: impl IntoIterator<Item = &'a Var>) {
        for v in vars {
            self.used.insert(v.name.clone());
        }
    }

    pub fn fresh(&mut self, base: &str, sort: &Sort) -> Var {
        let base = match base.find('#') {
            Some(i) if i > 0 => &base[..i],
            _ => base,
        };
        let mut k = 1usize;
        loop {
            let name = Sym::new(&format!("{base}#{k}"));
            if !self.used.contains(&name) {
                self.used.insert(name.clone());
                return Var { name, sort: sort.clone() };
            }
            k += 1;
        }
    }

    /// Renaming of `vars` onto names not yet used.
    pub fn renaming<'a>(&mut self, vars: impl IntoIterator<Item = &'a Var>) -> Substitution {
        let mut s = Substitution::new();
        for v in vars {
            if !s.contains(v) {
                let w = self.fresh(v.base(), &v.sort);
                s.insert(v.clone(), Term::Var(w));
            }
        }
        s
    }
}

/// Rename every variable of `terms` to a name outside `reserved` and outside
/// the terms' own variables.
pub fn rename_apart(terms: &[Term], reserved: &BTreeSet<Sym>) -> (Vec<Term>, Substitution) {
    let mut vars = BTreeSet::new();
    for t in terms {
        t.collect_vars(&mut vars);
    }
    let mut gen = VarGen::avoiding(reserved.iter().cloned());
    gen.reserve_vars(vars.iter());
    let ren = gen.renaming(vars.iter());
    (terms.iter().map(|t| ren.apply(t)).collect(), ren)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Var {
        Var::new("X", "Msg")
    }
    fn y() -> Var {
        Var::new("Y", "Msg")
    }

    #[test]
    fn apply_leaves_fresh_constants() {
        let s = Substitution::singleton(x(), Term::constant("a"));
        assert_eq!(s.apply(&Term::fresh(1, 0)), Term::fresh(1, 0));
        assert_eq!(Substitution::new().apply(&Term::var("X", "Msg")), Term::var("X", "Msg"));
    }

    #[test]
    fn compose_chains() {
        let s1 = Substitution::singleton(x(), Term::Var(y()));
        let s2 = Substitution::singleton(y(), Term::constant("a"));
        let c = s1.compose(&s2);
        assert_eq!(c.get(&x()), Some(&Term::constant("a")));
        assert_eq!(c.get(&y()), Some(&Term::constant("a")));
        assert_eq!(Substitution::new().compose(&s2), s2);
    }

    #[test]
    fn compose_homomorphic() {
        let z = Term::var("Z", "Msg");
        let s1 = Substitution::singleton(x(), Term::app("f", vec![Term::Var(y())]));
        let s2 = Substitution::singleton(y(), Term::app("g", vec![z.clone()]));
        let c = s1.compose(&s2);
        assert_eq!(c.get(&x()), Some(&Term::app("f", vec![Term::app("g", vec![z.clone()])])));
        assert_eq!(c.get(&y()), Some(&Term::app("g", vec![z])));
    }

    #[test]
    fn rename_apart_suffixes() {
        let t = Term::app("pk", vec![Term::var("B", "Name"), Term::var("NA", "Nonce")]);
        let (out, ren) = rename_apart(&[t], &BTreeSet::from([Sym::new("B")]));
        assert_eq!(out[0].to_string(), "pk(B#1, NA#1)");
        assert!(ren.is_renaming());
        let g = Term::constant("a");
        let (out, ren) = rename_apart(&[g.clone()], &BTreeSet::from([Sym::new("B")]));
        assert_eq!(out[0], g);
        assert!(ren.is_empty());
    }
}
