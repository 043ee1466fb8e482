use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::term::{FreshConst, Sort, Substitution, Term, Var};
use crate::unify::Algebra;

use super::{Item, StrandInstance};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum FactKind {
    /// The intruder knows the message.
    Known,
    /// The intruder learns the message later on.
    ToLearn,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Fact {
    pub kind: FactKind,
    pub term: Term,
}

impl Fact {
    pub fn known(t: Term) -> Fact {
        Fact { kind: FactKind::Known, term: t }
    }
    pub fn to_learn(t: Term) -> Fact {
        Fact { kind: FactKind::ToLearn, term: t }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FactKind::Known => write!(f, "{} ∈ I", self.term),
            FactKind::ToLearn => write!(f, "{} ∉ I", self.term),
        }
    }
}

/// Strands, intruder facts and disequality constraints.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
pub struct SymbolicState {
    pub strands: Vec<StrandInstance>,
    pub facts: Vec<Fact>,
    pub diseqs: Vec<(Term, Term)>,
    pub depth: usize,
}

impl SymbolicState {
    pub fn new(strands: Vec<StrandInstance>, facts: Vec<Fact>, diseqs: Vec<(Term, Term)>) -> SymbolicState {
        SymbolicState { strands, facts, diseqs, depth: 0 }
    }

    /// All bars at the start and no positive knowledge.
    pub fn is_initial(&self) -> bool {
        self.strands.iter().all(|s| s.bar == 0) && self.facts.iter().all(|f| f.kind == FactKind::ToLearn)
    }

    pub fn apply(&self, s: &Substitution) -> SymbolicState {
        self.map_terms(|t| s.apply(t))
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> SymbolicState {
        SymbolicState {
            strands: self.strands.iter().map(|s| s.map_terms(&mut f)).collect(),
            facts: self.facts.iter().map(|x| Fact { kind: x.kind, term: f(&x.term) }).collect(),
            diseqs: self.diseqs.iter().map(|(a, b)| (f(a), f(b))).collect(),
            depth: self.depth,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for s in &self.strands {
            s.collect_vars(&mut out);
        }
        for f in &self.facts {
            f.term.collect_vars(&mut out);
        }
        for (a, b) in &self.diseqs {
            a.collect_vars(&mut out);
            b.collect_vars(&mut out);
        }
        out
    }

    pub fn fresh_consts(&self) -> BTreeSet<FreshConst> {
        let mut out = BTreeSet::new();
        for s in &self.strands {
            s.collect_fresh(&mut out);
        }
        for f in &self.facts {
            f.term.collect_fresh(&mut out);
        }
        for (a, b) in &self.diseqs {
            a.collect_fresh(&mut out);
            b.collect_fresh(&mut out);
        }
        out
    }

    /// First unused strand number for minting fresh constants.
    pub fn next_fresh_id(&self) -> u32 {
        self.fresh_consts().iter().map(|c| c.strand + 1).max().unwrap_or(0)
    }

    /// Normalize every term, sort and deduplicate. `None` when the state is
    /// dead: a disequality became an equality, or a message is both known
    /// and still to be learned.
    pub fn canonicalize(&self, alg: &Algebra) -> Option<SymbolicState> {
        let mut failed = false;
        let mut norm = |t: &Term| match alg.normalize(t) {
            Ok(n) => n,
            Err(_) => {
                failed = true;
                t.clone()
            }
        };
        let mut st = self.map_terms(&mut norm);
        if failed {
            return None;
        }
        st.strands.sort();
        st.strands.dedup();
        st.facts.sort();
        st.facts.dedup();
        let known: BTreeSet<&Term> = st.facts.iter().filter(|f| f.kind == FactKind::Known).map(|f| &f.term).collect();
        if st.facts.iter().any(|f| f.kind == FactKind::ToLearn && known.contains(&f.term)) {
            return None;
        }
        let mut ds = Vec::with_capacity(st.diseqs.len());
        for (a, b) in st.diseqs {
            if a == b {
                return None;
            }
            if a.is_ground() && b.is_ground() {
                continue;
            }
            ds.push(if a <= b { (a, b) } else { (b, a) });
        }
        ds.sort();
        ds.dedup();
        st.diseqs = ds;
        Some(st)
    }

    pub fn strand_count(&self) -> usize {
        self.strands.len()
    }

    /// Fresh constants listed by a strand, mapped to the strand's index.
    pub fn owners(&self) -> BTreeMap<FreshConst, usize> {
        let mut out = BTreeMap::new();
        for (i, s) in self.strands.iter().enumerate() {
            for c in &s.fresh {
                out.insert(*c, i);
            }
        }
        out
    }
}

impl fmt::Display for SymbolicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.strands {
            writeln!(f, "{s} &")?;
        }
        let facts: Vec<String> = self.facts.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", facts.join(", "))?;
        if !self.diseqs.is_empty() {
            let ds: Vec<String> = self.diseqs.iter().map(|(a, b)| format!("{a} != {b}")).collect();
            write!(f, " & ({})", ds.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(m: impl Into<String>) -> Diagnostic {
        Diagnostic { severity: Severity::Error, message: m.into() }
    }
    pub fn warning(m: impl Into<String>) -> Diagnostic {
        Diagnostic { severity: Severity::Warning, message: m.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{s}: {}", self.message)
    }
}

/// Violations of the state invariants.
pub fn check_wellformed(st: &SymbolicState, alg: &Algebra) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let msg = Sort::msg();
    let param = Sort::new("Param");
    let has_param = alg.sig.has_sort(&param);
    let fits_channel = |t: &Term| match alg.sig.least_sort(t) {
        Ok(s) => alg.sig.leq(&s, &msg) || (has_param && alg.sig.leq(&s, &param)),
        Err(_) => false,
    };
    let mut owner: BTreeMap<FreshConst, usize> = BTreeMap::new();
    for (i, s) in st.strands.iter().enumerate() {
        if s.bar > s.items.len() {
            out.push(Diagnostic::error(format!("strand {i} ({}) has bar {} past its {} items", s.role, s.bar, s.items.len())));
        }
        for it in &s.items {
            match it {
                Item::Msg(m) if !fits_channel(&m.term) => {
                    out.push(Diagnostic::error(format!("strand {i} ({}): {} is not a message", s.role, m.term)));
                }
                _ => {
                    for t in it.terms() {
                        if let Err(e) = alg.sig.least_sort(t) {
                            out.push(Diagnostic::error(format!("strand {i} ({}): {e}", s.role)));
                        }
                    }
                }
            }
        }
        for c in &s.fresh {
            if let Some(j) = owner.insert(*c, i) {
                out.push(Diagnostic::error(format!("fresh constant {c} is owned by strands {j} and {i}")));
            }
        }
    }
    for f in &st.facts {
        if !fits_channel(&f.term) {
            out.push(Diagnostic::error(format!("fact {f} is not a message")));
        }
    }
    for (i, f) in st.facts.iter().enumerate() {
        for g in &st.facts[i + 1..] {
            if f.kind != g.kind && alg.equal(&f.term, &g.term) {
                out.push(Diagnostic::error(format!("{} is both known and still to be learned", f.term)));
            }
        }
    }
    for (a, b) in &st.diseqs {
        if alg.equal(a, b) {
            out.push(Diagnostic::error(format!("disequality {a} != {b} is violated")));
        }
    }
    out
}
