use std::collections::{BTreeSet, HashMap};

use crate::dsl::AttackPattern;
use crate::semantics::Model;
use crate::strand::{Fact, FactKind, Item, StrandInstance, SymbolicState};
use crate::term::{FreshConst, Sort, Substitution, Term, Var};
use crate::unify::Algebra;

use super::bfs::pattern_state;
use super::SearchError;

/// Multiset of role, bar and length over the strands of a state.
pub(crate) fn signature(st: &SymbolicState) -> String {
    let mut parts: Vec<String> = st.strands.iter().map(|s| format!("{}|{}|{}", s.role, s.bar, s.items.len())).collect();
    parts.sort();
    parts.join(" ")
}

fn fresh_var(c: &FreshConst) -> Var {
    Var::new(&format!("#f{}_{}", c.strand, c.index), Sort::fresh().as_str())
}

/// A general state with its fresh constants turned into variables, so a
/// matcher may rename them.
#[derive(Clone, Debug)]
pub(crate) struct Opened {
    state: SymbolicState,
    fresh: Vec<Var>,
}

fn open(st: &SymbolicState) -> Opened {
    let fresh: Vec<Var> = st.fresh_consts().iter().map(fresh_var).collect();
    let state = st.map_terms(|t| t.map_fresh(&mut |c| Term::Var(fresh_var(&c))));
    Opened { state, fresh }
}

/// Term pairs two items contribute, if their shapes agree.
fn item_pairs(g: &Item, s: &Item) -> Option<Vec<(Term, Term)>> {
    match (g, s) {
        (Item::Msg(a), Item::Msg(b)) if a.dir == b.dir => Some(vec![(a.term.clone(), b.term.clone())]),
        (Item::Params(a), Item::Params(b)) if a.side == b.side && a.terms.len() == b.terms.len() => {
            Some(a.terms.iter().cloned().zip(b.terms.iter().cloned()).collect())
        }
        (Item::Sync(a), Item::Sync(b))
            if a.side == b.side
                && a.parents == b.parents
                && a.children == b.children
                && a.mode == b.mode
                && a.payload.len() == b.payload.len() =>
        {
            Some(a.payload.iter().cloned().zip(b.payload.iter().cloned()).collect())
        }
        _ => None,
    }
}

fn strand_pairs(g: &StrandInstance, s: &StrandInstance) -> Option<Vec<(Term, Term)>> {
    if g.role != s.role || g.items.len() != s.items.len() || g.fresh.len() != s.fresh.len() {
        return None;
    }
    let mut out: Vec<(Term, Term)> = g.fresh.iter().zip(&s.fresh).map(|(a, b)| (Term::Var(fresh_var(a)), Term::Fresh(*b))).collect();
    for (a, b) in g.items.iter().zip(&s.items) {
        out.extend(item_pairs(a, b)?);
    }
    Some(out)
}

/// How a general state may sit inside a specific one.
struct Rules<'a> {
    /// Every specific strand must be covered.
    bijective: bool,
    /// May general strand `g` map to specific strand `s`?
    strand_ok: &'a dyn Fn(&StrandInstance, &StrandInstance) -> bool,
    /// Specific facts a general fact may map to.
    fact_targets: &'a dyn Fn(&Fact) -> Vec<Term>,
    /// Final check on a complete matcher.
    accept: &'a dyn Fn(&Substitution) -> bool,
}

struct Matcher<'a> {
    alg: &'a Algebra,
    g: &'a SymbolicState,
    s: &'a SymbolicState,
    rules: Rules<'a>,
    facts: Vec<(usize, Vec<Term>)>,
}

impl Matcher<'_> {
    fn feasible(&self, pairs: &[(Term, Term)]) -> bool {
        pairs.is_empty() || !self.alg.match_eqs(pairs).is_empty()
    }

    fn strands(&self, i: usize, used: &mut Vec<bool>, pairs: &mut Vec<(Term, Term)>) -> bool {
        if i == self.g.strands.len() {
            return self.facts(0, pairs);
        }
        let g = &self.g.strands[i];
        for (j, s) in self.s.strands.iter().enumerate() {
            if used[j] || !(self.rules.strand_ok)(g, s) {
                continue;
            }
            let Some(extra) = strand_pairs(g, s) else { continue };
            let mark = pairs.len();
            pairs.extend(extra);
            if self.feasible(pairs) {
                used[j] = true;
                if self.strands(i + 1, used, pairs) {
                    return true;
                }
                used[j] = false;
            }
            pairs.truncate(mark);
        }
        false
    }

    fn facts(&self, k: usize, pairs: &mut Vec<(Term, Term)>) -> bool {
        if k == self.facts.len() {
            let set = if pairs.is_empty() {
                vec![Substitution::new()]
            } else {
                self.alg.match_eqs(pairs).unifiers
            };
            return set.iter().any(|u| (self.rules.accept)(u));
        }
        let (gi, targets) = &self.facts[k];
        let g = &self.g.facts[*gi].term;
        for t in targets {
            pairs.push((g.clone(), t.clone()));
            if self.feasible(pairs) && self.facts(k + 1, pairs) {
                return true;
            }
            pairs.pop();
        }
        false
    }

    fn run(mut self) -> bool {
        if self.rules.bijective && self.g.strands.len() != self.s.strands.len() {
            return false;
        }
        let mut facts = Vec::new();
        for (i, f) in self.g.facts.iter().enumerate() {
            let ts = (self.rules.fact_targets)(f);
            if ts.is_empty() {
                return false;
            }
            facts.push((i, ts));
        }
        // fewest choices first
        facts.sort_by_key(|(_, ts)| ts.len());
        self.facts = facts;
        let mut used = vec![false; self.s.strands.len()];
        self.strands(0, &mut used, &mut Vec::new())
    }
}

/// Fresh variables of an opened state must go to pairwise distinct fresh
/// constants.
fn fresh_injective(u: &Substitution, fresh: &[Var]) -> bool {
    let mut seen = BTreeSet::new();
    fresh.iter().all(|v| match u.get(v) {
        Some(Term::Fresh(c)) => seen.insert(*c),
        // unconstrained: may take any unused constant
        None => true,
        Some(_) => false,
    })
}

fn ordered(a: Term, b: Term) -> (Term, Term) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Is `specific` an instance of `general`: same strands up to a matcher
/// modulo the axioms, the general facts among the specific ones, fresh
/// constants renamed injectively and the general disequalities implied?
pub fn instance_of(alg: &Algebra, general: &SymbolicState, specific: &SymbolicState) -> bool {
    let o = open(general);
    instance_of_opened(alg, &o, specific)
}

fn instance_of_opened(alg: &Algebra, o: &Opened, specific: &SymbolicState) -> bool {
    let g = &o.state;
    if g.facts.len() > specific.facts.len() {
        return false;
    }
    let strand_ok = |a: &StrandInstance, b: &StrandInstance| a.bar == b.bar;
    let fact_targets = |f: &Fact| -> Vec<Term> {
        specific.facts.iter().filter(|x| x.kind == f.kind).map(|x| x.term.clone()).collect()
    };
    let sd: BTreeSet<&(Term, Term)> = specific.diseqs.iter().collect();
    let accept = |u: &Substitution| {
        fresh_injective(u, &o.fresh)
            && g.diseqs.iter().all(|(a, b)| {
                let (x, y) = ordered(alg.canonical(&u.apply(a)), alg.canonical(&u.apply(b)));
                if sd.contains(&(x.clone(), y.clone())) {
                    return true;
                }
                let set = alg.unify(&x, &y);
                set.is_empty() && set.complete
            })
    };
    Matcher {
        alg,
        g,
        s: specific,
        rules: Rules { bijective: true, strand_ok: &strand_ok, fact_targets: &fact_targets, accept: &accept },
        facts: Vec::new(),
    }
    .run()
}

/// Syntactic matcher with an undo trail. Sound for instances modulo the
/// axioms, since literal equality implies equality modulo anything, but
/// blind to instances that only appear after normalization.
struct Syntactic<'a> {
    alg: &'a Algebra,
    sub: HashMap<Var, Term>,
    trail: Vec<Var>,
}

impl Syntactic<'_> {
    fn term(&mut self, p: &Term, t: &Term) -> bool {
        match p {
            Term::Var(v) => match self.sub.get(v) {
                Some(b) => b == t,
                None => {
                    if !self.alg.sig.fits(t, &v.sort) {
                        return false;
                    }
                    self.sub.insert(v.clone(), t.clone());
                    self.trail.push(v.clone());
                    true
                }
            },
            Term::Fresh(_) => p == t,
            Term::App(a) => match t {
                Term::App(b) if a.op == b.op && a.args.len() == b.args.len() => {
                    a.args.iter().zip(&b.args).all(|(x, y)| self.term(x, y))
                }
                _ => false,
            },
        }
    }

    fn undo(&mut self, mark: usize) {
        for v in self.trail.drain(mark..) {
            self.sub.remove(&v);
        }
    }

    fn pairs(&mut self, ps: &[(Term, Term)]) -> bool {
        ps.iter().all(|(p, t)| self.term(p, t))
    }
}

struct Quick<'a> {
    m: Syntactic<'a>,
    g: &'a Opened,
    s: &'a SymbolicState,
}

impl Quick<'_> {
    fn strands(&mut self, i: usize, used: &mut Vec<bool>) -> bool {
        if i == self.g.state.strands.len() {
            return self.facts(0);
        }
        let g = &self.g.state.strands[i];
        for (j, s) in self.s.strands.iter().enumerate() {
            if used[j] || g.bar != s.bar {
                continue;
            }
            let Some(ps) = strand_pairs(g, s) else { continue };
            let mark = self.m.trail.len();
            if self.m.pairs(&ps) {
                used[j] = true;
                if self.strands(i + 1, used) {
                    return true;
                }
                used[j] = false;
            }
            self.m.undo(mark);
        }
        false
    }

    fn facts(&mut self, k: usize) -> bool {
        let Some(f) = self.g.state.facts.get(k) else { return self.accept() };
        for t in &self.s.facts {
            if t.kind != f.kind {
                continue;
            }
            let mark = self.m.trail.len();
            if self.m.term(&f.term, &t.term) && self.facts(k + 1) {
                return true;
            }
            self.m.undo(mark);
        }
        false
    }

    fn accept(&self) -> bool {
        let u = Substitution::from_pairs(self.m.sub.iter().map(|(v, t)| (v.clone(), t.clone())));
        if !fresh_injective(&u, &self.g.fresh) {
            return false;
        }
        let alg = self.m.alg;
        self.g.state.diseqs.iter().all(|(a, b)| {
            let (x, y) = ordered(alg.canonical(&u.apply(a)), alg.canonical(&u.apply(b)));
            if self.s.diseqs.iter().any(|d| d.0 == x && d.1 == y) {
                return true;
            }
            if x.is_ground() && y.is_ground() {
                return x != y;
            }
            let gv = self.g.state.vars();
            if x.vars().iter().chain(y.vars().iter()).any(|v| gv.contains(v) && !u.contains(v)) {
                return false;
            }
            let set = alg.unify(&x, &y);
            set.is_empty() && set.complete
        })
    }
}

/// Kept states grouped by strand signature, ready for instance checks.
#[derive(Default)]
pub(crate) struct Subsumer {
    buckets: HashMap<String, Vec<Opened>>,
}

impl Subsumer {
    pub(crate) fn new() -> Subsumer {
        Subsumer::default()
    }

    pub(crate) fn add(&mut self, st: &SymbolicState) {
        self.buckets.entry(signature(st)).or_default().push(open(st));
    }

    /// Is `st` a syntactic instance of a kept state?
    pub(crate) fn subsumed(&self, alg: &Algebra, st: &SymbolicState) -> bool {
        let Some(b) = self.buckets.get(&signature(st)) else { return false };
        b.iter().any(|o| {
            if o.state.facts.len() > st.facts.len() {
                return false;
            }
            let mut q = Quick { m: Syntactic { alg, sub: HashMap::new(), trail: Vec::new() }, g: o, s: st };
            let mut used = vec![false; st.strands.len()];
            q.strands(0, &mut used)
        })
    }
}

/// Does the ground state `st` instantiate attack pattern `p`? Pattern
/// strands map to distinct strands of the same role and length whose bar
/// is at least the pattern's, all items matching. Pattern fresh values map
/// to distinct fresh constants of the matched strand, known facts to known
/// facts, facts still to be learned must be unknown, and every
/// disequality must hold.
pub fn instantiates_pattern(m: &Model, p: &AttackPattern, st: &SymbolicState) -> Result<bool, SearchError> {
    let alg = &m.alg;
    let o = open(&pattern_state(m, p)?);
    let known: Vec<&Term> = st.facts.iter().filter(|f| f.kind == FactKind::Known).map(|f| &f.term).collect();
    let pending: Vec<&Term> = o.state.facts.iter().filter(|f| f.kind == FactKind::ToLearn).map(|f| &f.term).collect();
    let g = SymbolicState { facts: o.state.facts.iter().filter(|f| f.kind == FactKind::Known).cloned().collect(), ..o.state.clone() };
    let strand_ok = |a: &StrandInstance, b: &StrandInstance| a.bar <= b.bar;
    let fact_targets = |_: &Fact| known.iter().map(|t| (*t).clone()).collect::<Vec<_>>();
    let accept = |u: &Substitution| {
        fresh_injective(u, &o.fresh)
            && g.diseqs.iter().all(|(a, b)| !alg.equal(&u.apply(a), &u.apply(b)))
            && pending.iter().all(|t| {
                let t = u.apply(t);
                !known.iter().any(|k| alg.equal(k, &t))
            })
    };
    Ok(Matcher {
        alg,
        g: &g,
        s: st,
        rules: Rules { bijective: false, strand_ok: &strand_ok, fact_targets: &fact_targets, accept: &accept },
        facts: Vec::new(),
    }
    .run())
}
