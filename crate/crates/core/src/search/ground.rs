use std::collections::HashSet;

use serde::Serialize;

use crate::semantics::{backward_successors, forward_step, state_key, Model};
use crate::strand::SymbolicState;
use crate::term::{Sort, Substitution, Term, Var};
use crate::unify::Algebra;

use super::subsume::instance_of;

const PER_VAR: usize = 8;

/// Small ground terms of sort `s`: constants first, then one operator
/// applied to constants. `next` numbers the fresh constants handed out.
fn candidates(alg: &Algebra, s: &Sort, next: &mut u32) -> Vec<Term> {
    let mut fresh = || {
        *next += 1;
        Term::fresh(*next, 0)
    };
    if *s == Sort::fresh() {
        return vec![fresh()];
    }
    let sig = &alg.sig;
    let mut out: Vec<Term> = sig.constants_of(s).iter().map(|d| Term::app_sym(d.name.clone(), vec![])).collect();
    for d in sig.ops() {
        if d.args.is_empty() || !sig.leq(&d.result, s) || out.len() >= PER_VAR {
            continue;
        }
        let mut args = Vec::new();
        for a in &d.args {
            if *a == Sort::fresh() {
                args.push(fresh());
            } else if let Some(c) = sig.constants_of(a).first() {
                args.push(Term::app_sym(c.name.clone(), vec![]));
            } else {
                break;
            }
        }
        if args.len() == d.args.len() {
            out.push(Term::app_sym(d.name.clone(), args));
        }
    }
    out.truncate(PER_VAR);
    out
}

/// The `attempt`-th grounding of `st` in a fixed enumeration of small
/// ground terms, or `None` once the enumeration is exhausted. Variable `k`
/// starts its candidate list at offset `k` so that the first groundings
/// keep distinct variables apart.
pub fn ground_instance(alg: &Algebra, st: &SymbolicState, attempt: usize) -> Option<SymbolicState> {
    let vars: Vec<Var> = st.vars().into_iter().collect();
    let mut next = st.next_fresh_id() + 1000;
    let lists: Vec<Vec<Term>> = vars.iter().map(|v| candidates(alg, &v.sort, &mut next)).collect();
    if lists.iter().any(|l| l.is_empty()) {
        return None;
    }
    let mut rest = attempt;
    let mut sub = Substitution::new();
    for (k, (v, l)) in vars.iter().zip(&lists).enumerate() {
        let i = rest % l.len();
        rest /= l.len();
        sub.insert(v.clone(), l[(i + k) % l.len()].clone());
    }
    if rest > 0 {
        return None;
    }
    Some(st.apply(&sub))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualityFailure {
    pub depth: usize,
    pub rule: String,
    pub source: String,
    pub predecessor: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DualityReport {
    pub steps_checked: usize,
    pub failures: Vec<DualityFailure>,
}

/// Does some grounding of `pre`, fired forwards once, land on an instance
/// of `source`? At most `max_groundings` groundings are tried.
fn re_reaches(m: &Model, source: &SymbolicState, pre: &SymbolicState, max_groundings: usize) -> bool {
    for attempt in 0..max_groundings {
        let Some(g) = ground_instance(&m.alg, pre, attempt) else { return false };
        let Some(g) = g.canonicalize(&m.alg) else { continue };
        if g.diseqs.iter().any(|(a, b)| m.alg.equal(a, b)) {
            continue;
        }
        if forward_step(m, &g).iter().any(|f| instance_of(&m.alg, source, &f.state)) {
            return true;
        }
    }
    false
}

/// Check every backward step within `depth` layers of `start`: the
/// predecessor must have a ground instance whose forward successors
/// include an instance of the state the step came from.
pub fn narrowing_duality(m: &Model, start: &SymbolicState, depth: usize, max_groundings: usize) -> DualityReport {
    let mut report = DualityReport::default();
    let mut seen = HashSet::new();
    seen.insert(state_key(start, &m.alg));
    let mut layer = vec![start.clone()];
    for d in 1..=depth {
        let mut next = Vec::new();
        for s in &layer {
            for step in backward_successors(m, s) {
                report.steps_checked += 1;
                if !re_reaches(m, s, &step.predecessor, max_groundings) {
                    report.failures.push(DualityFailure {
                        depth: d,
                        rule: step.rule.to_string(),
                        source: s.to_string(),
                        predecessor: step.predecessor.to_string(),
                    });
                }
                if seen.insert(state_key(&step.predecessor, &m.alg)) {
                    next.push(step.predecessor);
                }
            }
        }
        layer = next;
    }
    report
}
