use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;

use crate::dsl::{AttackPattern, ProtocolSpec};
use crate::semantics::{backward_successors, state_key, trans, trans_inv, BackwardStep, Model, SemMode};
use crate::strand::SymbolicState;
use crate::term::Substitution;
use crate::unify::Algebra;

use super::subsume::Subsumer;
use super::trace::{Trace, TraceStep};
use super::{Outcome, SearchBudget, SearchError, SearchStats, Verdict};

/// Canonical encoding used to merge states: equal for states that differ
/// only in variable names, fresh-constant identities or the order of
/// arguments under the axioms.
pub fn dedup_key(st: &SymbolicState, alg: &Algebra) -> String {
    state_key(st, alg)
}

/// The state an attack pattern describes, in the item form `m` works on:
/// parameter lists for the abstract rules, synchronization messages for
/// the sync rules.
pub fn pattern_state(m: &Model, p: &AttackPattern) -> Result<SymbolicState, SearchError> {
    let st = p.to_state();
    let st = match m.mode {
        SemMode::Basic => st,
        SemMode::Abstract => trans_inv(&st, &m.comps)?,
        SemMode::Sync => trans(&st, &m.comps)?,
    };
    Ok(st.canonicalize(&m.alg).unwrap_or(st))
}

/// Search backwards from `pattern` in `spec` under `mode`.
pub fn reachability_search(
    pattern: &AttackPattern,
    spec: &ProtocolSpec,
    mode: SemMode,
    budget: &SearchBudget,
) -> Result<Verdict, SearchError> {
    let mut m = Model::new(spec, mode);
    m.alg.budget.max_unifiers = budget.max_unify_branch;
    let st = pattern_state(&m, pattern)?;
    let mut v = search_state(&m, &st, budget);
    if let Outcome::AttackFound(t) = &mut v.outcome {
        t.attack = pattern.name.clone();
        t.mode = mode;
    }
    Ok(v)
}

/// States expanded per worker before their successors are merged.
const EXPAND_CHUNK: usize = 64;

struct Node {
    state: SymbolicState,
    parent: Option<usize>,
    step: Option<BackwardStep>,
}

fn trace_to(nodes: &[Node], mut i: usize, m: &Model) -> Trace {
    let mut steps = Vec::new();
    while let (Some(p), Some(s)) = (nodes[i].parent, &nodes[i].step) {
        steps.push(TraceStep { rule: s.rule.clone(), focus: s.focus, unifier: s.unifier.clone(), state: s.predecessor.clone() });
        i = p;
    }
    steps.reverse();
    let mut acc = Substitution::new();
    for s in &steps {
        acc = acc.compose(&s.unifier);
    }
    let vars = nodes[0].state.vars();
    Trace {
        attack: String::new(),
        mode: m.mode,
        pattern: nodes[0].state.clone(),
        steps,
        substitution: acc.restrict(&vars),
    }
}

/// Breadth-first backwards search from an already built state.
///
/// Each layer is expanded in parallel; successors are merged in frontier
/// order, so the result does not depend on the number of workers. A
/// successor is dropped when its key was seen before or when it is an
/// instance of a kept state with the same strand shape.
pub fn search_state(m: &Model, start: &SymbolicState, budget: &SearchBudget) -> Verdict {
    let t0 = Instant::now();
    let mut stats = SearchStats { states: 1, ..SearchStats::default() };
    let mut root = start.clone();
    root.depth = 0;
    let mut nodes = vec![Node { state: root, parent: None, step: None }];
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(dedup_key(start, &m.alg));
    let mut subsumer = Subsumer::new();
    subsumer.add(&nodes[0].state);
    let done = |outcome, stats: SearchStats| Verdict { outcome, stats, wall_time: t0.elapsed() };

    if start.is_initial() {
        return done(Outcome::AttackFound(trace_to(&nodes, 0, m)), stats);
    }
    let mut layer = vec![0usize];
    let chunk = EXPAND_CHUNK * rayon::current_num_threads().max(1);
    for depth in 1..=budget.max_depth {
        let mut next = Vec::new();
        // expanding a whole layer at once holds every successor in memory
        for part in layer.chunks(chunk) {
            if let Some(limit) = budget.time_budget {
                if t0.elapsed() > limit {
                    return done(Outcome::Inconclusive(format!("time budget reached at depth {}", depth - 1)), stats);
                }
            }
            let expanded: Vec<Vec<BackwardStep>> =
                part.par_iter().map(|&i| backward_successors(m, &nodes[i].state)).collect();
            for (&from, steps) in part.iter().zip(expanded) {
                for step in steps {
                    if step.incomplete {
                        stats.incomplete_unifications += 1;
                    }
                    let key = dedup_key(&step.predecessor, &m.alg);
                    if seen.contains(&key) || subsumer.subsumed(&m.alg, &step.predecessor) {
                        stats.deduped += 1;
                        continue;
                    }
                    seen.insert(key);
                    let id = nodes.len();
                    let initial = step.predecessor.is_initial();
                    subsumer.add(&step.predecessor);
                    nodes.push(Node { state: step.predecessor.clone(), parent: Some(from), step: Some(step) });
                    stats.states += 1;
                    stats.depth = depth;
                    if initial {
                        return done(Outcome::AttackFound(trace_to(&nodes, id, m)), stats);
                    }
                    if stats.states >= budget.max_states {
                        return done(Outcome::Inconclusive(format!("state budget of {} reached", budget.max_states)), stats);
                    }
                    next.push(id);
                }
            }
        }
        if next.is_empty() {
            return if stats.incomplete_unifications == 0 {
                done(Outcome::SecureFinite, stats)
            } else {
                done(Outcome::Inconclusive("frontier emptied but some unifications were incomplete".into()), stats)
            };
        }
        layer = next;
    }
    done(Outcome::Inconclusive(format!("depth budget of {} reached", budget.max_depth)), stats)
}

