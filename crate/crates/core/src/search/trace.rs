use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::dsl::ProtocolSpec;
use crate::semantics::{rebuild_step, state_key, Focus, Model, SemMode, TransitionRule};
use crate::strand::SymbolicState;
use crate::term::Substitution;

use super::bfs::pattern_state;
use super::SearchError;

/// One backward step of a trace. `state` is the predecessor it produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: TransitionRule,
    pub focus: Focus,
    pub unifier: Substitution,
    pub state: SymbolicState,
}

/// A path from an attack pattern back to an initial state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub attack: String,
    pub mode: SemMode,
    /// The pattern's state, where the search started.
    pub pattern: SymbolicState,
    pub steps: Vec<TraceStep>,
    /// Composition of the step unifiers restricted to the pattern's
    /// variables: the pattern instance the trace attacks.
    pub substitution: Substitution,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The initial state the trace ends in.
    pub fn last_state(&self) -> &SymbolicState {
        self.steps.last().map(|s| &s.state).unwrap_or(&self.pattern)
    }

    /// The attacked instance of the pattern.
    pub fn attack_instance(&self) -> SymbolicState {
        self.pattern.apply(&self.substitution)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> Result<Trace, SearchError> {
        serde_json::from_str(s).map_err(|e| SearchError::MalformedTrace(e.to_string()))
    }
}

/// Re-run every step: the rule must apply at the recorded focus, the
/// unifier must solve its equations and the rebuilt predecessor must equal
/// the recorded one up to renaming. The first state must be the named
/// pattern's and the last one initial.
pub fn trace_replay(tr: &Trace, spec: &ProtocolSpec) -> bool {
    let m = Model::new(spec, tr.mode);
    let key = |s: &SymbolicState| state_key(s, &m.alg);
    if let Ok(p) = spec.attack(&tr.attack) {
        match pattern_state(&m, p) {
            Ok(st) if key(&st) == key(&tr.pattern) => {}
            _ => return false,
        }
    } else if !tr.attack.is_empty() {
        return false;
    }
    let mut cur = tr.pattern.clone();
    for s in &tr.steps {
        let Some(pre) = rebuild_step(&m, &cur, &s.rule, s.focus, &s.unifier) else { return false };
        if key(&pre) != key(&s.state) {
            return false;
        }
        cur = pre;
    }
    cur.is_initial()
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\l")
}

/// Graphviz rendering: one node per state, one edge per step, pointing in
/// forward execution order.
pub fn trace_to_dot(tr: &Trace) -> String {
    let mut out = String::from("digraph trace {\n  node [shape=box, fontname=\"monospace\"];\n");
    let states = std::iter::once(&tr.pattern).chain(tr.steps.iter().map(|s| &s.state));
    for (i, st) in states.enumerate() {
        writeln!(out, "  s{i} [label=\"{}\\l\"];", escape(&st.to_string())).unwrap();
    }
    for (i, s) in tr.steps.iter().enumerate() {
        writeln!(out, "  s{} -> s{i} [label=\"{}\"];", i + 1, escape(&s.rule.to_string())).unwrap();
    }
    out.push_str("}\n");
    out
}
