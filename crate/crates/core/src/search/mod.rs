//! Backwards reachability from an attack pattern toward initial states.
//!
//! [`reachability_search`] explores predecessors layer by layer. A layer is
//! one backward step, so the depth it reports counts rule applications.
//! Alongside the search live the trace tools, the comparison of the
//! abstract and synchronization semantics, and two forward oracles.

mod bfs;
mod bisim;
mod ground;
mod oracle;
mod subsume;
mod trace;

use std::fmt;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::dsl::DslError;
use crate::semantics::SemanticsError;

pub use bfs::{dedup_key, pattern_state, reachability_search, search_state};
pub use bisim::{bisimulation_report, flip_modes, BisimReport, Divergence, LayerCounts};
pub use ground::{ground_instance, narrowing_duality, DualityFailure, DualityReport};
pub use oracle::{run_scenario, scenario_state, ScenarioError, ScenarioRun};
pub use subsume::{instance_of, instantiates_pattern};
pub use trace::{trace_replay, trace_to_dot, Trace, TraceStep};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Limits for one search run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_depth: usize,
    /// Distinct states kept, the pattern included.
    pub max_states: usize,
    /// Unifiers kept per unification problem.
    pub max_unify_branch: usize,
    pub time_budget: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_depth: 16, max_states: 100_000, max_unify_branch: 4096, time_budget: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// Deepest layer reached.
    pub depth: usize,
    /// Distinct states kept, the pattern included.
    pub states: usize,
    /// Successors dropped as duplicates or instances of a kept state.
    pub deduped: usize,
    pub incomplete_unifications: usize,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    AttackFound(Trace),
    SecureFinite,
    Inconclusive(String),
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: SearchStats,
    pub wall_time: Duration,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self.outcome {
            Outcome::AttackFound(_) => "attack-found",
            Outcome::SecureFinite => "secure-finite",
            Outcome::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn trace(&self) -> Option<&Trace> {
        match &self.outcome {
            Outcome::AttackFound(t) => Some(t),
            _ => None,
        }
    }

    /// The stats document: verdict, depth, states, deduped,
    /// incomplete_unifications and wall_time_ms.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(&self.stats).expect("plain struct");
        let obj = v.as_object_mut().expect("object");
        obj.insert("verdict".into(), self.name().into());
        obj.insert("wall_time_ms".into(), (self.wall_time.as_millis() as u64).into());
        if let Outcome::Inconclusive(r) = &self.outcome {
            obj.insert("reason".into(), r.clone().into());
        }
        v
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (depth {}, {} states, {} deduped, {} incomplete unifications)",
            self.name(),
            self.stats.depth,
            self.stats.states,
            self.stats.deduped,
            self.stats.incomplete_unifications
        )?;
        if let Outcome::Inconclusive(r) = &self.outcome {
            write!(f, ": {r}")?;
        }
        Ok(())
    }
}
