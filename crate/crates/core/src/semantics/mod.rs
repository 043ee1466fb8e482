//! Transition rules over symbolic states.
//!
//! Three rule sets share one engine: the basic strand rules, the abstract
//! composition rules working on parameter lists, and the synchronization
//! message rules. Every rule is written forwards and can be read either way:
//! [`backward_successors`] narrows with the reversed rules, [`forward_step`]
//! executes ground states.

mod backward;
mod forward;
mod key;
mod trans;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{synch_spec, ProtocolSpec};
use crate::strand::{CompositionSpec, StrandSchema, SymbolicState};
use crate::term::{Substitution, Sym};
use crate::unify::Algebra;

pub use backward::{backward_successors, rebuild_step};
pub use forward::{forward_step, ForwardStep};
pub use key::{canonical_form, state_key};
pub use trans::{trans, trans_inv};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("no composition connects role {0}")]
    UnknownComposition(String),
}

/// Which rule set drives the successor relation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemMode {
    Basic,
    Abstract,
    Sync,
}

impl SemMode {
    pub fn parse(s: &str) -> Option<SemMode> {
        match s {
            "basic" => Some(SemMode::Basic),
            "abstract" => Some(SemMode::Abstract),
            "sync" => Some(SemMode::Sync),
            _ => None,
        }
    }
}

impl fmt::Display for SemMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemMode::Basic => "basic",
            SemMode::Abstract => "abstract",
            SemMode::Sync => "sync",
        })
    }
}

/// The ten rule shapes, numbered as usual.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum RuleKind {
    Recv = 1,
    SendSilent = 2,
    SendLearn = 3,
    IntroStrand = 4,
    Compose11 = 5,
    ComposeNewParent = 6,
    Compose1Many = 7,
    SyncCompose = 8,
    Sync1Many = 9,
    SyncNewParent = 10,
}

impl RuleKind {
    pub fn number(self) -> u8 {
        self as u8
    }

    /// Kinds generated from a schema rather than generic.
    pub fn is_generated(self) -> bool {
        matches!(self, RuleKind::IntroStrand | RuleKind::ComposeNewParent | RuleKind::SyncNewParent)
    }
}

/// A rule plus, for generated kinds, the schema and item position it came
/// from.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct TransitionRule {
    pub kind: RuleKind,
    pub schema: Option<Sym>,
    pub position: Option<usize>,
}

impl TransitionRule {
    pub fn generic(kind: RuleKind) -> TransitionRule {
        debug_assert!(!kind.is_generated());
        TransitionRule { kind, schema: None, position: None }
    }

    pub fn generated(kind: RuleKind, schema: Sym, position: usize) -> TransitionRule {
        debug_assert!(kind.is_generated());
        TransitionRule { kind, schema: Some(schema), position: Some(position) }
    }
}

impl fmt::Display for TransitionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.kind.number())?;
        if let (Some(s), Some(p)) = (&self.schema, self.position) {
            write!(f, " {s}@{p}")?;
        }
        Ok(())
    }
}

/// Where in the source state a step applies: strand indices and a fact
/// index, all into the source state's vectors.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
pub struct Focus {
    /// The strand whose bar moves (the child for composition rules).
    pub strand: Option<usize>,
    /// The parent strand for composition rules that use an existing one.
    pub partner: Option<usize>,
    pub fact: Option<usize>,
}

/// One backwards narrowing step: `predecessor` reaches the source state by
/// `rule` read forwards.
#[derive(Clone, Debug)]
pub struct BackwardStep {
    pub rule: TransitionRule,
    pub focus: Focus,
    pub unifier: Substitution,
    pub predecessor: SymbolicState,
    /// The unifier set behind this step hit a bound.
    pub incomplete: bool,
}

/// Everything a rule set needs: the algebra, the schemas the generated
/// rules come from, and the composition triples.
#[derive(Clone, Debug)]
pub struct Model {
    pub alg: Algebra,
    pub schemas: Vec<StrandSchema>,
    pub comps: CompositionSpec,
    pub mode: SemMode,
}

impl Model {
    /// Rules for `spec` in `mode`. Sync mode rewrites remaining parameter
    /// items into synchronization messages first.
    pub fn new(spec: &ProtocolSpec, mode: SemMode) -> Model {
        let schemas = match mode {
            SemMode::Sync => synch_spec(spec).schemas,
            _ => spec.schemas.clone(),
        };
        Model { alg: spec.algebra(), schemas, comps: spec.composition.clone(), mode }
    }

    pub fn schema(&self, role: &Sym) -> Option<&StrandSchema> {
        self.schemas.iter().find(|s| &s.role == role)
    }
}
