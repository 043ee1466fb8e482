//! The `.strand` language: parsing, printing, validation and the
//! composition transforms.
//!
//! A file holds `protocol` blocks, optional `composition` blocks joining
//! them, and `attack` patterns:
//!
//! ```text
//! protocol NSL {
//!   sorts Name Nonce;
//!   subsort Name < Msg;
//!   subsort Nonce < Msg;
//!   op pk : Name Msg -> Msg;
//!   op n : Name Fresh -> Nonce;
//!   op ; : Msg Msg -> Msg;
//!   vars A B : Name;
//!   vars r : Fresh;
//!   strand NSL.init (fresh r) {
//!     +(pk(B, n(A, r) ; A));
//!     out {A, B, n(A, r)};
//!   }
//! }
//! ```

mod lexer;
mod parser;
mod printer;
mod spec;
mod transform;

use thiserror::Error;

use crate::term::TermError;

pub use parser::{parse_attack, parse_document, parse_items, parse_scenario, parse_spec, parse_term};
pub use printer::{print_attack, print_document, print_spec};
pub use spec::{Action, AttackPattern, ComposedSpec, Document, PatternStrand, ProtocolSpec, Scenario, ScenarioStrand};
pub use transform::{phi_transform, synch_spec, synch_transform, validate_composition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: expected {expected}, found {found}")]
    Syntax { line: usize, col: usize, expected: String, found: String },
    #[error("{line}:{col}: unknown symbol `{name}`")]
    UnknownSymbol { line: usize, col: usize, name: String },
    #[error("{line}:{col}: sort error: {msg}")]
    Sort { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: {msg}")]
    Invalid { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Load(TermError),
    #[error("unknown attack `{0}`")]
    UnknownAttack(String),
    #[error("invalid composition: {0}")]
    Validation(String),
}

impl DslError {
    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            DslError::Syntax { .. } => "syntax",
            DslError::UnknownSymbol { .. } => "unknown-symbol",
            DslError::Sort { .. } => "sort",
            DslError::Invalid { .. } => "invalid",
            DslError::Load(_) => "load",
            DslError::UnknownAttack(_) => "unknown-attack",
            DslError::Validation(_) => "composition",
        }
    }

    /// Line and column, when the error points into a source file.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            DslError::Syntax { line, col, .. }
            | DslError::UnknownSymbol { line, col, .. }
            | DslError::Sort { line, col, .. }
            | DslError::Invalid { line, col, .. } => Some((*line, *col)),
            _ => None,
        }
    }
}
