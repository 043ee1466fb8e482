//! Strands, intruder facts and symbolic states.

mod compose;
mod instance;
mod items;
mod schema;
mod state;

pub use compose::{CompositionSpec, CompositionTriple};
pub use instance::{instantiate, StrandInstance};
pub use items::{Dir, Item, Mode, Params, Side, SignedMessage, SyncPoint};
pub use schema::{StrandForm, StrandSchema};
pub use state::{check_wellformed, Diagnostic, Fact, FactKind, Severity, SymbolicState};
