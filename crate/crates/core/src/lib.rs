//! Symbolic analysis of strand-space security protocols with sequential
//! protocol composition.
//!
//! The crate is layered bottom-up:
//!
//! * [`term`]: order-sorted terms, substitutions and normalization modulo
//!   an equational theory.
//! * [`unify`]: unification modulo the theory (syntactic, variant based,
//!   exclusive-or).
//! * [`strand`]: strands, intruder facts, symbolic states.
//! * [`dsl`]: the `.strand` specification language and the composition
//!   transforms.
//! * [`semantics`]: backward and forward transition rules, `trans`.
//! * [`search`]: breadth-first backwards reachability, traces, oracles.

pub mod dsl;
pub mod search;
pub mod semantics;
pub mod strand;
pub mod term;
pub mod unify;
