use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::dsl::{AttackPattern, ProtocolSpec};
use crate::semantics::{backward_successors, state_key, trans, trans_inv, Model, SemMode};
use crate::strand::{CompositionSpec, CompositionTriple, Item, Mode, SymbolicState};

use super::bfs::pattern_state;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerCounts {
    pub layer: usize,
    /// Distinct new abstract states in the layer.
    pub abstract_states: usize,
    /// Distinct synchronization predecessors of the previous layer.
    pub sync_states: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Divergence {
    pub layer: usize,
    /// The abstract state whose predecessors disagree.
    pub state: String,
    pub reason: String,
    /// Keys reached only through the abstract rules, mapped by `trans`.
    pub only_abstract: Vec<String>,
    /// Keys reached only through the synchronization rules.
    pub only_sync: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BisimReport {
    pub depth: usize,
    pub layers: Vec<LayerCounts>,
    pub divergence: Option<Divergence>,
    /// States on which the `trans` round trip was checked.
    pub roundtrips: usize,
    pub roundtrip_failures: usize,
}

impl BisimReport {
    pub fn equivalent(&self) -> bool {
        self.divergence.is_none() && self.roundtrip_failures == 0
    }
}

/// Checks `trans_inv(trans(a)) = a` and `trans(trans_inv(trans(a))) =
/// trans(a)`. Returns `trans(a)` when both hold.
fn roundtrip(a: &SymbolicState, comps: &CompositionSpec) -> Option<SymbolicState> {
    let t = trans(a, comps).ok()?;
    let back = trans_inv(&t, comps).ok()?;
    let again = trans(&back, comps).ok()?;
    (back == *a && again == t).then_some(t)
}

/// Compare the abstract rules of `abstract_spec` with the synchronization
/// rules of `sync_spec`, layer by layer from `pattern` up to `depth`
/// backward steps. For every abstract state `s` the predecessors of `s`
/// mapped through `trans` must be the predecessors of `trans(s)`, up to
/// renaming. `trans` uses the composition of `sync_spec`.
pub fn bisimulation_report(
    abstract_spec: &ProtocolSpec,
    sync_spec: &ProtocolSpec,
    pattern: &AttackPattern,
    depth: usize,
) -> BisimReport {
    let ma = Model::new(abstract_spec, SemMode::Abstract);
    let ms = Model::new(sync_spec, SemMode::Sync);
    let comps = &ms.comps;
    let mut report = BisimReport { depth, layers: Vec::new(), divergence: None, roundtrips: 0, roundtrip_failures: 0 };
    let diverge = |layer: usize, s: &SymbolicState, reason: &str| Divergence {
        layer,
        state: s.to_string(),
        reason: reason.to_string(),
        only_abstract: Vec::new(),
        only_sync: Vec::new(),
    };
    let mut seen_sync: HashSet<String> = HashSet::new();
    let start = match pattern_state(&ma, pattern) {
        Ok(s) => {
            if let Ok(t) = trans(&s, comps) {
                seen_sync.insert(state_key(&t, &ms.alg));
            }
            s
        }
        Err(e) => {
            report.divergence = Some(diverge(0, &pattern.to_state(), &e.to_string()));
            return report;
        }
    };
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(state_key(&start, &ma.alg));
    let mut layer = vec![start];
    for d in 1..=depth {
        let mut next = Vec::new();
        let mut sync_new = 0;
        for s in &layer {
            report.roundtrips += 1;
            let Some(ts) = roundtrip(s, comps) else {
                report.roundtrip_failures += 1;
                report.divergence = Some(diverge(d, s, "trans round trip failed"));
                return report;
            };
            let a_preds = backward_successors(&ma, s);
            let s_preds = backward_successors(&ms, &ts);
            let mut a_keys = BTreeSet::new();
            for p in &a_preds {
                report.roundtrips += 1;
                match roundtrip(&p.predecessor, comps) {
                    Some(tp) => {
                        a_keys.insert(state_key(&tp, &ms.alg));
                    }
                    None => {
                        report.roundtrip_failures += 1;
                        report.divergence = Some(diverge(d, &p.predecessor, "trans round trip failed"));
                        return report;
                    }
                }
            }
            let s_keys: BTreeSet<String> = s_preds.iter().map(|q| state_key(&q.predecessor, &ms.alg)).collect();
            if a_keys != s_keys {
                let mut dv = diverge(d, s, "predecessor sets differ");
                dv.only_abstract = a_keys.difference(&s_keys).cloned().collect();
                dv.only_sync = s_keys.difference(&a_keys).cloned().collect();
                report.divergence = Some(dv);
                return report;
            }
            for k in s_keys {
                if seen_sync.insert(k) {
                    sync_new += 1;
                }
            }
            for p in a_preds {
                if seen.insert(state_key(&p.predecessor, &ma.alg)) {
                    next.push(p.predecessor);
                }
            }
        }
        report.layers.push(LayerCounts { layer: d, abstract_states: next.len(), sync_states: sync_new });
        layer = next;
    }
    report
}

fn flip(m: Mode) -> Mode {
    match m {
        Mode::OneToOne => Mode::OneToMany,
        other => other,
    }
}

/// `spec` with every one-to-one connection turned one-to-many, both in the
/// composition and in written synchronization messages.
pub fn flip_modes(spec: &ProtocolSpec) -> ProtocolSpec {
    let mut out = spec.clone();
    out.composition = CompositionSpec::new(
        spec.composition.triples.iter().map(|t| CompositionTriple { mode: flip(t.mode), ..t.clone() }).collect(),
    );
    for s in &mut out.schemas {
        for it in &mut s.items {
            if let Item::Sync(p) = it {
                p.mode = flip(p.mode);
            }
        }
    }
    out
}
