use crate::strand::{CompositionSpec, Item, Params, StrandInstance, SymbolicState, SyncPoint};
use crate::term::Sym;

use super::SemanticsError;

fn item_to_sync(role: &Sym, it: &Item, comps: &CompositionSpec) -> Result<Item, SemanticsError> {
    let Item::Params(p) = it else { return Ok(it.clone()) };
    let unknown = || SemanticsError::UnknownComposition(role.to_string());
    let mode = comps.mode_of(role).ok_or_else(unknown)?;
    let (parents, children) = match p.side {
        crate::strand::Side::In => (comps.parents_of(role).into_iter().cloned().collect::<Vec<_>>(), vec![role.clone()]),
        crate::strand::Side::Out => (vec![role.clone()], comps.children_of(role).into_iter().cloned().collect()),
    };
    if parents.is_empty() || children.is_empty() {
        return Err(unknown());
    }
    Ok(Item::Sync(SyncPoint { side: p.side, parents, children, mode, payload: p.terms.clone() }))
}

fn item_to_params(role: &Sym, it: &Item, comps: &CompositionSpec) -> Result<Item, SemanticsError> {
    let Item::Sync(s) = it else { return Ok(it.clone()) };
    let expected = item_to_sync(role, &Item::Params(Params { side: s.side, terms: s.payload.clone() }), comps)?;
    if &expected != it {
        return Err(SemanticsError::UnknownComposition(role.to_string()));
    }
    Ok(Item::Params(Params { side: s.side, terms: s.payload.clone() }))
}

fn map_items(
    st: &SymbolicState,
    comps: &CompositionSpec,
    f: fn(&Sym, &Item, &CompositionSpec) -> Result<Item, SemanticsError>,
) -> Result<SymbolicState, SemanticsError> {
    let strands = st
        .strands
        .iter()
        .map(|s| {
            let items = s.items.iter().map(|it| f(&s.role, it, comps)).collect::<Result<Vec<_>, _>>()?;
            Ok(StrandInstance { items, ..s.clone() })
        })
        .collect::<Result<Vec<_>, SemanticsError>>()?;
    Ok(SymbolicState { strands, ..st.clone() })
}

/// Parameter lists become synchronization messages, with role connections
/// and modes read from `comps`. Bars stay where they are.
pub fn trans(st: &SymbolicState, comps: &CompositionSpec) -> Result<SymbolicState, SemanticsError> {
    map_items(st, comps, item_to_sync)
}

/// Inverse of [`trans`]. A synchronization message whose roles or mode
/// disagree with `comps` is an error.
pub fn trans_inv(st: &SymbolicState, comps: &CompositionSpec) -> Result<SymbolicState, SemanticsError> {
    map_items(st, comps, item_to_params)
}
