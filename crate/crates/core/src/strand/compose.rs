use std::collections::BTreeMap;
use std::fmt;

use crate::term::Sym;

use super::Mode;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CompositionTriple {
    pub parent: Sym,
    pub child: Sym,
    pub mode: Mode,
}

impl fmt::Display for CompositionTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.parent, self.child, self.mode)
    }
}

/// Which parent roles feed which child roles, and in which mode.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CompositionSpec {
    pub triples: Vec<CompositionTriple>,
}

impl CompositionSpec {
    pub fn new(mut triples: Vec<CompositionTriple>) -> CompositionSpec {
        triples.sort();
        triples.dedup();
        CompositionSpec { triples }
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn children_of(&self, parent: &Sym) -> Vec<&Sym> {
        self.triples.iter().filter(|t| &t.parent == parent).map(|t| &t.child).collect()
    }

    pub fn parents_of(&self, child: &Sym) -> Vec<&Sym> {
        self.triples.iter().filter(|t| &t.child == child).map(|t| &t.parent).collect()
    }

    /// The mode a role composes in, if it takes part in any triple and the
    /// triples agree.
    pub fn mode_of(&self, role: &Sym) -> Option<Mode> {
        self.triples.iter().find(|t| &t.parent == role || &t.child == role).map(|t| t.mode)
    }

    /// Roles whose triples mix both modes, with the clashing triples.
    pub fn mode_conflicts(&self) -> Vec<(Sym, Vec<&CompositionTriple>)> {
        let mut by_role: BTreeMap<&Sym, Vec<&CompositionTriple>> = BTreeMap::new();
        for t in &self.triples {
            by_role.entry(&t.parent).or_default().push(t);
            by_role.entry(&t.child).or_default().push(t);
        }
        by_role
            .into_iter()
            .filter(|(_, ts)| ts.iter().any(|t| t.mode != ts[0].mode))
            .map(|(r, ts)| (r.clone(), ts))
            .collect()
    }
}
