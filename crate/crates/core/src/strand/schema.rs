use std::collections::BTreeSet;
use std::fmt;

use crate::term::{Sym, Term, Var};

use super::{Item, Side};

/// The five strand shapes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StrandForm {
    Plain,
    ChildOnly,
    ParentOnly,
    Both,
    Void,
}

/// A role script.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StrandSchema {
    pub role: Sym,
    pub fresh: Vec<Var>,
    pub items: Vec<Item>,
    pub intruder: bool,
}

impl StrandSchema {
    pub fn input(&self) -> Option<&Item> {
        self.items.first().filter(|i| i.side() == Some(Side::In))
    }

    pub fn output(&self) -> Option<&Item> {
        self.items.last().filter(|i| i.side() == Some(Side::Out))
    }

    pub fn body(&self) -> &[Item] {
        let start = usize::from(self.input().is_some());
        let end = self.items.len() - usize::from(self.output().is_some());
        &self.items[start..end.max(start)]
    }

    pub fn form(&self) -> StrandForm {
        match (self.input().is_some(), self.output().is_some(), self.body().is_empty()) {
            (true, true, true) => StrandForm::Void,
            (true, true, false) => StrandForm::Both,
            (true, false, _) => StrandForm::ChildOnly,
            (false, true, _) => StrandForm::ParentOnly,
            (false, false, _) => StrandForm::Plain,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for it in &self.items {
            for t in it.terms() {
                t.collect_vars(&mut out);
            }
        }
        out
    }

    /// Shape violations: parameter items in the middle, unused fresh
    /// variables, output variables that appear nowhere else.
    pub fn check(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let n = self.items.len();
        for (i, it) in self.items.iter().enumerate() {
            match it.side() {
                Some(Side::In) if i != 0 => errs.push(format!("{}: input parameters must come first", self.role)),
                Some(Side::Out) if i + 1 != n => errs.push(format!("{}: output parameters must come last", self.role)),
                _ => {}
            }
        }
        if self.intruder && self.items.iter().any(|i| i.side().is_some()) {
            errs.push(format!("{}: intruder strands take no parameters", self.role));
        }
        let used = self.vars();
        for f in &self.fresh {
            if !used.contains(f) {
                errs.push(format!("{}: fresh variable {} is never used", self.role, f));
            }
        }
        if let Some(out) = self.output() {
            let mut before = BTreeSet::new();
            for it in &self.items[..n - 1] {
                for t in it.terms() {
                    t.collect_vars(&mut before);
                }
            }
            for t in out.terms() {
                for v in t.vars() {
                    if !before.contains(&v) && !self.fresh.contains(&v) {
                        errs.push(format!("{}: output variable {} does not occur earlier", self.role, v));
                    }
                }
            }
        }
        if self.items.is_empty() {
            errs.push(format!("{}: empty strand", self.role));
        }
        errs
    }

    /// Positions of send items, the candidates for strand introduction.
    pub fn send_positions(&self) -> Vec<usize> {
        self.items
            .iter()
            .enumerate()
            .filter(|(_, it)| matches!(it, Item::Msg(m) if m.dir == super::Dir::Send))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn all_terms(&self) -> Vec<&Term> {
        self.items.iter().flat_map(|i| i.terms()).collect()
    }
}

impl fmt::Display for StrandSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) ", self.role)?;
        if !self.fresh.is_empty() {
            let fr: Vec<String> = self.fresh.iter().map(|v| v.to_string()).collect();
            write!(f, ":: {} :: ", fr.join(", "))?;
        }
        let items: Vec<String> = self.items.iter().map(|i| i.to_string()).collect();
        write!(f, "[{}]", items.join(", "))
    }
}
