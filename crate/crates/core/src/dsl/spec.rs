use std::collections::{BTreeMap, BTreeSet};

use crate::strand::{CompositionSpec, Fact, Item, StrandInstance, StrandSchema, SymbolicState};
use crate::term::{EquationalTheory, FreshConst, Signature, Sort, Substitution, Sym, Term, TermError, Var};
use crate::unify::Algebra;

use super::DslError;

/// One strand of an attack pattern, with its bar given by the split between
/// past and future.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PatternStrand {
    pub role: Sym,
    pub fresh: Vec<Var>,
    pub past: Vec<Item>,
    pub future: Vec<Item>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AttackPattern {
    pub name: String,
    pub strands: Vec<PatternStrand>,
    pub known: Vec<Term>,
    pub to_learn: Vec<Term>,
    pub diseqs: Vec<(Term, Term)>,
}

impl AttackPattern {
    /// The symbolic state the pattern describes. Fresh variables owned by a
    /// strand become that strand's fresh constants.
    pub fn to_state(&self) -> SymbolicState {
        let mut s = Substitution::new();
        let mut strands = Vec::new();
        for (id, p) in self.strands.iter().enumerate() {
            let mut fresh = Vec::new();
            for (k, v) in p.fresh.iter().enumerate() {
                let c = FreshConst { strand: id as u32, index: k as u32 };
                fresh.push(c);
                s.insert(v.clone(), Term::Fresh(c));
            }
            let mut items = p.past.clone();
            items.extend(p.future.iter().cloned());
            strands.push(StrandInstance { role: p.role.clone(), items, bar: p.past.len(), fresh });
        }
        let mut facts: Vec<Fact> = self.known.iter().map(|t| Fact::known(t.clone())).collect();
        facts.extend(self.to_learn.iter().map(|t| Fact::to_learn(t.clone())));
        SymbolicState::new(strands, facts, self.diseqs.clone()).apply(&s)
    }
}

/// A strand declared by a scenario: its role, the fresh values it owns
/// and ground bindings for its other variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ScenarioStrand {
    pub name: String,
    pub role: Sym,
    pub fresh: Vec<FreshConst>,
    pub bindings: Vec<(Var, Term)>,
    pub line: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Action {
    /// Execute the next message item of a strand.
    Step { strand: usize, line: usize },
    /// Hand the parent's output parameters to the child.
    Sync { parent: usize, child: usize, line: usize },
}

/// A concrete forward run, written step by step.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Scenario {
    pub name: String,
    pub strands: Vec<ScenarioStrand>,
    pub actions: Vec<Action>,
}

/// A protocol: signature, theory, strand schemas and attack patterns. A
/// flattened composition also carries its composition triples.
#[derive(Clone, Debug)]
pub struct ProtocolSpec {
    pub name: String,
    pub sig: Signature,
    /// Declared variables, by name.
    pub vars: BTreeMap<Sym, Sort>,
    /// Axiom equations as written.
    pub axioms: Vec<(Term, Term)>,
    /// Oriented equations as written.
    pub eqs: Vec<(Term, Term)>,
    pub theory: EquationalTheory,
    pub schemas: Vec<StrandSchema>,
    pub attacks: Vec<AttackPattern>,
    pub composition: CompositionSpec,
}

impl ProtocolSpec {
    pub fn empty(name: &str) -> ProtocolSpec {
        ProtocolSpec {
            name: name.to_string(),
            sig: Signature::new(),
            vars: BTreeMap::new(),
            axioms: Vec::new(),
            eqs: Vec::new(),
            theory: EquationalTheory::new(),
            schemas: Vec::new(),
            attacks: Vec::new(),
            composition: CompositionSpec::default(),
        }
    }

    pub fn algebra(&self) -> Algebra {
        Algebra::new(self.sig.clone(), self.theory.clone())
    }

    pub fn schema(&self, role: &str) -> Option<&StrandSchema> {
        self.schemas.iter().find(|s| s.role.as_str() == role)
    }

    pub fn honest(&self) -> impl Iterator<Item = &StrandSchema> {
        self.schemas.iter().filter(|s| !s.intruder)
    }

    pub fn attack(&self, name: &str) -> Result<&AttackPattern, DslError> {
        self.attacks.iter().find(|a| a.name == name).ok_or_else(|| DslError::UnknownAttack(name.to_string()))
    }

    /// Rebuild the theory from the stored equations.
    pub fn rebuild_theory(&mut self) -> Result<(), TermError> {
        let mut th = EquationalTheory::new();
        for (l, r) in &self.axioms {
            th.add_axiom_equation(l, r)?;
        }
        for (l, r) in &self.eqs {
            th.add_equation(l.clone(), r.clone())?;
        }
        self.theory = th;
        Ok(())
    }

    pub fn declare_var(&mut self, v: &Var) -> Result<(), DslError> {
        match self.vars.get(&v.name) {
            Some(s) if *s != v.sort => Err(DslError::Sort {
                line: 0,
                col: 0,
                msg: format!("variable {} declared with sorts {} and {}", v.name, s, v.sort),
            }),
            _ => {
                self.vars.insert(v.name.clone(), v.sort.clone());
                Ok(())
            }
        }
    }

    pub fn roles(&self) -> BTreeSet<&Sym> {
        self.schemas.iter().map(|s| &s.role).collect()
    }
}

/// Protocols in order plus the compositions joining them.
#[derive(Clone, Debug)]
pub struct ComposedSpec {
    pub parts: Vec<ProtocolSpec>,
    pub compositions: Vec<CompositionSpec>,
    /// Attack patterns written against the whole composition.
    pub attacks: Vec<AttackPattern>,
}

impl ComposedSpec {
    pub fn all_triples(&self) -> CompositionSpec {
        CompositionSpec::new(self.compositions.iter().flat_map(|c| c.triples.iter().cloned()).collect())
    }

    /// One specification holding every part, in the parameter syntax.
    /// Signature clashes are load errors.
    pub fn flatten(&self) -> Result<ProtocolSpec, DslError> {
        let name = self.parts.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join("-");
        let mut out = ProtocolSpec::empty(&name);
        for p in &self.parts {
            out.sig = out.sig.merge(&p.sig).map_err(DslError::Load)?;
            for (n, s) in &p.vars {
                out.declare_var(&Var { name: n.clone(), sort: s.clone() })?;
            }
            for e in &p.axioms {
                if !out.axioms.contains(e) {
                    out.axioms.push(e.clone());
                }
            }
            for e in &p.eqs {
                if !out.eqs.contains(e) {
                    out.eqs.push(e.clone());
                }
            }
            for s in &p.schemas {
                if !out.schemas.iter().any(|t| t.role == s.role) {
                    out.schemas.push(s.clone());
                }
            }
            out.attacks.extend(p.attacks.iter().cloned());
        }
        out.attacks.extend(self.attacks.iter().cloned());
        out.rebuild_theory().map_err(DslError::Load)?;
        out.composition = self.all_triples();
        Ok(out)
    }
}

/// Everything in one `.strand` file.
#[derive(Clone, Debug)]
pub struct Document {
    pub protocols: Vec<ProtocolSpec>,
    pub compositions: Vec<CompositionSpec>,
    pub attacks: Vec<AttackPattern>,
}

impl Document {
    pub fn is_composed(&self) -> bool {
        self.protocols.len() > 1 || !self.compositions.is_empty()
    }

    pub fn composed(&self) -> ComposedSpec {
        ComposedSpec { parts: self.protocols.clone(), compositions: self.compositions.clone(), attacks: self.attacks.clone() }
    }

    /// The single specification the file describes: a lone protocol, or the
    /// flattening of a composition.
    pub fn spec(&self) -> Result<ProtocolSpec, DslError> {
        if !self.is_composed() {
            let Some(p) = self.protocols.first() else {
                return Err(DslError::Syntax { line: 1, col: 1, expected: "`protocol`".into(), found: "end of input".into() });
            };
            let mut p = p.clone();
            p.attacks.extend(self.attacks.iter().cloned());
            return Ok(p);
        }
        self.composed().flatten()
    }
}
