use thiserror::Error;

use crate::dsl::{Action, ProtocolSpec, Scenario};
use crate::semantics::{Focus, Model, RuleKind, SemMode, TransitionRule};
use crate::strand::{Fact, FactKind, StrandInstance, SymbolicState};
use crate::term::{Substitution, Term};

use super::subsume::instantiates_pattern;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Invalid { line: usize, msg: String },
}

/// Outcome of a valid scenario.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub state: SymbolicState,
    pub actions: usize,
    /// Attack patterns of the spec the final state instantiates.
    pub instantiates: Vec<String>,
}

fn invalid(line: usize, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { line, msg: msg.into() }
}

/// The scenario's strands, ground and at their start. Strand `k` of the
/// result is the `k`-th declared strand.
pub fn scenario_state(m: &Model, sc: &Scenario) -> Result<SymbolicState, ScenarioError> {
    let mut strands = Vec::new();
    for d in &sc.strands {
        let schema = m.schema(&d.role).ok_or_else(|| invalid(d.line, format!("unknown role {}", d.role)))?;
        let mut sub = Substitution::new();
        for (v, c) in schema.fresh.iter().zip(&d.fresh) {
            sub.insert(v.clone(), Term::Fresh(*c));
        }
        for (v, t) in &d.bindings {
            let t = m.alg.normalize(t).map_err(|e| invalid(d.line, format!("{}: {e}", d.name)))?;
            if !t.is_ground() {
                return Err(invalid(d.line, format!("{}: binding of {} is not ground", d.name, v.name)));
            }
            sub.insert(v.clone(), t);
        }
        let inst = StrandInstance { role: d.role.clone(), items: schema.items.clone(), bar: 0, fresh: d.fresh.clone() };
        let mut bad = None;
        let inst = inst.map_terms(|t| {
            let t = sub.apply(t);
            m.alg.normalize(&t).unwrap_or_else(|e| {
                bad = Some(e);
                t
            })
        });
        if let Some(e) = bad {
            return Err(invalid(d.line, format!("{}: {e}", d.name)));
        }
        if let Some(v) = inst.vars().into_iter().next() {
            return Err(invalid(d.line, format!("{}: variable {} is not bound", d.name, v.name)));
        }
        strands.push(inst);
    }
    Ok(SymbolicState::new(strands, Vec::new(), Vec::new()))
}

fn step(m: &Model, st: &SymbolicState, i: usize, name: &str, line: usize) -> Result<SymbolicState, ScenarioError> {
    let s = &st.strands[i];
    let Some(item) = s.next() else {
        return Err(invalid(line, format!("{name} has already finished")));
    };
    let Some(msg) = item.as_msg() else {
        return Err(invalid(line, format!("{name} waits for a synchronization, not a message")));
    };
    let known = |t: &Term| st.facts.iter().position(|f| f.kind == FactKind::Known && m.alg.equal(&f.term, t));
    let one = |fact| Focus { strand: Some(i), partner: None, fact };
    let fired = match msg.dir {
        crate::strand::Dir::Recv => {
            let Some(k) = known(&msg.term) else {
                return Err(invalid(line, format!("{name} expects {} but the intruder cannot send it", msg.term)));
            };
            m.fire(st, &TransitionRule::generic(RuleKind::Recv), one(Some(k)))
        }
        crate::strand::Dir::Send => {
            if known(&msg.term).is_some() {
                m.fire(st, &TransitionRule::generic(RuleKind::SendSilent), one(None))
            } else {
                let mut with = st.clone();
                with.facts.push(Fact::to_learn(msg.term.clone()));
                let k = with.facts.len() - 1;
                m.fire(&with, &TransitionRule::generic(RuleKind::SendLearn), one(Some(k)))
            }
        }
    };
    fired.ok_or_else(|| invalid(line, format!("{name} cannot take its next step")))
}

fn sync(m: &Model, st: &SymbolicState, parent: usize, child: usize, names: (&str, &str), line: usize) -> Result<SymbolicState, ScenarioError> {
    let f = Focus { strand: Some(child), partner: Some(parent), fact: None };
    let (compose, many, _) = m.rule_kinds();
    // a one-to-many parent stays available for further children
    m.fire(st, &TransitionRule::generic(many), f)
        .or_else(|| m.fire(st, &TransitionRule::generic(compose), f))
        .ok_or_else(|| invalid(line, format!("{} cannot hand its parameters to {}", names.0, names.1)))
}

/// Execute `sc` forwards on `spec` under the synchronization rules and
/// report which attack patterns the final state instantiates.
pub fn run_scenario(spec: &ProtocolSpec, sc: &Scenario) -> Result<ScenarioRun, ScenarioError> {
    let m = Model::new(spec, SemMode::Sync);
    let mut st = scenario_state(&m, sc)?;
    let name = |i: usize| sc.strands[i].name.as_str();
    for a in &sc.actions {
        st = match *a {
            Action::Step { strand, line } => step(&m, &st, strand, name(strand), line)?,
            Action::Sync { parent, child, line } => sync(&m, &st, parent, child, (name(parent), name(child)), line)?,
        };
    }
    let mut instantiates = Vec::new();
    for p in &spec.attacks {
        if !st.strands.is_empty() && instantiates_pattern(&m, p, &st).unwrap_or(false) {
            instantiates.push(p.name.clone());
        }
    }
    Ok(ScenarioRun { state: st, actions: sc.actions.len(), instantiates })
}
