use std::collections::BTreeSet;

use crate::strand::{instantiate, Fact, FactKind, Item, Mode, Side, StrandInstance, SymbolicState};
use crate::term::{Substitution, Term, Var, VarGen};

use super::{state_key, BackwardStep, Focus, Model, RuleKind, SemMode, TransitionRule};

/// Payload of an input or output item, with the mode and role lists of a
/// synchronization message.
pub(crate) struct Port<'a> {
    pub terms: &'a [Term],
    pub sync: Option<(&'a [crate::term::Sym], &'a [crate::term::Sym], Mode)>,
}

pub(crate) fn port(it: &Item, side: Side) -> Option<Port<'_>> {
    match it {
        Item::Params(p) if p.side == side => Some(Port { terms: &p.terms, sync: None }),
        Item::Sync(s) if s.side == side => {
            Some(Port { terms: &s.payload, sync: Some((&s.parents, &s.children, s.mode)) })
        }
        _ => None,
    }
}

pub(crate) fn input_of(s: &StrandInstance) -> Option<Port<'_>> {
    s.items.first().and_then(|i| port(i, Side::In))
}

pub(crate) fn output_of(s: &StrandInstance) -> Option<Port<'_>> {
    s.items.last().and_then(|i| port(i, Side::Out))
}

impl Model {
    /// May `parent`'s output feed `child`'s input, and in which mode?
    pub(crate) fn connection(&self, parent: &StrandInstance, out: &Port, child: &StrandInstance, inp: &Port) -> Option<Mode> {
        match self.mode {
            SemMode::Basic => None,
            SemMode::Abstract => {
                if out.sync.is_some() || inp.sync.is_some() {
                    return None;
                }
                self.comps
                    .triples
                    .iter()
                    .find(|t| t.parent == parent.role && t.child == child.role)
                    .map(|t| t.mode)
            }
            SemMode::Sync => {
                let (_, kids, m1) = out.sync?;
                let (parents, _, m2) = inp.sync?;
                (m1 == m2 && kids.contains(&child.role) && parents.contains(&parent.role)).then_some(m1)
            }
        }
    }

    pub(crate) fn rule_kinds(&self) -> (RuleKind, RuleKind, RuleKind) {
        match self.mode {
            SemMode::Sync => (RuleKind::SyncCompose, RuleKind::Sync1Many, RuleKind::SyncNewParent),
            _ => (RuleKind::Compose11, RuleKind::Compose1Many, RuleKind::ComposeNewParent),
        }
    }

    /// Instance of `role` introduced into `st`, renamed apart from it.
    pub(crate) fn introduce(&self, st: &SymbolicState, role: &crate::term::Sym, bar: usize) -> Option<StrandInstance> {
        let schema = self.schema(role)?;
        let mut next = st.next_fresh_id();
        let mut gen = VarGen::new();
        gen.reserve_vars(st.vars().iter());
        Some(instantiate(schema, &mut next, &mut gen, bar))
    }
}

/// The equations a rule application has to solve, and the strand it
/// introduces. `None` when the rule does not fit the focus.
fn equations(m: &Model, st: &SymbolicState, rule: &TransitionRule, f: Focus) -> Option<(Vec<(Term, Term)>, Option<StrandInstance>)> {
    let strand = |i: Option<usize>| i.and_then(|i| st.strands.get(i));
    match rule.kind {
        RuleKind::Recv | RuleKind::SendSilent => {
            let s = strand(f.strand)?;
            let want = if rule.kind == RuleKind::Recv { crate::strand::Dir::Recv } else { crate::strand::Dir::Send };
            let msg = s.last_past()?.as_msg()?;
            (msg.dir == want && f.fact.is_none() && f.partner.is_none()).then(|| (Vec::new(), None))
        }
        RuleKind::SendLearn => {
            let s = strand(f.strand)?;
            let msg = s.last_past()?.as_msg()?;
            let fact = st.facts.get(f.fact?)?;
            (msg.dir == crate::strand::Dir::Send && fact.kind == FactKind::Known)
                .then(|| (vec![(msg.term.clone(), fact.term.clone())], None))
        }
        RuleKind::IntroStrand => {
            let fact = st.facts.get(f.fact?)?;
            if fact.kind != FactKind::Known || f.strand.is_some() {
                return None;
            }
            let pos = rule.position?;
            let inst = m.introduce(st, rule.schema.as_ref()?, pos)?;
            let msg = inst.items.get(pos)?.as_msg()?.clone();
            (msg.dir == crate::strand::Dir::Send).then(|| (vec![(msg.term, fact.term.clone())], Some(inst)))
        }
        RuleKind::Compose11 | RuleKind::SyncCompose | RuleKind::Compose1Many | RuleKind::Sync1Many => {
            let (compose, many, _) = m.rule_kinds();
            if rule.kind != compose && rule.kind != many {
                return None;
            }
            let child = strand(f.strand)?;
            let parent = strand(f.partner)?;
            if f.strand == f.partner || child.bar != 1 || f.fact.is_some() {
                return None;
            }
            let (inp, out) = (input_of(child)?, output_of(parent)?);
            let mode = m.connection(parent, &out, child, &inp)?;
            let parent_bar_ok = if rule.kind == compose {
                parent.is_done()
            } else {
                mode == Mode::OneToMany && parent.bar + 1 == parent.items.len()
            };
            if !parent_bar_ok || inp.terms.len() != out.terms.len() {
                return None;
            }
            Some((inp.terms.iter().cloned().zip(out.terms.iter().cloned()).collect(), None))
        }
        RuleKind::ComposeNewParent | RuleKind::SyncNewParent => {
            if rule.kind != m.rule_kinds().2 || f.partner.is_some() || f.fact.is_some() {
                return None;
            }
            let child = strand(f.strand)?;
            if child.bar != 1 {
                return None;
            }
            let schema = m.schema(rule.schema.as_ref()?)?;
            let pos = schema.items.len().checked_sub(1)?;
            if rule.position != Some(pos) {
                return None;
            }
            let inst = m.introduce(st, &schema.role, pos)?;
            let (inp, out) = (input_of(child)?, output_of(&inst)?);
            m.connection(&inst, &out, child, &inp)?;
            if inp.terms.len() != out.terms.len() {
                return None;
            }
            let eqs = inp.terms.iter().cloned().zip(out.terms.iter().cloned()).collect();
            Some((eqs, Some(inst)))
        }
    }
}

/// The predecessor a rule produces under `unifier`, before normalization.
fn shape(st: &SymbolicState, rule: &TransitionRule, f: Focus, new: Option<StrandInstance>) -> SymbolicState {
    let mut pre = st.clone();
    let retract = |pre: &mut SymbolicState, i: usize| pre.strands[i].bar -= 1;
    match rule.kind {
        RuleKind::Recv => {
            let i = f.strand.expect("focus");
            let t = pre.strands[i].last_past().and_then(|x| x.as_msg()).expect("message").term.clone();
            retract(&mut pre, i);
            pre.facts.push(Fact::known(t));
        }
        RuleKind::SendSilent => retract(&mut pre, f.strand.expect("focus")),
        RuleKind::SendLearn => {
            retract(&mut pre, f.strand.expect("focus"));
            pre.facts[f.fact.expect("fact")].kind = FactKind::ToLearn;
        }
        RuleKind::IntroStrand => {
            pre.facts[f.fact.expect("fact")].kind = FactKind::ToLearn;
            pre.strands.push(new.expect("introduced strand"));
        }
        RuleKind::Compose11 | RuleKind::SyncCompose => {
            retract(&mut pre, f.strand.expect("focus"));
            retract(&mut pre, f.partner.expect("partner"));
        }
        RuleKind::Compose1Many | RuleKind::Sync1Many => retract(&mut pre, f.strand.expect("focus")),
        RuleKind::ComposeNewParent | RuleKind::SyncNewParent => {
            retract(&mut pre, f.strand.expect("focus"));
            pre.strands.push(new.expect("introduced strand"));
        }
    }
    pre.depth = st.depth + 1;
    pre
}

/// Rename variables the unifier invented so they avoid every variable of
/// the state, not only those of the equations.
fn freshen(u: Substitution, eq_vars: &BTreeSet<Var>, avoid: &BTreeSet<Var>) -> Substitution {
    let invented: Vec<Var> = u.range_vars().into_iter().filter(|v| !eq_vars.contains(v)).collect();
    if invented.iter().all(|v| !avoid.contains(v)) {
        return u;
    }
    let mut gen = VarGen::new();
    gen.reserve_vars(avoid.iter());
    gen.reserve_vars(invented.iter());
    gen.reserve_vars(eq_vars.iter());
    let ren = gen.renaming(invented.iter());
    u.map_range(|t| ren.apply(t))
}

fn finish(m: &Model, pre: SymbolicState, u: &Substitution) -> Option<SymbolicState> {
    let mut p = pre.apply(u).canonicalize(&m.alg)?;
    p.depth = pre.depth;
    for (a, b) in &p.diseqs {
        if m.alg.equal(a, b) {
            return None;
        }
    }
    Some(p)
}

/// Recompute the predecessor of a recorded step. `None` when the rule does
/// not apply at the focus, the unifier does not solve the rule's
/// equations, or the result is dead.
pub fn rebuild_step(m: &Model, st: &SymbolicState, rule: &TransitionRule, f: Focus, u: &Substitution) -> Option<SymbolicState> {
    let (eqs, new) = equations(m, st, rule, f)?;
    if !m.alg.check_unifier(&eqs, u) {
        return None;
    }
    finish(m, shape(st, rule, f, new), u)
}

fn candidates(m: &Model, st: &SymbolicState) -> Vec<(TransitionRule, Focus)> {
    let mut out = Vec::new();
    let one = |i: usize| Focus { strand: Some(i), partner: None, fact: None };
    for (i, s) in st.strands.iter().enumerate() {
        match s.last_past() {
            Some(Item::Msg(msg)) => match msg.dir {
                crate::strand::Dir::Recv => out.push((TransitionRule::generic(RuleKind::Recv), one(i))),
                crate::strand::Dir::Send => {
                    out.push((TransitionRule::generic(RuleKind::SendSilent), one(i)));
                    for (k, f) in st.facts.iter().enumerate() {
                        if f.kind == FactKind::Known {
                            out.push((
                                TransitionRule::generic(RuleKind::SendLearn),
                                Focus { strand: Some(i), partner: None, fact: Some(k) },
                            ));
                        }
                    }
                }
            },
            Some(_) if s.bar == 1 && m.mode != SemMode::Basic && input_of(s).is_some() => {
                let (compose, many, new_parent) = m.rule_kinds();
                for j in 0..st.strands.len() {
                    if j != i {
                        let f = Focus { strand: Some(i), partner: Some(j), fact: None };
                        out.push((TransitionRule::generic(compose), f));
                        out.push((TransitionRule::generic(many), f));
                    }
                }
                for sch in &m.schemas {
                    if let Some(pos) = sch.items.len().checked_sub(1) {
                        if sch.output().is_some() {
                            out.push((TransitionRule::generated(new_parent, sch.role.clone(), pos), one(i)));
                        }
                    }
                }
            }
            _ => {}
        }
    }
    for (k, f) in st.facts.iter().enumerate() {
        if f.kind != FactKind::Known {
            continue;
        }
        for sch in &m.schemas {
            for (pos, it) in sch.items.iter().enumerate() {
                if matches!(it, Item::Msg(x) if x.dir == crate::strand::Dir::Send) {
                    out.push((
                        TransitionRule::generated(RuleKind::IntroStrand, sch.role.clone(), pos),
                        Focus { strand: None, partner: None, fact: Some(k) },
                    ));
                }
            }
        }
    }
    out
}

/// All one-step predecessors of `st` under the reversed rules of the
/// model's mode, sorted by state key. Duplicates reached by the same rule
/// kind are merged.
pub fn backward_successors(m: &Model, st: &SymbolicState) -> Vec<BackwardStep> {
    let mut found: Vec<(String, BackwardStep)> = Vec::new();
    for (rule, f) in candidates(m, st) {
        let Some((eqs, new)) = equations(m, st, &rule, f) else { continue };
        let pre = shape(st, &rule, f, new);
        let (unifiers, complete) = if eqs.is_empty() {
            (vec![Substitution::new()], true)
        } else {
            let set = m.alg.unify_eqs(&eqs, &BTreeSet::new());
            let mut eq_vars = BTreeSet::new();
            for (a, b) in &eqs {
                a.collect_vars(&mut eq_vars);
                b.collect_vars(&mut eq_vars);
            }
            let avoid: BTreeSet<Var> = pre.vars();
            let us = set.unifiers.into_iter().map(|u| freshen(u, &eq_vars, &avoid)).collect();
            (us, set.complete)
        };
        for u in unifiers {
            if let Some(p) = finish(m, pre.clone(), &u) {
                let key = state_key(&p, &m.alg);
                found.push((key, BackwardStep { rule: rule.clone(), focus: f, unifier: u, predecessor: p, incomplete: !complete }));
            }
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.rule.cmp(&b.1.rule)));
    found.dedup_by(|a, b| a.0 == b.0 && a.1.rule.kind == b.1.rule.kind);
    found.into_iter().map(|(_, s)| s).collect()
}
