use crate::strand::{Dir, FactKind, Mode, SymbolicState};

use super::backward::{input_of, output_of};
use super::{Focus, Model, RuleKind, SemMode, TransitionRule};

/// A forward successor and the rule that produced it.
#[derive(Clone, Debug)]
pub struct ForwardStep {
    pub rule: TransitionRule,
    pub focus: Focus,
    pub state: SymbolicState,
}

impl Model {
    /// Fire one rule forwards at `f` on a ground state. Strand order is
    /// kept; removed strands disappear from the vector.
    pub fn fire(&self, st: &SymbolicState, rule: &TransitionRule, f: Focus) -> Option<SymbolicState> {
        let alg = &self.alg;
        let mut next = st.clone();
        match rule.kind {
            RuleKind::Recv | RuleKind::SendSilent | RuleKind::SendLearn => {
                let i = f.strand?;
                let msg = st.strands.get(i)?.next()?.as_msg()?;
                match rule.kind {
                    RuleKind::Recv => {
                        let k = st.facts.get(f.fact?)?;
                        if msg.dir != Dir::Recv || k.kind != FactKind::Known || !alg.equal(&msg.term, &k.term) {
                            return None;
                        }
                    }
                    RuleKind::SendSilent => {
                        if msg.dir != Dir::Send || f.fact.is_some() {
                            return None;
                        }
                    }
                    _ => {
                        let k = f.fact?;
                        let fact = st.facts.get(k)?;
                        if msg.dir != Dir::Send || fact.kind != FactKind::ToLearn || !alg.equal(&msg.term, &fact.term) {
                            return None;
                        }
                        next.facts[k].kind = FactKind::Known;
                    }
                }
                next.strands[i].bar += 1;
            }
            RuleKind::IntroStrand => {
                let i = f.strand?;
                let s = st.strands.get(i)?;
                let msg = s.next()?.as_msg()?;
                let k = f.fact?;
                let fact = st.facts.get(k)?;
                if msg.dir != Dir::Send
                    || fact.kind != FactKind::ToLearn
                    || !alg.equal(&msg.term, &fact.term)
                    || rule.schema.as_ref() != Some(&s.role)
                    || rule.position != Some(s.bar)
                {
                    return None;
                }
                next.facts[k].kind = FactKind::Known;
                next.strands.remove(i);
            }
            _ => {
                let (compose, many, new_parent) = self.rule_kinds();
                if self.mode == SemMode::Basic || ![compose, many, new_parent].contains(&rule.kind) {
                    return None;
                }
                let (i, j) = (f.strand?, f.partner?);
                let (child, parent) = (st.strands.get(i)?, st.strands.get(j)?);
                if i == j || child.bar != 0 || parent.bar + 1 != parent.items.len() {
                    return None;
                }
                let (inp, out) = (input_of(child)?, output_of(parent)?);
                let mode = self.connection(parent, &out, child, &inp)?;
                if inp.terms.len() != out.terms.len() || !inp.terms.iter().zip(out.terms).all(|(a, b)| alg.equal(a, b)) {
                    return None;
                }
                next.strands[i].bar = 1;
                if rule.kind == compose {
                    next.strands[j].bar += 1;
                } else if rule.kind == many {
                    if mode != Mode::OneToMany {
                        return None;
                    }
                } else {
                    if rule.schema.as_ref() != Some(&parent.role) || rule.position != Some(parent.bar) {
                        return None;
                    }
                    next.strands.remove(j);
                }
            }
        }
        next.depth = st.depth + 1;
        Some(next)
    }
}

/// Every forward successor of a ground state.
pub fn forward_step(m: &Model, st: &SymbolicState) -> Vec<ForwardStep> {
    let mut cands: Vec<(TransitionRule, Focus)> = Vec::new();
    let generic = TransitionRule::generic;
    for (i, s) in st.strands.iter().enumerate() {
        let one = |fact| Focus { strand: Some(i), partner: None, fact };
        if let Some(msg) = s.next().and_then(|x| x.as_msg()) {
            match msg.dir {
                Dir::Recv => {
                    for k in 0..st.facts.len() {
                        cands.push((generic(RuleKind::Recv), one(Some(k))));
                    }
                }
                Dir::Send => {
                    cands.push((generic(RuleKind::SendSilent), one(None)));
                    for k in 0..st.facts.len() {
                        cands.push((generic(RuleKind::SendLearn), one(Some(k))));
                        cands.push((TransitionRule::generated(RuleKind::IntroStrand, s.role.clone(), s.bar), one(Some(k))));
                    }
                }
            }
        }
        if s.bar == 0 && input_of(s).is_some() && m.mode != SemMode::Basic {
            let (compose, many, new_parent) = m.rule_kinds();
            for (j, p) in st.strands.iter().enumerate() {
                let f = Focus { strand: Some(i), partner: Some(j), fact: None };
                cands.push((generic(compose), f));
                cands.push((generic(many), f));
                cands.push((TransitionRule::generated(new_parent, p.role.clone(), p.bar), f));
            }
        }
    }
    let mut out: Vec<ForwardStep> = cands
        .into_iter()
        .filter_map(|(rule, focus)| {
            let state = m.fire(st, &rule, focus)?.canonicalize(&m.alg)?;
            Some(ForwardStep { rule, focus, state })
        })
        .collect();
    out.sort_by(|a, b| a.state.cmp(&b.state).then_with(|| a.rule.cmp(&b.rule)));
    out.dedup_by(|a, b| a.state == b.state && a.rule == b.rule);
    out
}
