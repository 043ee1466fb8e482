use std::collections::BTreeMap;

use crate::strand::{Fact, StrandInstance, SymbolicState};
use crate::term::{FreshConst, Substitution, Term, Var};
use crate::unify::Algebra;

/// Shape of a term with variable names and fresh-constant identities
/// erased. Arguments of commutative operators are sorted after erasure.
fn erase(t: &Term, alg: &Algebra, out: &mut String) {
    match t {
        Term::Var(v) => {
            out.push('?');
            out.push_str(v.sort.as_str());
        }
        Term::Fresh(_) => out.push('@'),
        Term::App(a) => {
            out.push_str(a.op.as_str());
            if a.args.is_empty() {
                return;
            }
            let mut parts: Vec<String> = a
                .args
                .iter()
                .map(|s| {
                    let mut b = String::new();
                    erase(s, alg, &mut b);
                    b
                })
                .collect();
            if alg.th.is_comm(&a.op) {
                parts.sort();
            }
            out.push('(');
            out.push_str(&parts.join(","));
            out.push(')');
        }
    }
}

fn erased(t: &Term, alg: &Algebra) -> String {
    let mut s = String::new();
    erase(t, alg, &mut s);
    s
}

fn strand_shape(s: &StrandInstance, alg: &Algebra) -> String {
    let mut out = format!("{}|{}|{}|", s.role, s.bar, s.fresh.len());
    for it in &s.items {
        for t in it.terms() {
            erase(t, alg, &mut out);
            out.push(',');
        }
        out.push(';');
    }
    out
}

/// Rename variables and fresh constants by first occurrence after ordering
/// strands and facts by their erased shape. Equal up to renaming and the
/// axioms means equal result, except for rare ties between same-shaped
/// components that share variables differently.
pub fn canonical_form(st: &SymbolicState, alg: &Algebra) -> SymbolicState {
    let mut strands: Vec<(String, &StrandInstance)> = st.strands.iter().map(|s| (strand_shape(s, alg), s)).collect();
    strands.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mut facts: Vec<(String, &Fact)> = st.facts.iter().map(|f| (erased(&f.term, alg), f)).collect();
    facts.sort_by(|a, b| a.1.kind.cmp(&b.1.kind).then_with(|| a.0.cmp(&b.0)).then_with(|| a.1.cmp(b.1)));
    let mut diseqs: Vec<(String, &(Term, Term))> =
        st.diseqs.iter().map(|d| (format!("{}!{}", erased(&d.0, alg), erased(&d.1, alg)), d)).collect();
    diseqs.sort();

    let mut vars: BTreeMap<Var, Term> = BTreeMap::new();
    let mut ids: BTreeMap<u32, u32> = BTreeMap::new();
    let visit = |t: &Term, vars: &mut BTreeMap<Var, Term>, ids: &mut BTreeMap<u32, u32>| {
        visit_order(t, &mut |leaf| match leaf {
            Term::Var(v) if !vars.contains_key(v) => {
                let n = vars.len();
                vars.insert(v.clone(), Term::Var(Var { name: format!("V{n}").as_str().into(), sort: v.sort.clone() }));
            }
            Term::Fresh(c) if !ids.contains_key(&c.strand) => {
                let n = ids.len() as u32;
                ids.insert(c.strand, n);
            }
            _ => {}
        });
    };
    for (_, s) in &strands {
        for c in &s.fresh {
            if !ids.contains_key(&c.strand) {
                let n = ids.len() as u32;
                ids.insert(c.strand, n);
            }
        }
        for it in &s.items {
            for t in it.terms() {
                visit(t, &mut vars, &mut ids);
            }
        }
    }
    for (_, f) in &facts {
        visit(&f.term, &mut vars, &mut ids);
    }
    for (_, (a, b)) in &diseqs {
        visit(a, &mut vars, &mut ids);
        visit(b, &mut vars, &mut ids);
    }
    let sub = Substitution::from_pairs(vars);
    let ren = |t: &Term| {
        let t = sub.apply(t).map_fresh(&mut |c| Term::Fresh(FreshConst { strand: ids[&c.strand], index: c.index }));
        alg.canonical(&t)
    };
    let mut out = SymbolicState {
        strands: strands
            .iter()
            .map(|(_, s)| {
                let mut n = s.map_terms(ren);
                n.fresh = s.fresh.iter().map(|c| FreshConst { strand: ids[&c.strand], index: c.index }).collect();
                n
            })
            .collect(),
        facts: facts.iter().map(|(_, f)| Fact { kind: f.kind, term: ren(&f.term) }).collect(),
        diseqs: diseqs
            .iter()
            .map(|(_, (a, b))| {
                let (a, b) = (ren(a), ren(b));
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect(),
        depth: st.depth,
    };
    out.strands.sort();
    out.facts.sort();
    out.diseqs.sort();
    out
}

fn visit_order(t: &Term, f: &mut impl FnMut(&Term)) {
    match t {
        Term::App(a) => {
            for s in &a.args {
                visit_order(s, f);
            }
        }
        _ => f(t),
    }
}

/// Stable text encoding of a state up to variable renaming, fresh-constant
/// renaming and the axioms.
pub fn state_key(st: &SymbolicState, alg: &Algebra) -> String {
    let c = canonical_form(st, alg);
    let mut out = String::new();
    for s in &c.strands {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    for f in &c.facts {
        out.push_str(&f.to_string());
        out.push('\n');
    }
    for (a, b) in &c.diseqs {
        out.push_str(&format!("{a} != {b}\n"));
    }
    out
}
