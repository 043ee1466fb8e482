mod common;

use common::golden;
use strandcomp::search::pattern_state;
use strandcomp::semantics::{Model, SemMode};
use strandcomp::strand::{
    check_wellformed, instantiate, Fact, Item, Params, Side, StrandForm, StrandInstance, StrandSchema, SymbolicState,
};
use strandcomp::term::{FreshConst, Sym, Term, Var, VarGen};

#[test]
fn instantiation_mints_fresh_constants() {
    let spec = golden("nsl.strand");
    let init = spec.schemas.iter().find(|s| s.role.as_str() == "NSL.init").unwrap();
    let mut next = 17;
    let mut gen = VarGen::new();
    let s = instantiate(init, &mut next, &mut gen, 0);
    assert_eq!(next, 18);
    assert_eq!(s.fresh, vec![FreshConst { strand: 17, index: 0 }]);
    let first = s.items[0].as_msg().unwrap();
    assert!(first.term.to_string().contains(&Term::fresh(17, 0).to_string()), "{first}");
    // a second copy shares no variables with the first
    let t = instantiate(init, &mut next, &mut gen, 0);
    assert!(s.vars().is_disjoint(&t.vars()));
    assert_ne!(s.fresh, t.fresh);
}

#[test]
fn void_strand_has_two_items() {
    let x = Var::new("X", "Msg");
    let void = StrandSchema {
        role: Sym::new("V"),
        fresh: vec![],
        items: vec![
            Item::Params(Params { side: Side::In, terms: vec![Term::Var(x.clone())] }),
            Item::Params(Params { side: Side::Out, terms: vec![Term::Var(x)] }),
        ],
        intruder: false,
    };
    assert_eq!(void.form(), StrandForm::Void);
    let s = instantiate(&void, &mut 0, &mut VarGen::new(), 0);
    assert_eq!(s.items.len(), 2);
    assert!(s.fresh.is_empty());
}

fn one_strand(bar: usize) -> StrandInstance {
    let spec = golden("nsl.strand");
    let init = spec.schemas.iter().find(|s| s.role.as_str() == "NSL.init").unwrap();
    instantiate(init, &mut 0, &mut VarGen::new(), bar)
}

#[test]
fn initial_states() {
    let m = Term::constant("a");
    let st = SymbolicState::new(vec![one_strand(0)], vec![Fact::to_learn(m.clone())], vec![]);
    assert!(st.is_initial());
    let st = SymbolicState::new(vec![one_strand(0)], vec![Fact::known(m)], vec![]);
    assert!(!st.is_initial());
    assert!(SymbolicState::default().is_initial());
    assert!(!SymbolicState::new(vec![one_strand(1)], vec![], vec![]).is_initial());
}

#[test]
fn wellformedness_violations() {
    let spec = golden("nsl.strand");
    let alg = spec.algebra();
    let m = Term::constant("a");
    let clash = SymbolicState::new(vec![], vec![Fact::known(m.clone()), Fact::to_learn(m)], vec![]);
    assert!(!check_wellformed(&clash, &alg).is_empty());
    let mut s = one_strand(0);
    s.bar = s.items.len() + 1;
    let past_end = SymbolicState::new(vec![s], vec![], vec![]);
    assert!(!check_wellformed(&past_end, &alg).is_empty());
}

#[test]
fn golden_attack_states_are_wellformed() {
    for (file, attack) in [("nsl.strand", "secrecy"), ("nsl-db.strand", "NSL-DB-a0-SM"), ("nsl-db.strand", "NSL-DB-a1-SM")] {
        let spec = golden(file);
        let p = spec.attack(attack).unwrap();
        for mode in [SemMode::Basic, SemMode::Sync] {
            let m = Model::new(&spec, mode);
            let st = pattern_state(&m, p).unwrap();
            assert!(check_wellformed(&st, &m.alg).is_empty(), "{attack} {mode}: {:?}", check_wellformed(&st, &m.alg));
        }
    }
}

#[test]
fn canonicalization_is_stable() {
    let spec = golden("nsl-db.strand");
    let m = Model::new(&spec, SemMode::Sync);
    let st = pattern_state(&m, spec.attack("NSL-DB-a1-SM").unwrap()).unwrap();
    let again = st.canonicalize(&m.alg).unwrap();
    assert_eq!(again.canonicalize(&m.alg).unwrap(), again);
}
