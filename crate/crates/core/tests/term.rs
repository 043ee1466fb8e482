mod common;

use std::collections::BTreeSet;

use common::xor::{check_xor_laws, expr};
use common::{Fixture, PK, XOR};
use proptest::prelude::*;
use strandcomp::term::{rename_apart, Position, Sort, Substitution, Sym, Term, TermError, Var};

fn msg(name: &str) -> Var {
    Var::new(name, "Msg")
}

#[test]
fn least_sorts() {
    let f = Fixture::new(PK);
    let sort = |s: &str| f.alg.sig.least_sort(&f.t(s)).unwrap();
    assert_eq!(sort("A"), Sort::new("Name"));
    assert_eq!(sort("n(a, r)"), Sort::new("Nonce"));
    assert_eq!(sort("pk(b, n(a, r))"), Sort::msg());
}

#[test]
fn ill_sorted_application_is_rejected() {
    let f = Fixture::new(PK);
    let bad = Term::app("pk", vec![f.t("m"), f.t("m")]);
    assert!(matches!(f.alg.sig.least_sort(&bad), Err(TermError::IllTyped(_))));
}

#[test]
fn apply_substitution() {
    let f = Fixture::new(PK);
    let s = Substitution::from_pairs([(msg("K"), f.t("key(A, B)")), (msg("X"), f.t("n(A, r)"))]);
    assert_eq!(s.apply(&f.t("e(K, X)")), f.t("e(key(A, B), n(A, r))"));
    let t = f.t("pk(B, n(A, r) ; A)");
    assert_eq!(Substitution::new().apply(&t), t);
    let c = Term::fresh(3, 0);
    assert_eq!(Substitution::singleton(msg("X"), f.t("m")).apply(&c), c);
}

#[test]
fn compose_substitutions() {
    let a = Term::constant("a");
    let s = Substitution::singleton(msg("X"), Term::var("Y", "Msg"));
    let t = Substitution::singleton(msg("Y"), a.clone());
    let c = s.compose(&t);
    assert_eq!(c.get(&msg("X")), Some(&a));
    assert_eq!(c.get(&msg("Y")), Some(&a));
    assert_eq!(Substitution::new().compose(&s), s);

    let s = Substitution::singleton(msg("X"), Term::app("f", vec![Term::var("Y", "Msg")]));
    let t = Substitution::singleton(msg("Y"), Term::app("g", vec![Term::var("Z", "Msg")]));
    let c = s.compose(&t);
    assert_eq!(c.get(&msg("X")).unwrap().to_string(), "f(g(Z))");
    assert_eq!(c.get(&msg("Y")).unwrap().to_string(), "g(Z)");
}

#[test]
fn rename_apart_avoids_reserved_names() {
    let f = Fixture::new(PK);
    let t = f.t("pk(B, NA)");
    let reserved: BTreeSet<Sym> = [Sym::new("B")].into_iter().collect();
    let (out, ren) = rename_apart(&[t.clone()], &reserved);
    let vars = out[0].vars();
    assert_eq!(vars.len(), 2);
    assert!(vars.iter().all(|v| v.name.as_str() != "B" && v.name.as_str() != "NA"));
    assert!(ren.is_renaming());
    assert_eq!(ren.apply(&t), out[0]);

    let g = f.t("pk(a, m)");
    let (out, ren) = rename_apart(&[g.clone()], &reserved);
    assert_eq!(out[0], g);
    assert!(ren.is_empty());
}

#[test]
fn positions() {
    let f = Fixture::new(PK);
    let t = f.t("pk(B, n(A, r))");
    assert_eq!(t.subterm_at(&Position(vec![2])).unwrap(), &f.t("n(A, r)"));
    assert_eq!(t.subterm_at(&Position::root()).unwrap(), &t);
    assert!(matches!(t.subterm_at(&Position(vec![3])), Err(TermError::InvalidPosition(_))));
    let u = f.t("pk(B, X)").replace_at(&Position(vec![2]), f.t("n(A, r)")).unwrap();
    assert_eq!(u, t);
}

#[test]
fn normal_forms() {
    let f = Fixture::new(PK);
    assert_eq!(f.alg.normalize(&f.t("sk(a, pk(a, m))")).unwrap(), f.t("m"));
    assert_eq!(f.alg.normalize(&f.t("sk(b, pk(a, m))")).unwrap(), f.t("sk(b, pk(a, m))"));

    let ed = Fixture::new(common::ED);
    assert_eq!(ed.alg.normalize(&ed.t("d(k, e(k, z))")).unwrap(), ed.t("z"));

    let x = Fixture::new(XOR);
    let t = x.t("n(a, r) ⊕ n(b, r') ⊕ n(a, r)");
    assert_eq!(x.alg.normalize(&t).unwrap(), x.alg.canonical(&x.t("n(b, r')")));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn xor_normalization_laws(e in expr(), flips in proptest::collection::vec(any::<bool>(), 32)) {
        check_xor_laws(&e, flips).map_err(TestCaseError::fail)?;
    }
}

fn free_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::constant("a")),
        Just(Term::constant("b")),
        Just(Term::var("X", "Msg")),
        Just(Term::var("Y", "Msg")),
        Just(Term::var("Z", "Msg")),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Term::app("f", vec![a])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app("g", vec![a, b])),
        ]
    })
}

fn subst() -> impl Strategy<Value = Substitution> {
    proptest::collection::vec(proptest::option::of(free_term()), 3).prop_map(|ts| {
        Substitution::from_pairs(
            ["X", "Y", "Z"].into_iter().zip(ts).filter_map(|(v, t)| t.map(|t| (Var::new(v, "Msg"), t))),
        )
    })
}

proptest! {
    #[test]
    fn composition_applies_in_sequence(s in subst(), t in subst(), u in free_term()) {
        prop_assert_eq!(s.compose(&t).apply(&u), t.apply(&s.apply(&u)));
    }

    #[test]
    fn composition_is_associative(s in subst(), t in subst(), v in subst(), u in free_term()) {
        let left = s.compose(&t).compose(&v);
        let right = s.compose(&t.compose(&v));
        prop_assert_eq!(left.apply(&u), right.apply(&u));
    }

    #[test]
    fn replace_then_read_back(u in free_term(), w in free_term(), pick in any::<prop::sample::Index>()) {
        let mut ps = u.positions();
        ps.push(Position::root());
        let p = &ps[pick.index(ps.len())];
        let r = u.replace_at(p, w.clone()).unwrap();
        prop_assert_eq!(r.subterm_at(p).unwrap(), &w);
    }
}
