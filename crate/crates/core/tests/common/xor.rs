use std::collections::BTreeMap;

use proptest::prelude::*;
use strandcomp::term::Term;

use super::{Fixture, XOR};

// Random exclusive-or expressions over three atoms, a variable and zero.

#[derive(Clone, Debug)]
pub enum Expr {
    Atom(usize),
    Zero,
    Var,
    F(Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
}

const ATOMS: [&str; 3] = ["a", "b", "c"];

pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0..3usize).prop_map(Expr::Atom), Just(Expr::Zero), Just(Expr::Var)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::F(Box::new(e))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Xor(Box::new(a), Box::new(b))),
        ]
    })
}

fn build(e: &Expr) -> Term {
    match e {
        Expr::Atom(i) => Term::constant(ATOMS[*i]),
        Expr::Zero => Term::constant("zero"),
        Expr::Var => Term::var("X", "Msg"),
        Expr::F(a) => Term::app("f", vec![build(a)]),
        Expr::Xor(a, b) => Term::app("⊕", vec![build(a), build(b)]),
    }
}

/// Reference evaluation: each ⊕-summand is kept iff it occurs an odd number
/// of times, after evaluating below `f`.
fn reference(e: &Expr) -> BTreeMap<String, usize> {
    fn go(e: &Expr, acc: &mut BTreeMap<String, usize>) {
        match e {
            Expr::Zero => {}
            Expr::Xor(a, b) => {
                go(a, acc);
                go(b, acc);
            }
            other => *acc.entry(key(other)).or_default() += 1,
        }
    }
    fn key(e: &Expr) -> String {
        match e {
            Expr::Atom(i) => ATOMS[*i].to_string(),
            Expr::Var => "X".to_string(),
            Expr::F(a) => {
                let inner: Vec<String> = reference(a).into_keys().collect();
                format!("f[{}]", inner.join("+"))
            }
            _ => unreachable!(),
        }
    }
    let mut acc = BTreeMap::new();
    go(e, &mut acc);
    acc.retain(|_, n| *n % 2 == 1);
    acc.values_mut().for_each(|n| *n = 1);
    acc
}

fn summands(t: &Term) -> BTreeMap<String, usize> {
    fn go(t: &Term, acc: &mut BTreeMap<String, usize>) {
        match t.head().map(|s| s.as_str()) {
            Some("⊕") => t.args().iter().for_each(|a| go(a, acc)),
            Some("zero") => {}
            Some("f") => {
                let inner: Vec<String> = summands(&t.args()[0]).into_keys().collect();
                *acc.entry(format!("f[{}]", inner.join("+"))).or_default() += 1;
            }
            _ => *acc.entry(t.to_string()).or_default() += 1,
        }
    }
    let mut acc = BTreeMap::new();
    go(t, &mut acc);
    acc
}

fn shuffle(e: &Expr, flips: &mut impl Iterator<Item = bool>) -> Expr {
    match e {
        Expr::F(a) => Expr::F(Box::new(shuffle(a, flips))),
        Expr::Xor(a, b) => {
            let (a, b) = (shuffle(a, flips), shuffle(b, flips));
            if flips.next().unwrap_or(false) {
                Expr::Xor(Box::new(b), Box::new(a))
            } else {
                Expr::Xor(Box::new(a), Box::new(b))
            }
        }
        other => other.clone(),
    }
}

/// Regroup a ⊕ (b ⊕ c) as (a ⊕ b) ⊕ c wherever it appears.
fn reassociate(e: &Expr) -> Expr {
    match e {
        Expr::F(a) => Expr::F(Box::new(reassociate(a))),
        Expr::Xor(a, b) => match reassociate(b) {
            Expr::Xor(b1, b2) => Expr::Xor(Box::new(Expr::Xor(Box::new(reassociate(a)), b1)), b2),
            b => Expr::Xor(Box::new(reassociate(a)), Box::new(b)),
        },
        other => other.clone(),
    }
}

/// Idempotence, cancellation, identity removal and invariance under
/// permutation and regrouping for one random expression.
pub fn check_xor_laws(e: &Expr, flips: Vec<bool>) -> Result<(), String> {
    let f = Fixture::new(XOR);
    let norm = |t: &Term| f.alg.normalize(t).map_err(|e| e.to_string());
    let t = build(e);
    let nf = norm(&t)?;
    if norm(&nf)? != nf {
        return Err(format!("not idempotent on {nf}"));
    }
    let got = summands(&nf);
    if got.values().any(|n| *n != 1) || got != reference(e) {
        return Err(format!("{t} normalized to {nf}"));
    }
    if norm(&Term::app("⊕", vec![t.clone(), t.clone()]))? != Term::constant("zero") {
        return Err(format!("{t} ⊕ itself is not zero"));
    }
    if norm(&Term::app("⊕", vec![t.clone(), Term::constant("zero")]))? != nf {
        return Err(format!("zero not removed from {t}"));
    }
    let p = build(&shuffle(e, &mut flips.into_iter()));
    if norm(&p)? != nf {
        return Err(format!("permutation {p} differs from {t}"));
    }
    let r = build(&reassociate(e));
    if norm(&r)? != nf {
        return Err(format!("regrouping {r} differs from {t}"));
    }
    Ok(())
}
