use std::collections::BTreeSet;

use strandcomp::term::{Substitution, Term, Var};

use super::{Fixture, ED, FREE, PK, XOR};

/// Substitute, normalize both sides, compare. Written against the public
/// normalizer only.
pub fn solves(f: &Fixture, l: &Term, r: &Term, u: &Substitution) -> bool {
    f.alg.normalize(&u.apply(l)).unwrap() == f.alg.normalize(&u.apply(r)).unwrap()
}

// Ground oracle: every ground solution drawn from a small universe must be
// an instance of a returned unifier.

fn atoms(names: &[&str]) -> Vec<Term> {
    names.iter().map(|n| Term::constant(n)).collect()
}

fn closure(base: &[Term], unary: &[&str], binary: &[&str]) -> Vec<Term> {
    let mut out = base.to_vec();
    for op in unary {
        out.extend(base.iter().map(|a| Term::app(op, vec![a.clone()])));
    }
    for op in binary {
        for a in base {
            for b in base {
                out.push(Term::app(op, vec![a.clone(), b.clone()]));
            }
        }
    }
    out
}

fn xor_universe(f: &Fixture) -> Vec<Term> {
    let base = atoms(&["a", "b", "c"]);
    let mut out = Vec::new();
    for mask in 0u32..8 {
        let parts: Vec<Term> = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| base[i].clone()).collect();
        let t = parts.into_iter().reduce(|x, y| Term::app("⊕", vec![x, y])).unwrap_or(Term::constant("zero"));
        out.push(f.alg.normalize(&t).unwrap());
    }
    out.extend(base.iter().map(|a| Term::app("f", vec![a.clone()])));
    out
}

pub struct Suite {
    pub fixture: Fixture,
    pub universe: Vec<Term>,
    pub problems: Vec<(&'static str, &'static str)>,
}

pub fn suites() -> Vec<Suite> {
    let free = Fixture::new(FREE);
    let ed = Fixture::new(ED);
    let pk = Fixture::new(PK);
    let xor = Fixture::new(XOR);
    let pk_base: Vec<Term> = atoms(&["a", "b", "m"]);
    let mut pk_universe = pk_base.clone();
    for a in atoms(&["a", "b"]) {
        for x in &pk_base {
            pk_universe.push(Term::app("pk", vec![a.clone(), x.clone()]));
            pk_universe.push(Term::app("sk", vec![a.clone(), x.clone()]));
        }
    }
    let xu = xor_universe(&xor);
    vec![
        Suite {
            universe: closure(&atoms(&["a", "b", "c"]), &["f"], &["g"]),
            fixture: free,
            problems: vec![
                ("g(X, a)", "g(b, Y)"),
                ("f(X)", "f(f(Y))"),
                ("g(X, X)", "g(Y, f(Y))"),
                ("g(X, Y)", "g(Y, X)"),
                ("g(X, f(a))", "g(f(Y), Y)"),
            ],
        },
        Suite {
            universe: closure(&atoms(&["a", "b", "c"]), &[], &["e", "d"]),
            fixture: ed,
            problems: vec![
                ("d(K, X)", "Y"),
                ("e(K, X)", "a"),
                ("d(K, X)", "a"),
                ("e(K, X)", "e(a, b)"),
                ("d(a, X)", "d(Y, b)"),
            ],
        },
        Suite {
            universe: pk_universe,
            fixture: pk,
            problems: vec![
                ("sk(A, X)", "m"),
                ("pk(A, X)", "pk(b, Y)"),
                ("sk(A, Y)", "X"),
                ("pk(A, sk(B, X))", "Y"),
            ],
        },
        Suite {
            universe: xu,
            fixture: xor,
            problems: vec![
                ("X ⊕ a", "b"),
                ("X ⊕ Y", "a"),
                ("X ⊕ a", "Y ⊕ b"),
                ("X ⊕ Y", "zero"),
                ("f(X) ⊕ Y", "f(a) ⊕ b"),
                ("a ⊕ b", "zero"),
            ],
        },
    ]
}

fn groundings(vars: &[Var], f: &Fixture, universe: &[Term]) -> Vec<Substitution> {
    let mut out = vec![Substitution::new()];
    for v in vars {
        let choices: Vec<&Term> = universe.iter().filter(|t| f.alg.sig.fits(t, &v.sort)).collect();
        out = out
            .into_iter()
            .flat_map(|s| {
                choices.iter().map(move |t| {
                    let mut s = s.clone();
                    s.insert(v.clone(), (*t).clone());
                    s
                })
            })
            .collect();
    }
    out
}


/// Runs every problem of every suite: each returned unifier must solve its
/// problem and each ground solution must be covered. Returns the number of
/// problems checked.
pub fn check_corpus() -> Result<usize, String> {
    let mut checked = 0;
    for suite in suites() {
        let f = &suite.fixture;
        for (l, r) in &suite.problems {
            let (l, r) = (f.t(l), f.t(r));
            let set = f.alg.unify(&l, &r);
            if !set.complete {
                return Err(format!("{l} = {r}: incomplete"));
            }
            if let Some(u) = set.unifiers.iter().find(|u| !solves(f, &l, &r, u)) {
                return Err(format!("{l} = {r}: unsound {u}"));
            }
            let mut vars: BTreeSet<Var> = l.vars();
            vars.extend(r.vars());
            let vars: Vec<Var> = vars.into_iter().collect();
            for g in groundings(&vars, f, &suite.universe) {
                if !solves(f, &l, &r, &g) {
                    continue;
                }
                let covered = set.unifiers.iter().any(|u| {
                    let pairs: Vec<(Term, Term)> =
                        vars.iter().map(|v| (u.apply(&Term::Var(v.clone())), g.apply(&Term::Var(v.clone())))).collect();
                    !f.alg.match_eqs(&pairs).is_empty()
                });
                if !covered {
                    return Err(format!("{l} = {r}: ground solution {g} not covered"));
                }
            }
            checked += 1;
        }
    }
    Ok(checked)
}
