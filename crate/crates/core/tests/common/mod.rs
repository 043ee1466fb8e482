#![allow(dead_code)]

pub mod corpus;
pub mod xor;

use std::path::PathBuf;

use strandcomp::dsl::{parse_document, parse_spec, parse_term, ProtocolSpec};
use strandcomp::term::Term;
use strandcomp::unify::Algebra;

pub fn spec_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(spec_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn golden(name: &str) -> ProtocolSpec {
    parse_document(&read(name)).unwrap().spec().unwrap()
}

/// Shared-key encryption with cancellation both ways.
pub const ED: &str = "protocol ED {
  sorts Name;
  subsort Name < Msg;
  op e : Msg Msg -> Msg;
  op d : Msg Msg -> Msg;
  op f : Msg -> Msg;
  ops a b c k z : -> Msg;
  vars K X Y Z : Msg;
  eq d(K, e(K, Z)) = Z;
  eq e(K, d(K, Z)) = Z;
}";

/// Public-key encryption with the matching signature cancellation.
pub const PK: &str = "protocol PK {
  sorts Name Nonce;
  subsort Name < Msg;
  subsort Nonce < Msg;
  op pk : Name Msg -> Msg;
  op sk : Name Msg -> Msg;
  op n : Name Fresh -> Nonce;
  op ; : Msg Msg -> Msg;
  op h : Msg Msg -> Msg;
  op key : Name Name -> Msg;
  op e : Msg Msg -> Msg;
  ops a b i : -> Name;
  op m : -> Msg;
  vars A B C D : Name;
  vars K M N X Y : Msg;
  vars NA : Nonce;
  vars r r' : Fresh;
  eq pk(A, sk(A, M)) = M;
  eq sk(A, pk(A, M)) = M;
}";

/// Exclusive-or over a few atoms.
pub const XOR: &str = "protocol XOR {
  sorts Name Nonce;
  subsort Name < Msg;
  subsort Nonce < Msg;
  op n : Name Fresh -> Nonce;
  op ⊕ : Msg Msg -> Msg;
  op zero : -> Msg;
  op f : Msg -> Msg;
  ops a b c : -> Name;
  vars A B : Name;
  vars N X Y Z : Msg;
  vars r r' : Fresh;
  axiom X ⊕ Y = Y ⊕ X;
  axiom X ⊕ (Y ⊕ Z) = (X ⊕ Y) ⊕ Z;
  axiom X ⊕ zero = X;
  eq X ⊕ X = zero;
  eq X ⊕ X ⊕ Y = Y;
}";

/// No equations at all.
pub const FREE: &str = "protocol FREE {
  sorts Name;
  subsort Name < Msg;
  op f : Msg -> Msg;
  op g : Msg Msg -> Msg;
  op e : Msg Msg -> Msg;
  ops a b c : -> Msg;
  vars A : Name;
  vars K M X Y Z : Msg;
}";

pub struct Fixture {
    pub spec: ProtocolSpec,
    pub alg: Algebra,
}

impl Fixture {
    pub fn new(src: &str) -> Fixture {
        let spec = parse_spec(src).unwrap_or_else(|e| panic!("{e}"));
        let alg = spec.algebra();
        Fixture { spec, alg }
    }

    pub fn t(&self, s: &str) -> Term {
        parse_term(s, &self.spec).unwrap_or_else(|e| panic!("{s}: {e}"))
    }
}

/// One role leaks its nonce, the other only sends it encrypted.
pub const LEAK: &str = "protocol LEAK {
  sorts Name Nonce;
  subsort Name < Msg;
  subsort Nonce < Msg;
  op pk : Name Msg -> Msg;
  op n : Name Fresh -> Nonce;
  ops a b i : -> Name;
  vars A B : Name;
  vars X : Msg;
  vars r : Fresh;

  strand Leak (fresh r) { +(n(A, r)); }
  strand Hide (fresh r) { +(pk(B, n(A, r))); }
  intruder strand I.pk { -(X); +(pk(A, X)); }

  attack leak {
    strand Leak (fresh r) past [+(n(a, r))] future [];
    intruder knows n(a, r);
  }
  attack hidden {
    strand Hide (fresh r) past [+(pk(b, n(a, r)))] future [];
    intruder knows n(a, r);
  }
}";
