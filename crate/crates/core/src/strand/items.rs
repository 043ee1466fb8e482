use std::fmt;

use serde::{Deserialize, Serialize};

use crate::term::{infix_precedence, is_infix, Substitution, Sym, Term};

/// Polarity of a message: `+` sends, `-` receives.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Dir {
    Send,
    Recv,
}

impl Dir {
    pub fn sign(self) -> char {
        match self {
            Dir::Send => '+',
            Dir::Recv => '-',
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct SignedMessage {
    pub dir: Dir,
    pub term: Term,
}

/// Which end of a composition an item sits on.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Side {
    /// Child input, at the start of a strand.
    In,
    /// Parent output, at the end of a strand.
    Out,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Mode {
    OneToOne,
    OneToMany,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "1-1" => Some(Mode::OneToOne),
            "1-*" => Some(Mode::OneToMany),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::OneToOne => "1-1",
            Mode::OneToMany => "1-*",
        })
    }
}

/// Input or output parameters in the abstract composition syntax.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Params {
    pub side: Side,
    pub terms: Vec<Term>,
}

/// A synchronization message `{parents -> children ;; mode ;; payload}`.
/// A child input names one child, a parent output names one parent. The
/// payload is a list, so it never forms a message term.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct SyncPoint {
    pub side: Side,
    pub parents: Vec<Sym>,
    pub children: Vec<Sym>,
    pub mode: Mode,
    pub payload: Vec<Term>,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Item {
    Msg(SignedMessage),
    Params(Params),
    Sync(SyncPoint),
}

impl Item {
    pub fn send(t: Term) -> Item {
        Item::Msg(SignedMessage { dir: Dir::Send, term: t })
    }
    pub fn recv(t: Term) -> Item {
        Item::Msg(SignedMessage { dir: Dir::Recv, term: t })
    }

    pub fn as_msg(&self) -> Option<&SignedMessage> {
        match self {
            Item::Msg(m) => Some(m),
            _ => None,
        }
    }

    pub fn side(&self) -> Option<Side> {
        match self {
            Item::Msg(_) => None,
            Item::Params(p) => Some(p.side),
            Item::Sync(s) => Some(s.side),
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Item::Msg(m) => vec![&m.term],
            Item::Params(p) => p.terms.iter().collect(),
            Item::Sync(s) => s.payload.iter().collect(),
        }
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Item {
        match self {
            Item::Msg(m) => Item::Msg(SignedMessage { dir: m.dir, term: f(&m.term) }),
            Item::Params(p) => Item::Params(Params { side: p.side, terms: p.terms.iter().map(&mut f).collect() }),
            Item::Sync(s) => Item::Sync(SyncPoint {
                side: s.side,
                parents: s.parents.clone(),
                children: s.children.clone(),
                mode: s.mode,
                payload: s.payload.iter().map(&mut f).collect(),
            }),
        }
    }

    pub fn apply(&self, s: &Substitution) -> Item {
        self.map_terms(|t| s.apply(t))
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, ts: &[Term], sep: &str) -> fmt::Result {
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        // inside a `;`-separated payload, loose infix terms need parentheses
        let loose = matches!(t, Term::App(a) if a.args.len() >= 2 && is_infix(a.op.as_str())
            && infix_precedence(a.op.as_str()) >= infix_precedence(";"));
        if sep == " ; " && loose {
            write!(f, "({t})")?;
        } else {
            write!(f, "{t}")?;
        }
    }
    Ok(())
}

impl fmt::Display for SignedMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.dir.sign(), self.term)
    }
}

impl fmt::Display for SyncPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |v: &[Sym]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "{{{} -> {} ;; {} ;; (", names(&self.parents), names(&self.children), self.mode)?;
        write_list(f, &self.payload, " ; ")?;
        write!(f, ")}}")
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = match self.side {
            Side::In => "in",
            Side::Out => "out",
        };
        write!(f, "{kw} {{")?;
        write_list(f, &self.terms, ", ")?;
        write!(f, "}}")
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Msg(m) => write!(f, "{m}"),
            Item::Params(p) => write!(f, "{p}"),
            Item::Sync(s) => write!(f, "{s}"),
        }
    }
}
