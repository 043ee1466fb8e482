use std::collections::{BTreeMap, BTreeSet};

use crate::strand::{
    CompositionSpec, CompositionTriple, Item, Mode, Params, Side, SignedMessage, StrandSchema, SyncPoint,
};
use crate::strand::Dir;
use crate::term::{infix_precedence, is_infix, FreshConst, OpDecl, Signature, Sort, Sym, Term, TermError, Var};

use super::lexer::{lex, Tok, Token};
use super::spec::{Action, AttackPattern, Document, PatternStrand, ProtocolSpec, Scenario, ScenarioStrand};
use super::DslError;

const RESERVED: &[&str] = &["=", "!=", "≠", "->", "→", "<", ":"];

/// Names visible while parsing terms.
#[derive(Clone, Debug, Default)]
struct Scope {
    sig: Signature,
    vars: BTreeMap<Sym, Sort>,
    roles: BTreeSet<Sym>,
    /// Names bound to fixed terms, such as a scenario's fresh values.
    consts: BTreeMap<Sym, Term>,
}

impl Scope {
    fn of(spec: &ProtocolSpec) -> Scope {
        Scope {
            sig: spec.sig.clone(),
            vars: spec.vars.clone(),
            roles: spec.roles().into_iter().cloned().collect(),
            consts: BTreeMap::new(),
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, DslError>;

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> DslError {
        let t = self.peek();
        DslError::Syntax { line: t.line, col: t.col, expected: expected.to_string(), found: t.describe() }
    }

    fn invalid(&self, t: &Token, msg: impl Into<String>) -> DslError {
        DslError::Invalid { line: t.line, col: t.col, msg: msg.into() }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(q) if q == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(q) if q == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err(&format!("`{p}`")))
        }
    }

    fn expect_sym(&mut self, alts: &[&str]) -> PResult<()> {
        if alts.iter().any(|a| self.is_sym(a)) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&format!("`{}`", alts[0])))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&format!("`{k}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.err(what)),
        }
    }

    // ---- terms ----

    fn term_top(&mut self, sc: &Scope, semi: bool) -> PResult<Term> {
        let start = self.peek().clone();
        let t = self.expr(sc, u8::MAX, semi)?;
        sc.sig
            .least_sort(&t)
            .map_err(|e| DslError::Sort { line: start.line, col: start.col, msg: e.to_string() })?;
        Ok(t)
    }

    fn infix_here(&self, sc: &Scope, semi: bool) -> Option<String> {
        let name = match &self.peek().tok {
            Tok::Sym(s) if !RESERVED.contains(&s.as_str()) => s.clone(),
            Tok::Punct(";") if semi => ";".to_string(),
            _ => return None,
        };
        (is_infix(&name) && sc.sig.op(&name, 2).is_some()).then_some(name)
    }

    fn expr(&mut self, sc: &Scope, max: u8, semi: bool) -> PResult<Term> {
        let mut lhs = self.primary(sc)?;
        while let Some(op) = self.infix_here(sc, semi) {
            let p = infix_precedence(&op);
            if p > max {
                break;
            }
            self.bump();
            let rhs = self.expr(sc, p, semi)?;
            lhs = Term::app(&op, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn primary(&mut self, sc: &Scope) -> PResult<Term> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr(sc, u8::MAX, true)?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Fresh(c) => {
                self.bump();
                Ok(Term::Fresh(*c))
            }
            Tok::Ident(name) => {
                let name = name.clone();
                self.bump();
                if self.eat_punct("(") {
                    let mut args = Vec::new();
                    if !self.is_punct(")") {
                        loop {
                            args.push(self.expr(sc, u8::MAX, true)?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    if sc.sig.op(&name, args.len()).is_none() {
                        return Err(DslError::UnknownSymbol { line: t.line, col: t.col, name: format!("{name}/{}", args.len()) });
                    }
                    return Ok(Term::app(&name, args));
                }
                let sym = Sym::new(&name);
                if let Some(c) = sc.consts.get(&sym) {
                    return Ok(c.clone());
                }
                if let Some(s) = sc.vars.get(&sym) {
                    return Ok(Term::Var(Var { name: sym, sort: s.clone() }));
                }
                if sc.sig.op(&name, 0).is_some() {
                    return Ok(Term::constant(&name));
                }
                Err(DslError::UnknownSymbol { line: t.line, col: t.col, name })
            }
            _ => Err(self.err("a term")),
        }
    }

    // ---- items ----

    fn message_item(&mut self, sc: &Scope) -> PResult<Item> {
        let t = self.peek().clone();
        let dir = if self.is_sym("+") {
            Dir::Send
        } else if self.is_sym("-") {
            Dir::Recv
        } else {
            return Err(self.err("`+(`, `-(`, `in`, `out` or `{`"));
        };
        self.bump();
        self.expect_punct("(")?;
        let term = self.term_top(sc, true)?;
        self.expect_punct(")")?;
        if !is_channel_sort(&sc.sig, &term) {
            return Err(DslError::Sort { line: t.line, col: t.col, msg: format!("{term} is not a message") });
        }
        Ok(Item::Msg(SignedMessage { dir, term }))
    }

    fn role_list(&mut self, stop: &dyn Fn(&Parser) -> bool) -> PResult<Vec<Sym>> {
        let mut out = Vec::new();
        while !stop(self) {
            out.push(Sym::new(&self.ident("a role name")?));
        }
        Ok(out)
    }

    fn mode(&mut self) -> PResult<Mode> {
        let t = self.peek().clone();
        let s = self.ident("`1-1` or `1-*`")?;
        Mode::parse(&s).ok_or_else(|| DslError::Syntax { line: t.line, col: t.col, expected: "`1-1` or `1-*`".into(), found: format!("`{s}`") })
    }

    fn check_roles(&self, sc: &Scope, rs: &[Sym], at: &Token) -> PResult<()> {
        for r in rs {
            if !sc.roles.contains(r) {
                return Err(DslError::UnknownSymbol { line: at.line, col: at.col, name: r.to_string() });
            }
        }
        Ok(())
    }

    /// `{P1 P2 -> C ;; mode ;; (t1 ; t2)}`; the side is read off the
    /// strand's role.
    fn sync_item(&mut self, sc: &Scope, role: &Sym, first: bool) -> PResult<Item> {
        let at = self.peek().clone();
        self.expect_punct("{")?;
        let parents = self.role_list(&|p| p.is_sym("->") || p.is_sym("→"))?;
        self.bump();
        let children = self.role_list(&|p| p.is_punct(";;"))?;
        self.bump();
        let mode = self.mode()?;
        self.expect_punct(";;")?;
        self.expect_punct("(")?;
        let mut payload = Vec::new();
        loop {
            let start = self.peek().clone();
            let t = self.expr(sc, infix_precedence(";") - 1, true)?;
            sc.sig
                .least_sort(&t)
                .map_err(|e| DslError::Sort { line: start.line, col: start.col, msg: e.to_string() })?;
            payload.push(t);
            if !self.eat_punct(";") {
                break;
            }
        }
        self.expect_punct(")")?;
        self.expect_punct("}")?;
        self.check_roles(sc, &parents, &at)?;
        self.check_roles(sc, &children, &at)?;
        let side = if first && children.contains(role) {
            Side::In
        } else if parents.contains(role) {
            Side::Out
        } else if children.contains(role) {
            Side::In
        } else {
            return Err(self.invalid(&at, format!("synchronization does not mention role {role}")));
        };
        Ok(Item::Sync(SyncPoint { side, parents, children, mode, payload }))
    }

    /// `in {ts}` or `out {ts}`, optionally `from R.. mode M` / `to R.. mode M`.
    fn param_item(&mut self, sc: &Scope, role: &Sym) -> PResult<Item> {
        let at = self.peek().clone();
        let side = if self.is_kw("in") { Side::In } else { Side::Out };
        self.bump();
        self.expect_punct("{")?;
        let mut terms = Vec::new();
        if !self.is_punct("}") {
            loop {
                terms.push(self.term_top(sc, true)?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct("}")?;
        let link = match side {
            Side::In => "from",
            Side::Out => "to",
        };
        if !self.is_kw(link) {
            return Ok(Item::Params(Params { side, terms }));
        }
        self.bump();
        let others = self.role_list(&|p| p.is_kw("mode"))?;
        self.bump();
        let mode = self.mode()?;
        self.check_roles(sc, &others, &at)?;
        let (parents, children) = match side {
            Side::In => (others, vec![role.clone()]),
            Side::Out => (vec![role.clone()], others),
        };
        Ok(Item::Sync(SyncPoint { side, parents, children, mode, payload: terms }))
    }

    fn item(&mut self, sc: &Scope, role: &Sym, first: bool) -> PResult<Item> {
        if self.is_punct("{") {
            self.sync_item(sc, role, first)
        } else if self.is_kw("in") || self.is_kw("out") {
            self.param_item(sc, role)
        } else {
            self.message_item(sc)
        }
    }

    /// Items up to `close`, separated by `,` or `;`; `nil` is skipped.
    fn items(&mut self, sc: &Scope, role: &Sym, close: &str, offset: usize) -> PResult<Vec<Item>> {
        let mut out = Vec::new();
        loop {
            if self.eat_punct(close) {
                return Ok(out);
            }
            if self.is_kw("nil") {
                self.bump();
            } else {
                let first = offset + out.len() == 0;
                out.push(self.item(sc, role, first)?);
            }
            if !self.eat_punct(",") && !self.eat_punct(";") && !self.is_punct(close) {
                return Err(self.err(&format!("`,` or `{close}`")));
            }
        }
    }

    fn fresh_header(&mut self, sc: &Scope) -> PResult<Vec<Var>> {
        let mut fresh = Vec::new();
        if !(self.is_punct("(") && matches!(self.peek_at(1), Tok::Ident(k) if k == "fresh")) {
            return Ok(fresh);
        }
        self.bump();
        self.bump();
        loop {
            let at = self.peek().clone();
            let name = self.ident("a fresh variable")?;
            let sym = Sym::new(&name);
            match sc.vars.get(&sym) {
                Some(s) if *s == Sort::fresh() => fresh.push(Var { name: sym, sort: s.clone() }),
                Some(s) => {
                    return Err(DslError::Sort { line: at.line, col: at.col, msg: format!("{name} has sort {s}, not Fresh") })
                }
                None => return Err(DslError::UnknownSymbol { line: at.line, col: at.col, name }),
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(")")?;
        Ok(fresh)
    }

    // ---- declarations ----

    fn sort_name(&mut self, sig: &Signature) -> PResult<Sort> {
        let at = self.peek().clone();
        let s = Sort::new(&self.ident("a sort")?);
        if !sig.has_sort(&s) {
            return Err(DslError::UnknownSymbol { line: at.line, col: at.col, name: s.to_string() });
        }
        Ok(s)
    }

    fn op_name(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) | Tok::Sym(s) if !RESERVED.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            Tok::Punct(";") => {
                self.bump();
                Ok(";".into())
            }
            _ => Err(self.err("an operator name")),
        }
    }

    fn load_err(&self, at: &Token, e: TermError) -> DslError {
        DslError::Invalid { line: at.line, col: at.col, msg: e.to_string() }
    }

    fn protocol(&mut self) -> PResult<ProtocolSpec> {
        self.expect_kw("protocol")?;
        let name = self.ident("a protocol name")?;
        let mut spec = ProtocolSpec::empty(&name);
        self.expect_punct("{")?;
        while !self.eat_punct("}") {
            let at = self.peek().clone();
            let Tok::Ident(kw) = at.tok.clone() else {
                return Err(self.err("a declaration"));
            };
            match kw.as_str() {
                "sort" | "sorts" => {
                    self.bump();
                    while !self.is_punct(";") {
                        let s = self.ident("a sort name")?;
                        spec.sig.add_sort(&s);
                        self.eat_punct(",");
                    }
                }
                "subsort" | "subsorts" => {
                    self.bump();
                    loop {
                        let mut lower = Vec::new();
                        while !self.is_sym("<") {
                            lower.push(self.sort_name(&spec.sig)?);
                        }
                        self.bump();
                        let mut upper = self.sort_name(&spec.sig)?;
                        for l in &lower {
                            spec.sig.add_subsort(l.as_str(), upper.as_str()).map_err(|e| self.load_err(&at, e))?;
                        }
                        while self.is_sym("<") {
                            self.bump();
                            let next = self.sort_name(&spec.sig)?;
                            spec.sig.add_subsort(upper.as_str(), next.as_str()).map_err(|e| self.load_err(&at, e))?;
                            upper = next;
                        }
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                "op" | "ops" => {
                    self.bump();
                    let mut names = Vec::new();
                    while !self.is_sym(":") {
                        names.push(self.op_name()?);
                    }
                    self.bump();
                    let mut args = Vec::new();
                    while !self.is_sym("->") && !self.is_sym("→") {
                        args.push(self.sort_name(&spec.sig)?);
                    }
                    self.bump();
                    let result = self.sort_name(&spec.sig)?;
                    for n in names {
                        let d = OpDecl { name: Sym::new(&n), args: args.clone(), result: result.clone() };
                        spec.sig.add_op(d).map_err(|e| self.load_err(&at, e))?;
                    }
                }
                "var" | "vars" => {
                    self.bump();
                    let mut names = Vec::new();
                    while !self.is_sym(":") {
                        names.push(self.ident("a variable name")?);
                    }
                    self.bump();
                    let sort = self.sort_name(&spec.sig)?;
                    for n in names {
                        spec.declare_var(&Var { name: Sym::new(&n), sort: sort.clone() }).map_err(|e| at_pos(e, &at))?;
                    }
                }
                "axiom" | "eq" => {
                    self.bump();
                    let sc = Scope::of(&spec);
                    let l = self.term_top(&sc, false)?;
                    self.expect_sym(&["="])?;
                    let r = self.term_top(&sc, false)?;
                    if kw == "axiom" {
                        spec.theory.add_axiom_equation(&l, &r).map_err(|e| self.load_err(&at, e))?;
                        spec.axioms.push((l, r));
                    } else {
                        spec.theory.add_equation(l.clone(), r.clone()).map_err(|e| self.load_err(&at, e))?;
                        spec.eqs.push((l, r));
                    }
                }
                "strand" | "intruder" => {
                    self.bump();
                    let intruder = kw == "intruder";
                    if intruder {
                        self.expect_kw("strand")?;
                    }
                    let role_at = self.peek().clone();
                    let role = Sym::new(&self.ident("a role name")?);
                    if spec.schema(role.as_str()).is_some() {
                        return Err(self.invalid(&role_at, format!("role {role} defined twice")));
                    }
                    let mut sc = Scope::of(&spec);
                    let fresh = self.fresh_header(&sc)?;
                    sc.roles.insert(role.clone());
                    self.expect_punct("{")?;
                    // sync points may name roles declared further down
                    sc.roles.extend(self.lookahead_roles());
                    let items = self.items(&sc, &role, "}", 0)?;
                    let schema = StrandSchema { role, fresh, items, intruder };
                    if let Some(e) = schema.check().into_iter().next() {
                        return Err(self.invalid(&role_at, e));
                    }
                    spec.schemas.push(schema);
                    continue;
                }
                "attack" => {
                    let sc = Scope::of(&spec);
                    let a = self.attack(&sc)?;
                    spec.attacks.push(a);
                    continue;
                }
                _ => return Err(self.err("a declaration")),
            }
            self.expect_punct(";")?;
        }
        Ok(spec)
    }

    /// Role names of every `strand` declaration in the input.
    fn lookahead_roles(&self) -> Vec<Sym> {
        let mut out = Vec::new();
        for w in self.toks.windows(2) {
            if let (Tok::Ident(k), Tok::Ident(r)) = (&w[0].tok, &w[1].tok) {
                if k == "strand" {
                    out.push(Sym::new(r));
                }
            }
        }
        out
    }

    fn attack(&mut self, sc: &Scope) -> PResult<AttackPattern> {
        self.expect_kw("attack")?;
        let name = self.ident("an attack name")?;
        self.expect_punct("{")?;
        let mut a = AttackPattern { name, strands: Vec::new(), known: Vec::new(), to_learn: Vec::new(), diseqs: Vec::new() };
        while !self.eat_punct("}") {
            let at = self.peek().clone();
            if self.is_kw("strand") {
                self.bump();
                let role = Sym::new(&self.ident("a role name")?);
                if !sc.roles.contains(&role) {
                    return Err(DslError::UnknownSymbol { line: at.line, col: at.col, name: role.to_string() });
                }
                let fresh = self.fresh_header(sc)?;
                let mut past = Vec::new();
                let mut future = Vec::new();
                if self.is_kw("past") {
                    self.bump();
                    self.expect_punct("[")?;
                    past = self.items(sc, &role, "]", 0)?;
                }
                if self.is_kw("future") {
                    self.bump();
                    self.expect_punct("[")?;
                    future = self.items(sc, &role, "]", past.len())?;
                }
                a.strands.push(PatternStrand { role, fresh, past, future });
            } else if self.is_kw("intruder") {
                self.bump();
                let learns = if self.is_kw("knows") {
                    false
                } else if self.is_kw("learns") {
                    true
                } else {
                    return Err(self.err("`knows` or `learns`"));
                };
                self.bump();
                loop {
                    let t = self.term_top(sc, false)?;
                    if learns {
                        a.to_learn.push(t);
                    } else {
                        a.known.push(t);
                    }
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            } else if self.is_kw("constraint") {
                self.bump();
                loop {
                    let l = self.term_top(sc, false)?;
                    self.expect_sym(&["!=", "≠"])?;
                    let r = self.term_top(sc, false)?;
                    a.diseqs.push((l, r));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            } else {
                return Err(self.err("`strand`, `intruder` or `constraint`"));
            }
            self.expect_punct(";")?;
        }
        Ok(a)
    }

    fn composition(&mut self, sc: &Scope) -> PResult<CompositionSpec> {
        self.expect_kw("composition")?;
        self.expect_punct("{")?;
        let mut triples = Vec::new();
        while !self.eat_punct("}") {
            let at = self.peek().clone();
            self.expect_punct("(")?;
            let parent = Sym::new(&self.ident("a parent role")?);
            self.expect_punct(",")?;
            let child = Sym::new(&self.ident("a child role")?);
            self.expect_punct(",")?;
            let mode = self.mode()?;
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            self.check_roles(sc, &[parent.clone(), child.clone()], &at)?;
            triples.push(CompositionTriple { parent, child, mode });
        }
        Ok(CompositionSpec::new(triples))
    }

    fn document(&mut self) -> PResult<Document> {
        let mut doc = Document { protocols: Vec::new(), compositions: Vec::new(), attacks: Vec::new() };
        loop {
            if matches!(self.peek().tok, Tok::Eof) {
                break;
            }
            if self.is_kw("protocol") {
                let p = self.protocol()?;
                doc.protocols.push(p);
            } else if self.is_kw("composition") {
                let sc = merged_scope(&doc.protocols).map_err(|e| at_pos(e, self.peek()))?;
                let c = self.composition(&sc)?;
                doc.compositions.push(c);
            } else if self.is_kw("attack") && !doc.protocols.is_empty() {
                let sc = merged_scope(&doc.protocols).map_err(|e| at_pos(e, self.peek()))?;
                let a = self.attack(&sc)?;
                doc.attacks.push(a);
            } else {
                return Err(self.err("`protocol`, `composition` or `attack`"));
            }
        }
        if doc.protocols.is_empty() {
            return Err(self.err("`protocol`"));
        }
        Ok(doc)
    }
}

impl Parser {
    /// `scenario NAME { new ROLE as X { V = t, .. }; step X; sync P C; }`.
    /// Every `new` is known before any binding is read, so bindings may
    /// name fresh values of strands declared later.
    fn scenario(&mut self, spec: &ProtocolSpec) -> PResult<Scenario> {
        let mut sc = Scope::of(spec);
        sc.vars.clear();
        let mut names: BTreeMap<String, usize> = BTreeMap::new();
        let mut id = 0u32;
        for w in self.toks.windows(4) {
            if let (Tok::Ident(k), Tok::Ident(role), Tok::Ident(a), Tok::Ident(name)) = (&w[0].tok, &w[1].tok, &w[2].tok, &w[3].tok) {
                if k != "new" || a != "as" {
                    continue;
                }
                let Some(schema) = spec.schema(role) else {
                    return Err(DslError::UnknownSymbol { line: w[1].line, col: w[1].col, name: role.clone() });
                };
                if names.insert(name.clone(), names.len()).is_some() {
                    return Err(self.invalid(&w[3], format!("strand name {name} is used twice")));
                }
                for (k, v) in schema.fresh.iter().enumerate() {
                    let c = FreshConst { strand: id, index: k as u32 };
                    sc.consts.insert(Sym::new(&format!("{name}.{}", v.name)), Term::Fresh(c));
                }
                id += 1;
            }
        }
        let mut out = Scenario { name: String::new(), strands: Vec::new(), actions: Vec::new() };
        if matches!(self.peek().tok, Tok::Eof) {
            return Ok(out);
        }
        self.expect_kw("scenario")?;
        out.name = self.ident("a scenario name")?;
        self.expect_punct("{")?;
        let strand_ref = |p: &mut Parser, names: &BTreeMap<String, usize>| -> PResult<usize> {
            let at = p.peek().clone();
            let n = p.ident("a strand name")?;
            names.get(&n).copied().ok_or(DslError::UnknownSymbol { line: at.line, col: at.col, name: n })
        };
        while !self.eat_punct("}") {
            let at = self.peek().clone();
            if self.is_kw("new") {
                self.bump();
                let role = Sym::new(&self.ident("a role name")?);
                self.expect_kw("as")?;
                let name = self.ident("a strand name")?;
                let schema = spec.schema(role.as_str()).expect("checked in the first pass");
                let mut bindings = Vec::new();
                if self.eat_punct("{") {
                    while !self.eat_punct("}") {
                        let vat = self.peek().clone();
                        let v = Sym::new(&self.ident("a variable")?);
                        let Some(var) = schema.vars().into_iter().find(|x| x.name == v && !schema.fresh.contains(x)) else {
                            return Err(DslError::UnknownSymbol { line: vat.line, col: vat.col, name: v.to_string() });
                        };
                        self.expect_sym(&["="])?;
                        let t = self.term_top(&sc, true)?;
                        bindings.push((var, t));
                        if !self.eat_punct(",") {
                            self.expect_punct("}")?;
                            break;
                        }
                    }
                }
                let fresh = (0..schema.fresh.len()).map(|k| FreshConst { strand: out.strands.len() as u32, index: k as u32 }).collect();
                out.strands.push(ScenarioStrand { name, role, fresh, bindings, line: at.line });
            } else if self.is_kw("step") {
                self.bump();
                let s = strand_ref(self, &names)?;
                out.actions.push(Action::Step { strand: s, line: at.line });
            } else if self.is_kw("sync") {
                self.bump();
                let parent = strand_ref(self, &names)?;
                let child = strand_ref(self, &names)?;
                out.actions.push(Action::Sync { parent, child, line: at.line });
            } else {
                return Err(self.err("`new`, `step` or `sync`"));
            }
            self.expect_punct(";")?;
        }
        if !matches!(self.peek().tok, Tok::Eof) {
            return Err(self.err("end of input"));
        }
        Ok(out)
    }
}

fn at_pos(e: DslError, at: &Token) -> DslError {
    match e {
        DslError::Sort { line: 0, msg, .. } => DslError::Sort { line: at.line, col: at.col, msg },
        e => e,
    }
}

fn merged_scope(ps: &[ProtocolSpec]) -> PResult<Scope> {
    let mut sc = Scope::default();
    for p in ps {
        sc.sig = sc.sig.merge(&p.sig).map_err(DslError::Load)?;
        for (n, s) in &p.vars {
            if let Some(old) = sc.vars.insert(n.clone(), s.clone()) {
                if old != *s {
                    return Err(DslError::Sort { line: 0, col: 0, msg: format!("variable {n} declared with sorts {old} and {s}") });
                }
            }
        }
        sc.roles.extend(p.roles().into_iter().cloned());
    }
    Ok(sc)
}

/// Messages live in `Msg`, or in `Param` once composition messages exist.
pub(crate) fn is_channel_sort(sig: &Signature, t: &Term) -> bool {
    let param = Sort::new("Param");
    match sig.least_sort(t) {
        Ok(s) => sig.leq(&s, &Sort::msg()) || (sig.has_sort(&param) && sig.leq(&s, &param)),
        Err(_) => false,
    }
}

/// Parse a whole `.strand` file.
pub fn parse_document(src: &str) -> Result<Document, DslError> {
    Parser::new(src)?.document()
}

/// Parse a file describing one protocol or one composition, flattened.
pub fn parse_spec(src: &str) -> Result<ProtocolSpec, DslError> {
    parse_document(src)?.spec()
}

/// Parse a single `attack NAME { ... }` block against `spec`.
pub fn parse_attack(src: &str, spec: &ProtocolSpec) -> Result<AttackPattern, DslError> {
    let mut p = Parser::new(src)?;
    let a = p.attack(&Scope::of(spec))?;
    if !matches!(p.peek().tok, Tok::Eof) {
        return Err(p.err("end of input"));
    }
    Ok(a)
}

/// Parse a forward scenario against `spec`. An empty input is the empty
/// scenario.
pub fn parse_scenario(src: &str, spec: &ProtocolSpec) -> Result<Scenario, DslError> {
    Parser::new(src)?.scenario(spec)
}

/// Parse one term in the scope of `spec`.
pub fn parse_term(src: &str, spec: &ProtocolSpec) -> Result<Term, DslError> {
    let mut p = Parser::new(src)?;
    let t = p.term_top(&Scope::of(spec), true)?;
    if !matches!(p.peek().tok, Tok::Eof) {
        return Err(p.err("end of input"));
    }
    Ok(t)
}

/// Parse a strand item list `[...]` for `role`, as printed in traces.
pub fn parse_items(src: &str, role: &str, spec: &ProtocolSpec) -> Result<Vec<Item>, DslError> {
    let mut p = Parser::new(src)?;
    p.expect_punct("[")?;
    let items = p.items(&Scope::of(spec), &Sym::new(role), "]", 0)?;
    if !matches!(p.peek().tok, Tok::Eof) {
        return Err(p.err("end of input"));
    }
    Ok(items)
}
