use std::collections::BTreeMap;
use std::fmt::Write;

use crate::strand::{CompositionSpec, Item, StrandSchema};
use crate::term::{is_infix, Sort, Term, Var};

use super::spec::{AttackPattern, Document, ProtocolSpec};

/// Terms written outside parentheses must not expose a bare `;`.
fn top(t: &Term) -> String {
    let s = t.to_string();
    match t {
        Term::App(a) if is_infix(a.op.as_str()) && a.args.len() >= 2 && s.contains(';') => format!("({s})"),
        _ => s,
    }
}

fn fresh_header(fresh: &[Var]) -> String {
    if fresh.is_empty() {
        return String::new();
    }
    let names: Vec<String> = fresh.iter().map(|v| v.name.to_string()).collect();
    format!(" (fresh {})", names.join(", "))
}

fn item_list(items: &[Item]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

fn write_schema(out: &mut String, s: &StrandSchema) {
    let kw = if s.intruder { "intruder strand" } else { "strand" };
    let _ = writeln!(out, "  {kw} {}{} {{", s.role, fresh_header(&s.fresh));
    for it in &s.items {
        let _ = writeln!(out, "    {it};");
    }
    out.push_str("  }\n");
}

fn write_attack(out: &mut String, a: &AttackPattern, indent: &str) {
    let _ = writeln!(out, "{indent}attack {} {{", a.name);
    for s in &a.strands {
        let _ = write!(out, "{indent}  strand {}{}", s.role, fresh_header(&s.fresh));
        let _ = write!(out, " past [{}] future [{}];", item_list(&s.past), item_list(&s.future));
        out.push('\n');
    }
    if !a.known.is_empty() {
        let ts: Vec<String> = a.known.iter().map(top).collect();
        let _ = writeln!(out, "{indent}  intruder knows {};", ts.join(", "));
    }
    if !a.to_learn.is_empty() {
        let ts: Vec<String> = a.to_learn.iter().map(top).collect();
        let _ = writeln!(out, "{indent}  intruder learns {};", ts.join(", "));
    }
    if !a.diseqs.is_empty() {
        let ds: Vec<String> = a.diseqs.iter().map(|(l, r)| format!("{} != {}", top(l), top(r))).collect();
        let _ = writeln!(out, "{indent}  constraint {};", ds.join(", "));
    }
    let _ = writeln!(out, "{indent}}}");
}

fn write_composition(out: &mut String, c: &CompositionSpec) {
    out.push_str("composition {\n");
    for t in &c.triples {
        let _ = writeln!(out, "  {t};");
    }
    out.push_str("}\n");
}

fn write_protocol(out: &mut String, p: &ProtocolSpec) {
    let _ = writeln!(out, "protocol {} {{", p.name);
    let builtin = |s: &Sort| *s == Sort::msg() || *s == Sort::fresh();
    let sorts: Vec<String> = p.sig.sorts().filter(|s| !builtin(s)).map(|s| s.to_string()).collect();
    if !sorts.is_empty() {
        let _ = writeln!(out, "  sorts {};", sorts.join(" "));
    }
    for (a, b) in p.sig.subsort_pairs() {
        let _ = writeln!(out, "  subsort {a} < {b};");
    }
    for d in p.sig.ops() {
        let args: Vec<String> = d.args.iter().map(|s| s.to_string()).collect();
        let sep = if args.is_empty() { "" } else { " " };
        let _ = writeln!(out, "  op {} : {}{sep}-> {};", d.name, args.join(" "), d.result);
    }
    let mut by_sort: BTreeMap<&Sort, Vec<&str>> = BTreeMap::new();
    for (n, s) in &p.vars {
        by_sort.entry(s).or_default().push(n.as_str());
    }
    for (s, ns) in by_sort {
        let _ = writeln!(out, "  vars {} : {s};", ns.join(" "));
    }
    for (l, r) in &p.axioms {
        let _ = writeln!(out, "  axiom {} = {};", top(l), top(r));
    }
    for (l, r) in &p.eqs {
        let _ = writeln!(out, "  eq {} = {};", top(l), top(r));
    }
    for s in &p.schemas {
        write_schema(out, s);
    }
    for a in &p.attacks {
        write_attack(out, a, "  ");
    }
    out.push_str("}\n");
}

/// Deterministic text for a specification. Compositions are written after
/// the protocol block.
pub fn print_spec(p: &ProtocolSpec) -> String {
    let mut out = String::new();
    write_protocol(&mut out, p);
    if !p.composition.is_empty() {
        write_composition(&mut out, &p.composition);
    }
    out
}

pub fn print_document(d: &Document) -> String {
    let mut out = String::new();
    for (i, p) in d.protocols.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_protocol(&mut out, p);
    }
    for c in &d.compositions {
        write_composition(&mut out, c);
    }
    for a in &d.attacks {
        write_attack(&mut out, a, "");
    }
    out
}

pub fn print_attack(a: &AttackPattern) -> String {
    let mut out = String::new();
    write_attack(&mut out, a, "");
    out
}
