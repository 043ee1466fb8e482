use std::collections::BTreeMap;

use crate::strand::{
    CompositionSpec, Diagnostic, Item, Mode, Severity, Side, StrandSchema, SyncPoint,
};
use crate::term::{OpDecl, Sort, Sym, Term, Var, VarGen};

use super::spec::{ComposedSpec, ProtocolSpec};
use super::DslError;

/// Parameters of the input (`Side::In`) or output item of a schema, in
/// either syntax.
fn params_of(s: &StrandSchema, side: Side) -> Option<&[Term]> {
    let it = match side {
        Side::In => s.input()?,
        Side::Out => s.output()?,
    };
    match it {
        Item::Params(p) => Some(&p.terms),
        Item::Sync(p) => Some(&p.payload),
        Item::Msg(_) => None,
    }
}

/// Check a composition: disjoint role names, matching parameter lists,
/// one mode per role.
pub fn validate_composition(c: &ComposedSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen: BTreeMap<&Sym, &str> = BTreeMap::new();
    for p in &c.parts {
        for s in &p.schemas {
            if let Some(other) = seen.insert(&s.role, &p.name) {
                out.push(Diagnostic::error(format!("role {} is defined in both {} and {}", s.role, other, p.name)));
            }
        }
    }
    let flat = match c.flatten() {
        Ok(f) => f,
        Err(e) => {
            out.push(Diagnostic::error(e.to_string()));
            return out;
        }
    };
    out.extend(check_triples(&flat, &flat.composition));
    out
}

fn check_triples(flat: &ProtocolSpec, comps: &CompositionSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let alg = flat.algebra();
    for (role, ts) in comps.mode_conflicts() {
        let names: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
        out.push(Diagnostic::error(format!("role {role} is composed in more than one mode: {}", names.join(", "))));
    }
    for t in &comps.triples {
        let (Some(pa), Some(ch)) = (flat.schema(t.parent.as_str()), flat.schema(t.child.as_str())) else {
            out.push(Diagnostic::error(format!("{t}: unknown role")));
            continue;
        };
        let (Some(o), Some(i)) = (params_of(pa, Side::Out), params_of(ch, Side::In)) else {
            out.push(Diagnostic::error(format!("{t}: parent needs output and child needs input parameters")));
            continue;
        };
        if o.len() != i.len() {
            out.push(Diagnostic::error(format!(
                "{t}: parent has {} output parameters, child has {} input parameters",
                o.len(),
                i.len()
            )));
            continue;
        }
        let pairs: Vec<(Term, Term)> = i.iter().cloned().zip(o.iter().cloned()).collect();
        if alg.match_eqs(&pairs).is_empty() {
            out.push(Diagnostic::error(format!("{t}: output parameters do not match the input parameters")));
        }
    }
    for s in flat.honest() {
        for side in [Side::In, Side::Out] {
            let composed = match side {
                Side::In => !comps.parents_of(&s.role).is_empty(),
                Side::Out => !comps.children_of(&s.role).is_empty(),
            };
            if params_of(s, side).is_some() && !composed {
                out.push(Diagnostic::warning(format!("{}: parameters are not used by any composition", s.role)));
            }
        }
    }
    out
}

fn fail_on_errors(diags: Vec<Diagnostic>) -> Result<(), DslError> {
    let errs: Vec<String> =
        diags.into_iter().filter(|d| d.severity == Severity::Error).map(|d| d.message).collect();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(DslError::Validation(errs.join("; ")))
    }
}

/// Parameter items of `schema` rewritten as synchronization messages.
pub(crate) fn synch_schema(s: &StrandSchema, comps: &CompositionSpec) -> StrandSchema {
    let items = s
        .items
        .iter()
        .map(|it| match it {
            Item::Params(p) => match p.side {
                Side::In if !comps.parents_of(&s.role).is_empty() => Item::Sync(SyncPoint {
                    side: Side::In,
                    parents: comps.parents_of(&s.role).into_iter().cloned().collect(),
                    children: vec![s.role.clone()],
                    mode: comps.mode_of(&s.role).unwrap_or(Mode::OneToOne),
                    payload: p.terms.clone(),
                }),
                Side::Out if !comps.children_of(&s.role).is_empty() => Item::Sync(SyncPoint {
                    side: Side::Out,
                    parents: vec![s.role.clone()],
                    children: comps.children_of(&s.role).into_iter().cloned().collect(),
                    mode: comps.mode_of(&s.role).unwrap_or(Mode::OneToOne),
                    payload: p.terms.clone(),
                }),
                _ => it.clone(),
            },
            _ => it.clone(),
        })
        .collect();
    StrandSchema { items, ..s.clone() }
}

/// The synchronization form of an already flattened specification.
pub fn synch_spec(p: &ProtocolSpec) -> ProtocolSpec {
    let mut out = p.clone();
    out.schemas = p.schemas.iter().map(|s| synch_schema(s, &p.composition)).collect();
    out
}

/// Flatten a composition and turn its parameters into synchronization
/// messages.
pub fn synch_transform(c: &ComposedSpec) -> Result<ProtocolSpec, DslError> {
    fail_on_errors(validate_composition(c))?;
    let flat = c.flatten()?;
    Ok(synch_spec(&flat))
}

fn dotted(head: Term, params: &[Term]) -> Term {
    let mut all = vec![head];
    all.extend(params.iter().cloned());
    let mut it = all.into_iter().rev();
    let last = it.next().expect("non-empty");
    it.fold(last, |acc, t| Term::app(".", vec![t, acc]))
}

/// Encode the composition as ordinary messages: parameters travel over the
/// network, tagged with role names and a fresh composition identifier.
pub fn phi_transform(c: &ComposedSpec) -> Result<ProtocolSpec, DslError> {
    fail_on_errors(validate_composition(c))?;
    let flat = c.flatten()?;
    let comps = flat.composition.clone();
    let mut out = flat.clone();
    out.name = format!("{}.phi", flat.name);
    out.composition = CompositionSpec::default();
    out.attacks.clear();

    let load = DslError::Load;
    out.sig.add_sort("Param");
    out.sig.add_sort("Role");
    out.sig.add_subsort("Msg", "Param").map_err(load)?;
    out.sig.add_subsort("Role", "Param").map_err(load)?;
    out.sig.add_op(OpDecl::new(".", &["Param", "Param"], "Param")).map_err(load)?;
    for s in flat.honest() {
        out.sig.add_op(OpDecl::new(s.role.as_str(), &[], "Role")).map_err(load)?;
        out.sig.add_op(OpDecl::new(s.role.as_str(), &["Fresh"], "Role")).map_err(load)?;
    }

    let role_sort = Sort::new("Role");
    let mut role_vars = 0usize;
    let mut schemas = Vec::new();
    for s in &flat.schemas {
        if s.intruder {
            schemas.push(s.clone());
            continue;
        }
        let mut fresh = s.fresh.clone();
        let mut gen = VarGen::avoiding(s.vars().into_iter().map(|v| v.name));
        let mut r_taken = s.vars().contains(&Var::new("r#", "Fresh"));
        let mut id_var = |gen: &mut VarGen| {
            if r_taken {
                gen.fresh("r#", &Sort::fresh())
            } else {
                r_taken = true;
                Var::new("r#", "Fresh")
            }
        };
        let tag = |role: &Sym, id: &Var| Term::app_sym(role.clone(), vec![Term::Var(id.clone())]);
        let mode = comps.mode_of(&s.role);
        let parents = comps.parents_of(&s.role);
        let children = comps.children_of(&s.role);
        let mut items = Vec::new();
        let one_to_one_child = !parents.is_empty() && mode == Some(Mode::OneToOne);
        if !one_to_one_child {
            items.push(Item::send(Term::app_sym(s.role.clone(), vec![])));
        }
        if let (Some(inp), false) = (params_of(s, Side::In), parents.is_empty()) {
            match mode {
                Some(Mode::OneToOne) => {
                    let [parent] = parents.as_slice() else {
                        return Err(DslError::Validation(format!(
                            "{}: a one-to-one child needs exactly one parent role",
                            s.role
                        )));
                    };
                    let id = id_var(&mut gen);
                    fresh.push(id.clone());
                    items.push(Item::send(tag(&s.role, &id)));
                    items.push(Item::recv(dotted(tag(parent, &id), inp)));
                }
                _ => {
                    role_vars += 1;
                    let ro = Term::Var(Var { name: Sym::new(&format!("RO{role_vars}")), sort: role_sort.clone() });
                    items.push(Item::recv(dotted(ro, inp)));
                }
            }
        }
        items.extend(s.body().iter().cloned());
        if let (Some(outp), false) = (params_of(s, Side::Out), children.is_empty()) {
            let id = id_var(&mut gen);
            match mode {
                Some(Mode::OneToOne) => {
                    let [child] = children.as_slice() else {
                        return Err(DslError::Validation(format!(
                            "{}: a one-to-one parent needs exactly one child role",
                            s.role
                        )));
                    };
                    items.push(Item::recv(tag(child, &id)));
                }
                _ => fresh.push(id.clone()),
            }
            items.push(Item::send(dotted(tag(&s.role, &id), outp)));
        }
        let schema = StrandSchema { role: s.role.clone(), fresh, items, intruder: false };
        for v in schema.vars() {
            out.declare_var(&v)?;
        }
        schemas.push(schema);
    }
    out.schemas = schemas;
    Ok(out)
}
