mod common;

use common::{golden, read, Fixture, LEAK};
use strandcomp::dsl::{parse_attack, parse_scenario, Scenario};
use strandcomp::search::{
    bisimulation_report, dedup_key, flip_modes, pattern_state, reachability_search, run_scenario, trace_replay,
    trace_to_dot, Outcome, SearchBudget, SearchError, Trace,
};
use strandcomp::semantics::{Model, SemMode};
use strandcomp::strand::{Fact, SymbolicState};
use strandcomp::term::{Substitution, Term, Var};

fn leak_trace() -> Trace {
    let f = Fixture::new(LEAK);
    let v = reachability_search(f.spec.attack("leak").unwrap(), &f.spec, SemMode::Basic, &SearchBudget::default()).unwrap();
    match v.outcome {
        Outcome::AttackFound(t) => t,
        o => panic!("{o:?}"),
    }
}

#[test]
fn dedup_keys_ignore_names() {
    let f = Fixture::new(LEAK);
    let m = Model::new(&f.spec, SemMode::Basic);
    let st = pattern_state(&m, f.spec.attack("leak").unwrap()).unwrap();
    let shifted = st.map_terms(|t| {
        t.map_fresh(&mut |c| Term::fresh(c.strand + 40, c.index))
    });
    let mut shifted = shifted;
    for s in &mut shifted.strands {
        for c in &mut s.fresh {
            c.strand += 40;
        }
    }
    assert_ne!(st, shifted);
    assert_eq!(dedup_key(&st, &m.alg), dedup_key(&shifted, &m.alg));
    let mut more = st.clone();
    more.facts.push(Fact::known(f.t("a")));
    assert_ne!(dedup_key(&st, &m.alg), dedup_key(&more, &m.alg));
}

#[test]
fn zero_depth_budget_is_inconclusive() {
    let f = Fixture::new(LEAK);
    let budget = SearchBudget { max_depth: 0, ..SearchBudget::default() };
    let v = reachability_search(f.spec.attack("leak").unwrap(), &f.spec, SemMode::Basic, &budget).unwrap();
    assert!(matches!(v.outcome, Outcome::Inconclusive(_)), "{v}");
    assert_eq!(v.name(), "inconclusive");
}

#[test]
fn leaked_nonce_is_found_and_replays() {
    let tr = leak_trace();
    let f = Fixture::new(LEAK);
    assert!(!tr.is_empty());
    assert!(tr.last_state().is_initial());
    assert!(trace_replay(&tr, &f.spec));
    let back = Trace::from_json(&tr.to_json()).unwrap();
    assert!(trace_replay(&back, &f.spec));
}

#[test]
fn corrupted_trace_does_not_replay() {
    let f = Fixture::new(LEAK);
    let mut tr = leak_trace();
    tr.steps[0].unifier = Substitution::singleton(Var::new("A", "Name"), f.t("i"));
    tr.steps[0].state.strands.clear();
    assert!(!trace_replay(&tr, &f.spec));

    let mut tr = leak_trace();
    tr.pattern.facts.clear();
    assert!(!trace_replay(&tr, &f.spec));
}

#[test]
fn dot_has_a_node_per_state() {
    let tr = leak_trace();
    let dot = trace_to_dot(&tr);
    assert!(dot.starts_with("digraph"));
    let nodes = dot.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count();
    assert_eq!(nodes, tr.len() + 1);
}

#[test]
fn garbage_trace_is_malformed() {
    assert!(matches!(Trace::from_json("{\"steps\": 3}"), Err(SearchError::MalformedTrace(_))));
    assert!(matches!(Trace::from_json("not json"), Err(SearchError::MalformedTrace(_))));
}

#[test]
fn encrypted_nonce_is_secure() {
    let f = Fixture::new(LEAK);
    let v = reachability_search(f.spec.attack("hidden").unwrap(), &f.spec, SemMode::Basic, &SearchBudget::default()).unwrap();
    assert!(matches!(v.outcome, Outcome::SecureFinite), "{v}");
    assert_eq!(v.stats.incomplete_unifications, 0);
    let json = v.to_json();
    assert_eq!(json["verdict"], "secure-finite");
}

#[test]
fn bisimulation_at_depth_zero_is_trivial() {
    let spec = golden("nsl-db.strand");
    let r = bisimulation_report(&spec, &spec, spec.attack("NSL-DB-a1-SM").unwrap(), 0);
    assert!(r.equivalent());
    assert!(r.layers.len() <= 1);
}

#[test]
fn flipped_modes_diverge() {
    let spec = golden("nsl-db.strand");
    let flipped = flip_modes(&spec);
    let r = bisimulation_report(&spec, &flipped, spec.attack("NSL-DB-a0-SM").unwrap(), 4);
    let d = r.divergence.expect("divergence");
    assert!(d.layer <= 4);
    assert!(!d.only_abstract.is_empty() || !d.only_sync.is_empty());
}

fn hijack(file: &str) -> Result<strandcomp::search::ScenarioRun, String> {
    let spec = golden(file);
    let sc = parse_scenario(&read("hijack.scenario"), &spec).map_err(|e| e.to_string())?;
    run_scenario(&spec, &sc).map_err(|e| e.to_string())
}

#[test]
fn hijack_scenario_replays_on_the_composition() {
    let run = hijack("nsl-db.strand").unwrap();
    assert!(run.instantiates.iter().any(|a| a == "NSL-DB-a0-SM"), "{:?}", run.instantiates);
    assert!(run.actions > 0);
}

#[test]
fn hijack_scenario_fails_on_the_fix() {
    assert!(hijack("nsl-db-fix.strand").is_err());
}

#[test]
fn empty_scenario_is_valid() {
    let spec = golden("nsl-db.strand");
    let run = run_scenario(&spec, &Scenario::default()).unwrap();
    assert_eq!(run.state, SymbolicState::default());
    assert!(run.instantiates.is_empty());
    assert_eq!(parse_scenario("", &spec).unwrap(), Scenario::default());
}

#[test]
fn patterns_with_unknown_roles_are_rejected() {
    let spec = golden("nsl.strand");
    assert!(parse_attack("attack X { strand Nobody past [] future []; }", &spec).is_err());
}
