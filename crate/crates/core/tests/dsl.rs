use std::path::PathBuf;

use strandcomp::dsl::{
    parse_document, parse_spec, phi_transform, print_document, print_spec, synch_transform, validate_composition,
    DslError,
};
use strandcomp::strand::{Item, Severity};

fn spec_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(spec_path(name)).unwrap()
}

const GOLDEN: [&str; 4] = ["nsl.strand", "nsl-db.strand", "nsl-db-fix.strand", "nsl-kd.strand"];

#[test]
fn golden_specs_parse() {
    for f in GOLDEN {
        let d = parse_document(&read(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
        d.spec().unwrap_or_else(|e| panic!("{f}: {e}"));
    }
}

#[test]
fn print_then_parse_is_identity() {
    for f in GOLDEN {
        let d = parse_document(&read(f)).unwrap();
        let printed = print_document(&d);
        let again = parse_document(&printed).unwrap_or_else(|e| panic!("{f}: {e}\n{printed}"));
        assert_eq!(print_document(&again), printed, "{f}");
        let flat = d.spec().unwrap();
        let p = print_spec(&flat);
        let flat2 = parse_document(&p).unwrap_or_else(|e| panic!("{f}: {e}\n{p}")).spec().unwrap();
        assert_eq!(print_spec(&flat2), p, "{f}");
    }
}

#[test]
fn empty_file_is_a_syntax_error() {
    let e = parse_spec("").unwrap_err();
    assert!(matches!(e, DslError::Syntax { .. }), "{e:?}");
    let e = parse_spec("// nothing here\n").unwrap_err();
    assert!(matches!(e, DslError::Syntax { .. }), "{e:?}");
}

#[test]
fn undeclared_name_is_reported_with_position() {
    let src = "protocol P {\n  op f : Msg -> Msg;\n  strand A { +(f(Q)); }\n}\n";
    match parse_spec(src).unwrap_err() {
        DslError::UnknownSymbol { line, name, .. } => {
            assert_eq!(line, 3);
            assert_eq!(name, "Q");
        }
        e => panic!("{e:?}"),
    }
}

#[test]
fn mismatched_parameter_lengths_are_rejected() {
    let src = read("nsl-db.strand").replace("out {A, B, NA};", "out {A, B, NA, NA};");
    let d = parse_document(&src).unwrap();
    let diags = validate_composition(&d.composed());
    let errs: Vec<_> = diags.iter().filter(|d| d.severity == Severity::Error).collect();
    assert_eq!(errs.len(), 1, "{diags:?}");
    assert!(errs[0].message.contains("4 output parameters"), "{}", errs[0].message);
    assert!(errs[0].message.contains("3 input parameters"), "{}", errs[0].message);
    assert!(matches!(synch_transform(&d.composed()), Err(DslError::Validation(_))));
    assert!(matches!(phi_transform(&d.composed()), Err(DslError::Validation(_))));
}

#[test]
fn one_role_in_two_modes_is_rejected() {
    let src = read("nsl-db.strand").replace("(NSL.resp, DB.init, 1-1);", "(NSL.resp, DB.init, 1-1);\n  (NSL.init, DB.init, 1-*);");
    let d = parse_document(&src).unwrap();
    let diags = validate_composition(&d.composed());
    assert!(diags.iter().any(|d| d.severity == Severity::Error && d.message.contains("more than one mode")), "{diags:?}");
}

#[test]
fn golden_compositions_validate_cleanly() {
    for f in ["nsl-db.strand", "nsl-db-fix.strand", "nsl-kd.strand"] {
        let d = parse_document(&read(f)).unwrap();
        let diags = validate_composition(&d.composed());
        assert!(diags.is_empty(), "{f}: {diags:?}");
    }
}

#[test]
fn synch_turns_parameters_into_sync_points() {
    let d = parse_document(&read("nsl-db.strand")).unwrap();
    let s = synch_transform(&d.composed()).unwrap();
    let init = s.schema("NSL.init").unwrap();
    assert_eq!(init.items.last().unwrap().to_string(), "{NSL.init -> DB.resp ;; 1-1 ;; (A ; B ; n(A, r))}");
    let dbr = s.schema("DB.resp").unwrap();
    assert_eq!(dbr.items[0].to_string(), "{NSL.init -> DB.resp ;; 1-1 ;; (A ; B ; NA)}");
    assert!(s.schemas.iter().flat_map(|s| &s.items).all(|i| !matches!(i, Item::Params(_))));
}
