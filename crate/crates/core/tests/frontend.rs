mod common;

use dmtcheck::dmt::Dmt;
use dmtcheck::frontend::{parse_property, parse_spec, print_property, print_spec};
use dmtcheck::logic::{Annot, Constraint, Formula, Literal};
use dmtcheck::ltlf::Ltl;
use proptest::prelude::*;

const SPECS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../specs");

fn golden(name: &str) -> String {
    std::fs::read_to_string(format!("{}/{}", SPECS, name)).unwrap()
}

#[test]
fn example_spec_matches_the_hand_built_process() {
    let d = parse_spec(&golden("example2.dmt")).unwrap();
    let e = common::example();
    assert_eq!(d.transitions.len(), 2);
    assert_eq!(d.variables.len(), 3);
    assert_eq!(d.variables, e.dmt.variables);
    assert_eq!(d.initial, e.dmt.initial);
    for (a, b) in d.transitions.iter().zip(&e.dmt.transitions) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.guard.formula(), b.guard.formula());
    }
    assert_eq!(d.ctx.distinct, e.dmt.ctx.distinct);
    let p = parse_property(&golden("example2_until.ltl"), &d.signature).unwrap();
    let q = common::until_property(&e);
    let cs: Vec<_> = p.leaves.iter().map(|l| &l.constraint).collect();
    assert_eq!(cs, q.leaves.iter().map(|l| &l.constraint).collect::<Vec<_>>());
    assert_eq!(p.root, q.root);
}

#[test]
fn golden_specs_parse() {
    let w = parse_spec(&golden("webshop.dmt")).unwrap();
    assert_eq!(w.transitions.len(), 7);
    assert_eq!(w.variables.len(), 10);
    let i = parse_spec(&golden("incident.dmt")).unwrap();
    assert_eq!(i.transitions.len(), 11);
    assert!(!i.signature.uses_rat());
    for (spec, props) in [
        (&w, &["webshop_safety.ltl", "webshop_shipped.ltl"][..]),
        (&i, &["incident_unassisted.ltl"][..]),
    ] {
        for p in props {
            parse_property(&golden(p), &spec.signature).unwrap();
        }
    }
}

#[test]
fn unsupported_theory_is_rejected() {
    let e = parse_spec(&golden("lists.dmt")).unwrap_err();
    assert!(e.msg.contains("EUF") && e.msg.contains("LRA"), "{}", e);
    assert_eq!(e.pos.line, 2);
}

#[test]
fn empty_variable_set_is_rejected() {
    let e = parse_spec("sort a; const k : a; trans t : true;").unwrap_err();
    assert!(e.msg.contains("V nonempty"), "{}", e);
}

#[test]
fn undeclared_sort_is_rejected() {
    let e = parse_spec("sort a;\nvar x : b = k;").unwrap_err();
    assert!(e.msg.contains("undeclared sort `b`"), "{}", e);
    assert_eq!((e.pos.line, e.pos.col), (2, 9));
}

#[test]
fn positioned_errors() {
    let cases = [
        ("sort a; const k : a; var x : a = k; trans t : x = k;", "needs `^r` or `^w`"),
        ("sort a; const k : a; var x : a = k; trans t : x^r < k;", "order comparison"),
        ("var x : rat = 0; trans t : x^w = x^r * x^r;", "nonlinear"),
        ("var x : int = 0;", "not supported"),
        ("var x : rat = 0; trans t : x^w = 1 + ;", "expected term"),
        ("var x : rat = 0; trans t : true; trans t : true;", "duplicate transition"),
        ("sort a; const k : a; var x : a = k; fact x = k;", "ground"),
        ("theory euf; var x : rat = 0;", "needs theory"),
    ];
    for (src, want) in cases {
        let e = parse_spec(src).unwrap_err();
        assert!(e.to_string().contains(want), "{} -> {}", src, e);
    }
}

#[test]
fn guards_fold_arithmetic() {
    let d = parse_spec(&golden("webshop.dmt")).unwrap();
    let disc = d.transition("discount").unwrap();
    assert_eq!(disc.guard.to_string(), "s^r = billed & s^w = checked & vip^r = yes & t^r = 5/4*t^w");
    let inc = parse_spec(&golden("incident.dmt")).unwrap();
    let g = &inc.transition("devel_findAgent").unwrap().guard;
    assert_eq!(g.bound.len(), 1);
    assert_eq!(g.bound[0].annot, Annot::Plain);
}

#[test]
fn golden_specs_round_trip() {
    for f in ["example2.dmt", "webshop.dmt", "incident.dmt"] {
        let d = parse_spec(&golden(f)).unwrap();
        let text = print_spec(&d);
        let back = parse_spec(&text).unwrap_or_else(|e| panic!("{}: {}\n{}", f, e, text));
        assert_eq!(back, d, "{}", f);
        assert_eq!(print_spec(&back), text);
    }
}

#[test]
fn properties_round_trip_and_share_leaves() {
    let d = parse_spec(&golden("example2.dmt")).unwrap();
    let p = parse_property("let a = x >= 0; G [x >= 0] & F ([s = o2] U X a) | false", &d.signature).unwrap();
    assert_eq!(p.leaves.len(), 2);
    assert_eq!(p.leaves[1].name, "c1");
    let back = parse_property(&print_property(&p), &d.signature).unwrap();
    assert_eq!(back, p);
    assert!(parse_property("let X = x >= 0; X", &d.signature).is_err());
    assert!(parse_property("[x^r >= 0]", &d.signature).is_err());
    assert_eq!(parse_property("true", &d.signature).unwrap().root, Ltl::True);
}

fn example_literals(d: &Dmt) -> Vec<Literal> {
    let src = [
        "s^r = o1", "s^w = o2", "s^r != s^w", "x^w > x^r", "x^w <= 2 * x^r - 3", "x^r + x^w = 1/2", "R(x^w, y^r)",
        "!R(x^r, y^w)", "P(y^w)", "!P(a)", "y^r = b", "y^w != y^r", "-x^w < 7",
    ];
    src.iter()
        .map(|s| {
            let g = parse_spec(&format!("{}\ntrans probe : {};", print_spec(d), s)).unwrap();
            g.transition("probe").unwrap().guard.body[0].clone()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_specs_reparse_identically(picks in prop::collection::vec(prop::collection::vec(0usize..13, 0..5), 0..4)) {
        let base = parse_spec(&golden("example2.dmt")).unwrap();
        let pool = example_literals(&base);
        let mut d = base.clone();
        for (i, p) in picks.iter().enumerate() {
            let body: Vec<Literal> = p.iter().map(|&k| pool[k].clone()).collect();
            if Formula::and(body.iter().cloned().map(Formula::lit)) == Formula::False {
                continue;
            }
            d.transitions.push(dmtcheck::dmt::Transition { name: format!("t{}", i), guard: Constraint::new(vec![], body) });
        }
        let back = parse_spec(&print_spec(&d)).unwrap();
        prop_assert_eq!(back, d);
    }
}
