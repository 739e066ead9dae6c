mod common;

use std::collections::BTreeSet;

use dmtcheck::analysis::*;
use dmtcheck::dmt::Dmt;
use dmtcheck::frontend::{parse_property, parse_spec};
use dmtcheck::ltlf::Property;
use proptest::prelude::*;

const SPECS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../specs");

fn load(spec: &str, prop: &str) -> (Dmt, Property) {
    let d = parse_spec(&std::fs::read_to_string(format!("{}/{}", SPECS, spec)).unwrap()).unwrap();
    let text = if prop.ends_with(".ltl") {
        std::fs::read_to_string(format!("{}/{}", SPECS, prop)).unwrap()
    } else {
        prop.to_string()
    };
    let p = parse_property(&text, &d.signature).unwrap();
    (d, p)
}

fn empty_word(n: usize) -> Vec<BTreeSet<usize>> {
    vec![BTreeSet::new(); n + 1]
}

const SIGMA1: [&str; 9] = ["login", "select", "add", "discount", "restart", "select", "add", "discount", "ship"];
const SIGMA2: [&str; 5] = ["xset", "yset", "xset", "yset", "xset"];

#[test]
fn computation_graph_of_the_running_example() {
    let (d, p) = load("example2.dmt", "example2_until.ltl");
    let g = ComputationGraph::build(&d, &SIGMA2, Some(&p), &empty_word(5)).unwrap();
    assert!(g.equality.is_subset(&g.edges));
    assert_eq!(g.longest_path(), 4);
    let c = g.collapsed();
    // six isolated s nodes, x0 | x1=x2 | x3=x4 | x5, y0=y1 | y2=y3 | y4=y5
    assert_eq!(c.labels.len(), 13);
    assert_eq!(c.edge_count(), 6);
    let dot = g.to_dot();
    assert!(dot.contains("\"x1\" -- \"x2\" [style=dotted]"));
    assert!(dot.contains("\"x2\" -- \"x3\";"));
}

#[test]
fn computation_graph_of_the_webshop() {
    let (d, p) = load("webshop.dmt", "webshop_shipped.ltl");
    let g = ComputationGraph::build(&d, &SIGMA1, Some(&p), &empty_word(9)).unwrap();
    assert_eq!(g.longest_path(), 5);
    let (len, path) = g.collapsed().longest_path(usize::MAX);
    assert_eq!(len, 5);
    assert_eq!(path.len(), 6);
}

#[test]
fn empty_sequence_has_no_edges() {
    let (d, p) = load("example2.dmt", "example2_until.ltl");
    let g = ComputationGraph::build(&d, &[], Some(&p), &empty_word(0)).unwrap();
    assert!(g.edges.is_empty());
    assert_eq!(g.longest_path(), 0);
}

#[test]
fn bound_variables_chain_equalities() {
    let d = parse_spec("sort e; const k : e; var x : e = k; var y : e = k; trans t : exists (z: e). x^w = z & z = y^r;").unwrap();
    let g = ComputationGraph::build(&d, &["t"], None, &[]).unwrap();
    let x1 = Node { var: 0, step: 1 };
    let y0 = Node { var: 1, step: 0 };
    assert!(g.equality.contains(&(x1, y0)));
}

#[test]
fn sort_graph_checks() {
    let (inc, _) = load("incident.dmt", "incident_unassisted.ltl");
    let (ok, g) = check_acyclic(&inc.signature);
    assert!(ok);
    assert!(g.edges.contains(&("agent_id".to_string(), "prob_id".to_string())));
    assert!(g.to_dot().contains("\"agent_id\" -> \"prob_id\""));
    let (web, _) = load("webshop.dmt", "webshop_shipped.ltl");
    assert!(check_tame(&web.signature));
    let lp = parse_spec("sort s; const k : s; fun f(s) : s; var x : s = k;").unwrap();
    assert!(!check_acyclic(&lp.signature).0);
    let bad = parse_spec("sort e; const k : e; fun g(rat) : e; var x : e = k;").unwrap();
    assert!(!check_tame(&bad.signature));
    let (ex, _) = load("example2.dmt", "example2_until.ltl");
    assert!(check_acyclic(&ex.signature).0 && check_tame(&ex.signature));
}

#[test]
fn monotonicity_constraints() {
    let (ex, p) = load("example2.dmt", "example2_until.ltl");
    assert_eq!(check_mc(&ex, Some(&p)), (true, vec![]));
    let (web, wp) = load("webshop.dmt", "webshop_shipped.ltl");
    let (ok, bad) = check_mc(&web, Some(&wp));
    assert!(!ok);
    assert!(bad.iter().any(|b| b.starts_with("discount")));
    assert!(bad.iter().any(|b| b.starts_with("add")));
}

#[test]
fn classes_of_the_golden_specs() {
    let (inc, ip) = load("incident.dmt", "incident_unassisted.ltl");
    let r = classify(&inc, &ip, &ClassifyOptions::default()).unwrap();
    assert_eq!(r.decidable_class, DecidableClass::I);
    let (ex, ep) = load("example2.dmt", "example2_until.ltl");
    let r = classify(&ex, &ep, &ClassifyOptions::default()).unwrap();
    assert_eq!(r.decidable_class, DecidableClass::II);
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["decidableClass"], "II");
    assert_eq!(json["allArithmeticMC"], true);
}

#[test]
fn webshop_has_no_short_lookback_violation() {
    let (web, wp) = load("webshop.dmt", "webshop_shipped.ltl");
    let opts = ClassifyOptions { lookback: LookbackOptions { k: 5, depth: 12, ..Default::default() }, ..Default::default() };
    let r = classify(&web, &wp, &opts).unwrap();
    assert!(!r.all_arithmetic_mc);
    let lb = r.bounded_lookback.unwrap();
    assert_eq!(lb.result, Lookback::UnknownUpTo { k: 5, depth: 12 });
    assert!(lb.probes > 12 && lb.longest_seen == 5);
    assert!(r.lookback_candidate);
    assert_eq!(r.decidable_class, DecidableClass::None);
}

#[test]
fn running_example_violates_every_small_bound() {
    let (ex, ep) = load("example2.dmt", "example2_until.ltl");
    let r = check_bounded_lookback(&ex, &ep, &LookbackOptions { k: 4, depth: 10, ..Default::default() }).unwrap();
    match r.result {
        Lookback::Violated { sigma, length, .. } => {
            assert_eq!(sigma.len(), 7);
            assert_eq!(length, 5);
        }
        other => panic!("{:?}", other),
    }
    for k in 0..=5 {
        let r = check_bounded_lookback(&ex, &ep, &LookbackOptions { k, depth: 10, jobs: 2, ..Default::default() }).unwrap();
        assert!(r.result.is_violated(), "k={}", k);
        assert!(r.smt.checks > 0);
    }
}

#[test]
fn loop_free_processes_have_bounded_lookback() {
    let d = parse_spec(
        "control s : st { a, b, c } = a; var x : rat = 0; var y : rat = 0;
         trans one : s^r = a & s^w = b & x^w > y^r;
         trans two : s^r = b & s^w = c & y^w < x^r + 1;",
    )
    .unwrap();
    let p = parse_property("F [x > y]", &d.signature).unwrap();
    let max_len = 2;
    let k = d.variables.len() * (max_len + 1);
    let r = check_bounded_lookback(&d, &p, &LookbackOptions { k, depth: max_len, ..Default::default() }).unwrap();
    assert_eq!(r.result, Lookback::Holds { k });
    let opts = ClassifyOptions { lookback: LookbackOptions { k, depth: max_len, ..Default::default() }, ..Default::default() };
    let c = classify(&d, &p, &opts).unwrap();
    // `x^r + 1` is not a monotonicity constraint
    assert!(!c.all_arithmetic_mc);
    assert_eq!(c.decidable_class, DecidableClass::IV);
}

fn random_dmt(guards: &[Vec<(usize, usize, usize)>]) -> Dmt {
    // literal kinds over x, y, z : rat and e : elem
    let kinds = ["{a}^w = {b}^r", "{a}^w > {b}^r", "{a}^w <= {b}^r + 1", "R({a}^w, e^r)", "{a}^r = {b}^w", "{a}^w = 2*{b}^r"];
    let vars = ["x", "y", "z"];
    let mut src = String::from("sort elem; const k : elem; rel R(rat, elem); var x : rat = 0; var y : rat = 1; var z : rat = 0; var e : elem = k;\n");
    for (i, g) in guards.iter().enumerate() {
        let lits: Vec<String> = g
            .iter()
            .map(|&(kind, a, b)| kinds[kind].replace("{a}", vars[a]).replace("{b}", vars[b]))
            .collect();
        let body = if lits.is_empty() { "true".to_string() } else { lits.join(" & ") };
        src.push_str(&format!("trans t{} : {};\n", i, body));
    }
    parse_spec(&src).unwrap()
}

fn guard_strategy() -> impl Strategy<Value = Vec<Vec<(usize, usize, usize)>>> {
    prop::collection::vec(prop::collection::vec((0usize..6, 0usize..3, 0usize..3), 0..3), 1..3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn collapsing_never_lengthens_paths(guards in guard_strategy(), seq in prop::collection::vec(0usize..8, 0..4)) {
        let d = random_dmt(&guards);
        let names: Vec<&str> = seq.iter().map(|&i| d.transitions[i % d.transitions.len()].name.as_str()).collect();
        let g = ComputationGraph::build(&d, &names, None, &[]).unwrap();
        prop_assert!(g.equality.is_subset(&g.edges));
        let full = g.uncollapsed().longest_path(usize::MAX).0;
        prop_assert!(g.longest_path() <= full);
    }

    #[test]
    fn lookback_is_monotone_in_depth(guards in guard_strategy(), k in 0usize..4) {
        let d = random_dmt(&guards);
        let p = parse_property("F [x > y]", &d.signature).unwrap();
        let short = check_bounded_lookback(&d, &p, &LookbackOptions { k, depth: 2, ..Default::default() }).unwrap();
        let long = check_bounded_lookback(&d, &p, &LookbackOptions { k, depth: 3, ..Default::default() }).unwrap();
        if short.result.is_violated() || matches!(short.result, Lookback::Holds { .. }) {
            prop_assert_eq!(&short.result, &long.result);
        }
    }

    #[test]
    fn reports_never_claim_unsupported_classes(guards in guard_strategy(), lf in any::<bool>()) {
        let d = random_dmt(&guards);
        let p = parse_property("G [x >= 0]", &d.signature).unwrap();
        let opts = ClassifyOptions { lookback: LookbackOptions { k: 3, depth: 2, ..Default::default() }, locally_finite: lf, always_probe: false };
        let r = classify(&d, &p, &opts).unwrap();
        match r.decidable_class {
            DecidableClass::I => prop_assert!(r.acyclic_signature && !r.arithmetic),
            DecidableClass::II => prop_assert!(r.acyclic_signature && r.tame && r.all_arithmetic_mc),
            DecidableClass::III => prop_assert!(r.locally_finite_asserted && r.tame && r.all_arithmetic_mc),
            DecidableClass::IV => {
                let holds = matches!(r.bounded_lookback.as_ref().unwrap().result, Lookback::Holds { .. });
                prop_assert!(holds);
            },
            DecidableClass::None => {}
        }
    }
}
