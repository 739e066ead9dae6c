mod common;

use std::time::Duration;

use common::*;
use dmtcheck::dmt::{check_run, evaluate_property};
use dmtcheck::logic::{q, CmpOp, Formula, LinExpr};
use dmtcheck::ltlf::{build_nfa, simplify_nfa, Ltl, Property, PropertyNfa};
use dmtcheck::product::{expand, verify_path_invariant, Budget, ExpandOptions, Outcome};
use dmtcheck::smt::{Gateway, Value};

fn setup() -> (Example, PropertyNfa, Gateway) {
    let e = example();
    let p = until_property(&e);
    let mut gw = Gateway::builtin(e.dmt.ctx.clone());
    let nfa = simplify_nfa(&build_nfa(&p, &mut gw).unwrap());
    (e, nfa, gw)
}

#[test]
fn witness_for_until_example() {
    let (e, nfa, mut gw) = setup();
    let v = expand(&e.dmt, &nfa, &mut gw, &ExpandOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::WitnessFound);
    let run = v.witness.unwrap();
    assert_eq!(run.transitions, vec!["xset".to_string()]);
    assert_eq!(run.states[1][&e.x], Value::Rat(q(4)));
    assert_eq!(check_run(&e.dmt, &run).unwrap(), Ok(()));
    assert!(evaluate_property(&run, &nfa.property).unwrap());
}

fn nfa_for(e: &Example, p: &Property) -> (PropertyNfa, Gateway) {
    let mut gw = Gateway::builtin(e.dmt.ctx.clone());
    let nfa = simplify_nfa(&build_nfa(p, &mut gw).unwrap());
    (nfa, gw)
}

fn exhaustive() -> ExpandOptions {
    ExpandOptions { exhaustive: true, check_paths: true, ..ExpandOptions::default() }
}

#[test]
fn exhaustive_product_is_finite_and_consistent() {
    let (e, nfa, mut gw) = setup();
    let v = expand(&e.dmt, &nfa, &mut gw, &exhaustive()).unwrap();
    assert_eq!(v.outcome, Outcome::WitnessFound);
    let g = &v.graph;
    assert!(g.nodes[0].initial && !g.nodes[0].is_final);
    assert!(g.edges.iter().filter(|x| x.from == 0).all(|x| x.transition.is_none()));
    assert!(g.edges.iter().filter(|x| x.from != 0).all(|x| x.transition.is_some()));
    for (i, n) in g.nodes.iter().enumerate() {
        assert!(gw.is_sat(&n.formula).unwrap());
        assert_eq!(n.is_final, nfa.is_final(n.nfa_state));
        if i > 0 {
            let path = g.path_to(i);
            assert!(verify_path_invariant(&e.dmt, &nfa, &path, &n.formula, &mut gw).unwrap());
        }
    }
    // the node after the dummy step is φ_I ∧ ς₀
    let first = g.edges.iter().find(|x| x.from == 0).unwrap().to;
    let want = Formula::and2(e.dmt.initial_state_formula(), cmp(LinExpr::var(&e.x), CmpOp::Ge, num(0)));
    assert!(gw.check_equiv(&g.nodes[first].formula, &want).unwrap());
    assert!(v.stats.smt.checks > 0);
    assert!(g.to_dot(&nfa, v.accepting_path.as_deref().unwrap_or(&[])).contains("peripheries=2"));

    let again = expand(&e.dmt, &nfa, &mut Gateway::builtin(e.dmt.ctx.clone()), &exhaustive()).unwrap();
    assert_eq!(again.stats.nodes, v.stats.nodes);
    assert_eq!(again.stats.edges, v.stats.edges);
}

#[test]
fn merging_does_not_change_the_verdict() {
    let (e, nfa, mut gw) = setup();
    let merged = expand(&e.dmt, &nfa, &mut gw, &ExpandOptions::default()).unwrap();
    let opts = ExpandOptions { merge: false, ..ExpandOptions::default() };
    let plain = expand(&e.dmt, &nfa, &mut gw, &opts).unwrap();
    assert_eq!(merged.outcome, plain.outcome);
    assert_eq!(merged.witness.unwrap().transitions, plain.witness.unwrap().transitions);
}

#[test]
fn unreachable_goal_has_no_witness() {
    let e = example();
    let leaves = vec![leaf("neg", Formula::and2(
        Formula::eq(e.s.term(), e.c("o2")),
        cmp(LinExpr::var(&e.x), CmpOp::Lt, num(0)),
    ))];
    let p = Property::new(leaves, Ltl::eventually(Ltl::Atom(0)));
    let (nfa, mut gw) = nfa_for(&e, &p);
    let v = expand(&e.dmt, &nfa, &mut gw, &ExpandOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::NoWitness);
    assert!(v.witness.is_none() && v.accepting_path.is_none());
}

#[test]
fn witness_of_length_zero() {
    let e = example();
    let p = Property::new(vec![leaf("c", cmp(LinExpr::var(&e.x), CmpOp::Ge, num(0)))], Ltl::Atom(0));
    let (nfa, mut gw) = nfa_for(&e, &p);
    let v = expand(&e.dmt, &nfa, &mut gw, &ExpandOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::WitnessFound);
    let run = v.witness.unwrap();
    assert!(run.is_empty());
    assert_eq!(run.states[0][&e.x], Value::Rat(q(0)));
}

#[test]
fn budgets_are_reported() {
    let (e, nfa, mut gw) = setup();
    let opts = ExpandOptions {
        budget: Budget { max_nodes: 3, ..Budget::default() },
        exhaustive: true,
        ..ExpandOptions::default()
    };
    let v = expand(&e.dmt, &nfa, &mut gw, &opts).unwrap();
    assert_eq!(v.outcome, Outcome::BudgetExceeded);
    assert!(v.witness.is_none());
    assert!(v.diagnostic.unwrap().contains("node"));
    let opts = ExpandOptions {
        budget: Budget { time: Duration::ZERO, ..Budget::default() },
        ..ExpandOptions::default()
    };
    assert_eq!(expand(&e.dmt, &nfa, &mut gw, &opts).unwrap().outcome, Outcome::BudgetExceeded);
}

#[test]
fn globally_positive_x_after_first_step() {
    // X G (x > 0) needs a step and then x stays positive forever, which xset/yset guarantee
    let e = example();
    let p = Property::new(
        vec![leaf("pos", cmp(LinExpr::var(&e.x), CmpOp::Gt, num(0)))],
        Ltl::next(Ltl::globally(Ltl::Atom(0))),
    );
    let (nfa, mut gw) = nfa_for(&e, &p);
    let v = expand(&e.dmt, &nfa, &mut gw, &ExpandOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::WitnessFound);
    let run = v.witness.unwrap();
    assert_eq!(run.len(), 1);
    assert!(evaluate_property(&run, &p).unwrap());
}

#[test]
fn external_solver_agrees_when_present() {
    use dmtcheck::smt::SolverConfig;
    let cfg = SolverConfig::from_env();
    if cfg.backend == SolverConfig::default().backend {
        return;
    }
    let e = example();
    let p = until_property(&e);
    let mut gw = Gateway::new(e.dmt.ctx.clone(), &cfg);
    let nfa = simplify_nfa(&build_nfa(&p, &mut gw).unwrap());
    let v = expand(&e.dmt, &nfa, &mut gw, &exhaustive()).unwrap();
    assert_eq!(v.outcome, Outcome::WitnessFound);
    let run = v.witness.unwrap();
    assert_eq!(run.states[1][&e.x], Value::Rat(q(4)));
    let (nfa_b, mut gb) = nfa_for(&e, &p);
    let b = expand(&e.dmt, &nfa_b, &mut gb, &exhaustive()).unwrap();
    assert_eq!(b.stats.nodes, v.stats.nodes);
}
