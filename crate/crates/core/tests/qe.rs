use std::collections::BTreeSet;

use dmtcheck::logic::{q, CmpOp, Formula, LinExpr, Literal, Signature, Sort, Term, Var};
use dmtcheck::qe::{cover, cover_property_test, euf_cover, fm_eliminate, tame_cover, EliminationTask};
use dmtcheck::smt::{Gateway, TheoryContext};
use proptest::prelude::*;

fn lits(f: Formula) -> Vec<Literal> {
    let mut out = Vec::new();
    f.literals(&mut out);
    out
}

fn rat(n: &str) -> Var {
    Var::new(n, Sort::Rat)
}

fn lin(v: &Var) -> LinExpr {
    LinExpr::var(v)
}

fn euf_sig() -> Signature {
    let mut sig = Signature::new();
    let e = Sort::named("elem");
    sig.add_sort(e.clone()).unwrap();
    sig.add_sort(Sort::named("item")).unwrap();
    sig.add_constant("a", Sort::named("item")).unwrap();
    sig.add_constant("b", Sort::named("item")).unwrap();
    sig.add_function("f", vec![e.clone()], Sort::named("item")).unwrap();
    sig.add_relation("R", vec![e.clone(), e.clone()]).unwrap();
    sig
}

#[test]
fn fm_examples() {
    let (x0, x1, u, y) = (rat("x0"), rat("x1"), rat("u"), rat("y"));
    let t = EliminationTask::from_literals(
        vec![x0.clone()],
        lits(Formula::and2(
            Formula::compare(lin(&x0), CmpOp::Eq, LinExpr::constant(q(0))),
            Formula::compare(lin(&x1), CmpOp::Gt, lin(&x0)),
        )),
    );
    assert_eq!(fm_eliminate(&t).unwrap(), Formula::compare(lin(&x1), CmpOp::Gt, LinExpr::constant(q(0))));
    let t = EliminationTask::from_literals(vec![u.clone()], vec![]);
    assert_eq!(fm_eliminate(&t).unwrap(), Formula::True);
    let t = EliminationTask::from_literals(
        vec![u.clone()],
        lits(Formula::and2(
            Formula::compare(lin(&u), CmpOp::Lt, lin(&y)),
            Formula::compare(lin(&u), CmpOp::Gt, lin(&y)),
        )),
    );
    assert_eq!(fm_eliminate(&t).unwrap(), Formula::False);
}

#[test]
fn fm_splits_disequalities() {
    let (u, y) = (rat("u"), rat("y"));
    // ∃u. u ≠ y ∧ u ≤ y ∧ u ≥ y is unsatisfiable
    let t = EliminationTask::from_literals(
        vec![u.clone()],
        lits(Formula::and(vec![
            Formula::compare(lin(&u), CmpOp::Ne, lin(&y)),
            Formula::compare(lin(&u), CmpOp::Le, lin(&y)),
            Formula::compare(lin(&u), CmpOp::Ge, lin(&y)),
        ])),
    );
    assert_eq!(fm_eliminate(&t).unwrap(), Formula::False);
}

#[test]
fn euf_examples() {
    let sig = euf_sig();
    let elem = Sort::named("elem");
    let (e, y, z) = (Var::new("e", elem.clone()), Var::new("y", elem.clone()), Var::new("z", elem.clone()));
    let f = sig.function("f").unwrap().clone();
    let r = sig.relation("R").unwrap().clone();
    let (a, b) = (sig.constant("a").unwrap().term(), sig.constant("b").unwrap().term());

    let t = EliminationTask::from_literals(vec![e.clone()], lits(Formula::eq(y.term(), e.term())));
    assert_eq!(euf_cover(&t).unwrap(), Formula::True);

    let fe = Term::app(&f, vec![e.term()]);
    let t = EliminationTask::from_literals(
        vec![e.clone()],
        lits(Formula::and2(Formula::eq(fe.clone(), a.clone()), Formula::eq(fe, b.clone()))),
    );
    assert_eq!(euf_cover(&t).unwrap(), Formula::eq(a, b));

    let t = EliminationTask::from_literals(
        vec![e.clone()],
        lits(Formula::and2(Formula::rel(&r, vec![e.term(), y.term()]), Formula::eq(e.term(), z.term()))),
    );
    let mut gw = Gateway::builtin(TheoryContext::new(sig.clone()));
    let c = euf_cover(&t).unwrap();
    assert!(gw.check_equiv(&c, &Formula::rel(&r, vec![z.term(), y.term()])).unwrap());
}

#[test]
fn euf_rejects_binary_functions() {
    let mut sig = euf_sig();
    let elem = Sort::named("elem");
    let g = sig.add_function("g", vec![elem.clone(), elem.clone()], elem.clone()).unwrap();
    let (e, y) = (Var::new("e", elem.clone()), Var::new("y", elem.clone()));
    let t = EliminationTask::from_literals(
        vec![e.clone()],
        lits(Formula::eq(Term::app(&g, vec![e.term(), y.term()]), y.term())),
    );
    assert!(euf_cover(&t).is_err());
}

fn example_ctx() -> (TheoryContext, Var, Var, Var) {
    let mut sig = Signature::new();
    let status = Sort::named("status");
    let elem = Sort::named("elem");
    sig.add_sort(status.clone()).unwrap();
    sig.add_sort(elem.clone()).unwrap();
    sig.add_sort(Sort::Rat).unwrap();
    let o1 = sig.add_constant("o1", status.clone()).unwrap();
    let o2 = sig.add_constant("o2", status.clone()).unwrap();
    sig.add_constant("a", elem.clone()).unwrap();
    sig.add_constant("b", elem.clone()).unwrap();
    sig.add_relation("R", vec![Sort::Rat, elem.clone()]).unwrap();
    sig.add_relation("P", vec![elem.clone()]).unwrap();
    let s = sig.add_variable("s", status).unwrap();
    let x = sig.add_variable("x", Sort::Rat).unwrap();
    let y = sig.add_variable("y", elem).unwrap();
    let mut ctx = TheoryContext::new(sig);
    ctx.distinct.push(vec![o1, o2]);
    (ctx, s, x, y)
}

#[test]
fn update_of_initial_state_by_xset() {
    let (ctx, s, x, y) = example_ctx();
    let sig = &ctx.signature;
    let c = |n: &str| sig.constant(n).unwrap().term();
    let r = sig.relation("R").unwrap().clone();
    let (s0, x0, y0) = (s.at(0), x.at(0), y.at(0));
    let body = Formula::and(vec![
        Formula::eq(s0.term(), c("o1")),
        Formula::compare(lin(&x0), CmpOp::Eq, LinExpr::constant(q(0))),
        Formula::eq(y0.term(), c("a")),
        Formula::eq(s.term(), c("o2")),
        Formula::compare(lin(&x), CmpOp::Gt, lin(&x0)),
        Formula::rel(&r, vec![x.term(), y0.term()]),
        Formula::eq(y.term(), y0.term()),
    ]);
    let keep: BTreeSet<Var> = [s.clone(), x.clone(), y.clone()].into_iter().collect();
    let res = cover(&Formula::exists(vec![s0, x0, y0], body.clone()), &keep, &ctx).unwrap();
    let expected = Formula::and(vec![
        Formula::eq(s.term(), c("o2")),
        Formula::compare(lin(&x), CmpOp::Gt, LinExpr::constant(q(0))),
        Formula::eq(y.term(), c("a")),
        Formula::rel(&r, vec![x.term(), y.term()]),
    ]);
    let mut gw = Gateway::builtin(ctx.clone());
    assert!(gw.check_equiv(&res.formula, &expected).unwrap(), "{}", res.formula);
    assert!(res.residual_terms.is_empty());
}

#[test]
fn pinned_rational_argument() {
    // ∃u. R(u, y) ∧ x ≤ u ∧ u ≤ 3 : either x = 3 and R(3, y), or x < 3
    let (ctx, _, x, y) = example_ctx();
    let r = ctx.signature.relation("R").unwrap().clone();
    let u = rat("u");
    let body = Formula::and(vec![
        Formula::rel(&r, vec![u.term(), y.term()]),
        Formula::compare(lin(&x), CmpOp::Le, lin(&u)),
        Formula::compare(lin(&u), CmpOp::Le, LinExpr::constant(q(3))),
    ]);
    let task = EliminationTask::from_literals(vec![u.clone()], lits(body));
    let res = tame_cover(&task, &ctx).unwrap();
    let mut gw = Gateway::builtin(ctx.clone());
    let report = cover_property_test(&task, &res.formula, 60, 7, &mut gw).unwrap();
    assert!(report.passed, "{} fails on {:?}", res.formula, report.failure);
}

#[test]
fn relation_clash_forces_disequality() {
    // ∃u. R(u, y) ∧ ¬R(x, y) ∧ u = 2 → R(2, y) ∧ x ≠ 2
    let (ctx, _, x, y) = example_ctx();
    let r = ctx.signature.relation("R").unwrap().clone();
    let u = rat("u");
    let body = Formula::and(vec![
        Formula::rel(&r, vec![u.term(), y.term()]),
        Formula::not(Formula::rel(&r, vec![x.term(), y.term()])),
        Formula::compare(lin(&u), CmpOp::Eq, LinExpr::constant(q(2))),
    ]);
    let task = EliminationTask::from_literals(vec![u.clone()], lits(body));
    let res = tame_cover(&task, &ctx).unwrap();
    let expected = Formula::and(vec![
        Formula::rel(&r, vec![Term::num(q(2)), y.term()]),
        Formula::not(Formula::rel(&r, vec![x.term(), y.term()])),
        Formula::compare(lin(&x), CmpOp::Ne, LinExpr::constant(q(2))),
    ]);
    let mut gw = Gateway::builtin(ctx.clone());
    assert!(gw.check_equiv(&res.formula, &expected).unwrap(), "{}", res.formula);
}

#[test]
fn property_test_detects_bad_candidates() {
    let sig = euf_sig();
    let elem = Sort::named("elem");
    let e = Var::new("e", elem.clone());
    let f = sig.function("f").unwrap().clone();
    let (a, b) = (sig.constant("a").unwrap().term(), sig.constant("b").unwrap().term());
    let fe = Term::app(&f, vec![e.term()]);
    let task = EliminationTask::from_literals(
        vec![e.clone()],
        lits(Formula::and2(Formula::eq(fe.clone(), a.clone()), Formula::eq(fe, b.clone()))),
    );
    let mut gw = Gateway::builtin(TheoryContext::new(sig.clone()));
    let good = euf_cover(&task).unwrap();
    assert!(cover_property_test(&task, &good, 100, 1, &mut gw).unwrap().passed);
    let bad = cover_property_test(&task, &Formula::True, 100, 1, &mut gw).unwrap();
    assert!(!bad.passed);
    let bad = cover_property_test(&task, &Formula::False, 100, 1, &mut gw).unwrap();
    assert!(!bad.passed);
    assert_eq!(bad.failure, Some(Formula::True));
}

#[test]
fn empty_elimination_is_identity() {
    let (ctx, s, x, y) = example_ctx();
    let r = ctx.signature.relation("R").unwrap().clone();
    let body = Formula::and(vec![
        Formula::rel(&r, vec![x.term(), y.term()]),
        Formula::compare(lin(&x), CmpOp::Ge, LinExpr::constant(q(1))),
        Formula::eq(s.term(), ctx.signature.constant("o1").unwrap().term()),
    ]);
    let task = EliminationTask::from_literals(vec![], lits(body.clone()));
    let res = tame_cover(&task, &ctx).unwrap();
    let mut gw = Gateway::builtin(ctx.clone());
    assert!(gw.check_equiv(&res.formula, &body).unwrap());
}

/// Random literals over a small mixed signature.
fn mixed_literal(
    ctx: &TheoryContext,
    vars_e: &[Var],
    vars_r: &[Var],
) -> impl Strategy<Value = Formula> {
    let sig = ctx.signature.clone();
    let ve = vars_e.to_vec();
    let vr = vars_r.to_vec();
    (0..6usize, 0..4usize, 0..4usize, any::<bool>(), -1i64..3).prop_map(move |(kind, i, j, pol, k)| {
        let e = |n: usize| {
            if n < ve.len() {
                ve[n].term()
            } else {
                sig.constant("a").unwrap().term()
            }
        };
        let r = |n: usize| LinExpr::var(&vr[n % vr.len()]);
        let f = match kind {
            0 => Formula::eq(e(i), e(j)),
            1 => Formula::rel(sig.relation("P").unwrap(), vec![e(i)]),
            2 => Formula::rel(sig.relation("R").unwrap(), vec![vr[i % vr.len()].term(), e(j)]),
            3 => Formula::compare(r(i), CmpOp::Le, r(j).plus(&LinExpr::constant(q(k)))),
            4 => Formula::compare(r(i), CmpOp::Lt, r(j)),
            _ => Formula::compare(r(i), CmpOp::Eq, LinExpr::constant(q(k))),
        };
        if pol {
            f
        } else {
            Formula::not(f)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, .. ProptestConfig::default() })]
    #[test]
    fn tame_cover_has_cover_property(parts in {
        let (ctx, _, _, _) = example_ctx();
        let elem = Sort::named("elem");
        let ve = vec![Var::new("e", elem.clone()), Var::new("y", elem.clone())];
        let vr = vec![rat("u"), rat("x"), rat("w")];
        proptest::collection::vec(mixed_literal(&ctx, &ve, &vr), 1..5)
    }, seed in 0u64..1000) {
        let (ctx, _, _, _) = example_ctx();
        let elim = vec![Var::new("e", Sort::named("elem")), rat("u"), rat("w")];
        let body = Formula::and(parts);
        let mut ls = Vec::new();
        body.literals(&mut ls);
        prop_assume!(!matches!(body, Formula::False));
        let task = EliminationTask::from_literals(elim, ls);
        let res = match tame_cover(&task, &ctx) {
            Ok(r) => r,
            Err(dmtcheck::qe::QeError::Unsupported(_)) => return Ok(()),
            Err(e) => panic!("{}", e),
        };
        let mut gw = Gateway::builtin(ctx.clone());
        // the input implies its cover
        prop_assert!(gw.implies(&task.formula(), &res.formula).unwrap());
        let report = cover_property_test(&task, &res.formula, 25, seed, &mut gw).unwrap();
        prop_assert!(report.passed, "cover {} of {} fails on {:?}", res.formula, task.formula(), report.failure);
    }

    #[test]
    fn fm_agrees_with_sampling(
        coeffs in proptest::collection::vec((-3i64..4, -3i64..4, -3i64..4, 0usize..3), 1..5),
        xv in -4i64..5,
    ) {
        let (u, x) = (rat("u"), rat("x"));
        let mut ls = Vec::new();
        for (a, b, k, op) in &coeffs {
            let e = LinExpr::var(&u).scaled(&q(*a)).plus(&LinExpr::var(&x).scaled(&q(*b)));
            let op = [CmpOp::Le, CmpOp::Lt, CmpOp::Eq][*op];
            Formula::compare(e, op, LinExpr::constant(q(*k))).literals(&mut ls);
        }
        let task = EliminationTask::from_literals(vec![u.clone()], ls);
        let out = fm_eliminate(&task).unwrap();
        prop_assert!(!out.free_vars().contains(&u));
        // compare at x := xv with a direct feasibility check
        let pin = Formula::compare(LinExpr::var(&x), CmpOp::Eq, LinExpr::constant(q(xv)));
        let direct = dmtcheck::smt::satisfiable(&Formula::and2(task.matrix_formula(), pin.clone()));
        let projected = dmtcheck::smt::satisfiable(&Formula::and2(out, pin));
        prop_assert_eq!(direct, projected);
    }
}
