use dmtcheck::logic::{q, CmpOp, Const, Formula, LinExpr, Signature, Sort, Var};
use dmtcheck::smt::{eval::eval_formula, Gateway, SolverConfig, TheoryContext, Value};

struct Ex {
    ctx: TheoryContext,
    s: Var,
    x: Var,
    y: Var,
    o1: Const,
    o2: Const,
    a: Const,
}

fn example() -> Ex {
    let mut sig = Signature::new();
    let status = Sort::named("status");
    let elem = Sort::named("elem");
    sig.add_sort(status.clone()).unwrap();
    sig.add_sort(elem.clone()).unwrap();
    sig.add_sort(Sort::Rat).unwrap();
    let o1 = sig.add_constant("o1", status.clone()).unwrap();
    let o2 = sig.add_constant("o2", status.clone()).unwrap();
    let a = sig.add_constant("a", elem.clone()).unwrap();
    sig.add_constant("b", elem.clone()).unwrap();
    sig.add_relation("R", vec![Sort::Rat, elem.clone()]).unwrap();
    sig.add_relation("P", vec![elem.clone()]).unwrap();
    let s = sig.add_variable("s", status).unwrap();
    let x = sig.add_variable("x", Sort::Rat).unwrap();
    let y = sig.add_variable("y", elem).unwrap();
    let mut ctx = TheoryContext::new(sig);
    ctx.distinct.push(vec![o1.clone(), o2.clone()]);
    Ex { ctx, s, x, y, o1, o2, a }
}

fn cmp(a: LinExpr, op: CmpOp, b: LinExpr) -> Formula {
    Formula::compare(a, op, b)
}

fn gateways(ctx: &TheoryContext) -> Vec<Gateway> {
    let mut out = vec![Gateway::builtin(ctx.clone())];
    let cfg = SolverConfig::from_env();
    if cfg.backend != SolverConfig::default().backend {
        out.push(Gateway::new(ctx.clone(), &cfg));
    }
    out
}

#[test]
fn history_of_xset_needs_r_4_a() {
    let e = example();
    let r = e.ctx.signature.relation("R").unwrap().clone();
    let (s0, s1, x0, x1, y0, y1) = (e.s.at(0), e.s.at(1), e.x.at(0), e.x.at(1), e.y.at(0), e.y.at(1));
    let f = Formula::and(vec![
        Formula::eq(s0.term(), e.o1.term()),
        Formula::eq(x0.term(), dmtcheck::logic::Term::num(q(0))),
        Formula::eq(y0.term(), e.a.term()),
        Formula::eq(s0.term(), e.o1.term()),
        Formula::eq(s1.term(), e.o2.term()),
        cmp(LinExpr::var(&x1), CmpOp::Gt, LinExpr::var(&x0)),
        Formula::rel(&r, vec![x1.term(), y0.term()]),
        Formula::eq(y1.term(), y0.term()),
        cmp(LinExpr::var(&x0), CmpOp::Ge, LinExpr::constant(q(0))),
        Formula::eq(x1.term(), dmtcheck::logic::Term::num(q(4))),
        Formula::eq(s1.term(), e.o2.term()),
    ]);
    for mut g in gateways(&e.ctx) {
        let res = g.check_sat(&f, true).unwrap();
        assert!(res.is_sat(), "{}", g.backend_name());
        let m = res.model.unwrap();
        assert_eq!(m.variables[&x1], Value::Rat(q(4)));
        assert!(m.holds("R", &[Value::Rat(q(4)), Value::elem("a")]), "{:?}", m);
        assert_eq!(eval_formula(&m, &f), Ok(true));
    }
}

#[test]
fn trivial_unsat() {
    let e = example();
    let x = LinExpr::var(&e.x);
    let zero = LinExpr::constant(q(0));
    for mut g in gateways(&e.ctx) {
        assert!(g.check_sat(&Formula::False, false).unwrap().is_unsat());
        let f = Formula::and2(cmp(x.clone(), CmpOp::Eq, zero.clone()), cmp(x.clone(), CmpOp::Gt, zero.clone()));
        assert!(g.check_sat(&f, false).unwrap().is_unsat());
    }
}

#[test]
fn equivalences() {
    let e = example();
    let x = LinExpr::var(&e.x);
    let zero = LinExpr::constant(q(0));
    let both = Formula::and2(cmp(x.clone(), CmpOp::Ge, zero.clone()), cmp(x.clone(), CmpOp::Le, zero.clone()));
    let eq0 = cmp(x.clone(), CmpOp::Eq, zero);
    let so1 = Formula::eq(e.s.term(), e.o1.term());
    let so2 = Formula::eq(e.s.term(), e.o2.term());
    let mut loose = e.ctx.clone();
    loose.distinct.clear();
    for mut g in gateways(&e.ctx) {
        assert!(g.check_equiv(&both, &both).unwrap());
        assert!(g.check_equiv(&both, &eq0).unwrap());
        assert!(!g.check_equiv(&so1, &so2).unwrap());
    }
    for mut g in gateways(&loose) {
        assert!(!g.check_equiv(&so1, &so2).unwrap());
        assert!(g.is_sat(&Formula::and2(so1.clone(), so2.clone())).unwrap());
    }
}

#[test]
fn stats_count_per_phase() {
    let e = example();
    let mut g = Gateway::builtin(e.ctx.clone());
    assert_eq!(g.stats().checks, 0);
    g.set_phase("product-expansion");
    for _ in 0..3 {
        g.check_sat(&Formula::True, false).unwrap();
    }
    let st = g.reset_and_stats(true);
    assert_eq!(st.checks, 3);
    assert_eq!(st.per_phase["product-expansion"].count, 3);
    assert_eq!(g.stats().checks, 0);
}

#[test]
fn existential_prefix_is_skolemized() {
    let e = example();
    let p = e.ctx.signature.relation("P").unwrap().clone();
    let u = Var::new("u", Sort::named("elem"));
    let f = Formula::exists(vec![u.clone()], Formula::and2(
        Formula::rel(&p, vec![u.term()]),
        Formula::neq(u.term(), e.y.term()),
    ));
    for mut g in gateways(&e.ctx) {
        assert!(g.is_sat(&f).unwrap());
    }
}

#[test]
fn facts_constrain_models() {
    let mut e = example();
    let p = e.ctx.signature.relation("P").unwrap().clone();
    let pa = Formula::rel(&p, vec![e.a.term()]);
    for mut g in gateways(&e.ctx) {
        assert!(g.is_sat(&Formula::not(pa.clone())).unwrap());
    }
    if let Formula::Lit(l) = &pa {
        e.ctx.facts.push(l.clone());
    }
    for mut g in gateways(&e.ctx) {
        assert!(!g.is_sat(&Formula::not(pa.clone())).unwrap());
    }
}
