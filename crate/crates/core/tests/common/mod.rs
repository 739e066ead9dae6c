#![allow(dead_code)]

use std::collections::BTreeMap;

use dmtcheck::dmt::{Dmt, Transition};
use dmtcheck::logic::{q, CmpOp, Constraint, Formula, LinExpr, Signature, Sort, Term, Var};
use dmtcheck::ltlf::{Leaf, Ltl, Property};
use dmtcheck::smt::TheoryContext;

pub fn cons(f: Formula) -> Constraint {
    let mut lits = Vec::new();
    f.literals(&mut lits);
    Constraint::new(vec![], lits)
}

pub fn leaf(name: &str, f: Formula) -> Leaf {
    Leaf { name: name.into(), constraint: cons(f) }
}

pub fn cmp(a: LinExpr, op: CmpOp, b: LinExpr) -> Formula {
    Formula::compare(a, op, b)
}

pub fn num(n: i64) -> LinExpr {
    LinExpr::constant(q(n))
}

/// The two-transition running example over `s : status`, `x : rat`, `y : elem`.
pub struct Example {
    pub dmt: Dmt,
    pub s: Var,
    pub x: Var,
    pub y: Var,
}

impl Example {
    pub fn c(&self, n: &str) -> Term {
        self.dmt.signature.constant(n).unwrap().term()
    }

    pub fn rel(&self, n: &str, args: Vec<Term>) -> Formula {
        Formula::rel(self.dmt.signature.relation(n).unwrap(), args)
    }
}

pub fn example() -> Example {
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
    let r = sig.add_relation("R", vec![Sort::Rat, elem.clone()]).unwrap();
    let p = sig.add_relation("P", vec![elem.clone()]).unwrap();
    let s = sig.add_variable("s", status).unwrap();
    let x = sig.add_variable("x", Sort::Rat).unwrap();
    let y = sig.add_variable("y", elem).unwrap();
    let mut ctx = TheoryContext::new(sig);
    ctx.distinct.push(vec![o1.clone(), o2.clone()]);
    let xset = Formula::and(vec![
        Formula::eq(s.read().term(), o1.term()),
        Formula::eq(s.write().term(), o2.term()),
        cmp(LinExpr::var(&x.write()), CmpOp::Gt, LinExpr::var(&x.read())),
        Formula::rel(&r, vec![x.write().term(), y.read().term()]),
    ]);
    let yset = Formula::and(vec![
        Formula::eq(s.read().term(), o2.term()),
        Formula::eq(s.write().term(), o1.term()),
        Formula::rel(&p, vec![y.write().term()]),
    ]);
    let initial: BTreeMap<Var, Term> =
        [(s.clone(), o1.term()), (x.clone(), Term::num(q(0))), (y.clone(), a.term())].into_iter().collect();
    let transitions = vec![
        Transition { name: "xset".into(), guard: cons(xset) },
        Transition { name: "yset".into(), guard: cons(yset) },
    ];
    let dmt = Dmt::new(ctx, initial, transitions).unwrap();
    Example { dmt, s, x, y }
}

/// `(x ≥ 0) U (s = o2 ∧ x = 4)`
pub fn until_property(e: &Example) -> Property {
    let leaves = vec![
        leaf("c0", cmp(LinExpr::var(&e.x), CmpOp::Ge, num(0))),
        leaf("c1", Formula::eq(e.s.term(), e.c("o2"))),
        leaf("c2", cmp(LinExpr::var(&e.x), CmpOp::Eq, num(4))),
    ];
    Property::new(leaves, Ltl::until(Ltl::Atom(0), Ltl::and([Ltl::Atom(1), Ltl::Atom(2)])))
}
