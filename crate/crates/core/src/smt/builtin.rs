//! In-process decision procedure for quantifier-free EUF + LRA:
//! case splitting over the Boolean structure, congruence closure, exact
//! simplex, and equality propagation between the two.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::logic::linear::Normalized;
use crate::logic::{Atom, Cmp, Formula, LinAtom, LinExpr, Literal, Q, Sort, Term};

use super::cc::{Cc, NodeId, NodeKind};
use super::model::{ModelFragment, Value};
use super::{simplex, Backend, SatResult, SmtError, TheoryContext};

#[derive(Default)]
pub struct BuiltinSolver;

impl BuiltinSolver {
    pub fn new() -> BuiltinSolver {
        BuiltinSolver
    }
}

impl Backend for BuiltinSolver {
    fn name(&self) -> String {
        "builtin".into()
    }

    fn check(&mut self, ctx: &TheoryContext, f: &Formula, model: Option<&[Formula]>) -> Result<SatResult, SmtError> {
        let mut pending: Vec<Formula> = ctx.background();
        pending.push(f.clone());
        let extra: Vec<Atom> = model.map(|fs| fs.iter().flat_map(Formula::atoms).collect()).unwrap_or_default();
        let want = model.is_some();
        Ok(match search(pending, Vec::new(), want, &extra) {
            Some(m) => SatResult::sat(if want { m } else { None }),
            None => SatResult::unsat(),
        })
    }
}

/// Decides a formula in negation normal form without quantifiers.
pub fn satisfiable(f: &Formula) -> bool {
    search(vec![f.clone()], Vec::new(), false, &[]).is_some()
}

fn search(mut pending: Vec<Formula>, mut lits: Vec<Literal>, want: bool, extra: &[Atom]) -> Option<Option<ModelFragment>> {
    while let Some(f) = pending.pop() {
        match f {
            Formula::True => {}
            Formula::False => return None,
            Formula::Lit(l) => match split_diseq(&l) {
                Some(d) => pending.push(d),
                None => lits.push(l),
            },
            Formula::And(gs) => pending.extend(gs),
            Formula::Not(g) => match Formula::Not(g).nnf() {
                Ok(n) => pending.push(n),
                Err(_) => return None,
            },
            Formula::Exists(_, g) => pending.push(*g),
            Formula::Or(gs) => {
                if theory_check(&lits, false, &[]).is_none() {
                    return None;
                }
                for g in gs {
                    let mut p = pending.clone();
                    p.push(g);
                    if let Some(r) = search(p, lits.clone(), want, extra) {
                        return Some(r);
                    }
                }
                return None;
            }
        }
    }
    theory_check(&lits, want, extra)
}

/// `e ≠ 0` becomes `e < 0 ∨ e > 0`.
fn split_diseq(l: &Literal) -> Option<Formula> {
    match &l.atom {
        Atom::Lin(a) if !l.positive && a.cmp == Cmp::Eq => Some(Formula::or([
            Formula::lin(a.expr.clone(), Cmp::Lt),
            Formula::lin(a.expr.scaled(&-Q::one()), Cmp::Lt),
        ])),
        _ => None,
    }
}

fn push_lin(lin: &mut Vec<LinAtom>, e: LinExpr, cmp: Cmp) -> bool {
    match LinAtom::normalize(e, cmp) {
        Normalized::Const(b) => b,
        Normalized::Atom(a) => {
            if !lin.contains(&a) {
                lin.push(a);
            }
            true
        }
    }
}

/// Checks a conjunction of literals. `Some(None)` means satisfiable without a
/// requested model.
pub(crate) fn theory_check(lits: &[Literal], want: bool, extra: &[Atom]) -> Option<Option<ModelFragment>> {
    let mut cc = Cc::new();
    let mut lin: Vec<LinAtom> = Vec::new();
    let mut diseqs: Vec<(NodeId, NodeId)> = Vec::new();
    for l in lits {
        match &l.atom {
            Atom::Eq(a, b) => {
                let (x, y) = (cc.add_term(a), cc.add_term(b));
                if l.positive {
                    cc.merge(x, y);
                } else {
                    diseqs.push((x, y));
                }
            }
            Atom::Rel(r, args) => {
                let n = cc.add_rel(r, args);
                cc.merge(n, if l.positive { Cc::TRUE } else { Cc::FALSE });
            }
            Atom::Lin(a) => {
                for t in a.expr.coeffs.keys() {
                    cc.add_term(t);
                }
                if l.positive {
                    lin.push(a.clone());
                } else if split_diseq(l).is_some() {
                    unreachable!("disequalities are split before theory checks")
                }
            }
        }
    }
    for a in extra {
        match a {
            Atom::Eq(x, y) => {
                cc.add_term(x);
                cc.add_term(y);
            }
            Atom::Rel(r, args) => {
                cc.add_rel(r, args);
            }
            Atom::Lin(l) => {
                for t in l.expr.coeffs.keys() {
                    cc.add_term(t);
                }
            }
        }
    }
    let shared = shared_rational_nodes(&cc);
    let mut linked: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let model = loop {
        cc.close();
        if cc.inconsistent_bool() || diseqs.iter().any(|&(a, b)| cc.same(a, b)) {
            return None;
        }
        for (_, members) in cc.classes() {
            let rats: Vec<NodeId> =
                members.iter().copied().filter(|&n| cc.sort(n).is_some_and(|s| s.is_rat())).collect();
            for w in rats.windows(2) {
                if linked.insert((w[0], w[1])) {
                    let e = LinExpr::term(cc.term(w[0]).unwrap().clone())
                        .minus(&LinExpr::term(cc.term(w[1]).unwrap().clone()));
                    if !push_lin(&mut lin, e, Cmp::Eq) {
                        return None;
                    }
                }
            }
        }
        let model = simplex::solve(&lin)?;
        let mut changed = false;
        for (i, &a) in shared.iter().enumerate() {
            for &b in &shared[i + 1..] {
                if cc.same(a, b) {
                    continue;
                }
                let (ta, tb) = (cc.term(a).unwrap(), cc.term(b).unwrap());
                if rat_value(&model, ta) != rat_value(&model, tb) {
                    continue;
                }
                let e = LinExpr::term(ta.clone()).minus(&LinExpr::term(tb.clone()));
                if simplex::implies_zero(&lin, &e) {
                    cc.merge(a, b);
                    changed = true;
                }
            }
        }
        if !changed {
            break model;
        }
    };
    if !want {
        return Some(None);
    }
    Some(Some(build_model(&cc, lin, model, &shared)))
}

fn rat_value(model: &BTreeMap<Term, Q>, t: &Term) -> Option<Q> {
    match t {
        Term::Num(q) => Some(q.clone()),
        _ => model.get(t).cloned(),
    }
}

/// Rational nodes whose identity matters to the uninterpreted side:
/// arguments of function or relation nodes.
fn shared_rational_nodes(cc: &Cc) -> Vec<NodeId> {
    let mut out = BTreeSet::new();
    for n in 0..cc.len() {
        if let NodeKind::Fun(_, args) | NodeKind::Rel(_, args) = cc.kind(n) {
            for &a in args {
                if cc.sort(a).is_some_and(|s| s.is_rat()) {
                    out.insert(a);
                }
            }
        }
    }
    out.into_iter().collect()
}

fn build_model(cc: &Cc, mut lin: Vec<LinAtom>, mut model: BTreeMap<Term, Q>, shared: &[NodeId]) -> ModelFragment {
    // separate shared rationals that the congruence closure keeps apart
    'outer: loop {
        for (i, &a) in shared.iter().enumerate() {
            for &b in &shared[i + 1..] {
                if cc.same(a, b) {
                    continue;
                }
                let (ta, tb) = (cc.term(a).unwrap(), cc.term(b).unwrap());
                let (va, vb) = (rat_value(&model, ta), rat_value(&model, tb));
                if va.is_none() || va != vb {
                    continue;
                }
                let e = LinExpr::term(ta.clone()).minus(&LinExpr::term(tb.clone()));
                for sign in [Q::one(), -Q::one()] {
                    let mut l2 = lin.clone();
                    if push_lin(&mut l2, e.scaled(&sign), Cmp::Lt) {
                        if let Some(m2) = simplex::solve(&l2) {
                            lin = l2;
                            model = m2;
                            continue 'outer;
                        }
                    }
                }
            }
        }
        break;
    }
    let classes = cc.classes();
    let mut value_of: BTreeMap<NodeId, Value> = BTreeMap::new();
    let mut used: BTreeSet<Q> = model.values().cloned().collect();
    let mut counters: BTreeMap<Sort, usize> = BTreeMap::new();
    for (&rep, members) in &classes {
        let Some(sort) = members.iter().find_map(|&n| cc.sort(n)) else { continue };
        let v = if sort.is_rat() {
            let q = members.iter().find_map(|&n| rat_value(&model, cc.term(n).unwrap()));
            Value::Rat(q.unwrap_or_else(|| {
                let mut fresh = used.iter().max().cloned().unwrap_or_else(Q::zero) + Q::one();
                while used.contains(&fresh) {
                    fresh += Q::one();
                }
                used.insert(fresh.clone());
                fresh
            }))
        } else {
            let named = members
                .iter()
                .filter_map(|&n| match cc.term(n) {
                    Some(Term::Const(c)) => Some(c.name.clone()),
                    _ => None,
                })
                .min();
            match named {
                Some(c) => Value::Elem(c),
                None => {
                    let k = counters.entry(sort.clone()).or_insert(0);
                    *k += 1;
                    Value::elem(&format!("{}!{}", sort, k))
                }
            }
        };
        value_of.insert(rep, v);
    }
    let mut m = ModelFragment::default();
    let val = |n: NodeId| value_of.get(&cc.find(n)).cloned();
    for n in 0..cc.len() {
        match cc.kind(n) {
            NodeKind::Leaf(t) => {
                let Some(v) = val(n) else { continue };
                m.note(&t.sort(), &v);
                match t {
                    Term::Var(x) => {
                        m.variables.insert(x.clone(), v);
                    }
                    Term::Const(c) => {
                        m.constants.insert(c.name.clone(), v);
                    }
                    _ => {}
                }
            }
            NodeKind::Fun(f, args) => {
                let (Some(v), Some(key)) = (val(n), args.iter().map(|&a| val(a)).collect::<Option<Vec<_>>>()) else {
                    continue;
                };
                m.note(&f.result, &v);
                m.functions.entry(f.name.clone()).or_default().insert(key, v);
            }
            NodeKind::Rel(r, args) => {
                if cc.same(n, Cc::TRUE) {
                    if let Some(key) = args.iter().map(|&a| val(a)).collect::<Option<Vec<_>>>() {
                        m.relations.entry(r.name.clone()).or_default().insert(key);
                    }
                }
            }
            _ => {}
        }
    }
    m
}
