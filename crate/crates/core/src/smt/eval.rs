//! Direct evaluation of formulas in a model fragment.

use std::collections::BTreeMap;

use crate::logic::{dnf_literals, Atom, Cmp, Formula, LinAtom, LinExpr, Literal, Q, Term, Var};

use super::model::{ModelFragment, Value};
use super::simplex;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("model does not determine {0}")]
    Insufficient(String),
    #[error("cannot evaluate: {0}")]
    Unsupported(String),
}

pub type Env = BTreeMap<Var, Value>;

pub fn eval_term(m: &ModelFragment, env: &Env, t: &Term) -> Result<Value, EvalError> {
    match t {
        Term::Var(v) => env
            .get(v)
            .or_else(|| m.variables.get(v))
            .cloned()
            .ok_or_else(|| EvalError::Insufficient(v.to_string())),
        Term::Const(c) => m.constants.get(&c.name).cloned().ok_or_else(|| EvalError::Insufficient(c.name.to_string())),
        Term::Num(q) => Ok(Value::Rat(q.clone())),
        Term::App(f, args) => {
            let vals = args.iter().map(|a| eval_term(m, env, a)).collect::<Result<Vec<_>, _>>()?;
            m.functions
                .get(&f.name)
                .and_then(|tab| tab.get(&vals))
                .cloned()
                .ok_or_else(|| EvalError::Insufficient(t.to_string()))
        }
    }
}

fn eval_rat(m: &ModelFragment, env: &Env, t: &Term) -> Result<Q, EvalError> {
    match eval_term(m, env, t)? {
        Value::Rat(q) => Ok(q),
        Value::Elem(l) => Err(EvalError::Unsupported(format!("rational expected for {}, got {}", t, l))),
    }
}

pub fn eval_literal(m: &ModelFragment, env: &Env, l: &Literal) -> Result<bool, EvalError> {
    let b = match &l.atom {
        Atom::Eq(a, b) => eval_term(m, env, a)? == eval_term(m, env, b)?,
        Atom::Rel(r, args) => {
            let vals = args.iter().map(|a| eval_term(m, env, a)).collect::<Result<Vec<_>, _>>()?;
            m.holds(&r.name, &vals)
        }
        Atom::Lin(a) => {
            let mut acc = a.expr.constant.clone();
            for (t, c) in &a.expr.coeffs {
                acc += c * eval_rat(m, env, t)?;
            }
            a.holds(&acc)
        }
    };
    Ok(b == l.positive)
}

pub fn eval_formula(m: &ModelFragment, f: &Formula) -> Result<bool, EvalError> {
    eval_in(m, &Env::new(), f)
}

pub fn eval_in(m: &ModelFragment, env: &Env, f: &Formula) -> Result<bool, EvalError> {
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Lit(l) => eval_literal(m, env, l),
        Formula::Not(g) => Ok(!eval_in(m, env, g)?),
        Formula::And(gs) => {
            for g in gs {
                if !eval_in(m, env, g)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_in(m, env, g)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Exists(vs, body) => eval_exists(m, env, vs, body),
    }
}

/// Uninterpreted bound variables range over the fragment's universe.
/// Rational ones are decided by linear feasibility with finitely many
/// excluded subspaces coming from negative atoms.
fn eval_exists(m: &ModelFragment, env: &Env, vs: &[Var], body: &Formula) -> Result<bool, EvalError> {
    let (rats, elems): (Vec<&Var>, Vec<&Var>) = vs.iter().partition(|v| v.sort.is_rat());
    let mut assignments: Vec<Env> = vec![env.clone()];
    for v in elems {
        let dom: Vec<Value> = m.universe.get(&v.sort).map(|s| s.iter().cloned().collect()).unwrap_or_default();
        let mut next = Vec::new();
        for a in &assignments {
            for d in &dom {
                let mut b = a.clone();
                b.insert(v.clone(), d.clone());
                next.push(b);
            }
        }
        assignments = next;
    }
    for a in assignments {
        let ok = if rats.is_empty() {
            eval_in(m, &a, body)?
        } else {
            let n = body.nnf().map_err(|e| EvalError::Unsupported(e.to_string()))?;
            let mut any = false;
            for conj in dnf_literals(&n) {
                if rational_feasible(m, &a, &rats, &conj)? {
                    any = true;
                    break;
                }
            }
            any
        };
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

fn rational_feasible(m: &ModelFragment, env: &Env, rats: &[&Var], conj: &[Literal]) -> Result<bool, EvalError> {
    let is_bound = |t: &Term| matches!(t, Term::Var(v) if rats.contains(&v));
    let touches = |l: &Literal| l.vars().iter().any(|v| rats.contains(&v));
    let mut lin: Vec<LinAtom> = Vec::new();
    let mut excl: Vec<Vec<LinExpr>> = Vec::new();
    let mut pos_rels: Vec<&Literal> = Vec::new();
    for l in conj {
        if !touches(l) {
            if !eval_literal(m, env, l)? {
                return Ok(false);
            }
            continue;
        }
        for t in l.atom.terms() {
            if !is_bound(&t) && t.vars().iter().any(|v| rats.contains(&v)) {
                return Err(EvalError::Unsupported(format!("bound rational under a function: {}", t)));
            }
        }
        match &l.atom {
            Atom::Lin(a) => {
                let mut e = LinExpr::constant(a.expr.constant.clone());
                for (t, c) in &a.expr.coeffs {
                    if is_bound(t) {
                        e.add_term(t.clone(), c.clone());
                    } else {
                        e.add_term(Term::Num(eval_rat(m, env, t)?), c.clone());
                    }
                }
                if l.positive {
                    match LinAtom::normalize(e, a.cmp) {
                        crate::logic::linear::Normalized::Const(true) => {}
                        crate::logic::linear::Normalized::Const(false) => return Ok(false),
                        crate::logic::linear::Normalized::Atom(x) => lin.push(x),
                    }
                } else {
                    excl.push(vec![e]);
                }
            }
            Atom::Rel(..) if l.positive => pos_rels.push(l),
            Atom::Rel(r, args) => {
                for tuple in m.relations.get(&r.name).into_iter().flatten() {
                    if let Some(eqs) = unify(m, env, args, tuple, &is_bound)? {
                        excl.push(eqs);
                    }
                }
            }
            Atom::Eq(..) => return Err(EvalError::Unsupported("rational equality outside linear form".into())),
        }
    }
    choose_tuples(m, env, &pos_rels, &is_bound, lin, &excl)
}

/// Equalities binding the bound positions of `args` to `tuple`, or `None`
/// when a free position already disagrees.
fn unify(
    m: &ModelFragment,
    env: &Env,
    args: &[Term],
    tuple: &[Value],
    is_bound: &dyn Fn(&Term) -> bool,
) -> Result<Option<Vec<LinExpr>>, EvalError> {
    let mut eqs = Vec::new();
    for (a, v) in args.iter().zip(tuple) {
        if is_bound(a) {
            let Value::Rat(q) = v else { return Ok(None) };
            eqs.push(LinExpr::term(a.clone()).minus(&LinExpr::constant(q.clone())));
        } else if eval_term(m, env, a)? != *v {
            return Ok(None);
        }
    }
    Ok(Some(eqs))
}

fn choose_tuples(
    m: &ModelFragment,
    env: &Env,
    pos: &[&Literal],
    is_bound: &dyn Fn(&Term) -> bool,
    lin: Vec<LinAtom>,
    excl: &[Vec<LinExpr>],
) -> Result<bool, EvalError> {
    let Some((first, rest)) = pos.split_first() else {
        if simplex::solve(&lin).is_none() {
            return Ok(false);
        }
        return Ok(!excl.iter().any(|eqs| eqs.iter().all(|e| simplex::implies_zero(&lin, e))));
    };
    let Atom::Rel(r, args) = &first.atom else { unreachable!() };
    for tuple in m.relations.get(&r.name).into_iter().flatten() {
        if let Some(eqs) = unify(m, env, args, tuple, is_bound)? {
            let mut l2 = lin.clone();
            let mut dead = false;
            for e in eqs {
                match LinAtom::normalize(e, Cmp::Eq) {
                    crate::logic::linear::Normalized::Const(true) => {}
                    crate::logic::linear::Normalized::Const(false) => dead = true,
                    crate::logic::linear::Normalized::Atom(a) => l2.push(a),
                }
            }
            if !dead && choose_tuples(m, env, rest, is_bound, l2, excl)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}
