//! Fourier–Motzkin projection over exact rationals.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use crate::logic::linear::Normalized;
use crate::logic::{Cmp, LinAtom, LinExpr, Q, Term};

/// Adds an atom; `false` when it folds to a contradiction.
fn push(out: &mut Vec<LinAtom>, e: LinExpr, cmp: Cmp) -> bool {
    match LinAtom::normalize(e, cmp) {
        Normalized::Const(b) => b,
        Normalized::Atom(a) => {
            if !out.contains(&a) {
                out.push(a);
            }
            true
        }
    }
}

/// Projects a conjunction of `e ⋈ 0` atoms onto the leaves outside `elim`.
/// `None` when the conjunction is infeasible.
pub fn project(atoms: &[LinAtom], elim: &BTreeSet<Term>) -> Option<Vec<LinAtom>> {
    let mut cur: Vec<LinAtom> = Vec::new();
    for a in atoms {
        if !push(&mut cur, a.expr.clone(), a.cmp) {
            return None;
        }
    }
    for t in elim {
        // Gaussian step
        if let Some(i) = cur.iter().position(|a| a.cmp == Cmp::Eq && !a.expr.coeff(t).is_zero()) {
            let eq = cur.remove(i);
            let c = eq.expr.coeff(t);
            let mut rest = eq.expr.clone();
            rest.coeffs.remove(t);
            let by = rest.scaled(&(-c.recip()));
            let mut next = Vec::new();
            for a in cur {
                if !push(&mut next, a.expr.substitute(t, &by), a.cmp) {
                    return None;
                }
            }
            cur = next;
            continue;
        }
        let (with, without): (Vec<LinAtom>, Vec<LinAtom>) =
            cur.into_iter().partition(|a| !a.expr.coeff(t).is_zero());
        let mut next = without;
        let (upper, lower): (Vec<&LinAtom>, Vec<&LinAtom>) = with.iter().partition(|a| a.expr.coeff(t).is_positive());
        for u in &upper {
            for l in &lower {
                let cu = u.expr.coeff(t);
                let cl = -l.expr.coeff(t);
                let mut e = u.expr.scaled(&cl);
                e.add_scaled(&l.expr, &cu);
                e.coeffs.remove(t);
                let cmp = if u.cmp == Cmp::Lt || l.cmp == Cmp::Lt { Cmp::Lt } else { Cmp::Le };
                if !push(&mut next, e, cmp) {
                    return None;
                }
            }
        }
        cur = prune(next)?;
    }
    prune(cur)
}

/// Keeps the tightest inequality per direction and detects opposite-bound clashes.
pub fn prune(atoms: Vec<LinAtom>) -> Option<Vec<LinAtom>> {
    let mut best: BTreeMap<BTreeMap<Term, Q>, LinAtom> = BTreeMap::new();
    let mut eqs: Vec<LinAtom> = Vec::new();
    for a in atoms {
        if a.cmp == Cmp::Eq {
            if !eqs.contains(&a) {
                eqs.push(a);
            }
            continue;
        }
        match best.get(&a.expr.coeffs) {
            Some(b) if !tighter(&a, b) => {}
            _ => {
                best.insert(a.expr.coeffs.clone(), a);
            }
        }
    }
    // e + k1 ⋈ 0 and -e + k2 ⋈ 0 need k1 + k2 ⋈ 0
    for (coeffs, a) in &best {
        let neg: BTreeMap<Term, Q> = coeffs.iter().map(|(t, c)| (t.clone(), -c)).collect();
        if let Some(b) = best.get(&neg) {
            let k = &a.expr.constant + &b.expr.constant;
            let strict = a.cmp == Cmp::Lt || b.cmp == Cmp::Lt;
            if k.is_positive() || (strict && k.is_zero()) {
                return None;
            }
        }
    }
    let mut out = eqs;
    out.extend(best.into_values());
    Some(out)
}

/// `a` implies `b` when both share coefficients.
fn tighter(a: &LinAtom, b: &LinAtom) -> bool {
    a.expr.constant > b.expr.constant || (a.expr.constant == b.expr.constant && a.cmp == Cmp::Lt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{q, Sort, Var};

    fn leaf(n: &str) -> Term {
        Var::new(n, Sort::Rat).term()
    }

    fn atom(terms: &[(&str, i64)], k: i64, cmp: Cmp) -> LinAtom {
        let mut e = LinExpr::constant(q(k));
        for (t, c) in terms {
            e.add_term(leaf(t), q(*c));
        }
        match LinAtom::normalize(e, cmp) {
            Normalized::Atom(a) => a,
            Normalized::Const(_) => panic!(),
        }
    }

    #[test]
    fn gaussian_then_bound() {
        // x0 = 0, x1 > x0
        let atoms = vec![atom(&[("x0", 1)], 0, Cmp::Eq), atom(&[("x0", 1), ("x1", -1)], 0, Cmp::Lt)];
        let out = project(&atoms, &[leaf("x0")].into_iter().collect()).unwrap();
        assert_eq!(out, vec![atom(&[("x1", -1)], 0, Cmp::Lt)]);
    }

    #[test]
    fn empty_interval() {
        // u < y, u > y
        let atoms = vec![atom(&[("u", 1), ("y", -1)], 0, Cmp::Lt), atom(&[("u", -1), ("y", 1)], 0, Cmp::Lt)];
        assert!(project(&atoms, &[leaf("u")].into_iter().collect()).is_none());
    }

    #[test]
    fn keeps_tightest() {
        let atoms = vec![atom(&[("x", 1)], -3, Cmp::Le), atom(&[("x", 1)], -1, Cmp::Le)];
        assert_eq!(prune(atoms).unwrap(), vec![atom(&[("x", 1)], -1, Cmp::Le)]);
    }
}
