//! Exact general simplex with infinitesimals for strict bounds.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::logic::{Cmp, LinAtom, Q, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
struct Dq {
    r: Q,
    d: Q,
}

impl Dq {
    fn new(r: Q, d: Q) -> Dq {
        Dq { r, d }
    }
    fn zero() -> Dq {
        Dq::new(Q::zero(), Q::zero())
    }
    fn add_scaled(&self, o: &Dq, s: &Q) -> Dq {
        Dq::new(&self.r + &o.r * s, &self.d + &o.d * s)
    }
    fn sub(&self, o: &Dq) -> Dq {
        Dq::new(&self.r - &o.r, &self.d - &o.d)
    }
    fn scale(&self, s: &Q) -> Dq {
        Dq::new(&self.r * s, &self.d * s)
    }
}

impl PartialOrd for Dq {
    fn partial_cmp(&self, o: &Dq) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Dq {
    fn cmp(&self, o: &Dq) -> Ordering {
        self.r.cmp(&o.r).then_with(|| self.d.cmp(&o.d))
    }
}

/// Satisfiability of a conjunction of linear atoms over rational leaves.
/// Returns a satisfying assignment or `None`.
pub fn solve(atoms: &[LinAtom]) -> Option<BTreeMap<Term, Q>> {
    let mut cols: BTreeMap<Term, usize> = BTreeMap::new();
    for a in atoms {
        for t in a.expr.coeffs.keys() {
            let n = cols.len();
            cols.entry(t.clone()).or_insert(n);
        }
    }
    let n = cols.len();
    let m = atoms.len();
    let total = n + m;
    let mut lower: Vec<Option<Dq>> = vec![None; total];
    let mut upper: Vec<Option<Dq>> = vec![None; total];
    // rows[i] expresses basic variable basic[i] over all columns
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut basic: Vec<usize> = Vec::with_capacity(m);
    for (k, a) in atoms.iter().enumerate() {
        let mut row = vec![Q::zero(); total];
        for (t, c) in &a.expr.coeffs {
            row[cols[t]] = c.clone();
        }
        rows.push(row);
        basic.push(n + k);
        let bound = -a.expr.constant.clone();
        let s = n + k;
        match a.cmp {
            Cmp::Eq => {
                lower[s] = Some(Dq::new(bound.clone(), Q::zero()));
                upper[s] = Some(Dq::new(bound, Q::zero()));
            }
            Cmp::Le => upper[s] = Some(Dq::new(bound, Q::zero())),
            Cmp::Lt => upper[s] = Some(Dq::new(bound, -Q::one())),
        }
    }
    let mut is_basic = vec![None; total];
    for (i, &b) in basic.iter().enumerate() {
        is_basic[b] = Some(i);
    }
    let mut val: Vec<Dq> = vec![Dq::zero(); total];

    loop {
        // smallest violated basic variable (Bland)
        let mut viol: Option<(usize, usize, bool)> = None;
        for (i, &b) in basic.iter().enumerate() {
            let low = lower[b].as_ref().is_some_and(|l| val[b] < *l);
            let high = upper[b].as_ref().is_some_and(|u| val[b] > *u);
            if (low || high) && viol.is_none_or(|(_, vb, _)| b < vb) {
                viol = Some((i, b, low));
            }
        }
        let Some((i, b, low)) = viol else { break };
        let mut pick: Option<usize> = None;
        for j in 0..total {
            if is_basic[j].is_some() {
                continue;
            }
            let a = &rows[i][j];
            if a.is_zero() {
                continue;
            }
            let can_inc = upper[j].as_ref().is_none_or(|u| val[j] < *u);
            let can_dec = lower[j].as_ref().is_none_or(|l| val[j] > *l);
            let ok = if low {
                (a.is_positive() && can_inc) || (a.is_negative() && can_dec)
            } else {
                (a.is_negative() && can_inc) || (a.is_positive() && can_dec)
            };
            if ok {
                pick = Some(j);
                break;
            }
        }
        let j = pick?;
        let target = if low { lower[b].clone().unwrap() } else { upper[b].clone().unwrap() };
        // pivot and update
        let a = rows[i][j].clone();
        let theta = target.sub(&val[b]).scale(&a.recip());
        val[b] = target;
        val[j] = val[j].add_scaled(&theta, &Q::one());
        for (k, &bk) in basic.iter().enumerate() {
            if k != i {
                let c = rows[k][j].clone();
                if !c.is_zero() {
                    val[bk] = val[bk].add_scaled(&theta, &c);
                }
            }
        }
        // x_j = (x_b - Σ_{l≠j} row[l] x_l) / a
        let inv = a.recip();
        let mut new_row = vec![Q::zero(); total];
        for l in 0..total {
            if l != j && !rows[i][l].is_zero() {
                new_row[l] = -&rows[i][l] * &inv;
            }
        }
        new_row[b] = inv;
        for k in 0..rows.len() {
            if k == i {
                continue;
            }
            let c = rows[k][j].clone();
            if c.is_zero() {
                continue;
            }
            rows[k][j] = Q::zero();
            for l in 0..total {
                if !new_row[l].is_zero() {
                    let add = &c * &new_row[l];
                    rows[k][l] += add;
                }
            }
        }
        rows[i] = new_row;
        is_basic[b] = None;
        is_basic[j] = Some(i);
        basic[i] = j;
    }

    // choose a concrete δ
    let mut delta = Q::one();
    for x in 0..total {
        let v = &val[x];
        if let Some(l) = &lower[x] {
            tighten(&mut delta, l, v);
        }
        if let Some(u) = &upper[x] {
            tighten(&mut delta, v, u);
        }
    }
    let model = cols
        .into_iter()
        .map(|(t, c)| {
            let v = &val[c];
            (t, &v.r + &v.d * &delta)
        })
        .collect();
    Some(model)
}

/// Keeps `lo ≤ hi` true after substituting δ.
fn tighten(delta: &mut Q, lo: &Dq, hi: &Dq) {
    if lo.r < hi.r && lo.d > hi.d {
        let bound = (&hi.r - &lo.r) / (&lo.d - &hi.d);
        if bound < *delta {
            *delta = bound / Q::from_integer(2.into());
        }
    }
}

/// Is `e = 0` implied by the atoms (assumed satisfiable)?
pub fn implies_zero(atoms: &[LinAtom], e: &crate::logic::LinExpr) -> bool {
    use crate::logic::linear::Normalized;
    for sign in [Q::one(), -Q::one()] {
        match LinAtom::normalize(e.scaled(&sign), Cmp::Lt) {
            Normalized::Const(true) => return false,
            Normalized::Const(false) => continue,
            Normalized::Atom(a) => {
                let mut all = atoms.to_vec();
                all.push(a);
                if solve(&all).is_some() {
                    return false;
                }
            }
        }
    }
    true
}
