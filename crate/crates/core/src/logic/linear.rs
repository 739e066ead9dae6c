use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{Q, Term, Var};

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

pub(crate) fn fmt_q(v: &Q, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v.is_integer() {
        write!(f, "{}", v.numer())
    } else {
        write!(f, "{}/{}", v.numer(), v.denom())
    }
}

pub fn q_to_string(v: &Q) -> String {
    struct D<'a>(&'a Q);
    impl fmt::Display for D<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            fmt_q(self.0, f)
        }
    }
    D(v).to_string()
}

/// `Σ coeffs[t]·t + constant`, over rational-sorted leaf terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinExpr {
    pub coeffs: BTreeMap<Term, Q>,
    pub constant: Q,
}

impl LinExpr {
    pub fn zero() -> LinExpr {
        LinExpr::default()
    }

    pub fn constant(c: Q) -> LinExpr {
        LinExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn term(t: Term) -> LinExpr {
        let mut e = LinExpr::zero();
        e.add_term(t, Q::one());
        e
    }

    pub fn var(v: &Var) -> LinExpr {
        LinExpr::term(Term::Var(v.clone()))
    }

    pub fn add_term(&mut self, t: Term, c: Q) {
        if let Term::Num(n) = t {
            self.constant += c * n;
            return;
        }
        let slot = self.coeffs.entry(t).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add_scaled(&mut self, other: &LinExpr, s: &Q) {
        for (t, c) in &other.coeffs {
            self.add_term(t.clone(), c * s);
        }
        self.constant += &other.constant * s;
    }

    pub fn plus(&self, other: &LinExpr) -> LinExpr {
        let mut e = self.clone();
        e.add_scaled(other, &Q::one());
        e
    }

    pub fn minus(&self, other: &LinExpr) -> LinExpr {
        let mut e = self.clone();
        e.add_scaled(other, &-Q::one());
        e
    }

    pub fn scaled(&self, s: &Q) -> LinExpr {
        let mut e = LinExpr::zero();
        e.add_scaled(self, s);
        e
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, t: &Term) -> Q {
        self.coeffs.get(t).cloned().unwrap_or_else(Q::zero)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.coeffs.keys().for_each(|t| t.collect_vars(out));
    }

    /// Substitutes a leaf by an expression.
    pub fn substitute(&self, leaf: &Term, by: &LinExpr) -> LinExpr {
        let c = self.coeff(leaf);
        if c.is_zero() {
            return self.clone();
        }
        let mut e = self.clone();
        e.coeffs.remove(leaf);
        e.add_scaled(by, &c);
        e
    }

    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> LinExpr {
        let mut e = LinExpr::constant(self.constant.clone());
        for (t, c) in &self.coeffs {
            e.add_term(f(t), c.clone());
        }
        e
    }

    pub fn eval(&self, val: &dyn Fn(&Term) -> Option<Q>) -> Option<Q> {
        let mut acc = self.constant.clone();
        for (t, c) in &self.coeffs {
            acc += c * val(t)?;
        }
        Some(acc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Eq,
    Le,
    Lt,
}

/// `expr ⋈ 0`, normalized so that the first coefficient is `1` for
/// equalities and `±1` for inequalities.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinAtom {
    pub expr: LinExpr,
    pub cmp: Cmp,
}

/// Outcome of normalizing a comparison: it may fold to a constant.
pub enum Normalized {
    Const(bool),
    Atom(LinAtom),
}

impl LinAtom {
    pub fn normalize(expr: LinExpr, cmp: Cmp) -> Normalized {
        let Some(lead) = expr.coeffs.values().next().cloned() else {
            let c = &expr.constant;
            let b = match cmp {
                Cmp::Eq => c.is_zero(),
                Cmp::Le => !c.is_positive(),
                Cmp::Lt => c.is_negative(),
            };
            return Normalized::Const(b);
        };
        let s = match cmp {
            Cmp::Eq => lead.recip(),
            _ => lead.abs().recip(),
        };
        Normalized::Atom(LinAtom { expr: expr.scaled(&s), cmp })
    }

    /// The complement `¬(e ⋈ 0)` when it is again a single atom (`≤`/`<`).
    pub fn negated_ineq(&self) -> Option<LinAtom> {
        let e = self.expr.scaled(&-Q::one());
        let cmp = match self.cmp {
            Cmp::Eq => return None,
            Cmp::Le => Cmp::Lt,
            Cmp::Lt => Cmp::Le,
        };
        match LinAtom::normalize(e, cmp) {
            Normalized::Atom(a) => Some(a),
            Normalized::Const(_) => None,
        }
    }

    pub fn holds(&self, v: &Q) -> bool {
        match self.cmp {
            Cmp::Eq => v.is_zero(),
            Cmp::Le => !v.is_positive(),
            Cmp::Lt => v.is_negative(),
        }
    }
}

fn write_side(f: &mut fmt::Formatter<'_>, terms: &[(&Term, Q)], k: &Q) -> fmt::Result {
    let mut first = true;
    for (t, c) in terms {
        if !first {
            f.write_str(" + ")?;
        }
        first = false;
        if !c.is_one() {
            fmt_q(c, f)?;
            f.write_str("*")?;
        }
        write!(f, "{}", t)?;
    }
    if first {
        return fmt_q(k, f);
    }
    if k.is_positive() {
        f.write_str(" + ")?;
        fmt_q(k, f)?;
    } else if k.is_negative() {
        f.write_str(" - ")?;
        fmt_q(&-k, f)?;
    }
    Ok(())
}

impl LinAtom {
    pub(crate) fn fmt_with(&self, f: &mut fmt::Formatter<'_>, positive: bool) -> fmt::Result {
        let pos: Vec<(&Term, Q)> =
            self.expr.coeffs.iter().filter(|(_, c)| c.is_positive()).map(|(t, c)| (t, c.clone())).collect();
        let neg: Vec<(&Term, Q)> =
            self.expr.coeffs.iter().filter(|(_, c)| c.is_negative()).map(|(t, c)| (t, -c)).collect();
        let k = -self.expr.constant.clone();
        let (op, flip) = match (self.cmp, positive) {
            (Cmp::Eq, true) => ("=", "="),
            (Cmp::Eq, false) => ("!=", "!="),
            (Cmp::Le, _) => ("<=", ">="),
            (Cmp::Lt, _) => ("<", ">"),
        };
        if pos.is_empty() {
            // 0 ⋈ rhs - k  is printed as  rhs ⋈' k
            write_side(f, &neg, &Q::zero())?;
            write!(f, " {} ", flip)?;
            fmt_q(&-k, f)
        } else {
            write_side(f, &pos, &Q::zero())?;
            write!(f, " {} ", op)?;
            write_side(f, &neg, &k)
        }
    }
}
