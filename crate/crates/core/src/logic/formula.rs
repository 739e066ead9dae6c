use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::linear::{Cmp, LinAtom, LinExpr, Normalized};
use super::{LogicError, RelDecl, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// Equality at an uninterpreted sort, stored with `lhs < rhs`.
    Eq(Term, Term),
    Rel(Arc<RelDecl>, Vec<Term>),
    Lin(LinAtom),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

/// User-level comparison operators, before normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Lit(Literal),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Vec<Var>, Box<Formula>),
}

/// `∃ bound. ⋀ body`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Constraint {
    pub bound: Vec<Var>,
    pub body: Vec<Literal>,
}

impl Atom {
    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Atom::Eq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Atom::Rel(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Atom::Lin(l) => l.expr.collect_vars(out),
        }
    }

    /// Top-level terms of the atom (arguments, sides, or linear leaves).
    pub fn terms(&self) -> Vec<Term> {
        match self {
            Atom::Eq(a, b) => vec![a.clone(), b.clone()],
            Atom::Rel(_, args) => args.clone(),
            Atom::Lin(l) => l.expr.coeffs.keys().cloned().collect(),
        }
    }

    pub fn depth(&self) -> usize {
        self.terms().iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn is_arith(&self) -> bool {
        matches!(self, Atom::Lin(_))
    }

    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Formula {
        match self {
            Atom::Eq(a, b) => Formula::eq(f(a), f(b)),
            Atom::Rel(r, args) => Formula::rel(r, args.iter().map(f).collect()),
            Atom::Lin(l) => Formula::lin(l.expr.map_terms(f), l.cmp),
        }
    }
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal { positive: true, atom }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal { positive: false, atom }
    }

    /// Negation in normal form: `¬(e ≤ 0)` becomes `-e < 0`, only equalities
    /// and uninterpreted atoms carry negative polarity.
    pub fn negate(&self) -> Literal {
        if let Atom::Lin(l) = &self.atom {
            if l.cmp != Cmp::Eq {
                if let Some(n) = l.negated_ineq() {
                    return Literal::pos(Atom::Lin(n));
                }
            }
        }
        Literal { positive: !self.positive, atom: self.atom.clone() }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.atom.collect_vars(&mut out);
        out
    }

    pub fn mentions_any(&self, vs: &BTreeSet<Var>) -> bool {
        self.vars().iter().any(|v| vs.contains(v))
    }

    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Formula {
        let a = self.atom.map_terms(f);
        if self.positive {
            a
        } else {
            Formula::not(a)
        }
    }

    pub fn subst(&self, s: &dyn Fn(&Var) -> Option<Term>) -> Formula {
        self.map_terms(&|t| t.subst(s))
    }

    pub fn formula(&self) -> Formula {
        Formula::Lit(self.clone())
    }
}

impl Formula {
    pub fn lit(l: Literal) -> Formula {
        Formula::Lit(l)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        if a.sort().is_rat() || b.sort().is_rat() {
            return Formula::lin(LinExpr::term(a).minus(&LinExpr::term(b)), Cmp::Eq);
        }
        if a == b {
            return Formula::True;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Formula::Lit(Literal::pos(Atom::Eq(a, b)))
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::not(Formula::eq(a, b))
    }

    pub fn rel(r: &Arc<RelDecl>, args: Vec<Term>) -> Formula {
        Formula::Lit(Literal::pos(Atom::Rel(r.clone(), args)))
    }

    /// `expr ⋈ 0`, folded to a constant when `expr` has no unknowns.
    pub fn lin(expr: LinExpr, cmp: Cmp) -> Formula {
        match LinAtom::normalize(expr, cmp) {
            Normalized::Const(true) => Formula::True,
            Normalized::Const(false) => Formula::False,
            Normalized::Atom(a) => Formula::Lit(Literal::pos(Atom::Lin(a))),
        }
    }

    pub fn compare(lhs: LinExpr, op: CmpOp, rhs: LinExpr) -> Formula {
        match op {
            CmpOp::Eq => Formula::lin(lhs.minus(&rhs), Cmp::Eq),
            CmpOp::Ne => Formula::not(Formula::lin(lhs.minus(&rhs), Cmp::Eq)),
            CmpOp::Le => Formula::lin(lhs.minus(&rhs), Cmp::Le),
            CmpOp::Lt => Formula::lin(lhs.minus(&rhs), Cmp::Lt),
            CmpOp::Ge => Formula::lin(rhs.minus(&lhs), Cmp::Le),
            CmpOp::Gt => Formula::lin(rhs.minus(&lhs), Cmp::Lt),
        }
    }

    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Lit(l) => Formula::Lit(l.negate()),
            Formula::Not(g) => *g,
            g => Formula::Not(Box::new(g)),
        }
    }

    /// Flattening, constant-folding, sorted and deduplicated conjunction.
    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = BTreeSet::new();
        for f in fs {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(gs) => out.extend(gs),
                g => {
                    out.insert(g);
                }
            }
        }
        for f in &out {
            if let Formula::Lit(l) = f {
                if out.contains(&Formula::Lit(l.negate())) {
                    return Formula::False;
                }
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.into_iter().next().unwrap(),
            _ => Formula::And(out.into_iter().collect()),
        }
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = BTreeSet::new();
        for f in fs {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(gs) => out.extend(gs),
                g => {
                    out.insert(g);
                }
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.into_iter().next().unwrap(),
            _ => Formula::Or(out.into_iter().collect()),
        }
    }

    pub fn and2(a: Formula, b: Formula) -> Formula {
        Formula::and([a, b])
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or([Formula::not(a), b])
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and([Formula::implies(a.clone(), b.clone()), Formula::implies(b, a)])
    }

    pub fn exists(vars: Vec<Var>, body: Formula) -> Formula {
        let fv = body.free_vars();
        let vars: Vec<Var> = vars.into_iter().filter(|v| fv.contains(v)).collect();
        if vars.is_empty() || matches!(body, Formula::True | Formula::False) {
            return body;
        }
        Formula::Exists(vars, Box::new(body))
    }

    pub fn from_literals(lits: impl IntoIterator<Item = Literal>) -> Formula {
        Formula::and(lits.into_iter().map(Formula::Lit))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Exists(..) => false,
            Formula::Not(g) => g.is_quantifier_free(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().all(Formula::is_quantifier_free),
            _ => true,
        }
    }

    pub fn collect_free_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Lit(l) => l.atom.collect_vars(out),
            Formula::Not(g) => g.collect_free_vars(out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.collect_free_vars(out)),
            Formula::Exists(vs, g) => {
                let mut inner = BTreeSet::new();
                g.collect_free_vars(&mut inner);
                for v in vs {
                    inner.remove(v);
                }
                out.extend(inner);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut out);
        out
    }

    /// Capture-avoiding only in the sense that bound variables are never
    /// substituted; callers keep bound names disjoint from substituted terms.
    pub fn subst(&self, s: &dyn Fn(&Var) -> Option<Term>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Lit(l) => l.subst(s),
            Formula::Not(g) => Formula::not(g.subst(s)),
            Formula::And(gs) => Formula::and(gs.iter().map(|g| g.subst(s))),
            Formula::Or(gs) => Formula::or(gs.iter().map(|g| g.subst(s))),
            Formula::Exists(vs, g) => {
                let inner = |v: &Var| if vs.contains(v) { None } else { s(v) };
                Formula::exists(vs.clone(), g.subst(&inner))
            }
        }
    }

    /// Rewrites every atom by mapping its top-level terms.
    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Lit(l) => l.map_terms(f),
            Formula::Not(g) => Formula::not(g.map_terms(f)),
            Formula::And(gs) => Formula::and(gs.iter().map(|g| g.map_terms(f))),
            Formula::Or(gs) => Formula::or(gs.iter().map(|g| g.map_terms(f))),
            Formula::Exists(vs, g) => Formula::exists(vs.clone(), g.map_terms(f)),
        }
    }

    pub fn literals(&self, out: &mut Vec<Literal>) {
        match self {
            Formula::Lit(l) => out.push(l.clone()),
            Formula::Not(g) | Formula::Exists(_, g) => g.literals(out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.literals(out)),
            _ => {}
        }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut ls = Vec::new();
        self.literals(&mut ls);
        let set: BTreeSet<Atom> = ls.into_iter().map(|l| l.atom).collect();
        set.into_iter().collect()
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Lit(_) => 1,
            Formula::Not(g) | Formula::Exists(_, g) => 1 + g.size(),
            Formula::And(gs) | Formula::Or(gs) => 1 + gs.iter().map(Formula::size).sum::<usize>(),
        }
    }

    /// Negation normal form. Fails on a negated existential.
    pub fn nnf(&self) -> Result<Formula, LogicError> {
        self.nnf_pol(true)
    }

    fn nnf_pol(&self, pos: bool) -> Result<Formula, LogicError> {
        Ok(match self {
            Formula::True | Formula::False | Formula::Lit(_) => {
                if pos {
                    self.clone()
                } else {
                    Formula::not(self.clone())
                }
            }
            Formula::Not(g) => g.nnf_pol(!pos)?,
            Formula::And(gs) => {
                let parts = gs.iter().map(|g| g.nnf_pol(pos)).collect::<Result<Vec<_>, _>>()?;
                if pos {
                    Formula::and(parts)
                } else {
                    Formula::or(parts)
                }
            }
            Formula::Or(gs) => {
                let parts = gs.iter().map(|g| g.nnf_pol(pos)).collect::<Result<Vec<_>, _>>()?;
                if pos {
                    Formula::or(parts)
                } else {
                    Formula::and(parts)
                }
            }
            Formula::Exists(vs, g) => {
                if !pos {
                    return Err(LogicError::Malformed(
                        "negated existential (universal quantification) is not supported".into(),
                    ));
                }
                Formula::exists(vs.clone(), g.nnf_pol(true)?)
            }
        })
    }

    /// Structural hash of the formula, stable within one process.
    pub fn structural_hash(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}

impl Constraint {
    pub fn new(bound: Vec<Var>, body: Vec<Literal>) -> Constraint {
        Constraint { bound, body }
    }

    pub fn truth() -> Constraint {
        Constraint::default()
    }

    pub fn is_true(&self) -> bool {
        self.body.is_empty()
    }

    pub fn formula(&self) -> Formula {
        Formula::exists(self.bound.clone(), Formula::from_literals(self.body.iter().cloned()))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for l in &self.body {
            l.atom.collect_vars(&mut out);
        }
        for v in &self.bound {
            out.remove(v);
        }
        out
    }

    /// Substitutes free variables; bound ones are left alone.
    pub fn subst(&self, s: &dyn Fn(&Var) -> Option<Term>) -> Formula {
        let inner = |v: &Var| if self.bound.contains(v) { None } else { s(v) };
        Formula::exists(
            self.bound.clone(),
            Formula::and(self.body.iter().map(|l| l.subst(&inner))),
        )
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.atom {
            Atom::Eq(a, b) => {
                let op = if self.positive { "=" } else { "!=" };
                write!(f, "{} {} {}", a, op, b)
            }
            Atom::Rel(r, args) => {
                if !self.positive {
                    f.write_str("!")?;
                }
                write!(f, "{}(", r.name)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", a)?;
                }
                f.write_str(")")
            }
            Atom::Lin(l) => l.fmt_with(f, self.positive),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Lit(l) => l.fmt(f),
            Formula::Not(g) => write!(f, "!({})", g),
            Formula::And(gs) | Formula::Or(gs) => {
                let sep = if matches!(self, Formula::And(_)) { " & " } else { " | " };
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    if matches!(g, Formula::And(_) | Formula::Or(_) | Formula::Exists(..)) {
                        write!(f, "({})", g)?;
                    } else {
                        write!(f, "{}", g)?;
                    }
                }
                Ok(())
            }
            Formula::Exists(vs, g) => {
                f.write_str("exists (")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {}", v, v.sort)?;
                }
                write!(f, "). {}", g)
            }
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.bound.is_empty() {
            f.write_str("exists (")?;
            for (i, v) in self.bound.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}: {}", v, v.sort)?;
            }
            f.write_str("). ")?;
        }
        if self.body.is_empty() {
            return f.write_str("true");
        }
        for (i, l) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{}", l)?;
        }
        Ok(())
    }
}
