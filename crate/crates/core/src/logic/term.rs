use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::{Q, Sort};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Annot {
    Plain,
    Read,
    Write,
    Index(u32),
}

/// A variable. The annotation is part of its identity, so `x^r` and `x_0`
/// are different variables that merely share a base name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Arc<str>,
    pub annot: Annot,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Var {
        Var { name: name.into(), annot: Annot::Plain, sort }
    }

    pub fn with_annot(&self, annot: Annot) -> Var {
        Var { name: self.name.clone(), annot, sort: self.sort.clone() }
    }

    pub fn plain(&self) -> Var {
        self.with_annot(Annot::Plain)
    }

    pub fn read(&self) -> Var {
        self.with_annot(Annot::Read)
    }

    pub fn write(&self) -> Var {
        self.with_annot(Annot::Write)
    }

    pub fn at(&self, i: u32) -> Var {
        self.with_annot(Annot::Index(i))
    }

    pub fn term(&self) -> Term {
        Term::Var(self.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Const {
    pub name: Arc<str>,
    pub sort: Sort,
}

impl Const {
    pub fn new(name: &str, sort: Sort) -> Const {
        Const { name: name.into(), sort }
    }

    pub fn term(&self) -> Term {
        Term::Const(self.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncDecl {
    pub name: Arc<str>,
    pub args: Vec<Sort>,
    pub result: Sort,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelDecl {
    pub name: Arc<str>,
    pub args: Vec<Sort>,
}

/// First-order terms. Arithmetic combinations are not terms; they only live
/// inside linear atoms, where rational-sorted terms act as opaque unknowns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(Const),
    Num(Q),
    App(Arc<FuncDecl>, Vec<Term>),
}

impl Term {
    pub fn app(f: &Arc<FuncDecl>, args: Vec<Term>) -> Term {
        Term::App(f.clone(), args)
    }

    pub fn num(q: Q) -> Term {
        Term::Num(q)
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort.clone(),
            Term::Const(c) => c.sort.clone(),
            Term::Num(_) => Sort::Rat,
            Term::App(f, _) => f.result.clone(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn has_vars(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::App(_, args) => args.iter().any(Term::has_vars),
            _ => false,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn mentions(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.mentions(v)),
            _ => false,
        }
    }

    pub fn subst(&self, s: &dyn Fn(&Var) -> Option<Term>) -> Term {
        match self {
            Term::Var(v) => s(v).unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst(s)).collect()),
            _ => self.clone(),
        }
    }

    /// Replaces whole subterms (not only variables) according to `s`.
    pub fn replace(&self, s: &dyn Fn(&Term) -> Option<Term>) -> Term {
        if let Some(t) = s(self) {
            return t;
        }
        match self {
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.replace(s)).collect()),
            _ => self.clone(),
        }
    }

    pub fn subterms(&self, out: &mut Vec<Term>) {
        if let Term::App(_, args) = self {
            args.iter().for_each(|a| a.subterms(out));
        }
        out.push(self.clone());
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.annot {
            Annot::Plain => write!(f, "{}", self.name),
            Annot::Read => write!(f, "{}^r", self.name),
            Annot::Write => write!(f, "{}^w", self.name),
            Annot::Index(i) => write!(f, "{}@{}", self.name, i),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => v.fmt(f),
            Term::Const(c) => f.write_str(&c.name),
            Term::Num(q) => super::linear::fmt_q(q, f),
            Term::App(g, args) => {
                write!(f, "{}(", g.name)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.fmt(f)?;
                }
                f.write_str(")")
            }
        }
    }
}
