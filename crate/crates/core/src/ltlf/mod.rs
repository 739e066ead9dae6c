//! LTLf properties over constraints and their translation to NFAs.

mod nfa;

use std::collections::BTreeSet;
use std::fmt;

use crate::logic::{Constraint, Var};

pub use nfa::{build_nfa, delta, dot_quote, nfa_accepts, simplify_nfa, DeltaSymbol, NfaEdge, NfaState, PropertyNfa};

/// A named constraint occurring in a property.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leaf {
    pub name: String,
    pub constraint: Constraint,
}

/// Negation-free LTLf over constraint leaves, indexed into `Property::leaves`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ltl {
    True,
    False,
    Atom(usize),
    And(Vec<Ltl>),
    Or(Vec<Ltl>),
    Next(Box<Ltl>),
    Globally(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    /// Flattening, deduplicating conjunction with ⊤/⊥ absorption.
    pub fn and(parts: impl IntoIterator<Item = Ltl>) -> Ltl {
        let mut out = BTreeSet::new();
        for p in parts {
            match p {
                Ltl::True => {}
                Ltl::False => return Ltl::False,
                Ltl::And(xs) => out.extend(xs),
                x => {
                    out.insert(x);
                }
            }
        }
        match out.len() {
            0 => Ltl::True,
            1 => out.into_iter().next().unwrap(),
            _ => Ltl::And(out.into_iter().collect()),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Ltl>) -> Ltl {
        let mut out = BTreeSet::new();
        for p in parts {
            match p {
                Ltl::False => {}
                Ltl::True => return Ltl::True,
                Ltl::Or(xs) => out.extend(xs),
                x => {
                    out.insert(x);
                }
            }
        }
        match out.len() {
            0 => Ltl::False,
            1 => out.into_iter().next().unwrap(),
            _ => Ltl::Or(out.into_iter().collect()),
        }
    }

    pub fn next(p: Ltl) -> Ltl {
        Ltl::Next(Box::new(p))
    }

    pub fn globally(p: Ltl) -> Ltl {
        Ltl::Globally(Box::new(p))
    }

    pub fn until(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Until(Box::new(a), Box::new(b))
    }

    /// `F ψ` is `⊤ U ψ`.
    pub fn eventually(p: Ltl) -> Ltl {
        Ltl::until(Ltl::True, p)
    }

    pub fn atoms(&self, out: &mut BTreeSet<usize>) {
        match self {
            Ltl::True | Ltl::False => {}
            Ltl::Atom(i) => {
                out.insert(*i);
            }
            Ltl::And(xs) | Ltl::Or(xs) => xs.iter().for_each(|x| x.atoms(out)),
            Ltl::Next(x) | Ltl::Globally(x) => x.atoms(out),
            Ltl::Until(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
        }
    }
}

/// A property: the temporal structure plus its constraint table `C`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Property {
    pub leaves: Vec<Leaf>,
    pub root: Ltl,
}

impl Property {
    pub fn new(leaves: Vec<Leaf>, root: Ltl) -> Property {
        Property { leaves, root }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        self.leaves.iter().flat_map(|l| l.constraint.free_vars()).collect()
    }

    pub fn show(&self, p: &Ltl) -> String {
        Shown(self, p).to_string()
    }

    /// Symbols as readable constraint sets.
    pub fn show_symbol(&self, s: &BTreeSet<usize>) -> String {
        let parts: Vec<String> = s.iter().map(|&i| self.leaves[i].constraint.to_string()).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

struct Shown<'a>(&'a Property, &'a Ltl);

impl<'a> fmt::Display for Shown<'a> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.0;
        let sub = |x: &'a Ltl| Shown(p, x);
        match self.1 {
            Ltl::True => f.write_str("true"),
            Ltl::False => f.write_str("false"),
            Ltl::Atom(i) => write!(f, "[{}]", p.leaves[*i].constraint),
            Ltl::And(xs) | Ltl::Or(xs) => {
                let op = if matches!(self.1, Ltl::And(_)) { " & " } else { " | " };
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    write!(f, "{}", sub(x))?;
                }
                f.write_str(")")
            }
            Ltl::Next(x) => write!(f, "X {}", sub(x)),
            Ltl::Globally(x) => write!(f, "G {}", sub(x)),
            Ltl::Until(a, b) if **a == Ltl::True => write!(f, "F {}", sub(b)),
            Ltl::Until(a, b) => write!(f, "({} U {})", sub(a), sub(b)),
        }
    }
}
