use std::fmt;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Named(Arc<str>),
    Rat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SortKind {
    Uninterpreted,
    Rational,
}

impl Sort {
    /// `"rat"` is the reserved arithmetic sort; every other name is uninterpreted.
    pub fn named(name: &str) -> Sort {
        if name == "rat" {
            Sort::Rat
        } else {
            Sort::Named(name.into())
        }
    }

    pub fn kind(&self) -> SortKind {
        match self {
            Sort::Rat => SortKind::Rational,
            Sort::Named(_) => SortKind::Uninterpreted,
        }
    }

    pub fn is_rat(&self) -> bool {
        matches!(self, Sort::Rat)
    }

    pub fn name(&self) -> &str {
        match self {
            Sort::Rat => "rat",
            Sort::Named(n) => n,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
