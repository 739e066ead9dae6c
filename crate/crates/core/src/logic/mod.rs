//! Multi-sorted first-order syntax shared by every other module.

mod formula;
pub mod linear;
mod ops;
mod signature;
mod sort;
mod term;

pub use formula::{Atom, CmpOp, Constraint, Formula, Literal};
pub use linear::{q, q_frac, q_to_string, Cmp, LinAtom, LinExpr};
pub use ops::{
    dnf_literals, free_variables, instantiate_transition, prenex, rename_apart, rename_from_index,
    rename_to_index, replace_terms, to_dnf_constraints, Fresh,
};
pub use signature::Signature;
pub use sort::{Sort, SortKind};
pub use term::{Annot, Const, FuncDecl, RelDecl, Term, Var};

/// Exact rationals.
pub type Q = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("malformed formula: {0}")]
    Malformed(String),
    #[error("undeclared {0}")]
    Undeclared(String),
    #[error("duplicate {0}")]
    Duplicate(String),
    #[error("ill-sorted: {0}")]
    IllSorted(String),
}
