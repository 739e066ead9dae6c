//! LTLf model checking for data-aware processes over EUF and linear
//! rational arithmetic.
//!
//! Parse a process and a property with [`frontend::parse_spec`] and
//! [`frontend::parse_property`], then call [`frontend::verify`]. Membership in
//! the decidable classes is reported by [`analysis::classify`].

pub mod analysis;
pub mod dmt;
pub mod frontend;
pub mod logic;
pub mod ltlf;
pub mod oracle;
pub mod product;
pub mod qe;
pub mod smt;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/processes.md")]
    mod processes {}
    #[doc = include_str!("../../../book/src/properties.md")]
    mod properties {}
    #[doc = include_str!("../../../book/src/grammar.md")]
    mod grammar {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/verdicts.md")]
    mod verdicts {}
    #[doc = include_str!("../../../book/src/classes.md")]
    mod classes {}
    #[doc = include_str!("../../../book/src/bench.md")]
    mod bench {}
}
