//! Membership in the known decidable classes: acyclic signatures, tame
//! arithmetic with monotonicity constraints, and bounded lookback.

mod graph;
mod lookback;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dmt::{Dmt, DmtError};
use crate::logic::{Atom, Literal, Signature, Sort};
use crate::ltlf::{dot_quote, Property};
use crate::smt::SmtError;

pub use graph::{CollapsedGraph, ComputationGraph, Node};
pub use lookback::{check_bounded_lookback, Lookback, LookbackOptions, LookbackReport};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Dmt(#[from] DmtError),
    #[error(transparent)]
    Smt(#[from] SmtError),
}

/// Edge `s → s'` for every function with an argument of sort `s` and result `s'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SortGraph {
    pub nodes: Vec<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl SortGraph {
    pub fn of(sig: &Signature) -> SortGraph {
        let mut edges = BTreeSet::new();
        for f in sig.functions.values() {
            for a in &f.args {
                edges.insert((a.to_string(), f.result.to_string()));
            }
        }
        SortGraph { nodes: sig.sorts.iter().map(Sort::to_string).collect(), edges }
    }

    pub fn is_acyclic(&self) -> bool {
        let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (a, b) in &self.edges {
            succ.entry(a).or_default().push(b);
        }
        // 0 unvisited, 1 on stack, 2 done
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        fn visit<'a>(x: &'a str, succ: &BTreeMap<&'a str, Vec<&'a str>>, state: &mut BTreeMap<&'a str, u8>) -> bool {
            match state.get(x) {
                Some(1) => return false,
                Some(2) => return true,
                _ => {}
            }
            state.insert(x, 1);
            for y in succ.get(x).into_iter().flatten() {
                if !visit(y, succ, state) {
                    return false;
                }
            }
            state.insert(x, 2);
            true
        }
        self.edges.iter().all(|(a, _)| visit(a, &succ, &mut state))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph sorts {\n");
        for n in &self.nodes {
            out.push_str(&format!("  {};\n", dot_quote(n)));
        }
        for (a, b) in &self.edges {
            out.push_str(&format!("  {} -> {};\n", dot_quote(a), dot_quote(b)));
        }
        out.push_str("}\n");
        out
    }
}

pub fn check_acyclic(sig: &Signature) -> (bool, SortGraph) {
    let g = SortGraph::of(sig);
    (g.is_acyclic(), g)
}

/// The rational sort is a leaf of the sort graph.
pub fn check_tame(sig: &Signature) -> bool {
    sig.functions.values().all(|f| !f.args.iter().any(Sort::is_rat))
}

/// `t ⋈ t'` or `t ⋈ c` with unit coefficients.
fn is_mc(l: &Literal) -> bool {
    let Atom::Lin(a) = &l.atom else { return true };
    let cs: Vec<_> = a.expr.coeffs.values().collect();
    let unit = |c: &&crate::logic::Q| num_traits::Signed::abs(*c) == num_traits::One::one();
    match cs.len() {
        0 => true,
        1 => unit(&cs[0]),
        2 => unit(&cs[0]) && *cs[0] == -cs[1].clone() && num_traits::Zero::is_zero(&a.expr.constant),
        _ => false,
    }
}

/// Every arithmetic atom of the guards and of the property is a monotonicity constraint.
pub fn check_mc(d: &Dmt, prop: Option<&Property>) -> (bool, Vec<String>) {
    let mut bad = Vec::new();
    for t in &d.transitions {
        for l in t.guard.body.iter().filter(|l| !is_mc(l)) {
            bad.push(format!("{}: {}", t.name, l));
        }
    }
    if let Some(p) = prop {
        for leaf in &p.leaves {
            for l in leaf.constraint.body.iter().filter(|l| !is_mc(l)) {
                bad.push(format!("{}: {}", leaf.name, l));
            }
        }
    }
    (bad.is_empty(), bad)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecidableClass {
    I,
    II,
    III,
    IV,
    #[serde(rename = "none")]
    None,
}

impl std::fmt::Display for DecidableClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecidableClass::I => "I",
            DecidableClass::II => "II",
            DecidableClass::III => "III",
            DecidableClass::IV => "IV",
            DecidableClass::None => "none",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub lookback: LookbackOptions,
    pub locally_finite: bool,
    /// Probe lookback even when a cheaper check already decides the class.
    pub always_probe: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { lookback: LookbackOptions::default(), locally_finite: false, always_probe: false }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassReport {
    pub acyclic_signature: bool,
    pub tame: bool,
    #[serde(rename = "allArithmeticMC")]
    pub all_arithmetic_mc: bool,
    pub locally_finite_asserted: bool,
    pub bounded_lookback: Option<LookbackReport>,
    pub decidable_class: DecidableClass,
    /// No violation found, but the probe could not close the search.
    pub lookback_candidate: bool,
    pub arithmetic: bool,
    pub sort_graph: SortGraph,
    pub non_mc_atoms: Vec<String>,
}

impl ClassReport {
    /// `IV?` marks a lookback candidate.
    pub fn class_label(&self) -> String {
        match self.decidable_class {
            DecidableClass::None if self.lookback_candidate => "IV?".into(),
            c => c.to_string(),
        }
    }
}

pub fn classify(d: &Dmt, prop: &Property, opts: &ClassifyOptions) -> Result<ClassReport, AnalysisError> {
    let (acyclic, sort_graph) = check_acyclic(&d.signature);
    let tame = check_tame(&d.signature);
    let (mc, non_mc_atoms) = check_mc(d, Some(prop));
    let arithmetic = d.signature.uses_rat();
    let mut class = if acyclic && !arithmetic {
        DecidableClass::I
    } else if acyclic && tame && mc {
        DecidableClass::II
    } else if opts.locally_finite && tame && mc {
        DecidableClass::III
    } else {
        DecidableClass::None
    };
    let bounded_lookback = if class == DecidableClass::None || opts.always_probe {
        Some(check_bounded_lookback(d, prop, &opts.lookback)?)
    } else {
        None
    };
    let mut candidate = false;
    if class == DecidableClass::None {
        match bounded_lookback.as_ref().map(|r| &r.result) {
            Some(Lookback::Holds { .. }) => class = DecidableClass::IV,
            Some(Lookback::UnknownUpTo { .. }) => candidate = true,
            _ => {}
        }
    }
    Ok(ClassReport {
        acyclic_signature: acyclic,
        tame,
        all_arithmetic_mc: mc,
        locally_finite_asserted: opts.locally_finite,
        bounded_lookback,
        decidable_class: class,
        lookback_candidate: candidate,
        arithmetic,
        sort_graph,
        non_mc_atoms,
    })
}
