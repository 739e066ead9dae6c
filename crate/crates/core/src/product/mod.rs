//! The product of a process with a property NFA, explored breadth first.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::dmt::{check_run, decode_run, evaluate_property, Dmt, DmtError, Run};
use crate::logic::{rename_to_index, Formula, LogicError};
use crate::ltlf::{NfaState, Property, PropertyNfa};
use crate::qe::{self, cover, QeError};
use crate::smt::{Gateway, SmtError, SolverStats};

#[derive(Debug, thiserror::Error)]
pub enum ProductError {
    #[error("solver: {0}")]
    Smt(#[from] SmtError),
    #[error("elimination: {0}")]
    Qe(#[from] QeError),
    #[error(transparent)]
    Dmt(#[from] DmtError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("soundness violation: {0}")]
    Unsound(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: usize,
    pub max_edges: usize,
    pub time: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_nodes: 10_000, max_edges: usize::MAX, time: Duration::from_secs(60) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpandOptions {
    pub budget: Budget,
    /// Keep expanding after the first final node.
    pub exhaustive: bool,
    /// Merge equivalent nodes of the same NFA state.
    pub merge: bool,
    /// Check every new node against its history constraint.
    pub check_paths: bool,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions { budget: Budget::default(), exhaustive: false, merge: true, check_paths: cfg!(debug_assertions) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductNode {
    pub nfa_state: usize,
    pub formula: Formula,
    pub initial: bool,
    pub is_final: bool,
    hash: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductEdge {
    pub from: usize,
    pub to: usize,
    /// `None` is the dummy transition out of the initial node.
    pub transition: Option<String>,
    pub symbol: BTreeSet<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct ProductGraph {
    pub nodes: Vec<ProductNode>,
    pub edges: Vec<ProductEdge>,
    parent: Vec<Option<usize>>,
}

impl ProductGraph {
    pub fn finals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_final)
    }

    /// The BFS tree path from the initial node.
    pub fn path_to(&self, node: usize) -> Vec<ProductEdge> {
        let mut out = Vec::new();
        let mut cur = node;
        while let Some(e) = self.parent[cur] {
            out.push(self.edges[e].clone());
            cur = self.edges[e].from;
        }
        out.reverse();
        out
    }

    pub fn to_dot(&self, nfa: &PropertyNfa, highlight: &[ProductEdge]) -> String {
        let mut out = String::from("digraph product {\n  node [shape=record, style=rounded];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let label = format!("{} | {}", record_escape(&nfa.state_label(n.nfa_state)), record_escape(&n.formula.to_string()));
            let extra = if n.is_final { ", peripheries=2" } else { "" };
            let _ = writeln!(out, "  p{} [label=\"{}\"{}];", i, label, extra);
        }
        for e in &self.edges {
            let t = e.transition.as_deref().unwrap_or("true");
            let label = format!("{}, {}", t, nfa.symbol_label(&e.symbol));
            let red = if highlight.contains(e) { ", color=red" } else { "" };
            let _ = writeln!(out, "  p{} -> p{} [label={}{}];", e.from, e.to, crate::ltlf::dot_quote(&label), red);
        }
        out.push_str("}\n");
        out
    }
}

fn record_escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if matches!(c, '{' | '}' | '|' | '<' | '>' | '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Outcome {
    WitnessFound,
    NoWitness,
    BudgetExceeded,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ProductStats {
    pub nodes: usize,
    pub edges: usize,
    pub merges: usize,
    #[serde(rename = "qeTime", serialize_with = "secs")]
    pub qe_time: Duration,
    #[serde(rename = "wallTime", serialize_with = "secs")]
    pub wall_time: Duration,
    pub smt: SolverStats,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    pub witness: Option<Run>,
    pub accepting_path: Option<Vec<ProductEdge>>,
    pub stats: ProductStats,
    pub diagnostic: Option<String>,
    pub graph: ProductGraph,
}

fn symbol_formula(prop: &Property, s: &BTreeSet<usize>) -> Formula {
    Formula::and(s.iter().map(|&i| prop.leaves[i].constraint.formula()))
}

struct Expander<'a> {
    d: &'a Dmt,
    nfa: &'a PropertyNfa,
    gw: &'a mut Gateway,
    opts: &'a ExpandOptions,
    graph: ProductGraph,
    stats: ProductStats,
    start: Instant,
}

enum Stop {
    Budget(String),
    Error(ProductError),
}

impl From<ProductError> for Stop {
    fn from(e: ProductError) -> Self {
        Stop::Error(e)
    }
}

impl Expander<'_> {
    fn over_budget(&self) -> Option<String> {
        let b = &self.opts.budget;
        if self.graph.nodes.len() > b.max_nodes {
            Some(format!("node budget {} exhausted", b.max_nodes))
        } else if self.graph.edges.len() > b.max_edges {
            Some(format!("edge budget {} exhausted", b.max_edges))
        } else if self.start.elapsed() > b.time {
            Some(format!("time budget {:?} exhausted", b.time))
        } else {
            None
        }
    }

    fn lift<T>(&mut self, r: Result<T, ProductError>) -> Result<T, Stop> {
        match r {
            Ok(v) => Ok(v),
            Err(ProductError::Smt(e @ (SmtError::Unknown(_) | SmtError::Timeout))) => Err(Stop::Budget(e.to_string())),
            Err(e) => Err(Stop::Error(e)),
        }
    }

    /// `ξ` for one product step, or `None` when it is unsatisfiable.
    fn successor(&mut self, updated: &Formula, sym: &BTreeSet<usize>) -> Result<Option<Formula>, ProductError> {
        let sf = symbol_formula(&self.nfa.property, sym);
        let xi = if sf.is_quantifier_free() {
            match updated {
                Formula::Or(ds) => Formula::or(ds.iter().map(|x| Formula::and2(x.clone(), sf.clone()))),
                u => Formula::and2(u.clone(), sf),
            }
        } else {
            let t = Instant::now();
            let keep = self.d.variables.iter().cloned().collect();
            let f = cover(&Formula::and2(updated.clone(), sf), &keep, &self.d.ctx)?.formula;
            self.stats.qe_time += t.elapsed();
            f
        };
        self.gw.set_phase("product.sat");
        let xi = qe::simplify(&xi, self.gw)?;
        Ok(if xi == Formula::False { None } else { Some(xi) })
    }

    fn find_equivalent(&mut self, q: usize, f: &Formula, h: u64) -> Result<Option<usize>, ProductError> {
        if !self.opts.merge {
            return Ok(None);
        }
        let candidates: Vec<usize> =
            (0..self.graph.nodes.len()).filter(|&i| !self.graph.nodes[i].initial && self.graph.nodes[i].nfa_state == q).collect();
        if let Some(&i) = candidates.iter().find(|&&i| self.graph.nodes[i].hash == h && self.graph.nodes[i].formula == *f) {
            return Ok(Some(i));
        }
        self.gw.set_phase("product.merge");
        for i in candidates {
            let g = self.graph.nodes[i].formula.clone();
            if self.gw.check_equiv(&g, f)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Inserts the edge and returns the target when it is a new node.
    fn add(&mut self, from: usize, t: Option<&str>, sym: &BTreeSet<usize>, to_q: usize, f: Formula) -> Result<Option<usize>, ProductError> {
        let h = f.structural_hash();
        let existing = self.find_equivalent(to_q, &f, h)?;
        let edge = ProductEdge { from, to: 0, transition: t.map(str::to_string), symbol: sym.clone() };
        let e = self.graph.edges.len();
        let (to, fresh) = match existing {
            Some(i) => {
                self.stats.merges += 1;
                (i, false)
            }
            None => {
                self.graph.nodes.push(ProductNode {
                    nfa_state: to_q,
                    formula: f,
                    initial: false,
                    is_final: self.nfa.is_final(to_q),
                    hash: h,
                });
                self.graph.parent.push(Some(e));
                (self.graph.nodes.len() - 1, true)
            }
        };
        if self.graph.edges.iter().any(|x| x.from == from && x.to == to && x.transition == edge.transition && x.symbol == edge.symbol) {
            return Ok(None);
        }
        self.graph.edges.push(ProductEdge { to, ..edge });
        if fresh && self.opts.check_paths {
            let path = self.graph.path_to(to);
            if !verify_path_invariant(self.d, self.nfa, &path, &self.graph.nodes[to].formula, self.gw)? {
                return Err(ProductError::Unsound(format!("node {} differs from its history constraint", to)));
            }
        }
        Ok(fresh.then_some(to))
    }

    fn run(&mut self) -> Result<Option<usize>, Stop> {
        let phi_i = self.d.initial_state_formula();
        self.graph.nodes.push(ProductNode {
            nfa_state: self.nfa.initial,
            hash: phi_i.structural_hash(),
            formula: phi_i.clone(),
            initial: true,
            is_final: false,
        });
        self.graph.parent.push(None);
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut first_final = None;
        // the dummy step: ⊤ is the identity
        let id = self.d.identity_transition();
        let t0 = Instant::now();
        let r = self.d.update_with(&phi_i, &id, &Formula::True).map_err(ProductError::from);
        self.stats.qe_time += t0.elapsed();
        let u0 = self.lift(r)?;
        let init_edges: Vec<_> = self.nfa.outgoing(self.nfa.initial).cloned().collect();
        for e in init_edges {
            let r = self.successor(&u0, &e.symbol);
            if let Some(xi) = self.lift(r)? {
                let r = self.add(0, None, &e.symbol, e.to, xi);
                if let Some(n) = self.lift(r)? {
                    queue.push_back(n);
                    if self.graph.nodes[n].is_final && first_final.is_none() {
                        first_final = Some(n);
                    }
                }
            }
            if first_final.is_some() && !self.opts.exhaustive {
                return Ok(first_final);
            }
            if let Some(why) = self.over_budget() {
                return Err(Stop::Budget(why));
            }
        }
        while let Some(p) = queue.pop_front() {
            let node = self.graph.nodes[p].clone();
            let out: Vec<_> = self.nfa.outgoing(node.nfa_state).cloned().collect();
            if out.is_empty() {
                continue;
            }
            for t in &self.d.transitions {
                let t0 = Instant::now();
                let r = self.d.update(&node.formula, t).map_err(ProductError::from);
                self.stats.qe_time += t0.elapsed();
                let u = self.lift(r)?;
                if u == Formula::False {
                    continue;
                }
                for e in &out {
                    let r = self.successor(&u, &e.symbol);
                    if let Some(xi) = self.lift(r)? {
                        let r = self.add(p, Some(&t.name), &e.symbol, e.to, xi);
                        if let Some(n) = self.lift(r)? {
                            queue.push_back(n);
                            if self.graph.nodes[n].is_final && first_final.is_none() {
                                first_final = Some(n);
                            }
                        }
                    }
                    if first_final.is_some() && !self.opts.exhaustive {
                        return Ok(first_final);
                    }
                    if let Some(why) = self.over_budget() {
                        return Err(Stop::Budget(why));
                    }
                }
            }
        }
        Ok(first_final)
    }
}

/// Explores the product and, on success, extracts and validates a witness.
pub fn expand(
    d: &Dmt,
    nfa: &PropertyNfa,
    gw: &mut Gateway,
    opts: &ExpandOptions,
) -> Result<Verdict, ProductError> {
    let before = gw.stats();
    let mut ex = Expander { d, nfa, gw, opts, graph: ProductGraph::default(), stats: ProductStats::default(), start: Instant::now() };
    let res = ex.run();
    let Expander { graph, mut stats, start, .. } = ex;
    let mut verdict = Verdict {
        outcome: Outcome::NoWitness,
        witness: None,
        accepting_path: None,
        stats: ProductStats::default(),
        diagnostic: None,
        graph,
    };
    match res {
        Err(Stop::Error(e)) => return Err(e),
        Err(Stop::Budget(why)) => {
            verdict.outcome = Outcome::BudgetExceeded;
            verdict.diagnostic = Some(why);
        }
        Ok(None) => {}
        Ok(Some(n)) => {
            let path = verdict.graph.path_to(n);
            gw.set_phase("witness");
            match extract_witness(d, nfa, &path, gw) {
                Ok(run) => {
                    verdict.outcome = Outcome::WitnessFound;
                    verdict.witness = Some(run);
                    verdict.accepting_path = Some(path);
                }
                Err(ProductError::Smt(e @ (SmtError::Unknown(_) | SmtError::Timeout))) => {
                    verdict.outcome = Outcome::BudgetExceeded;
                    verdict.diagnostic = Some(format!("witness extraction: {}", e));
                }
                Err(e) => return Err(e),
            }
        }
    }
    stats.nodes = verdict.graph.nodes.len();
    stats.edges = verdict.graph.edges.len();
    stats.wall_time = start.elapsed();
    let mut smt = gw.stats();
    subtract(&mut smt, &before);
    stats.smt = smt;
    verdict.stats = stats;
    Ok(verdict)
}

fn subtract(s: &mut SolverStats, before: &SolverStats) {
    s.checks -= before.checks;
    s.wall_time = s.wall_time.saturating_sub(before.wall_time);
    for (k, v) in &before.per_phase {
        if let Some(p) = s.per_phase.get_mut(k) {
            p.count -= v.count;
            p.time = p.time.saturating_sub(v.time);
        }
    }
    s.per_phase.retain(|_, p| p.count > 0);
}

/// `σ_π` and `w_π` of a path.
pub fn path_labels(nfa: &PropertyNfa, path: &[ProductEdge]) -> (Vec<String>, Vec<Formula>) {
    let sigma = path.iter().skip(1).map(|e| e.transition.clone().unwrap_or_default()).collect();
    let word = path.iter().map(|e| symbol_formula(&nfa.property, &e.symbol)).collect();
    (sigma, word)
}

pub fn extract_witness(d: &Dmt, nfa: &PropertyNfa, path: &[ProductEdge], gw: &mut Gateway) -> Result<Run, ProductError> {
    if path.is_empty() || path[0].transition.is_some() {
        return Err(ProductError::Unsound("a witness path starts with the dummy step".into()));
    }
    let (sigma, word) = path_labels(nfa, path);
    let names: Vec<&str> = sigma.iter().map(String::as_str).collect();
    let h = d.history(&names, &word)?;
    let n = sigma.len();
    let mut extra = Vec::new();
    for leaf in &nfa.property.leaves {
        for i in 0..=n as u32 {
            extra.push(rename_to_index(&leaf.constraint.formula(), i)?);
        }
    }
    let res = gw.check_sat_model(&h.formula, &extra)?;
    if res.is_unsat() {
        return Err(ProductError::Unsound("history constraint of an accepting path is unsatisfiable".into()));
    }
    if let crate::smt::Verdict::Unknown(why) = res.verdict {
        return Err(ProductError::Smt(SmtError::Unknown(why)));
    }
    let model = res.model.ok_or_else(|| ProductError::Unsound("solver returned no model".into()))?;
    let run = decode_run(d, &model, &sigma, n)?;
    if let Err(why) = check_run(d, &run)? {
        return Err(ProductError::Unsound(format!("decoded run is not a run: {}", why)));
    }
    match evaluate_property(&run, &nfa.property) {
        Ok(true) => Ok(run),
        Ok(false) => Err(ProductError::Unsound("decoded run does not satisfy the property".into())),
        Err(e) => Err(ProductError::Unsound(format!("cannot evaluate the property on the witness: {}", e))),
    }
}

/// Whether `φ` is equivalent to `H_∃(σ_π, w_π)`.
pub fn verify_path_invariant(
    d: &Dmt,
    nfa: &PropertyNfa,
    path: &[ProductEdge],
    phi: &Formula,
    gw: &mut Gateway,
) -> Result<bool, ProductError> {
    let (sigma, word) = path_labels(nfa, path);
    let names: Vec<&str> = sigma.iter().map(String::as_str).collect();
    let h = d.history_exists(&names, &word)?;
    let phase = gw.phase().to_string();
    gw.set_phase("invariant");
    let ok = gw.check_equiv(phi, &h)?;
    gw.set_phase(&phase);
    Ok(ok)
}

/// Per NFA state, the nodes of a graph; handy for pairing against expected formulas.
pub fn nodes_by_state(g: &ProductGraph) -> BTreeMap<usize, Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, n) in g.nodes.iter().enumerate() {
        out.entry(n.nfa_state).or_default().push(i);
    }
    out
}

impl PropertyNfa {
    pub fn is_top(&self, q: usize) -> bool {
        self.states[q] == NfaState::Prop(crate::ltlf::Ltl::True)
    }
}
