use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::graph::ComputationGraph;
use super::AnalysisError;
use crate::dmt::Dmt;
use crate::logic::Formula;
use crate::ltlf::Property;
use crate::smt::{Gateway, SmtError, SolverConfig, SolverStats};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum Lookback {
    /// No satisfiable `(σ, w)` exceeds `k`, and none is longer than `depth`.
    Holds { k: usize },
    Violated { k: usize, sigma: Vec<String>, word: Vec<Vec<String>>, path: Vec<String>, length: usize },
    UnknownUpTo { k: usize, depth: usize },
}

impl Lookback {
    pub fn is_violated(&self) -> bool {
        matches!(self, Lookback::Violated { .. })
    }
}

#[derive(Clone, Debug)]
pub struct LookbackOptions {
    pub k: usize,
    pub depth: usize,
    pub jobs: usize,
    pub solver: SolverConfig,
}

impl Default for LookbackOptions {
    fn default() -> Self {
        LookbackOptions { k: 5, depth: 10, jobs: 1, solver: SolverConfig::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LookbackReport {
    pub result: Lookback,
    /// Satisfiable `(σ, w)` pairs whose graph was measured.
    pub probes: usize,
    pub longest_seen: usize,
    pub smt: SolverStats,
}

#[derive(Clone)]
struct Item {
    sigma: Vec<usize>,
    word: Vec<usize>,
}

struct Probe<'a> {
    d: &'a Dmt,
    prop: &'a Property,
    /// Each symbol as leaf indices; only leaves that can link two variables.
    symbols: Vec<BTreeSet<usize>>,
}

impl<'a> Probe<'a> {
    fn names(&self, it: &Item) -> Vec<&'a str> {
        it.sigma.iter().map(|&t| self.d.transitions[t].name.as_str()).collect()
    }

    fn word_formulas(&self, it: &Item) -> Vec<Formula> {
        it.word
            .iter()
            .map(|&s| Formula::and(self.symbols[s].iter().map(|&k| self.prop.leaves[k].constraint.formula())))
            .collect()
    }

    /// `unknown` counts as satisfiable.
    fn satisfiable(&self, it: &Item, gw: &mut Gateway) -> Result<bool, AnalysisError> {
        let h = self.d.history(&self.names(it), &self.word_formulas(it))?;
        match gw.is_sat(&h.formula) {
            Ok(b) => Ok(b),
            Err(SmtError::Unknown(_) | SmtError::Timeout) => Ok(true),
            Err(e) => Err(e.into()),
        }
    }

    fn extensions(&self, it: &Item) -> Vec<Item> {
        let mut out = Vec::new();
        for t in 0..self.d.transitions.len() {
            for s in 0..self.symbols.len() {
                let mut x = it.clone();
                x.sigma.push(t);
                x.word.push(s);
                out.push(x);
            }
        }
        out
    }

    fn graph(&self, it: &Item) -> Result<ComputationGraph, AnalysisError> {
        let word: Vec<BTreeSet<usize>> = it.word.iter().map(|&s| self.symbols[s].clone()).collect();
        Ok(ComputationGraph::build(self.d, &self.names(it), Some(self.prop), &word)?)
    }
}

/// Splits `items` over `gws` and keeps the satisfiable ones, in input order.
fn filter_sat(probe: &Probe, items: Vec<Item>, gws: &mut [Gateway]) -> Result<Vec<Item>, AnalysisError> {
    if gws.len() == 1 || items.len() < 2 {
        let gw = &mut gws[0];
        let mut out = Vec::new();
        for it in items {
            if probe.satisfiable(&it, gw)? {
                out.push(it);
            }
        }
        return Ok(out);
    }
    let chunk = items.len().div_ceil(gws.len());
    let parts: Vec<Result<Vec<Item>, AnalysisError>> = std::thread::scope(|sc| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .zip(gws.iter_mut())
            .map(|(c, gw)| {
                sc.spawn(move || {
                    let mut out = Vec::new();
                    for it in c {
                        if probe.satisfiable(it, gw)? {
                            out.push(it.clone());
                        }
                    }
                    Ok(out)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("probe worker panicked")).collect()
    });
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn two_var_leaves(prop: &Property) -> Vec<usize> {
    (0..prop.leaves.len()).filter(|&i| prop.leaves[i].constraint.free_vars().len() >= 2).collect()
}

/// Breadth-first over transition sequences of length `0..=depth`, so the
/// reported counterexample is a shortest one.
pub fn check_bounded_lookback(d: &Dmt, prop: &Property, opts: &LookbackOptions) -> Result<LookbackReport, AnalysisError> {
    let stats = Arc::new(Mutex::new(SolverStats::default()));
    let mut gws: Vec<Gateway> = (0..opts.jobs.max(1))
        .map(|_| {
            let mut g = Gateway::new(d.ctx.clone(), &opts.solver);
            g.share_stats(stats.clone());
            g.set_phase("lookback");
            g
        })
        .collect();
    let relevant = two_var_leaves(prop);
    let mut symbols = Vec::new();
    for mask in 0u64..(1u64 << relevant.len()) {
        let s: BTreeSet<usize> = relevant.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &k)| k).collect();
        let f = Formula::and(s.iter().map(|&k| prop.leaves[k].constraint.formula()));
        let keep = match gws[0].is_sat(&f) {
            Ok(b) => b,
            Err(SmtError::Unknown(_) | SmtError::Timeout) => true,
            Err(e) => return Err(e.into()),
        };
        if keep {
            symbols.push(s);
        }
    }
    let probe = Probe { d, prop, symbols };
    let roots: Vec<Item> = (0..probe.symbols.len()).map(|s| Item { sigma: vec![], word: vec![s] }).collect();
    let mut frontier = filter_sat(&probe, roots, &mut gws)?;
    let mut probes = 0;
    let mut longest = 0;
    let report = |result, probes, longest| LookbackReport {
        result,
        probes,
        longest_seen: longest,
        smt: stats.lock().unwrap().clone(),
    };
    for level in 0..=opts.depth {
        for it in &frontier {
            probes += 1;
            let (len, path) = probe.graph(it)?.collapsed().longest_path(opts.k + 1);
            longest = longest.max(len);
            if len > opts.k {
                let word = it.word.iter().map(|&s| probe.symbols[s].iter().map(|&k| prop.leaves[k].name.clone()).collect()).collect();
                let sigma = probe.names(it).into_iter().map(String::from).collect();
                return Ok(report(Lookback::Violated { k: opts.k, sigma, word, path, length: len }, probes, longest));
            }
        }
        let next: Vec<Item> = frontier.iter().flat_map(|it| probe.extensions(it)).collect();
        frontier = filter_sat(&probe, next, &mut gws)?;
        if frontier.is_empty() {
            return Ok(report(Lookback::Holds { k: opts.k }, probes, longest));
        }
        if level == opts.depth {
            break;
        }
    }
    Ok(report(Lookback::UnknownUpTo { k: opts.k, depth: opts.depth }, probes, longest))
}
