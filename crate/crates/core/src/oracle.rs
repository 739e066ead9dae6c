//! Brute-force reference checker over small finite structures.
//!
//! Every uninterpreted sort gets a fixed finite universe; all interpretations
//! of the signature over it are enumerated, and for each one all concrete runs
//! up to a length bound. Only usable for pure EUF processes.

use std::collections::BTreeMap;

use crate::dmt::{evaluate_property, Dmt, Run};
use crate::logic::{Annot, Formula, Sort, Var};
use crate::ltlf::Property;
use crate::smt::eval::{eval_formula, eval_in, Env, EvalError};
use crate::smt::{ModelFragment, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("sort {0} has no finite universe")]
    Infinite(String),
    #[error("{0} interpretations exceed the limit")]
    TooLarge(u128),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug)]
pub struct OracleOptions {
    /// Universe size of each sort, raised to the largest distinct group of that sort.
    pub domain: usize,
    pub max_len: usize,
    pub max_models: u128,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { domain: 2, max_len: 3, max_models: 1 << 20 }
    }
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub witness: Option<Run>,
    /// Interpretations satisfying the background facts.
    pub models: usize,
    pub runs: usize,
}

enum Slot {
    Const(String, Sort),
    Fun(String, Vec<Value>, Sort),
    Rel(String, Vec<Value>),
}

fn tuples(universe: &BTreeMap<Sort, Vec<Value>>, sorts: &[Sort]) -> Vec<Vec<Value>> {
    let mut out = vec![vec![]];
    for s in sorts {
        let mut next = Vec::new();
        for t in &out {
            for v in &universe[s] {
                let mut u = t.clone();
                u.push(v.clone());
                next.push(u);
            }
        }
        out = next;
    }
    out
}

fn universes(d: &Dmt, size: usize) -> Result<BTreeMap<Sort, Vec<Value>>, OracleError> {
    let mut out = BTreeMap::new();
    for s in &d.signature.sorts {
        if s.is_rat() {
            return Err(OracleError::Infinite(s.to_string()));
        }
        let group = d.ctx.distinct.iter().filter(|g| g.first().is_some_and(|c| &c.sort == s)).map(Vec::len).max();
        let n = size.max(group.unwrap_or(0));
        out.insert(s.clone(), (0..n).map(|i| Value::elem(&format!("{}#{}", s, i))).collect());
    }
    Ok(out)
}

fn assignments(vars: &[Var], universe: &BTreeMap<Sort, Vec<Value>>) -> Vec<BTreeMap<Var, Value>> {
    let sorts: Vec<Sort> = vars.iter().map(|v| v.sort.clone()).collect();
    tuples(universe, &sorts).into_iter().map(|t| vars.iter().cloned().zip(t).collect()).collect()
}

struct Search<'a> {
    d: &'a Dmt,
    prop: &'a Property,
    guards: Vec<Formula>,
    states: Vec<BTreeMap<Var, Value>>,
    max_len: usize,
    runs: usize,
}

impl Search<'_> {
    fn step_ok(&self, m: &ModelFragment, t: usize, pre: &BTreeMap<Var, Value>, post: &BTreeMap<Var, Value>) -> Result<bool, OracleError> {
        let writes = self.d.transitions[t].writes();
        if self.d.variables.iter().any(|v| !writes.contains(v) && pre[v] != post[v]) {
            return Ok(false);
        }
        let mut env = Env::new();
        for v in &self.d.variables {
            env.insert(v.with_annot(Annot::Read), pre[v].clone());
            env.insert(v.with_annot(Annot::Write), post[v].clone());
        }
        Ok(eval_in(m, &env, &self.guards[t])?)
    }

    fn dfs(&mut self, m: &ModelFragment, run: &mut Run) -> Result<bool, OracleError> {
        self.runs += 1;
        if evaluate_property(run, self.prop)? {
            return Ok(true);
        }
        if run.len() == self.max_len {
            return Ok(false);
        }
        let pre = run.states.last().unwrap().clone();
        for t in 0..self.d.transitions.len() {
            for k in 0..self.states.len() {
                if !self.step_ok(m, t, &pre, &self.states[k])? {
                    continue;
                }
                run.states.push(self.states[k].clone());
                run.transitions.push(self.d.transitions[t].name.clone());
                if self.dfs(m, run)? {
                    return Ok(true);
                }
                run.states.pop();
                run.transitions.pop();
            }
        }
        Ok(false)
    }
}

/// Searches all structures and all runs of length `≤ max_len` for a witness.
pub fn brute_force(d: &Dmt, prop: &Property, opts: &OracleOptions) -> Result<OracleResult, OracleError> {
    let universe = universes(d, opts.domain)?;
    let sig = &d.signature;
    let mut slots = Vec::new();
    for c in sig.constants.values() {
        slots.push(Slot::Const(c.name.to_string(), c.sort.clone()));
    }
    for f in sig.functions.values() {
        for t in tuples(&universe, &f.args) {
            slots.push(Slot::Fun(f.name.to_string(), t, f.result.clone()));
        }
    }
    for r in sig.relations.values() {
        for t in tuples(&universe, &r.args) {
            slots.push(Slot::Rel(r.name.to_string(), t));
        }
    }
    let radix: Vec<usize> = slots
        .iter()
        .map(|s| match s {
            Slot::Const(_, so) | Slot::Fun(_, _, so) => universe[so].len(),
            Slot::Rel(..) => 2,
        })
        .collect();
    let total: u128 = radix.iter().map(|&r| r as u128).product();
    if total > opts.max_models {
        return Err(OracleError::TooLarge(total));
    }
    let background = d.ctx.facts_formula();
    let mut search = Search {
        d,
        prop,
        guards: d.transitions.iter().map(|t| t.guard.formula()).collect(),
        states: assignments(&d.variables, &universe),
        max_len: opts.max_len,
        runs: 0,
    };
    let mut digits = vec![0usize; slots.len()];
    let mut models = 0;
    loop {
        let mut m = ModelFragment::default();
        for (s, vals) in &universe {
            for v in vals {
                m.note(s, v);
            }
        }
        for (slot, &k) in slots.iter().zip(&digits) {
            match slot {
                Slot::Const(n, s) => {
                    m.constants.insert(n.as_str().into(), universe[s][k].clone());
                }
                Slot::Fun(n, t, s) => {
                    m.functions.entry(n.as_str().into()).or_default().insert(t.clone(), universe[s][k].clone());
                }
                Slot::Rel(n, t) => {
                    let e = m.relations.entry(n.as_str().into()).or_default();
                    if k == 1 {
                        e.insert(t.clone());
                    }
                }
            }
        }
        if eval_formula(&m, &background)? {
            models += 1;
            let init: BTreeMap<Var, Value> = d
                .variables
                .iter()
                .map(|v| Ok((v.clone(), crate::smt::eval::eval_term(&m, &Env::new(), &d.initial[v])?)))
                .collect::<Result<_, EvalError>>()?;
            let mut run = Run { states: vec![init], transitions: vec![], model: m.clone() };
            if search.dfs(&m, &mut run)? {
                return Ok(OracleResult { witness: Some(run), models, runs: search.runs });
            }
        }
        // odometer
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(OracleResult { witness: None, models, runs: search.runs });
            }
            digits[i] += 1;
            if digits[i] < radix[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}
