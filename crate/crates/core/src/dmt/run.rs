use std::collections::BTreeMap;

use crate::logic::{Annot, Var};
use crate::ltlf::{Ltl, Property};
use crate::smt::eval::{eval_in, eval_term, Env, EvalError};
use crate::smt::{ModelFragment, Value};

use super::{Dmt, DmtError};

/// A concrete run: `states[i]` is the assignment before step `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub states: Vec<BTreeMap<Var, Value>>,
    pub transitions: Vec<String>,
    pub model: ModelFragment,
}

impl Run {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }
}

pub fn decode_run(d: &Dmt, model: &ModelFragment, sigma: &[String], n: usize) -> Result<Run, DmtError> {
    if sigma.len() != n {
        return Err(DmtError::Length { word: n + 1, steps: sigma.len(), needed: sigma.len() + 1 });
    }
    let mut states = Vec::with_capacity(n + 1);
    for i in 0..=n as u32 {
        let mut st = BTreeMap::new();
        for v in &d.variables {
            let val = model.variables.get(&v.at(i)).ok_or_else(|| DmtError::Missing(v.at(i).to_string()))?;
            st.insert(v.clone(), val.clone());
        }
        states.push(st);
    }
    Ok(Run { states, transitions: sigma.to_vec(), model: model.clone() })
}

fn step_env(pre: &BTreeMap<Var, Value>, post: &BTreeMap<Var, Value>) -> Env {
    let mut env = Env::new();
    for (v, x) in pre {
        env.insert(v.read(), x.clone());
    }
    for (v, x) in post {
        env.insert(v.write(), x.clone());
    }
    env
}

/// Initial assignment, guards and frame equalities; `Ok(Err(msg))` names the first violation.
pub fn check_run(d: &Dmt, run: &Run) -> Result<Result<(), String>, DmtError> {
    if run.states.len() != run.transitions.len() + 1 {
        return Ok(Err("state count does not match step count".into()));
    }
    for v in &d.variables {
        let want = eval_term(&run.model, &Env::new(), &d.initial[v])?;
        if run.states[0].get(v) != Some(&want) {
            return Ok(Err(format!("initial value of {} is not {}", v, want)));
        }
    }
    for (i, name) in run.transitions.iter().enumerate() {
        let t = d.transition(name)?;
        let env = step_env(&run.states[i], &run.states[i + 1]);
        if !eval_in(&run.model, &env, &t.guard.formula())? {
            return Ok(Err(format!("step {} violates the guard of {}", i + 1, name)));
        }
        let w = t.writes();
        for v in d.variables.iter().filter(|v| !w.contains(*v)) {
            if run.states[i][v] != run.states[i + 1][v] {
                return Ok(Err(format!("step {} changes {} which {} does not write", i + 1, v, name)));
            }
        }
    }
    Ok(Ok(()))
}

pub fn evaluate_property(run: &Run, prop: &Property) -> Result<bool, EvalError> {
    let n = run.transitions.len();
    let mut leaf_cache: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    eval_at(run, prop, &prop.root, 0, n, &mut leaf_cache)
}

fn eval_at(
    run: &Run,
    prop: &Property,
    f: &Ltl,
    i: usize,
    n: usize,
    cache: &mut BTreeMap<(usize, usize), bool>,
) -> Result<bool, EvalError> {
    Ok(match f {
        Ltl::True => true,
        Ltl::False => false,
        Ltl::Atom(k) => {
            if let Some(b) = cache.get(&(*k, i)) {
                return Ok(*b);
            }
            let env: Env = run.states[i].iter().map(|(v, x)| (v.with_annot(Annot::Plain), x.clone())).collect();
            let b = eval_in(&run.model, &env, &prop.leaves[*k].constraint.formula())?;
            cache.insert((*k, i), b);
            b
        }
        Ltl::And(xs) => {
            for x in xs {
                if !eval_at(run, prop, x, i, n, cache)? {
                    return Ok(false);
                }
            }
            true
        }
        Ltl::Or(xs) => {
            for x in xs {
                if eval_at(run, prop, x, i, n, cache)? {
                    return Ok(true);
                }
            }
            false
        }
        Ltl::Next(g) => i < n && eval_at(run, prop, g, i + 1, n, cache)?,
        Ltl::Globally(g) => {
            for j in i..=n {
                if !eval_at(run, prop, g, j, n, cache)? {
                    return Ok(false);
                }
            }
            true
        }
        Ltl::Until(a, b) => {
            for j in i..=n {
                if eval_at(run, prop, b, j, n, cache)? {
                    return Ok(true);
                }
                if !eval_at(run, prop, a, j, n, cache)? {
                    return Ok(false);
                }
            }
            false
        }
    })
}
