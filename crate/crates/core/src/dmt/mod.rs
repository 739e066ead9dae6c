//! Data-aware processes: transitions, unfoldings, history constraints and runs.

mod run;

use std::collections::{BTreeMap, BTreeSet};

use crate::logic::{
    instantiate_transition, rename_from_index, rename_to_index, Annot, Constraint, Formula, LogicError, Signature,
    Term, Var,
};
use crate::qe::{cover, QeError};
use crate::smt::TheoryContext;

pub use run::{check_run, decode_run, evaluate_property, Run};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DmtError {
    #[error("invalid process: {0}")]
    Invalid(String),
    #[error("unknown transition {0}")]
    UnknownTransition(String),
    #[error("word has {word} symbols but {steps} transitions need {needed}")]
    Length { word: usize, steps: usize, needed: usize },
    #[error("model lacks a value for {0}")]
    Missing(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Qe(#[from] QeError),
    #[error(transparent)]
    Eval(#[from] crate::smt::eval::EvalError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    /// Over `V^r ∪ V^w`, possibly with existentially bound variables.
    pub guard: Constraint,
}

impl Transition {
    /// Variables whose write copy occurs in the guard.
    pub fn writes(&self) -> BTreeSet<Var> {
        self.guard.free_vars().into_iter().filter(|v| v.annot == Annot::Write).map(|v| v.plain()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dmt {
    pub signature: Signature,
    pub variables: Vec<Var>,
    /// Constant or numeral for each variable.
    pub initial: BTreeMap<Var, Term>,
    pub transitions: Vec<Transition>,
    pub ctx: TheoryContext,
}

/// `H(σ, w)` together with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryFormula {
    pub formula: Formula,
    pub length: usize,
    pub transitions: Vec<String>,
    pub word: Vec<Formula>,
}

impl Dmt {
    pub fn new(
        ctx: TheoryContext,
        initial: BTreeMap<Var, Term>,
        transitions: Vec<Transition>,
    ) -> Result<Dmt, DmtError> {
        let signature = ctx.signature.clone();
        let variables = signature.variables.clone();
        if variables.is_empty() {
            return Err(DmtError::Invalid("no data variables".into()));
        }
        for v in &variables {
            match initial.get(v) {
                None => return Err(DmtError::Invalid(format!("no initial value for {}", v))),
                Some(t @ (Term::Const(_) | Term::Num(_))) if t.sort() == v.sort => {}
                Some(t) => return Err(DmtError::Invalid(format!("initial value {} of {} is not a constant of sort {}", t, v, v.sort))),
            }
        }
        let mut names = BTreeSet::new();
        for t in &transitions {
            if !names.insert(t.name.clone()) {
                return Err(DmtError::Invalid(format!("duplicate transition {}", t.name)));
            }
            for v in t.guard.free_vars() {
                let ok = matches!(v.annot, Annot::Read | Annot::Write) && variables.contains(&v.plain());
                if !ok {
                    return Err(DmtError::Invalid(format!("guard of {} mentions {}", t.name, v)));
                }
            }
        }
        Ok(Dmt { signature, variables, initial, transitions, ctx })
    }

    pub fn transition(&self, name: &str) -> Result<&Transition, DmtError> {
        self.transitions.iter().find(|t| t.name == name).ok_or_else(|| DmtError::UnknownTransition(name.into()))
    }

    /// `t ∧ ⋀_{v ∉ write(t)} v^w = v^r`.
    pub fn extended_transition(&self, t: &Transition) -> Formula {
        let w = t.writes();
        let frame = self.variables.iter().filter(|v| !w.contains(*v)).map(|v| Formula::eq(v.write().term(), v.read().term()));
        Formula::and(std::iter::once(t.guard.formula()).chain(frame))
    }

    /// `⋀ v_i = I(v)`.
    pub fn initial_formula(&self, i: u32) -> Formula {
        Formula::and(self.variables.iter().map(|v| Formula::eq(v.at(i).term(), self.initial[v].clone())))
    }

    pub fn initial_state_formula(&self) -> Formula {
        Formula::and(self.variables.iter().map(|v| Formula::eq(v.term(), self.initial[v].clone())))
    }

    pub fn history(&self, sigma: &[&str], word: &[Formula]) -> Result<HistoryFormula, DmtError> {
        if word.len() != sigma.len() + 1 {
            return Err(DmtError::Length { word: word.len(), steps: sigma.len(), needed: sigma.len() + 1 });
        }
        let mut parts = vec![self.initial_formula(0), rename_to_index(&word[0], 0)?];
        for (i, name) in sigma.iter().enumerate() {
            let t = self.transition(name)?;
            let (a, b) = (i as u32, i as u32 + 1);
            parts.push(instantiate_transition(&self.extended_transition(t), a, b)?);
            parts.push(rename_to_index(&word[i + 1], b)?);
        }
        Ok(HistoryFormula {
            formula: Formula::and(parts),
            length: sigma.len(),
            transitions: sigma.iter().map(|s| s.to_string()).collect(),
            word: word.to_vec(),
        })
    }

    /// `(∃ V_0 … V_{n-1}. H(σ, w))` renamed back to `V`.
    pub fn history_exists(&self, sigma: &[&str], word: &[Formula]) -> Result<Formula, DmtError> {
        let h = self.history(sigma, word)?;
        let n = sigma.len() as u32;
        let keep: BTreeSet<Var> = self.variables.iter().map(|v| v.at(n)).collect();
        let res = cover(&h.formula, &keep, &self.ctx)?;
        Ok(rename_from_index(&res.formula, n))
    }

    /// `cover(∃X. φ(X) ∧ t̂(X, V))`.
    pub fn update(&self, phi: &Formula, t: &Transition) -> Result<Formula, DmtError> {
        self.update_with(phi, &self.extended_transition(t), &Formula::True)
    }

    /// `cover(∃X, bound(ς). φ(X) ∧ t̂(X, V) ∧ ς(V))`; the dummy step uses `t̂ = frame`.
    pub fn update_with(&self, phi: &Formula, ext: &Formula, sym: &Formula) -> Result<Formula, DmtError> {
        if *phi == Formula::False {
            return Ok(Formula::False);
        }
        let pre = rename_to_index(phi, 0)?;
        let step = rename_from_index(&instantiate_transition(ext, 0, 1)?, 1);
        let keep: BTreeSet<Var> = self.variables.iter().cloned().collect();
        let res = cover(&Formula::and([pre, step, sym.clone()]), &keep, &self.ctx)?;
        Ok(res.formula)
    }

    /// The frame of the dummy transition `⊤`.
    pub fn identity_transition(&self) -> Formula {
        Formula::and(self.variables.iter().map(|v| Formula::eq(v.write().term(), v.read().term())))
    }
}
