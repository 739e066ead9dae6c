//! Quantifier elimination: Fourier–Motzkin for LRA and covers for EUF and the
//! tame combination of the two.

pub mod fm;
mod property;
mod tame;

use std::collections::BTreeSet;

use crate::logic::{
    dnf_literals, prenex, rename_apart, Atom, Formula, Fresh, LogicError, Literal, Signature, Term, Var,
};
use crate::smt::{Gateway, SmtError, TheoryContext};

pub use property::{cover_property_test, CoverReport};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QeError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("signature is not tame: {0}")]
    NotTame(String),
    #[error("cover saturation aborted: {0}")]
    DepthBound(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Smt(#[from] SmtError),
}

/// `∃ eliminate. ⋀ matrix` with `keep` as the remaining free variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EliminationTask {
    pub eliminate: Vec<Var>,
    pub matrix: Vec<Literal>,
    pub keep: BTreeSet<Var>,
}

impl EliminationTask {
    pub fn new(eliminate: Vec<Var>, matrix: Vec<Literal>, keep: BTreeSet<Var>) -> EliminationTask {
        EliminationTask { eliminate, matrix, keep }
    }

    /// Keeps every free variable not listed for elimination.
    pub fn from_literals(eliminate: Vec<Var>, matrix: Vec<Literal>) -> EliminationTask {
        let mut keep = BTreeSet::new();
        for l in &matrix {
            l.atom.collect_vars(&mut keep);
        }
        for v in &eliminate {
            keep.remove(v);
        }
        EliminationTask { eliminate, matrix, keep }
    }

    pub fn matrix_formula(&self) -> Formula {
        Formula::from_literals(self.matrix.iter().cloned())
    }

    pub fn formula(&self) -> Formula {
        Formula::exists(self.eliminate.clone(), self.matrix_formula())
    }

    fn check(&self) -> Result<(), QeError> {
        if let Some(v) = self.eliminate.iter().find(|v| self.keep.contains(*v)) {
            return Err(QeError::Unsupported(format!("{} is both kept and eliminated", v)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverResult {
    pub formula: Formula,
    pub residual_terms: Vec<Term>,
}

impl CoverResult {
    fn from_disjuncts(ds: Vec<Formula>) -> CoverResult {
        let formula = Formula::or(ds);
        let residual_terms = tame::app_terms(&formula).into_iter().collect();
        CoverResult { formula, residual_terms }
    }
}

fn depth_bound(functions: usize, keep: usize, lits: &[Literal]) -> usize {
    let d = lits.iter().map(|l| l.atom.depth()).max().unwrap_or(0);
    functions * keep.max(1) + d + 1
}

/// Exact projection of a conjunction of linear literals.
pub fn fm_eliminate(task: &EliminationTask) -> Result<Formula, QeError> {
    task.check()?;
    if let Some(l) = task.matrix.iter().find(|l| !l.atom.is_arith()) {
        return Err(QeError::Unsupported(format!("non-linear atom {}", l)));
    }
    if let Some(v) = task.eliminate.iter().find(|v| !v.sort.is_rat()) {
        return Err(QeError::Unsupported(format!("{} is not rational", v)));
    }
    let elim: BTreeSet<Term> = task.eliminate.iter().map(Var::term).collect();
    let mut out = Vec::new();
    for conj in split_diseqs(&task.matrix) {
        let atoms: Vec<_> = conj
            .iter()
            .filter_map(|l| match &l.atom {
                Atom::Lin(a) => Some(a.clone()),
                _ => None,
            })
            .collect();
        if let Some(proj) = fm::project(&atoms, &elim) {
            out.push(Formula::and(proj.into_iter().map(|a| Formula::lin(a.expr, a.cmp))));
        }
    }
    Ok(Formula::or(out))
}

fn split_diseqs(lits: &[Literal]) -> Vec<Vec<Literal>> {
    let f = Formula::and(lits.iter().map(|l| l.map_terms(&|t| t.clone())));
    match f.nnf() {
        Ok(n) => dnf_literals(&split_formula(&n)),
        Err(_) => Vec::new(),
    }
}

fn split_formula(f: &Formula) -> Formula {
    match f {
        Formula::Lit(l) if !l.positive => match &l.atom {
            Atom::Lin(a) => Formula::or([
                Formula::lin(a.expr.clone(), crate::logic::Cmp::Lt),
                Formula::lin(a.expr.scaled(&-crate::logic::q(1)), crate::logic::Cmp::Lt),
            ]),
            _ => f.clone(),
        },
        Formula::And(gs) => Formula::and(gs.iter().map(split_formula)),
        Formula::Or(gs) => Formula::or(gs.iter().map(split_formula)),
        _ => f.clone(),
    }
}

/// Cover for EUF with unary functions and arbitrary relations.
pub fn euf_cover(task: &EliminationTask) -> Result<Formula, QeError> {
    task.check()?;
    let mut functions = BTreeSet::new();
    for l in &task.matrix {
        if l.atom.is_arith() {
            return Err(QeError::Unsupported(format!("arithmetic atom {}", l)));
        }
        for t in l.atom.terms() {
            let mut subs = Vec::new();
            t.subterms(&mut subs);
            for s in subs {
                if let Term::App(f, args) = s {
                    if args.len() != 1 {
                        return Err(QeError::Unsupported(format!("function {} is not unary", f.name)));
                    }
                    functions.insert(f.name.clone());
                }
            }
        }
    }
    let setup = tame::Setup {
        keep: &task.keep,
        facts: &[],
        depth_bound: depth_bound(functions.len(), task.keep.len(), &task.matrix),
    };
    Ok(Formula::or(tame::cover_conjunction(&task.matrix, &setup)?))
}

/// Rational arguments make a signature non-tame for our purposes.
pub fn check_tame(sig: &Signature) -> Result<(), QeError> {
    for f in sig.functions.values() {
        if f.args.iter().any(|s| s.is_rat()) {
            return Err(QeError::NotTame(format!("function {} takes a rational argument", f.name)));
        }
    }
    Ok(())
}

/// Cover in the combined theory of `ctx`, facts included.
pub fn tame_cover(task: &EliminationTask, ctx: &TheoryContext) -> Result<CoverResult, QeError> {
    task.check()?;
    check_tame(&ctx.signature)?;
    let setup = tame::Setup {
        keep: &task.keep,
        facts: &ctx.facts,
        depth_bound: depth_bound(ctx.signature.functions.len(), task.keep.len(), &task.matrix),
    };
    Ok(CoverResult::from_disjuncts(tame::cover_conjunction(&task.matrix, &setup)?))
}

/// Cover of an arbitrary existential formula onto `keep`, one DNF disjunct at a time.
pub fn cover(f: &Formula, keep: &BTreeSet<Var>, ctx: &TheoryContext) -> Result<CoverResult, QeError> {
    check_tame(&ctx.signature)?;
    let n = f.nnf()?;
    let mut fresh = Fresh::new("q");
    let (_, matrix) = prenex(&rename_apart(&n, &mut fresh));
    let mut out = Vec::new();
    for conj in dnf_literals(&matrix) {
        let setup = tame::Setup {
            keep,
            facts: &ctx.facts,
            depth_bound: depth_bound(ctx.signature.functions.len(), keep.len(), &conj),
        };
        out.extend(tame::cover_conjunction(&conj, &setup)?);
    }
    Ok(CoverResult::from_disjuncts(out))
}

/// Drops unsatisfiable and subsumed disjuncts.
pub fn simplify(f: &Formula, gw: &mut Gateway) -> Result<Formula, SmtError> {
    let disjuncts: Vec<Formula> = match f {
        Formula::Or(gs) => gs.clone(),
        g => vec![g.clone()],
    };
    let mut live = Vec::new();
    for d in disjuncts {
        if gw.is_sat(&d)? {
            live.push(d);
        }
    }
    let mut keep = vec![true; live.len()];
    for i in 0..live.len() {
        for j in 0..live.len() {
            if i != j && keep[j] && keep[i] && gw.implies(&live[i], &live[j])? {
                keep[i] = false;
            }
        }
    }
    Ok(Formula::or(live.into_iter().zip(keep).filter(|(_, k)| *k).map(|(d, _)| d)))
}
