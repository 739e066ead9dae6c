//! Randomized check of the cover property against residue constraints.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::logic::{q, CmpOp, Formula, LinExpr, Signature, Sort, Term, Var};
use crate::smt::{Gateway, SmtError};

use super::EliminationTask;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverReport {
    pub trials: usize,
    pub passed: bool,
    /// The residue on which candidate and input disagreed.
    pub failure: Option<Formula>,
}

fn pool(sig: &Signature, keep: &BTreeSet<Var>) -> BTreeMap<Sort, Vec<Term>> {
    let mut out: BTreeMap<Sort, Vec<Term>> = BTreeMap::new();
    for v in keep {
        out.entry(v.sort.clone()).or_default().push(v.term());
    }
    for c in sig.constants.values() {
        out.entry(c.sort.clone()).or_default().push(c.term());
    }
    let sorts: Vec<Sort> = out.keys().cloned().collect();
    for s in sorts {
        for i in 0..2 {
            let v = Var::new(&format!("chi!{}!{}", s, i), s.clone());
            out.entry(s.clone()).or_default().push(v.term());
        }
    }
    let mut apps = Vec::new();
    for f in sig.functions.values() {
        if let [arg] = f.args.as_slice() {
            for t in out.get(arg).into_iter().flatten() {
                if !matches!(t, Term::App(..)) {
                    apps.push((f.result.clone(), Term::App(f.clone(), vec![t.clone()])));
                }
            }
        }
    }
    for (s, t) in apps {
        out.entry(s).or_default().push(t);
    }
    out
}

fn random_literal(rng: &mut ChaCha8Rng, sig: &Signature, pool: &BTreeMap<Sort, Vec<Term>>) -> Formula {
    let sorts: Vec<&Sort> = pool.keys().collect();
    let rels: Vec<_> = sig.relations.values().filter(|r| r.args.iter().all(|s| pool.contains_key(s))).collect();
    if !rels.is_empty() && rng.gen_bool(0.4) {
        let r = rels.choose(rng).unwrap();
        let args = r.args.iter().map(|s| pool[s].choose(rng).unwrap().clone()).collect();
        let a = Formula::rel(r, args);
        return if rng.gen_bool(0.5) { a } else { Formula::not(a) };
    }
    let s = *sorts.choose(rng).unwrap();
    let x = pool[s].choose(rng).unwrap().clone();
    let y = pool[s].choose(rng).unwrap().clone();
    if s.is_rat() {
        let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge].choose(rng).unwrap();
        let rhs = if rng.gen_bool(0.3) { LinExpr::constant(q(rng.gen_range(-2..=5))) } else { LinExpr::term(y) };
        Formula::compare(LinExpr::term(x), op, rhs)
    } else if rng.gen_bool(0.5) {
        Formula::eq(x, y)
    } else {
        Formula::neq(x, y)
    }
}

/// Compares `candidate ∧ χ` with `(∃ eliminate. matrix) ∧ χ` on random residues.
pub fn cover_property_test(
    task: &EliminationTask,
    candidate: &Formula,
    trials: usize,
    seed: u64,
    gw: &mut Gateway,
) -> Result<CoverReport, SmtError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sig = gw.context().signature.clone();
    let terms = pool(&sig, &task.keep);
    let original = task.formula();
    for i in 0..trials {
        let chi = if i == 0 || terms.is_empty() {
            Formula::True
        } else {
            let n = rng.gen_range(1..=3);
            Formula::and((0..n).map(|_| random_literal(&mut rng, &sig, &terms)))
        };
        let a = gw.is_sat(&Formula::and2(candidate.clone(), chi.clone()))?;
        let b = gw.is_sat(&Formula::and2(original.clone(), chi.clone()))?;
        if a != b {
            return Ok(CoverReport { trials: i + 1, passed: false, failure: Some(chi) });
        }
    }
    Ok(CoverReport { trials, passed: true, failure: None })
}
