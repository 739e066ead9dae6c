use std::collections::{BTreeMap, BTreeSet};

use super::{Annot, Constraint, Formula, Literal, LogicError, Term, Var};

/// `v ↦ v_i` for every free plain variable.
pub fn rename_to_index(f: &Formula, i: u32) -> Result<Formula, LogicError> {
    check_annots(f, |a| matches!(a, Annot::Plain | Annot::Index(_)), "read/write variable in a state formula")?;
    let bound = bound_vars(f);
    Ok(f.subst(&|v| match v.annot {
        Annot::Plain if !bound.contains(v) => Some(v.at(i).term()),
        _ => None,
    }))
}

/// `v_i ↦ v` for every free variable indexed `i`.
pub fn rename_from_index(f: &Formula, i: u32) -> Formula {
    f.subst(&|v| match v.annot {
        Annot::Index(j) if j == i => Some(v.plain().term()),
        _ => None,
    })
}

/// `v^r ↦ v_i`, `v^w ↦ v_j`.
pub fn instantiate_transition(t: &Formula, i: u32, j: u32) -> Result<Formula, LogicError> {
    let bound = bound_vars(t);
    for v in t.free_vars() {
        if v.annot == Annot::Plain && !bound.contains(&v) {
            return Err(LogicError::Malformed(format!("unannotated variable {} in a guard", v)));
        }
    }
    Ok(t.subst(&|v| match v.annot {
        Annot::Read => Some(v.at(i).term()),
        Annot::Write => Some(v.at(j).term()),
        _ => None,
    }))
}

pub fn free_variables(f: &Formula) -> BTreeSet<Var> {
    f.free_vars()
}

fn bound_vars(f: &Formula) -> BTreeSet<Var> {
    fn go(f: &Formula, out: &mut BTreeSet<Var>) {
        match f {
            Formula::Exists(vs, g) => {
                out.extend(vs.iter().cloned());
                go(g, out);
            }
            Formula::Not(g) => go(g, out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| go(g, out)),
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    go(f, &mut out);
    out
}

fn check_annots(f: &Formula, ok: impl Fn(Annot) -> bool, what: &str) -> Result<(), LogicError> {
    match f.free_vars().into_iter().find(|v| !ok(v.annot)) {
        Some(v) => Err(LogicError::Malformed(format!("{}: {}", what, v))),
        None => Ok(()),
    }
}

/// Hands out names that cannot clash with parsed identifiers.
#[derive(Default)]
pub struct Fresh {
    next: usize,
    tag: &'static str,
}

impl Fresh {
    pub fn new(tag: &'static str) -> Fresh {
        Fresh { next: 0, tag }
    }

    pub fn var(&mut self, like: &Var) -> Var {
        let base = like.name.split('!').next().unwrap_or("u");
        let name = format!("{}!{}{}", base, self.tag, self.next);
        self.next += 1;
        Var::new(&name, like.sort.clone())
    }
}

/// Renames every binder to a fresh name so that binders become pairwise
/// distinct and disjoint from free variables.
pub fn rename_apart(f: &Formula, fresh: &mut Fresh) -> Formula {
    match f {
        Formula::Exists(vs, g) => {
            let map: BTreeMap<Var, Var> = vs.iter().map(|v| (v.clone(), fresh.var(v))).collect();
            let body = g.subst(&|v| map.get(v).map(Var::term));
            Formula::exists(map.values().cloned().collect(), rename_apart(&body, fresh))
        }
        Formula::Not(g) => Formula::not(rename_apart(g, fresh)),
        Formula::And(gs) => Formula::and(gs.iter().map(|g| rename_apart(g, fresh))),
        Formula::Or(gs) => Formula::or(gs.iter().map(|g| rename_apart(g, fresh))),
        _ => f.clone(),
    }
}

/// Pulls existential binders of an NNF formula without negated quantifiers
/// to the front. Binders must already be distinct.
pub fn prenex(f: &Formula) -> (Vec<Var>, Formula) {
    match f {
        Formula::Exists(vs, g) => {
            let (mut inner, m) = prenex(g);
            let mut all = vs.clone();
            all.append(&mut inner);
            (all, m)
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let mut vars = Vec::new();
            let mut parts = Vec::new();
            for g in gs {
                let (mut vs, m) = prenex(g);
                vars.append(&mut vs);
                parts.push(m);
            }
            let m = if matches!(f, Formula::And(_)) { Formula::and(parts) } else { Formula::or(parts) };
            (vars, m)
        }
        _ => (Vec::new(), f.clone()),
    }
}

/// Disjunctive normal form of a quantifier-free NNF formula, as literal sets.
/// Conjunctions holding complementary literals are dropped.
pub fn dnf_literals(f: &Formula) -> Vec<Vec<Literal>> {
    match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Lit(l) => vec![vec![l.clone()]],
        Formula::Or(gs) => {
            let mut out: Vec<Vec<Literal>> = Vec::new();
            for g in gs {
                for c in dnf_literals(g) {
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
            out
        }
        Formula::And(gs) => {
            let mut acc: Vec<BTreeSet<Literal>> = vec![BTreeSet::new()];
            for g in gs {
                let parts = dnf_literals(g);
                let mut next = Vec::new();
                for a in &acc {
                    for p in &parts {
                        let mut c = a.clone();
                        c.extend(p.iter().cloned());
                        if !c.iter().any(|l| c.contains(&l.negate())) && !next.contains(&c) {
                            next.push(c);
                        }
                    }
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            acc.into_iter().map(|c| c.into_iter().collect()).collect()
        }
        Formula::Not(g) => match g.nnf() {
            Ok(n) if !matches!(n, Formula::Not(_)) => dnf_literals(&n),
            _ => vec![],
        },
        Formula::Exists(_, g) => dnf_literals(g),
    }
}

/// DNF as a list of constraints whose disjunction is equivalent to `f`.
pub fn to_dnf_constraints(f: &Formula) -> Result<Vec<Constraint>, LogicError> {
    let n = f.nnf()?;
    let mut fresh = Fresh::new("d");
    let n = if has_binder_clash(&n) { rename_apart(&n, &mut fresh) } else { n };
    let (bound, matrix) = prenex(&n);
    Ok(dnf_literals(&matrix)
        .into_iter()
        .map(|body| {
            let mut fv = BTreeSet::new();
            body.iter().for_each(|l| l.atom.collect_vars(&mut fv));
            let bound = bound.iter().filter(|v| fv.contains(*v)).cloned().collect();
            Constraint::new(bound, body)
        })
        .collect())
}

fn has_binder_clash(f: &Formula) -> bool {
    let free = f.free_vars();
    let mut seen = BTreeSet::new();
    fn go(f: &Formula, free: &BTreeSet<Var>, seen: &mut BTreeSet<Var>) -> bool {
        match f {
            Formula::Exists(vs, g) => {
                for v in vs {
                    if free.contains(v) || !seen.insert(v.clone()) {
                        return true;
                    }
                }
                go(g, free, seen)
            }
            Formula::Not(g) => go(g, free, seen),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().any(|g| go(g, free, seen)),
            _ => false,
        }
    }
    go(f, &free, &mut seen)
}

/// Replaces subterms by terms, bottom-up through linear atoms as well.
pub fn replace_terms(f: &Formula, map: &BTreeMap<Term, Term>) -> Formula {
    f.map_terms(&|t| t.replace(&|s| map.get(s).cloned()))
}
