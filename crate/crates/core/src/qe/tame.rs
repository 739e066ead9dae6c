//! Covers for EUF with relations combined with LRA over a leaf `rat` sort.
//!
//! Each conjunction is purified into a congruence closure plus linear atoms.
//! Classes that contain a term over the kept variables are *named*; everything
//! else is projected away. Unnamed rationals that feed relations are either
//! pinned to a named value or shown to range over an open interval.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};

use crate::logic::linear::Normalized;
use crate::logic::{Atom, Cmp, Formula, LinAtom, LinExpr, Literal, Q, Term, Var};
use crate::smt::cc::{Cc, NodeId, NodeKind};
use crate::smt::simplex;

use super::{fm, QeError};

pub(crate) struct Setup<'a> {
    pub keep: &'a BTreeSet<Var>,
    pub facts: &'a [Literal],
    pub depth_bound: usize,
}

#[derive(Clone, Default)]
struct Branch {
    lits: Vec<Literal>,
    pins: Vec<(Term, Term)>,
    free: BTreeSet<Term>,
    arranged: BTreeSet<(Term, Term)>,
}

/// Cover of `∃(vars outside keep). ⋀ lits` as a disjunction of conjunctions.
pub(crate) fn cover_conjunction(lits: &[Literal], setup: &Setup) -> Result<Vec<Formula>, QeError> {
    let mut all: Vec<Literal> = Vec::new();
    for l in lits.iter().chain(setup.facts) {
        match l.map_terms(&|t| t.clone()) {
            Formula::True => {}
            Formula::False => return Ok(Vec::new()),
            Formula::Lit(l) => all.push(l),
            other => return Err(QeError::Unsupported(format!("literal {}", other))),
        }
    }
    let mut out = Vec::new();
    let mut stack = vec![Branch { lits: all, ..Branch::default() }];
    while let Some(b) = stack.pop() {
        match step(b, setup)? {
            Step::Done(f) => out.push(f),
            Step::Dead => {}
            Step::Split(bs) => stack.extend(bs.into_iter().rev()),
        }
    }
    Ok(out)
}

enum Step {
    Dead,
    Done(Formula),
    Split(Vec<Branch>),
}

struct Closure {
    cc: Cc,
    lin: Vec<LinAtom>,
    diseqs: Vec<(NodeId, NodeId)>,
    names: HashMap<NodeId, Term>,
}

fn push_lin(lin: &mut Vec<LinAtom>, e: LinExpr, cmp: Cmp) -> bool {
    match LinAtom::normalize(e, cmp) {
        Normalized::Const(b) => b,
        Normalized::Atom(a) => {
            if !lin.contains(&a) {
                lin.push(a);
            }
            true
        }
    }
}

fn lit_lin(e: LinExpr, cmp: Cmp) -> Option<Literal> {
    match Formula::lin(e, cmp) {
        Formula::Lit(l) => Some(l),
        _ => None,
    }
}

fn key(t: &Term) -> (usize, Term) {
    (t.depth(), t.clone())
}

fn step(mut b: Branch, setup: &Setup) -> Result<Step, QeError> {
    // split rational disequalities
    if let Some(i) = b.lits.iter().position(|l| !l.positive && matches!(&l.atom, Atom::Lin(a) if a.cmp == Cmp::Eq)) {
        let l = b.lits.remove(i);
        let Atom::Lin(a) = &l.atom else { unreachable!() };
        let mut out = Vec::new();
        for s in [Q::one(), -Q::one()] {
            let mut nb = b.clone();
            match LinAtom::normalize(a.expr.scaled(&s), Cmp::Lt) {
                Normalized::Const(false) => continue,
                Normalized::Const(true) => {}
                Normalized::Atom(x) => nb.lits.push(Literal::pos(Atom::Lin(x))),
            }
            out.push(nb);
        }
        return Ok(Step::Split(out));
    }
    let Some(cl) = close(&b, setup)? else { return Ok(Step::Dead) };
    if let Some(bs) = arrangement(&b, &cl) {
        return Ok(Step::Split(bs));
    }
    match pin_analysis(&b, &cl)? {
        Pin::Dead => return Ok(Step::Dead),
        Pin::Split(bs) => return Ok(Step::Split(bs)),
        Pin::Settled => {}
    }
    emit(&cl, setup).map(|f| match f {
        Some(f) => Step::Done(f),
        None => Step::Dead,
    })
}

fn close(b: &Branch, setup: &Setup) -> Result<Option<Closure>, QeError> {
    let mut cc = Cc::new();
    let mut lin: Vec<LinAtom> = Vec::new();
    let mut diseqs = Vec::new();
    for l in &b.lits {
        match &l.atom {
            Atom::Eq(x, y) => {
                let (p, q) = (cc.add_term(x), cc.add_term(y));
                if l.positive {
                    cc.merge(p, q);
                } else {
                    diseqs.push((p, q));
                }
            }
            Atom::Rel(r, args) => {
                let n = cc.add_rel(r, args);
                cc.merge(n, if l.positive { Cc::TRUE } else { Cc::FALSE });
            }
            Atom::Lin(a) => {
                for t in a.expr.coeffs.keys() {
                    cc.add_term(t);
                }
                if !push_lin(&mut lin, a.expr.clone(), a.cmp) {
                    return Ok(None);
                }
            }
        }
    }
    for (x, y) in &b.pins {
        let (p, q) = (cc.add_term(x), cc.add_term(y));
        cc.merge(p, q);
    }
    let shared = shared_rationals(&cc);
    let mut linked: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    loop {
        cc.close();
        if cc.inconsistent_bool() || diseqs.iter().any(|&(p, q)| cc.same(p, q)) {
            return Ok(None);
        }
        for (_, members) in cc.classes() {
            let rats: Vec<NodeId> = members.into_iter().filter(|&n| is_rat(&cc, n)).collect();
            for w in rats.windows(2) {
                if linked.insert((w[0], w[1])) {
                    let e = LinExpr::term(cc.term(w[0]).unwrap().clone())
                        .minus(&LinExpr::term(cc.term(w[1]).unwrap().clone()));
                    if !push_lin(&mut lin, e, Cmp::Eq) {
                        return Ok(None);
                    }
                }
            }
        }
        let Some(model) = simplex::solve(&lin) else { return Ok(None) };
        let val = |t: &Term| match t {
            Term::Num(q) => Some(q.clone()),
            _ => Some(model.get(t).cloned().unwrap_or_else(Q::zero)),
        };
        let mut changed = false;
        for (i, &p) in shared.iter().enumerate() {
            for &q in &shared[i + 1..] {
                if cc.same(p, q) {
                    continue;
                }
                let (tp, tq) = (cc.term(p).unwrap(), cc.term(q).unwrap());
                if val(tp) != val(tq) {
                    continue;
                }
                let e = LinExpr::term(tp.clone()).minus(&LinExpr::term(tq.clone()));
                if simplex::implies_zero(&lin, &e) {
                    cc.merge(p, q);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let names = name_classes(&cc, setup)?;
    Ok(Some(Closure { cc, lin, diseqs, names }))
}

fn is_rat(cc: &Cc, n: NodeId) -> bool {
    cc.sort(n).is_some_and(|s| s.is_rat())
}

fn shared_rationals(cc: &Cc) -> Vec<NodeId> {
    let mut out = BTreeSet::new();
    for n in 0..cc.len() {
        if let NodeKind::Fun(_, args) | NodeKind::Rel(_, args) = cc.kind(n) {
            out.extend(args.iter().copied().filter(|&a| is_rat(cc, a)));
        }
    }
    out.into_iter().collect()
}

fn candidate(cc: &Cc, names: &HashMap<NodeId, Term>, keep: &BTreeSet<Var>, n: NodeId) -> Option<Term> {
    match cc.kind(n) {
        NodeKind::Leaf(t) => match t {
            Term::Var(v) if keep.contains(v) => Some(t.clone()),
            Term::Var(_) => None,
            _ => Some(t.clone()),
        },
        NodeKind::Fun(f, args) => {
            let xs = args.iter().map(|&a| names.get(&cc.find(a)).cloned()).collect::<Option<Vec<_>>>()?;
            Some(Term::App(f.clone(), xs))
        }
        _ => None,
    }
}

fn name_classes(cc: &Cc, setup: &Setup) -> Result<HashMap<NodeId, Term>, QeError> {
    let mut names: HashMap<NodeId, Term> = HashMap::new();
    loop {
        let mut changed = false;
        for n in 0..cc.len() {
            let Some(c) = candidate(cc, &names, setup.keep, n) else { continue };
            let root = cc.find(n);
            if names.get(&root).is_none_or(|old| key(&c) < key(old)) {
                if c.depth() > setup.depth_bound {
                    return Err(QeError::DepthBound(format!(
                        "derived term {} exceeds depth {}",
                        c, setup.depth_bound
                    )));
                }
                names.insert(root, c);
                changed = true;
            }
        }
        if !changed {
            return Ok(names);
        }
    }
}

impl Closure {
    fn name(&self, n: NodeId) -> Option<&Term> {
        self.names.get(&self.cc.find(n))
    }

    /// Smallest member term, used as the placeholder of an unnamed class.
    fn canonical(&self, n: NodeId) -> Term {
        let root = self.cc.find(n);
        (0..self.cc.len())
            .filter(|&m| self.cc.find(m) == root)
            .filter_map(|m| self.cc.term(m).cloned())
            .min_by_key(key)
            .expect("class without terms")
    }

    /// Every linear leaf replaced by its class name or placeholder.
    fn mapped_lin(&self) -> (Vec<LinAtom>, BTreeSet<Term>) {
        let mut unnamed = BTreeSet::new();
        let mut out = Vec::new();
        for a in &self.lin {
            let mut e = LinExpr::constant(a.expr.constant.clone());
            for (t, c) in &a.expr.coeffs {
                let n = self.cc.node_of(t).expect("leaf registered");
                let r = match self.name(n) {
                    Some(r) => r.clone(),
                    None => {
                        let u = self.canonical(n);
                        unnamed.insert(u.clone());
                        u
                    }
                };
                e.add_term(r, c.clone());
            }
            push_lin(&mut out, e, a.cmp);
        }
        (out, unnamed)
    }

    fn rel_nodes(&self) -> (Vec<NodeId>, Vec<NodeId>) {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for n in 0..self.cc.len() {
            if let NodeKind::Rel(..) = self.cc.kind(n) {
                if self.cc.same(n, Cc::TRUE) {
                    pos.push(n);
                } else if self.cc.same(n, Cc::FALSE) {
                    neg.push(n);
                }
            }
        }
        (pos, neg)
    }
}

enum PairView {
    /// Already distinguishable without constraints on the kept variables.
    Satisfied,
    /// Needs one of these named disequalities.
    Clause(Vec<(Term, Term)>),
    /// Two unnamed rationals whose order is still open.
    Arrange(Term, Term),
}

fn view(cl: &Closure, b: &Branch, p: NodeId, n: NodeId) -> Option<PairView> {
    let (NodeKind::Rel(r1, xs), NodeKind::Rel(r2, ys)) = (cl.cc.kind(p), cl.cc.kind(n)) else { return None };
    if r1 != r2 {
        return None;
    }
    let mut clause = Vec::new();
    let mut arrange = None;
    for (&x, &y) in xs.iter().zip(ys) {
        if cl.cc.same(x, y) {
            continue;
        }
        match (cl.name(x), cl.name(y)) {
            (Some(a), Some(c)) => clause.push((a.clone(), c.clone())),
            (None, None) if is_rat(&cl.cc, x) => {
                let (a, c) = (cl.canonical(x), cl.canonical(y));
                let pair = if a < c { (a, c) } else { (c, a) };
                if b.arranged.contains(&pair) {
                    return Some(PairView::Satisfied);
                }
                arrange.get_or_insert(pair);
            }
            _ => return Some(PairView::Satisfied),
        }
    }
    Some(match arrange {
        Some((a, c)) => PairView::Arrange(a, c),
        None => PairView::Clause(clause),
    })
}

fn arrangement(b: &Branch, cl: &Closure) -> Option<Vec<Branch>> {
    let (pos, neg) = cl.rel_nodes();
    for &p in &pos {
        for &n in &neg {
            if let Some(PairView::Arrange(a, c)) = view(cl, b, p, n) {
                let mut out = Vec::new();
                let mut eq = b.clone();
                eq.pins.push((a.clone(), c.clone()));
                eq.arranged.insert((a.clone(), c.clone()));
                out.push(eq);
                for s in [Q::one(), -Q::one()] {
                    let mut nb = b.clone();
                    let e = LinExpr::term(a.clone()).minus(&LinExpr::term(c.clone())).scaled(&s);
                    nb.lits.extend(lit_lin(e, Cmp::Lt));
                    nb.arranged.insert((a.clone(), c.clone()));
                    out.push(nb);
                }
                return Some(out);
            }
        }
    }
    None
}

enum Pin {
    Dead,
    Settled,
    Split(Vec<Branch>),
}

/// A named expression that is a single term, if it is one.
fn as_leaf(e: &LinExpr) -> Option<Term> {
    if e.coeffs.is_empty() {
        return Some(Term::Num(e.constant.clone()));
    }
    if e.constant.is_zero() && e.coeffs.len() == 1 {
        let (t, c) = e.coeffs.iter().next().unwrap();
        if c.is_one() {
            return Some(t.clone());
        }
    }
    None
}

fn leaf_or_err(e: &LinExpr, what: &Term) -> Result<Term, QeError> {
    as_leaf(e).ok_or_else(|| {
        QeError::Unsupported(format!("relation argument {} is determined only by a compound expression", what))
    })
}

fn pin_analysis(b: &Branch, cl: &Closure) -> Result<Pin, QeError> {
    let cc = &cl.cc;
    let mut targets: BTreeSet<Term> = BTreeSet::new();
    for n in 0..cc.len() {
        if let NodeKind::Rel(_, args) | NodeKind::Fun(_, args) = cc.kind(n) {
            for &a in args {
                if is_rat(cc, a) && cl.name(a).is_none() {
                    let t = cl.canonical(a);
                    let root = cc.find(a);
                    let is_free = (0..cc.len())
                        .any(|m| cc.find(m) == root && cc.term(m).is_some_and(|t| b.free.contains(t)));
                    if !is_free {
                        targets.insert(t);
                    }
                }
            }
        }
    }
    let Some(e) = targets.into_iter().next() else { return Ok(Pin::Settled) };
    let (lin, mut unnamed) = cl.mapped_lin();
    unnamed.remove(&e);
    let Some(proj) = fm::project(&lin, &unnamed) else { return Ok(Pin::Dead) };
    let mut lowers: Vec<(LinExpr, bool)> = Vec::new();
    let mut uppers: Vec<(LinExpr, bool)> = Vec::new();
    for a in &proj {
        let c = a.expr.coeff(&e);
        if c.is_zero() {
            continue;
        }
        let mut rest = a.expr.clone();
        rest.coeffs.remove(&e);
        let bound = rest.scaled(&(-c.recip()));
        match a.cmp {
            Cmp::Eq => {
                let mut nb = b.clone();
                nb.pins.push((e.clone(), leaf_or_err(&bound, &e)?));
                return Ok(Pin::Split(vec![nb]));
            }
            cmp => {
                let strict = cmp == Cmp::Lt;
                if c.is_positive() {
                    uppers.push((bound, strict));
                } else {
                    lowers.push((bound, strict));
                }
            }
        }
    }
    let mut out = Vec::new();
    for (l, ls) in &lowers {
        for (h, hs) in &uppers {
            if *ls || *hs {
                continue;
            }
            let mut nb = b.clone();
            match LinAtom::normalize(l.minus(h), Cmp::Eq) {
                Normalized::Const(false) => continue,
                Normalized::Const(true) => {}
                Normalized::Atom(x) => nb.lits.push(Literal::pos(Atom::Lin(x))),
            }
            nb.pins.push((e.clone(), leaf_or_err(l, &e)?));
            out.push(nb);
        }
    }
    let mut free = b.clone();
    for (l, _) in &lowers {
        for (h, _) in &uppers {
            match LinAtom::normalize(l.minus(h), Cmp::Lt) {
                Normalized::Atom(x) => free.lits.push(Literal::pos(Atom::Lin(x))),
                Normalized::Const(true) => {}
                Normalized::Const(false) => {
                    return Ok(if out.is_empty() { Pin::Dead } else { Pin::Split(out) });
                }
            }
        }
    }
    free.free.insert(e);
    out.push(free);
    Ok(Pin::Split(out))
}

fn emit(cl: &Closure, setup: &Setup) -> Result<Option<Formula>, QeError> {
    let cc = &cl.cc;
    let mut parts: Vec<Formula> = Vec::new();
    for n in 0..cc.len() {
        match cc.kind(n) {
            NodeKind::Fun(f, args) if args.len() > 1 && args.iter().any(|&a| cl.name(a).is_none()) => {
                return Err(QeError::Unsupported(format!(
                    "function {} of arity {} applied to an eliminated value",
                    f.name,
                    args.len()
                )));
            }
            NodeKind::Leaf(_) | NodeKind::Fun(..) => {
                if let (Some(own), Some(rep)) = (candidate(cc, &cl.names, setup.keep, n), cl.name(n)) {
                    if &own != rep {
                        parts.push(Formula::eq(own, rep.clone()));
                    }
                }
            }
            NodeKind::Rel(r, args) => {
                let Some(xs) = args.iter().map(|&a| cl.name(a).cloned()).collect::<Option<Vec<_>>>() else { continue };
                if cc.same(n, Cc::TRUE) {
                    parts.push(Formula::rel(r, xs));
                } else if cc.same(n, Cc::FALSE) {
                    parts.push(Formula::not(Formula::rel(r, xs)));
                }
            }
            _ => {}
        }
    }
    for &(p, q) in &cl.diseqs {
        if let (Some(a), Some(c)) = (cl.name(p), cl.name(q)) {
            parts.push(Formula::neq(a.clone(), c.clone()));
        }
    }
    let (pos, neg) = cl.rel_nodes();
    let empty = Branch::default();
    for &p in &pos {
        for &n in &neg {
            if let Some(PairView::Clause(c)) = view(cl, &empty, p, n) {
                parts.push(Formula::or(c.into_iter().map(|(a, b)| Formula::neq(a, b))));
            }
        }
    }
    let (lin, unnamed) = cl.mapped_lin();
    let Some(proj) = fm::project(&lin, &unnamed) else { return Ok(None) };
    parts.extend(proj.into_iter().map(|a| Formula::lin(a.expr, a.cmp)));
    let facts: BTreeSet<Formula> = setup.facts.iter().cloned().map(Formula::lit).collect();
    parts.retain(|f| !facts.contains(f));
    Ok(Some(Formula::and(parts)))
}

/// `App` subterms of a formula; the residual terms of a combined cover.
pub(crate) fn app_terms(f: &Formula) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for a in f.atoms() {
        for t in a.terms() {
            let mut subs = Vec::new();
            t.subterms(&mut subs);
            out.extend(subs.into_iter().filter(|s| matches!(s, Term::App(..))));
        }
    }
    out
}
