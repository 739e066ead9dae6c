use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write;

use crate::logic::Formula;
use crate::smt::{Gateway, SmtError};

use super::{Ltl, Property};

/// A symbol of the extended alphabet: constraint ids plus the λ markers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeltaSymbol {
    pub constraints: BTreeSet<usize>,
    pub last: bool,
    pub not_last: bool,
}

impl DeltaSymbol {
    fn of(cs: impl IntoIterator<Item = usize>) -> DeltaSymbol {
        DeltaSymbol { constraints: cs.into_iter().collect(), ..DeltaSymbol::default() }
    }

    fn last(v: bool) -> DeltaSymbol {
        DeltaSymbol { constraints: BTreeSet::new(), last: v, not_last: !v }
    }

    fn union(&self, o: &DeltaSymbol) -> DeltaSymbol {
        DeltaSymbol {
            constraints: self.constraints.union(&o.constraints).copied().collect(),
            last: self.last || o.last,
            not_last: self.not_last || o.not_last,
        }
    }
}

type Tuples = BTreeSet<(Ltl, DeltaSymbol)>;

struct Delta<'a> {
    prop: &'a Property,
    gw: &'a mut Gateway,
    memo: BTreeMap<BTreeSet<usize>, bool>,
}

impl Delta<'_> {
    fn satisfiable(&mut self, s: &DeltaSymbol) -> Result<bool, SmtError> {
        if s.last && s.not_last {
            return Ok(false);
        }
        if s.constraints.is_empty() {
            return Ok(true);
        }
        if let Some(&b) = self.memo.get(&s.constraints) {
            return Ok(b);
        }
        let f = Formula::and(s.constraints.iter().map(|&i| self.prop.leaves[i].constraint.formula()));
        let b = self.gw.is_sat(&f)?;
        self.memo.insert(s.constraints.clone(), b);
        Ok(b)
    }

    fn combine(&mut self, r1: &Tuples, r2: &Tuples, conj: bool) -> Result<Tuples, SmtError> {
        let mut out = Tuples::new();
        for (p1, s1) in r1 {
            for (p2, s2) in r2 {
                let s = s1.union(s2);
                if !self.satisfiable(&s)? {
                    continue;
                }
                let p = if conj { Ltl::and([p1.clone(), p2.clone()]) } else { Ltl::or([p1.clone(), p2.clone()]) };
                out.insert((p, s));
            }
        }
        Ok(out)
    }

    fn next(p: &Ltl) -> Tuples {
        [(p.clone(), DeltaSymbol::last(false)), (Ltl::False, DeltaSymbol::last(true))].into_iter().collect()
    }

    fn run(&mut self, q: &Ltl) -> Result<Tuples, SmtError> {
        Ok(match q {
            Ltl::True => [(Ltl::True, DeltaSymbol::default())].into_iter().collect(),
            Ltl::False => [(Ltl::False, DeltaSymbol::default())].into_iter().collect(),
            Ltl::Atom(i) => self.leaf_conjunction(&[*i])?,
            Ltl::And(xs) if xs.iter().all(|x| matches!(x, Ltl::Atom(_))) => {
                let ids: Vec<usize> = xs.iter().filter_map(|x| if let Ltl::Atom(i) = x { Some(*i) } else { None }).collect();
                self.leaf_conjunction(&ids)?
            }
            Ltl::And(xs) | Ltl::Or(xs) => {
                let conj = matches!(q, Ltl::And(_));
                let mut acc = self.run(&xs[0])?;
                for x in &xs[1..] {
                    let r = self.run(x)?;
                    acc = self.combine(&acc, &r, conj)?;
                }
                acc
            }
            Ltl::Next(p) => Delta::next(p),
            Ltl::Globally(p) => {
                let inner = self.run(p)?;
                let lam: Tuples =
                    [(Ltl::True, DeltaSymbol::last(true)), (Ltl::False, DeltaSymbol::last(false))].into_iter().collect();
                let step = self.combine(&Delta::next(q), &lam, false)?;
                self.combine(&inner, &step, true)?
            }
            Ltl::Until(a, b) => {
                let rb = self.run(b)?;
                let ra = self.run(a)?;
                let step = self.combine(&ra, &Delta::next(q), true)?;
                self.combine(&rb, &step, false)?
            }
        })
    }

    /// A conjunction of leaves is consumed in one step: all of them now, or ⊥.
    fn leaf_conjunction(&mut self, ids: &[usize]) -> Result<Tuples, SmtError> {
        let mut out = Tuples::new();
        let s = DeltaSymbol::of(ids.iter().copied());
        if self.satisfiable(&s)? {
            out.insert((Ltl::True, s));
        }
        out.insert((Ltl::False, DeltaSymbol::default()));
        Ok(out)
    }
}

/// The successor relation of a property state, λ markers included.
pub fn delta(q: &Ltl, prop: &Property, gw: &mut Gateway) -> Result<Vec<(Ltl, DeltaSymbol)>, SmtError> {
    let mut d = Delta { prop, gw, memo: BTreeMap::new() };
    Ok(d.run(q)?.into_iter().collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NfaState {
    Prop(Ltl),
    /// The extra final state reached on the last symbol.
    End,
    /// `⊤` reached by a step that requires a further position; not final.
    Step,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NfaEdge {
    pub from: usize,
    pub symbol: BTreeSet<usize>,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyNfa {
    pub property: Property,
    pub states: Vec<NfaState>,
    pub initial: usize,
    pub finals: BTreeSet<usize>,
    pub edges: Vec<NfaEdge>,
}

impl PropertyNfa {
    pub fn is_final(&self, q: usize) -> bool {
        self.finals.contains(&q)
    }

    pub fn outgoing(&self, q: usize) -> impl Iterator<Item = &NfaEdge> {
        self.edges.iter().filter(move |e| e.from == q)
    }

    pub fn state_label(&self, q: usize) -> String {
        match &self.states[q] {
            NfaState::Prop(p) => self.property.show(p),
            NfaState::End => "q_e".into(),
            NfaState::Step => "X true".into(),
        }
    }

    pub fn symbol_label(&self, s: &BTreeSet<usize>) -> String {
        self.property.show_symbol(s)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph nfa {\n  rankdir=LR;\n  node [shape=box, style=rounded];\n");
        out.push_str("  start [shape=point];\n");
        for q in 0..self.states.len() {
            let shape = if self.is_final(q) { ", peripheries=2" } else { "" };
            let _ = writeln!(out, "  q{} [label={}{}];", q, dot_quote(&self.state_label(q)), shape);
        }
        let _ = writeln!(out, "  start -> q{};", self.initial);
        for e in &self.edges {
            let _ = writeln!(out, "  q{} -> q{} [label={}];", e.from, e.to, dot_quote(&self.symbol_label(&e.symbol)));
        }
        out.push_str("}\n");
        out
    }
}

pub fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Least fixpoint of δ from the property, λ stripped.
pub fn build_nfa(prop: &Property, gw: &mut Gateway) -> Result<PropertyNfa, SmtError> {
    let mut states: Vec<NfaState> = Vec::new();
    let mut index: BTreeMap<NfaState, usize> = BTreeMap::new();
    let mut intern = |s: NfaState, states: &mut Vec<NfaState>, queue: &mut VecDeque<usize>| -> usize {
        *index.entry(s.clone()).or_insert_with(|| {
            states.push(s);
            queue.push_back(states.len() - 1);
            states.len() - 1
        })
    };
    let mut queue = VecDeque::new();
    let initial = intern(NfaState::Prop(prop.root.clone()), &mut states, &mut queue);
    let top = intern(NfaState::Prop(Ltl::True), &mut states, &mut queue);
    let end = intern(NfaState::End, &mut states, &mut queue);
    let mut edges = BTreeSet::new();
    let mut d = Delta { prop, gw, memo: BTreeMap::new() };
    while let Some(q) = queue.pop_front() {
        let p = match states[q].clone() {
            NfaState::Prop(p) => p,
            NfaState::Step => {
                edges.insert(NfaEdge { from: q, symbol: BTreeSet::new(), to: top });
                continue;
            }
            NfaState::End => continue,
        };
        for (succ, sym) in d.run(&p)? {
            if !sym.last {
                let target = if sym.not_last && succ == Ltl::True { NfaState::Step } else { NfaState::Prop(succ) };
                let to = intern(target, &mut states, &mut queue);
                edges.insert(NfaEdge { from: q, symbol: sym.constraints, to });
            } else if succ == Ltl::True {
                edges.insert(NfaEdge { from: q, symbol: sym.constraints, to: end });
            }
        }
    }
    Ok(PropertyNfa {
        property: prop.clone(),
        states,
        initial,
        finals: [top, end].into_iter().collect(),
        edges: edges.into_iter().collect(),
    })
}

/// Drops dominated edges, the ⊥ sink and every state that cannot reach a final state.
pub fn simplify_nfa(n: &PropertyNfa) -> PropertyNfa {
    let top = n.states.iter().position(|s| *s == NfaState::Prop(Ltl::True));
    let weaker: BTreeSet<usize> =
        n.states.iter().enumerate().filter(|(_, s)| matches!(s, NfaState::End | NfaState::Step)).map(|(i, _)| i).collect();
    let is_end = |q: usize| n.states[q] == NfaState::End;
    let is_step = |q: usize| n.states[q] == NfaState::Step;
    // ending now or continuing: together that is ⊤
    let mut all: BTreeSet<NfaEdge> = n.edges.iter().cloned().collect();
    if let Some(top) = top {
        for a in n.edges.iter().filter(|e| is_end(e.to)) {
            for b in n.edges.iter().filter(|e| e.from == a.from && is_step(e.to)) {
                all.insert(NfaEdge { from: a.from, symbol: a.symbol.union(&b.symbol).copied().collect(), to: top });
            }
        }
    }
    let mut edges: Vec<NfaEdge> = Vec::new();
    for e in &all {
        let dominated = all.iter().any(|o| {
            o.from == e.from
                && o.symbol.is_subset(&e.symbol)
                && (o.to == e.to && o.symbol != e.symbol || weaker.contains(&e.to) && Some(o.to) == top)
        });
        if !dominated {
            edges.push(e.clone());
        }
    }
    // co-reachability
    let mut useful: BTreeSet<usize> = n.finals.clone();
    loop {
        let before = useful.len();
        for e in &edges {
            if useful.contains(&e.to) {
                useful.insert(e.from);
            }
        }
        if useful.len() == before {
            break;
        }
    }
    useful.insert(n.initial);
    edges.retain(|e| useful.contains(&e.from) && useful.contains(&e.to));
    // reachability
    let mut reach: BTreeSet<usize> = [n.initial].into_iter().collect();
    let mut stack = vec![n.initial];
    while let Some(q) = stack.pop() {
        for e in edges.iter().filter(|e| e.from == q) {
            if reach.insert(e.to) {
                stack.push(e.to);
            }
        }
    }
    let keep: Vec<usize> = (0..n.states.len()).filter(|q| reach.contains(q)).collect();
    let remap: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    PropertyNfa {
        property: n.property.clone(),
        states: keep.iter().map(|&q| n.states[q].clone()).collect(),
        initial: remap[&n.initial],
        finals: n.finals.iter().filter_map(|q| remap.get(q).copied()).collect(),
        edges: edges
            .into_iter()
            .filter(|e| reach.contains(&e.from))
            .map(|e| NfaEdge { from: remap[&e.from], symbol: e.symbol, to: remap[&e.to] })
            .collect(),
    }
}

/// An edge labelled ς fires on a word symbol S when ς ⊆ S.
pub fn nfa_accepts(n: &PropertyNfa, w: &[BTreeSet<usize>]) -> bool {
    let mut cur: BTreeSet<usize> = [n.initial].into_iter().collect();
    for s in w {
        cur = n.edges.iter().filter(|e| cur.contains(&e.from) && e.symbol.is_subset(s)).map(|e| e.to).collect();
        if cur.is_empty() {
            return false;
        }
    }
    cur.iter().any(|q| n.is_final(*q))
}
