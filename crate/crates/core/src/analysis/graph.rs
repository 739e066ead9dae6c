use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dmt::{Dmt, DmtError};
use crate::logic::{Annot, Atom, Cmp, Constraint, Literal, Term, Var};
use crate::ltlf::{dot_quote, Property};

/// `v_i`: index into `Dmt::variables` and a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Node {
    pub var: usize,
    pub step: usize,
}

/// `G_{σ,w}` with its equality subgraph `E_{σ,w}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComputationGraph {
    pub names: Vec<String>,
    pub steps: usize,
    pub edges: BTreeSet<(Node, Node)>,
    pub equality: BTreeSet<(Node, Node)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Local {
    Node(Node),
    Bound(usize),
}

fn ordered(a: Node, b: Node) -> (Node, Node) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn term_locals(t: &Term, map: &dyn Fn(&Var) -> Option<Local>, out: &mut BTreeSet<Local>) {
    for v in t.vars() {
        if let Some(l) = map(&v) {
            out.insert(l);
        }
    }
}

fn is_var_term(t: &Term) -> bool {
    matches!(t, Term::Var(_))
}

/// Pairs linked by one literal, and whether the literal is a variable equality.
fn literal_links(l: &Literal, map: &dyn Fn(&Var) -> Option<Local>) -> (Vec<(Local, Local)>, bool) {
    let mut links = Vec::new();
    let all_pairs = |set: &BTreeSet<Local>, links: &mut Vec<(Local, Local)>| {
        let v: Vec<Local> = set.iter().copied().collect();
        for (i, a) in v.iter().enumerate() {
            for b in &v[i + 1..] {
                links.push((*a, *b));
            }
        }
    };
    match &l.atom {
        Atom::Eq(a, b) => {
            let mut s = BTreeSet::new();
            term_locals(a, map, &mut s);
            term_locals(b, map, &mut s);
            all_pairs(&s, &mut links);
            (links, l.positive && is_var_term(a) && is_var_term(b))
        }
        Atom::Rel(_, args) => {
            let mut s = BTreeSet::new();
            args.iter().for_each(|t| term_locals(t, map, &mut s));
            all_pairs(&s, &mut links);
            (links, false)
        }
        Atom::Lin(lin) => {
            let mut pos = BTreeSet::new();
            let mut neg = BTreeSet::new();
            for (t, c) in &lin.expr.coeffs {
                let mut s = BTreeSet::new();
                term_locals(t, map, &mut s);
                all_pairs(&s, &mut links);
                if c > &num_traits::Zero::zero() {
                    pos.extend(s);
                } else {
                    neg.extend(s);
                }
            }
            for a in &pos {
                for b in &neg {
                    if a != b {
                        links.push((*a, *b));
                    }
                }
            }
            let coeffs: Vec<_> = lin.expr.coeffs.iter().collect();
            let eq = l.positive
                && lin.cmp == Cmp::Eq
                && num_traits::Zero::is_zero(&lin.expr.constant)
                && coeffs.len() == 2
                && coeffs.iter().all(|(t, _)| is_var_term(t))
                && (coeffs[0].1 + coeffs[1].1) == num_traits::Zero::zero();
            (links, eq)
        }
    }
}

/// Closes the links of one constraint instance through its bound variables.
fn close(links: &[(Local, Local)]) -> BTreeSet<(Node, Node)> {
    let mut adj: BTreeMap<Local, BTreeSet<Local>> = BTreeMap::new();
    for (a, b) in links {
        adj.entry(*a).or_default().insert(*b);
        adj.entry(*b).or_default().insert(*a);
    }
    let mut out = BTreeSet::new();
    for start in adj.keys() {
        let Local::Node(s) = start else { continue };
        let mut seen = BTreeSet::from([*start]);
        let mut stack = vec![*start];
        while let Some(x) = stack.pop() {
            for y in &adj[&x] {
                if !seen.insert(*y) {
                    continue;
                }
                match y {
                    Local::Node(n) => {
                        if n != s {
                            out.insert(ordered(*s, *n));
                        }
                    }
                    Local::Bound(_) => stack.push(*y),
                }
            }
        }
    }
    out
}

impl ComputationGraph {
    /// `σ` by transition names, `word[i]` as leaf indices of `prop` holding at step `i`.
    pub fn build(d: &Dmt, sigma: &[&str], prop: Option<&Property>, word: &[BTreeSet<usize>]) -> Result<ComputationGraph, DmtError> {
        if !word.is_empty() && word.len() != sigma.len() + 1 {
            return Err(DmtError::Length { word: word.len(), steps: sigma.len(), needed: sigma.len() + 1 });
        }
        let index: BTreeMap<Var, usize> = d.variables.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let mut g = ComputationGraph {
            names: d.variables.iter().map(|v| v.name.to_string()).collect(),
            steps: sigma.len(),
            edges: BTreeSet::new(),
            equality: BTreeSet::new(),
        };
        let mut add = |c: &Constraint, pre: usize, post: usize| {
            let map = |v: &Var| -> Option<Local> {
                if let Some(i) = c.bound.iter().position(|b| b == v) {
                    return Some(Local::Bound(i));
                }
                let var = *index.get(&v.plain())?;
                let step = match v.annot {
                    Annot::Read => pre,
                    Annot::Write | Annot::Plain => post,
                    Annot::Index(i) => i as usize,
                };
                Some(Local::Node(Node { var, step }))
            };
            let mut all = Vec::new();
            let mut eqs = Vec::new();
            for l in &c.body {
                let (links, eq) = literal_links(l, &map);
                if eq {
                    eqs.extend(links.iter().copied());
                }
                all.extend(links);
            }
            g.edges.extend(close(&all));
            g.equality.extend(close(&eqs));
        };
        for (i, name) in sigma.iter().enumerate() {
            let t = d.transition(name)?;
            add(&t.guard, i, i + 1);
        }
        if let Some(p) = prop {
            for (i, sym) in word.iter().enumerate() {
                for &k in sym {
                    add(&p.leaves[k].constraint, i, i);
                }
            }
        }
        for (i, name) in sigma.iter().enumerate() {
            let w = d.transition(name)?.writes();
            for (k, v) in d.variables.iter().enumerate() {
                if !w.contains(v) {
                    let e = (Node { var: k, step: i }, Node { var: k, step: i + 1 });
                    g.edges.insert(e);
                    g.equality.insert(e);
                }
            }
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.names.len() * (self.steps + 1)
    }

    fn id(&self, n: Node) -> usize {
        n.step * self.names.len() + n.var
    }

    fn node(&self, id: usize) -> Node {
        Node { var: id % self.names.len(), step: id / self.names.len() }
    }

    pub fn label(&self, n: Node) -> String {
        format!("{}{}", self.names[n.var], n.step)
    }

    /// `[G]`: equality classes as nodes; each class is named by its least member.
    pub fn collapsed(&self) -> CollapsedGraph {
        let n = self.node_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for (a, b) in &self.equality {
            let (ra, rb) = (find(&mut parent, self.id(*a)), find(&mut parent, self.id(*b)));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let reps: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        let mut classes: BTreeMap<usize, usize> = BTreeMap::new();
        for &r in &reps {
            let k = classes.len();
            classes.entry(r).or_insert(k);
        }
        let members: Vec<Node> = classes.keys().map(|&r| self.node(r)).collect();
        let mut adj = vec![BTreeSet::new(); classes.len()];
        for (a, b) in &self.edges {
            let (x, y) = (classes[&reps[self.id(*a)]], classes[&reps[self.id(*b)]]);
            if x != y {
                adj[x].insert(y);
                adj[y].insert(x);
            }
        }
        CollapsedGraph { labels: members.iter().map(|m| self.label(*m)).collect(), adj }
    }

    /// Uncollapsed graph viewed as a collapsed one with singleton classes.
    pub fn uncollapsed(&self) -> CollapsedGraph {
        let n = self.node_count();
        let mut adj = vec![BTreeSet::new(); n];
        for (a, b) in &self.edges {
            adj[self.id(*a)].insert(self.id(*b));
            adj[self.id(*b)].insert(self.id(*a));
        }
        CollapsedGraph { labels: (0..n).map(|i| self.label(self.node(i))).collect(), adj }
    }

    pub fn longest_path(&self) -> usize {
        let c = self.collapsed();
        c.longest_path(usize::MAX).0
    }

    /// Equality edges dotted, the rest solid; nodes laid out per step.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph computation {\n  rankdir=LR;\n  node [shape=point];\n");
        for s in 0..=self.steps {
            out.push_str("  { rank=same;");
            for v in 0..self.names.len() {
                let n = Node { var: v, step: s };
                out.push_str(&format!(" {} [xlabel={}];", dot_quote(&self.label(n)), dot_quote(&self.label(n))));
            }
            out.push_str(" }\n");
        }
        for (a, b) in &self.edges {
            let style = if self.equality.contains(&(*a, *b)) { " [style=dotted]" } else { "" };
            out.push_str(&format!("  {} -- {}{};\n", dot_quote(&self.label(*a)), dot_quote(&self.label(*b)), style));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapsedGraph {
    pub labels: Vec<String>,
    pub adj: Vec<BTreeSet<usize>>,
}

impl CollapsedGraph {
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    /// Longest simple path, in edges, searched up to `cap`; returns the path's labels.
    pub fn longest_path(&self, cap: usize) -> (usize, Vec<String>) {
        let n = self.adj.len();
        let mut best: Vec<usize> = Vec::new();
        let mut on = vec![false; n];
        let mut path = Vec::new();
        fn dfs(g: &CollapsedGraph, x: usize, on: &mut [bool], path: &mut Vec<usize>, best: &mut Vec<usize>, cap: usize) -> bool {
            on[x] = true;
            path.push(x);
            if path.len() > best.len() {
                *best = path.clone();
            }
            if best.len().saturating_sub(1) >= cap {
                return true;
            }
            for &y in &g.adj[x] {
                if !on[y] && dfs(g, y, on, path, best, cap) {
                    return true;
                }
            }
            path.pop();
            on[x] = false;
            false
        }
        for s in 0..n {
            if self.adj[s].is_empty() {
                continue;
            }
            if dfs(self, s, &mut on, &mut path, &mut best, cap) {
                break;
            }
        }
        let len = best.len().saturating_sub(1);
        (len, best.into_iter().map(|i| self.labels[i].clone()).collect())
    }
}
