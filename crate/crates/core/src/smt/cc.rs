//! Congruence closure over terms, with relation atoms as Boolean nodes.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::logic::{FuncDecl, RelDecl, Sort, Term};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Leaf(Term),
    Fun(Arc<FuncDecl>, Vec<NodeId>),
    Rel(Arc<RelDecl>, Vec<NodeId>),
    True,
    False,
}

#[derive(Clone, Debug, Default)]
pub struct Cc {
    kinds: Vec<NodeKind>,
    terms: Vec<Option<Term>>,
    parent: Vec<NodeId>,
    index: HashMap<NodeKind, NodeId>,
    dirty: bool,
}

impl Cc {
    pub fn new() -> Cc {
        let mut cc = Cc::default();
        cc.intern(NodeKind::True, None);
        cc.intern(NodeKind::False, None);
        cc
    }

    pub const TRUE: NodeId = 0;
    pub const FALSE: NodeId = 1;

    fn intern(&mut self, kind: NodeKind, term: Option<Term>) -> NodeId {
        if let Some(&id) = self.index.get(&kind) {
            return id;
        }
        let id = self.kinds.len();
        self.kinds.push(kind.clone());
        self.terms.push(term);
        self.parent.push(id);
        self.index.insert(kind, id);
        self.dirty = true;
        id
    }

    pub fn add_term(&mut self, t: &Term) -> NodeId {
        match t {
            Term::App(f, args) => {
                let ids = args.iter().map(|a| self.add_term(a)).collect();
                self.intern(NodeKind::Fun(f.clone(), ids), Some(t.clone()))
            }
            _ => self.intern(NodeKind::Leaf(t.clone()), Some(t.clone())),
        }
    }

    pub fn add_rel(&mut self, r: &Arc<RelDecl>, args: &[Term]) -> NodeId {
        let ids = args.iter().map(|a| self.add_term(a)).collect();
        self.intern(NodeKind::Rel(r.clone(), ids), None)
    }

    pub fn node_of(&self, t: &Term) -> Option<NodeId> {
        match t {
            Term::App(f, args) => {
                let ids = args.iter().map(|a| self.node_of(a)).collect::<Option<Vec<_>>>()?;
                self.index.get(&NodeKind::Fun(f.clone(), ids)).copied()
            }
            _ => self.index.get(&NodeKind::Leaf(t.clone())).copied(),
        }
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.len() <= 2
    }

    pub fn kind(&self, n: NodeId) -> &NodeKind {
        &self.kinds[n]
    }

    pub fn term(&self, n: NodeId) -> Option<&Term> {
        self.terms[n].as_ref()
    }

    pub fn sort(&self, n: NodeId) -> Option<Sort> {
        self.terms[n].as_ref().map(Term::sort)
    }

    pub fn find(&self, mut n: NodeId) -> NodeId {
        while self.parent[n] != n {
            n = self.parent[n];
        }
        n
    }

    pub fn same(&self, a: NodeId, b: NodeId) -> bool {
        self.find(a) == self.find(b)
    }

    /// Returns false when the merge was a no-op.
    pub fn merge(&mut self, a: NodeId, b: NodeId) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        self.dirty = true;
        true
    }

    /// Saturates under congruence.
    pub fn close(&mut self) {
        while self.dirty {
            self.dirty = false;
            let mut sig: HashMap<(u8, String, Vec<NodeId>), NodeId> = HashMap::new();
            for n in 0..self.kinds.len() {
                let key = match &self.kinds[n] {
                    NodeKind::Fun(f, args) => (0, f.name.to_string(), args.iter().map(|&a| self.find(a)).collect()),
                    NodeKind::Rel(r, args) => (1, r.name.to_string(), args.iter().map(|&a| self.find(a)).collect()),
                    _ => continue,
                };
                match sig.get(&key) {
                    Some(&m) => {
                        if !self.same(m, n) {
                            self.merge(m, n);
                        }
                    }
                    None => {
                        sig.insert(key, n);
                    }
                }
            }
        }
    }

    pub fn classes(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut out: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for n in 0..self.kinds.len() {
            out.entry(self.find(n)).or_default().push(n);
        }
        out
    }

    pub fn inconsistent_bool(&self) -> bool {
        self.same(Cc::TRUE, Cc::FALSE)
    }
}
