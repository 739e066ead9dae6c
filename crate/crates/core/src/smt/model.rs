use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::logic::{q_to_string, Q, Sort, Var};

/// Value of a term in a model: an opaque element label or an exact rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Elem(Arc<str>),
    Rat(Q),
}

impl Value {
    pub fn elem(label: &str) -> Value {
        Value::Elem(label.into())
    }

    pub fn as_rat(&self) -> Option<&Q> {
        match self {
            Value::Rat(q) => Some(q),
            Value::Elem(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Elem(l) => f.write_str(l),
            Value::Rat(q) => f.write_str(&q_to_string(q)),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The part of a model needed to evaluate the atoms of a query.
/// Relation tuples not listed are false.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModelFragment {
    pub constants: BTreeMap<Arc<str>, Value>,
    pub variables: BTreeMap<Var, Value>,
    pub relations: BTreeMap<Arc<str>, BTreeSet<Vec<Value>>>,
    pub functions: BTreeMap<Arc<str>, BTreeMap<Vec<Value>, Value>>,
    pub universe: BTreeMap<Sort, BTreeSet<Value>>,
}

impl ModelFragment {
    pub fn note(&mut self, sort: &Sort, v: &Value) {
        self.universe.entry(sort.clone()).or_default().insert(v.clone());
    }

    pub fn holds(&self, rel: &str, tuple: &[Value]) -> bool {
        self.relations.get(rel).is_some_and(|s| s.contains(tuple))
    }
}
