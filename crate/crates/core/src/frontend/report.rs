use std::collections::BTreeMap;

use serde::Serialize;

use super::print_property;
use crate::dmt::{Dmt, Run};
use crate::ltlf::{build_nfa, simplify_nfa, Property, PropertyNfa};
use crate::product::{expand, ExpandOptions, Outcome, ProductError, ProductStats, Verdict};
use crate::smt::{Gateway, SolverConfig, SolverStats, Value};

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub expand: ExpandOptions,
    pub solver: SolverConfig,
}

/// Everything one verification produced, including the automaton it ran on.
pub struct VerifyOutcome {
    pub nfa: PropertyNfa,
    pub verdict: Verdict,
    /// All solver calls, automaton construction included.
    pub smt: SolverStats,
    pub backend: String,
}

/// Builds the property automaton and explores the product.
pub fn verify(d: &Dmt, prop: &Property, opts: &VerifyOptions) -> Result<VerifyOutcome, ProductError> {
    let mut gw = Gateway::new(d.ctx.clone(), &opts.solver);
    gw.set_phase("nfa");
    let nfa = simplify_nfa(&build_nfa(prop, &mut gw)?);
    let verdict = expand(d, &nfa, &mut gw, &opts.expand)?;
    Ok(VerifyOutcome { nfa, verdict, smt: gw.stats(), backend: gw.backend_name() })
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    /// `None` for the initial state.
    pub transition: Option<String>,
    pub assignment: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionEntry {
    pub args: Vec<Value>,
    pub value: Value,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ModelFacts {
    pub relations: BTreeMap<String, Vec<Vec<Value>>>,
    pub functions: BTreeMap<String, Vec<FunctionEntry>>,
    pub constants: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportStats {
    #[serde(flatten)]
    pub product: ProductStats,
    pub solver: String,
}

/// The machine-readable verdict written by `--json`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerdictReport {
    pub outcome: Outcome,
    pub property: String,
    pub trace: Option<Vec<TraceStep>>,
    pub model_facts: Option<ModelFacts>,
    pub stats: ReportStats,
    pub diagnostic: Option<String>,
}

fn trace(run: &Run) -> Vec<TraceStep> {
    run.states
        .iter()
        .enumerate()
        .map(|(i, s)| TraceStep {
            transition: i.checked_sub(1).map(|k| run.transitions[k].clone()),
            assignment: s.iter().map(|(v, x)| (v.name.to_string(), x.clone())).collect(),
        })
        .collect()
}

fn facts(run: &Run) -> ModelFacts {
    let m = &run.model;
    ModelFacts {
        relations: m.relations.iter().map(|(r, ts)| (r.to_string(), ts.iter().cloned().collect())).collect(),
        functions: m
            .functions
            .iter()
            .map(|(f, tab)| {
                (f.to_string(), tab.iter().map(|(a, v)| FunctionEntry { args: a.clone(), value: v.clone() }).collect())
            })
            .collect(),
        constants: m.constants.iter().map(|(c, v)| (c.to_string(), v.clone())).collect(),
    }
}

impl VerdictReport {
    pub fn new(out: &VerifyOutcome) -> VerdictReport {
        let v = &out.verdict;
        let mut product = v.stats.clone();
        product.smt = out.smt.clone();
        VerdictReport {
            outcome: v.outcome,
            property: print_property(&out.nfa.property),
            trace: v.witness.as_ref().map(trace),
            model_facts: v.witness.as_ref().map(facts),
            stats: ReportStats { product, solver: out.backend.clone() },
            diagnostic: v.diagnostic.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
