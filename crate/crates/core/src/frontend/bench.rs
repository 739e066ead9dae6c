use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;

use super::report::{verify, VerifyOptions};
use super::{parse_property, parse_spec};
use crate::analysis::{classify, ClassifyOptions};
use crate::dmt::Dmt;
use crate::product::Outcome;

#[derive(Clone, Debug, Default)]
pub struct BenchOptions {
    pub verify: VerifyOptions,
    pub classify: ClassifyOptions,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Aggregate {
    pub total: f64,
    pub avg: f64,
    pub max: f64,
}

impl Aggregate {
    fn of(xs: &[f64]) -> Aggregate {
        if xs.is_empty() {
            return Aggregate::default();
        }
        let total: f64 = xs.iter().sum();
        Aggregate { total, avg: total / xs.len() as f64, max: xs.iter().cloned().fold(0.0, f64::max) }
    }
}

/// One bundle: a process and all properties checked against it.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub problem: String,
    pub class: String,
    /// Transitions.
    pub t: usize,
    /// Literals over all guards.
    pub d: usize,
    pub r: usize,
    pub f: usize,
    pub c: usize,
    pub properties: usize,
    pub witnesses: usize,
    pub budget: usize,
    pub time: Aggregate,
    pub smt: Aggregate,
    pub per_phase: BTreeMap<String, u64>,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

fn size(d: &Dmt) -> (usize, usize, usize, usize, usize) {
    let lits = d.transitions.iter().map(|t| t.guard.body.len()).sum();
    let s = &d.signature;
    (d.transitions.len(), lits, s.relations.len(), s.functions.len(), s.constants.len())
}

fn sorted_entries(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).into_iter().flatten().flatten().map(|e| e.path()).collect();
    v.sort();
    v
}

/// Runs one bundle directory holding `spec.dmt` and `*.ltl` files.
pub fn bench_bundle(dir: &Path, opts: &BenchOptions) -> Option<BenchRow> {
    let spec = dir.join("spec.dmt");
    if !spec.is_file() {
        return None;
    }
    let problem = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let mut row = BenchRow {
        problem,
        class: "-".into(),
        t: 0,
        d: 0,
        r: 0,
        f: 0,
        c: 0,
        properties: 0,
        witnesses: 0,
        budget: 0,
        time: Aggregate::default(),
        smt: Aggregate::default(),
        per_phase: BTreeMap::new(),
        errors: Vec::new(),
    };
    let d = match std::fs::read_to_string(&spec).map_err(|e| e.to_string()).and_then(|s| parse_spec(&s).map_err(|e| e.to_string())) {
        Ok(d) => d,
        Err(e) => {
            row.errors.push(format!("spec.dmt: {}", e));
            return Some(row);
        }
    };
    (row.t, row.d, row.r, row.f, row.c) = size(&d);
    let mut times = Vec::new();
    let mut checks = Vec::new();
    let mut classes: Vec<String> = Vec::new();
    for path in sorted_entries(dir).into_iter().filter(|p| p.extension().is_some_and(|e| e == "ltl")) {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let prop = match std::fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|s| parse_property(&s, &d.signature).map_err(|e| e.to_string()))
        {
            Ok(p) => p,
            Err(e) => {
                row.errors.push(format!("{}: {}", name, e));
                continue;
            }
        };
        match classify(&d, &prop, &opts.classify) {
            Ok(r) => {
                let l = r.class_label();
                if !classes.contains(&l) {
                    classes.push(l);
                }
            }
            Err(e) => row.errors.push(format!("{}: classify: {}", name, e)),
        }
        let start = Instant::now();
        match verify(&d, &prop, &opts.verify) {
            Ok(out) => {
                row.properties += 1;
                match out.verdict.outcome {
                    Outcome::WitnessFound => row.witnesses += 1,
                    Outcome::BudgetExceeded => row.budget += 1,
                    Outcome::NoWitness => {}
                }
                times.push(start.elapsed().as_secs_f64());
                checks.push(out.smt.checks as f64);
                for (k, p) in &out.smt.per_phase {
                    *row.per_phase.entry(k.clone()).or_default() += p.count;
                }
            }
            Err(e) => row.errors.push(format!("{}: {}", name, e)),
        }
    }
    if !classes.is_empty() {
        row.class = classes.join("/");
    }
    row.time = Aggregate::of(&times);
    row.smt = Aggregate::of(&checks);
    Some(row)
}

/// Every subdirectory of `dir` with a `spec.dmt` is a bundle.
pub fn run_bench(dir: &Path, opts: &BenchOptions) -> BenchTable {
    BenchTable { rows: sorted_entries(dir).iter().filter(|p| p.is_dir()).filter_map(|p| bench_bundle(p, opts)).collect() }
}

fn fmt_secs(s: f64) -> String {
    format!("{:.3}", Duration::from_secs_f64(s).as_secs_f64())
}

impl BenchTable {
    fn phases(&self) -> Vec<String> {
        let mut p: Vec<String> = self.rows.iter().flat_map(|r| r.per_phase.keys().cloned()).collect();
        p.sort();
        p.dedup();
        p
    }

    fn records(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let phases = self.phases();
        let mut head: Vec<String> = [
            "problem", "class", "T", "D", "R", "F", "C", "props", "wit", "budget", "time_total", "time_avg", "time_max",
            "smt_total", "smt_avg", "smt_max",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        head.extend(phases.iter().map(|p| format!("smt[{}]", p)));
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![
                    r.problem.clone(),
                    r.class.clone(),
                    r.t.to_string(),
                    r.d.to_string(),
                    r.r.to_string(),
                    r.f.to_string(),
                    r.c.to_string(),
                    r.properties.to_string(),
                    r.witnesses.to_string(),
                    r.budget.to_string(),
                    fmt_secs(r.time.total),
                    fmt_secs(r.time.avg),
                    fmt_secs(r.time.max),
                    format!("{}", r.smt.total),
                    format!("{:.1}", r.smt.avg),
                    format!("{}", r.smt.max),
                ];
                v.extend(phases.iter().map(|p| r.per_phase.get(p).copied().unwrap_or(0).to_string()));
                v
            })
            .collect();
        (head, rows)
    }

    /// Fixed-width text table; errors are listed below it.
    pub fn to_text(&self) -> String {
        let (head, rows) = self.records();
        let mut w: Vec<usize> = head.iter().map(String::len).collect();
        for r in &rows {
            for (i, c) in r.iter().enumerate() {
                w[i] = w[i].max(c.len());
            }
        }
        let line = |cells: &[String]| {
            let v: Vec<String> = cells.iter().enumerate().map(|(i, c)| format!("{:<w$}", c, w = w[i])).collect();
            v.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&head);
        for r in &rows {
            out.push_str(&line(r));
        }
        for r in &self.rows {
            for e in &r.errors {
                out.push_str(&format!("error: {}/{}\n", r.problem, e));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let (head, rows) = self.records();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&head).expect("in-memory write");
        for r in rows {
            w.write_record(&r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}
