use std::path::PathBuf;
use std::time::Duration;

use dmtcheck::frontend::{bench_bundle, parse_property, parse_spec, run_bench, verify, BenchOptions, Config, ConfigError, VerdictReport, VerifyOptions};
use dmtcheck::product::Outcome;
use dmtcheck::smt::{BackendChoice, SolverConfig};

const SPECS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../specs");

#[test]
fn config_keys_and_errors() {
    let c = Config::parse("# settings\nsolver = builtin\ntimeout = 2.5\nbudget_nodes = 40 # small\nbudget_time=3\njobs = 0\nk = 2\ndepth = 7\n").unwrap();
    assert_eq!(c.solver.as_deref(), Some("builtin"));
    assert_eq!(c.timeout, Duration::from_millis(2500));
    assert_eq!((c.budget_nodes, c.jobs, c.k, c.depth), (40, 1, 2, 7));
    assert_eq!(c.budget_time, Duration::from_secs(3));
    assert_eq!(c.solver_config(), SolverConfig { backend: BackendChoice::Builtin, timeout: Duration::from_millis(2500) });

    let c = Config::parse("solver = /opt/z3\nsolver_args = -in  -smt2\n").unwrap();
    match c.solver_config().backend {
        BackendChoice::Process { bin, args } => {
            assert_eq!(bin, PathBuf::from("/opt/z3"));
            assert_eq!(args, vec!["-in", "-smt2"]);
        }
        other => panic!("{:?}", other),
    }

    assert_eq!(Config::parse("\n\nsolver\n"), Err(ConfigError::Syntax { line: 3, msg: "expected `key = value`".into() }));
    assert!(matches!(Config::parse("colour = red"), Err(ConfigError::Syntax { line: 1, .. })));
    assert!(matches!(Config::parse("timeout = -1"), Err(ConfigError::Syntax { line: 1, .. })));
    assert_eq!(Config::parse("").unwrap(), Config::default());
}

#[test]
fn report_carries_trace_facts_and_total_stats() {
    let d = parse_spec(&std::fs::read_to_string(format!("{}/example2.dmt", SPECS)).unwrap()).unwrap();
    let p = parse_property(&std::fs::read_to_string(format!("{}/example2_until.ltl", SPECS)).unwrap(), &d.signature).unwrap();
    let out = verify(&d, &p, &VerifyOptions::default()).unwrap();
    let r = VerdictReport::new(&out);
    assert_eq!(r.outcome, Outcome::WitnessFound);
    let trace = r.trace.as_ref().unwrap();
    assert_eq!(trace.len(), 2);
    assert_eq!(trace[0].transition, None);
    assert_eq!(trace[1].transition.as_deref(), Some("xset"));
    assert_eq!(trace[1].assignment["x"].to_string(), "4");
    let facts = r.model_facts.as_ref().unwrap();
    assert!(facts.relations["R"].iter().any(|t| t[0].to_string() == "4"));
    // the report counts automaton construction too, the product stats do not
    assert!(r.stats.product.smt.checks > out.verdict.stats.smt.checks);
    assert!(r.stats.product.smt.per_phase.contains_key("nfa"));
    assert_eq!(r.stats.solver, "builtin");
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["outcome"], "witnessFound");
    assert!(v["stats"]["qeTime"].is_number());
    assert_eq!(v["modelFacts"]["functions"], serde_json::json!({}));
    assert!(v["property"].as_str().unwrap().contains("U"));
}

#[test]
fn bench_rows_count_and_skip_broken_files() {
    let dir = std::env::temp_dir().join(format!("dmtcheck-bench-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let b = dir.join("toggle");
    std::fs::create_dir_all(&b).unwrap();
    std::fs::copy(format!("{}/micro/toggle.dmt", SPECS), b.join("spec.dmt")).unwrap();
    std::fs::copy(format!("{}/micro/toggle_reach.ltl", SPECS), b.join("reach.ltl")).unwrap();
    std::fs::copy(format!("{}/micro/toggle_stuck.ltl", SPECS), b.join("stuck.ltl")).unwrap();
    std::fs::write(b.join("junk.ltl"), "F [nope]").unwrap();
    std::fs::create_dir_all(dir.join("not_a_bundle")).unwrap();
    let broken = dir.join("broken");
    std::fs::create_dir_all(&broken).unwrap();
    std::fs::write(broken.join("spec.dmt"), "sort e;").unwrap();

    let opts = BenchOptions::default();
    let t = run_bench(&dir, &opts);
    assert_eq!(t.rows.len(), 2);
    let row = bench_bundle(&b, &opts).unwrap();
    assert_eq!(row.properties, 2);
    assert_eq!(row.errors.len(), 1);
    assert!(row.smt.total > 0.0 && row.smt.max <= row.smt.total && row.smt.avg <= row.smt.max);
    assert!(row.time.max <= row.time.total);
    assert!(row.per_phase.values().sum::<u64>() as f64 >= row.smt.total);
    assert!(t.rows[0].errors[0].contains("V nonempty"));
    let csv = t.to_csv();
    assert_eq!(csv.lines().count(), 3);
    assert!(t.to_text().contains("error: broken/spec.dmt"));
    assert_eq!(run_bench(&dir.join("not_a_bundle"), &opts).rows.len(), 0);
    std::fs::remove_dir_all(&dir).unwrap();
}
