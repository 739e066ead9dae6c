use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn spec(name: &str) -> String {
    root().join("specs").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmtcheck")).args(args).env_remove("SOLVER_ARGS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn schema() -> jsonschema::JSONSchema {
    let text = std::fs::read_to_string(root().join("schemas/verdict.schema.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&v).unwrap()
}

fn verdict(args: &[&str]) -> (i32, serde_json::Value) {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("v.json");
    let mut all: Vec<&str> = args.to_vec();
    let p = json.display().to_string();
    all.extend(["--json", &p]);
    let o = run(&all);
    let v = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    (code(&o), v)
}

fn assert_valid(v: &serde_json::Value) {
    let s = schema();
    let msgs: Vec<String> = match s.validate(v) {
        Ok(()) => return,
        Err(errs) => errs.map(|e| e.to_string()).collect(),
    };
    panic!("schema violations: {:?}", msgs);
}

#[test]
fn verdicts_validate_for_every_outcome() {
    let (c, v) = verdict(&["verify", &spec("example2.dmt"), &spec("example2_until.ltl")]);
    assert_eq!(c, 0);
    assert_eq!(v["outcome"], "witnessFound");
    assert_eq!(v["trace"][0]["transition"], serde_json::Value::Null);
    assert_eq!(v["trace"][1]["transition"], "xset");
    assert!(v["stats"]["smt"]["perPhase"]["nfa"]["count"].as_u64().unwrap() > 0);
    assert_valid(&v);

    let (c, v) = verdict(&["verify", &spec("incident.dmt"), &spec("incident_unassisted.ltl")]);
    assert_eq!(c, 1);
    assert_eq!(v["outcome"], "noWitness");
    assert_eq!(v["trace"], serde_json::Value::Null);
    assert_valid(&v);

    let auction = root().join("bench/auction");
    let (c, v) = verdict(&[
        "verify",
        &auction.join("spec.dmt").display().to_string(),
        &auction.join("unowned_sale.ltl").display().to_string(),
        "--budget-nodes",
        "5",
    ]);
    assert_eq!(c, 2);
    assert_eq!(v["outcome"], "budgetExceeded");
    assert!(v["diagnostic"].as_str().unwrap().contains("node budget"));
    assert_valid(&v);
}

#[test]
fn schema_rejects_malformed_verdicts() {
    let (_, mut v) = verdict(&["verify", &spec("example2.dmt"), &spec("example2_until.ltl")]);
    v["outcome"] = "maybe".into();
    assert!(!schema().is_valid(&v));
    let (_, mut v) = verdict(&["verify", &spec("example2.dmt"), &spec("example2_until.ltl")]);
    v["stats"].as_object_mut().unwrap().remove("nodes");
    assert!(!schema().is_valid(&v));
}

#[test]
fn input_errors_exit_3() {
    let o = run(&["verify", &spec("lists.dmt"), &spec("example2_until.ltl")]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("EUF") && err.contains("LRA"), "{}", err);
    assert!(err.contains("lists.dmt:2:"), "{}", err);

    let o = run(&["verify", &spec("missing.dmt"), &spec("example2_until.ltl")]);
    assert_eq!(code(&o), 3);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ltl");
    std::fs::write(&bad, "F [z = 1]").unwrap();
    let o = run(&["classify", &spec("example2.dmt"), &bad.display().to_string()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:4"));

    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "jobs = many\n").unwrap();
    let o = run(&["--config", &cfg.display().to_string(), "verify", &spec("example2.dmt"), &spec("example2_until.ltl")]);
    assert_eq!(code(&o), 3);
}

#[test]
fn classify_reports_classes() {
    let o = run(&["classify", &spec("incident.dmt"), &spec("incident_unassisted.ltl")]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.starts_with("class: I\n"), "{}", out);
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("c.json");
    let dot = dir.path().join("sorts.dot");
    let o = run(&[
        "classify",
        &spec("example2.dmt"),
        &spec("example2_until.ltl"),
        "--json",
        &json.display().to_string(),
        "--dot",
        &dot.display().to_string(),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["decidableClass"], "II");
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph sorts"));
}

#[test]
fn dumps() {
    let o = run(&["dump", "nfa", &spec("example2.dmt"), &spec("example2_until.ltl")]);
    assert_eq!(code(&o), 0);
    let dot = String::from_utf8_lossy(&o.stdout).into_owned();
    assert_eq!(dot.lines().filter(|l| l.trim_start().starts_with('q') && !l.contains("->")).count(), 2);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("one.ltl");
    std::fs::write(&p, "[x >= 0]").unwrap();
    let out = dir.path().join("one.dot");
    let o = run(&["dump", "nfa", &spec("example2.dmt"), &p.display().to_string(), "--dot", &out.display().to_string()]);
    assert_eq!(code(&o), 0);
    let dot = std::fs::read_to_string(&out).unwrap();
    let edges: Vec<&str> = dot.lines().filter(|l| l.contains(" -> ") && !l.contains("start")).collect();
    // one edge between states plus the loop on the accepting sink
    assert_eq!(edges.iter().filter(|l| !l.contains("q1 -> q1")).count(), 1, "{}", dot);

    let o = run(&["dump", "product", &spec("example2.dmt"), &spec("example2_until.ltl")]);
    assert_eq!(code(&o), 0);
    let dot = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(dot.starts_with("digraph product"));
    assert!(dot.contains("peripheries=2"));
}

#[test]
fn bench_on_empty_and_small_directories() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bench", &dir.path().display().to_string()]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1);

    let b = dir.path().join("ex");
    std::fs::create_dir(&b).unwrap();
    std::fs::copy(root().join("specs/example2.dmt"), b.join("spec.dmt")).unwrap();
    for (i, p) in ["F [s = o2]", "F [x = 4]", "F [x < 0]", "X [s = o2]", "[x >= 0] U [s = o2]"].iter().enumerate() {
        std::fs::write(b.join(format!("p{}.ltl", i)), p).unwrap();
    }
    std::fs::write(b.join("broken.ltl"), "F [").unwrap();
    let csv = dir.path().join("t.csv");
    let o = run(&["bench", &dir.path().display().to_string(), "--csv", &csv.display().to_string()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("error: ex/broken.ltl"), "{}", text);
    let rows: Vec<String> = std::fs::read_to_string(&csv).unwrap().lines().map(String::from).collect();
    assert_eq!(rows.len(), 2);
    let head: Vec<&str> = rows[0].split(',').collect();
    let row: Vec<&str> = rows[1].split(',').collect();
    let get = |n: &str| row[head.iter().position(|h| *h == n).unwrap()];
    assert_eq!(get("problem"), "ex");
    assert_eq!(get("class"), "II");
    assert_eq!((get("T"), get("D"), get("R"), get("F"), get("C")), ("2", "7", "2", "0", "4"));
    assert_eq!(get("props"), "5");
    assert_eq!(get("wit"), "4");
    assert!(get("smt_total").parse::<f64>().unwrap() > 0.0);
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.conf");
    std::fs::write(&cfg, "# small budget\nsolver = builtin\nbudget_nodes = 5\n").unwrap();
    let auction = root().join("bench/auction");
    let args = [
        "--config",
        cfg.to_str().unwrap(),
        "verify",
        &auction.join("spec.dmt").display().to_string(),
        &auction.join("unowned_sale.ltl").display().to_string(),
    ];
    let o = run(&args);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("solver builtin"));
    let o = Command::new(env!("CARGO_BIN_EXE_dmtcheck"))
        .args(&args)
        .env("SOLVER_BIN", "/nonexistent/solver")
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);
}
