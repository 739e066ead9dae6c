use dmtcheck::dmt::{check_run, evaluate_property};
use dmtcheck::frontend::{parse_property, parse_spec};
use dmtcheck::ltlf::{build_nfa, simplify_nfa};
use dmtcheck::oracle::{brute_force, OracleError, OracleOptions};
use dmtcheck::product::{expand, ExpandOptions, Outcome};
use dmtcheck::smt::Gateway;

const MICRO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../specs/micro");

fn bundles() -> Vec<(String, Vec<String>)> {
    let mut out = Vec::new();
    let mut names: Vec<_> = std::fs::read_dir(MICRO).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    for p in &names {
        if p.extension().is_some_and(|e| e == "dmt") {
            let stem = p.file_stem().unwrap().to_string_lossy().to_string();
            let props = names
                .iter()
                .filter(|q| q.extension().is_some_and(|e| e == "ltl"))
                .filter(|q| q.file_name().unwrap().to_string_lossy().starts_with(&format!("{}_", stem)))
                .map(|q| q.display().to_string())
                .collect();
            out.push((p.display().to_string(), props));
        }
    }
    out
}

#[test]
fn symbolic_and_concrete_agree_on_micro_processes() {
    let all = bundles();
    assert!(all.len() >= 5);
    let (mut yes, mut no) = (0, 0);
    for (spec, props) in all {
        let d = parse_spec(&std::fs::read_to_string(&spec).unwrap()).unwrap();
        for prop in props {
            let p = parse_property(&std::fs::read_to_string(&prop).unwrap(), &d.signature).unwrap();
            let mut gw = Gateway::builtin(d.ctx.clone());
            let nfa = simplify_nfa(&build_nfa(&p, &mut gw).unwrap());
            let v = expand(&d, &nfa, &mut gw, &ExpandOptions::default()).unwrap();
            let o = brute_force(&d, &p, &OracleOptions::default()).unwrap();
            assert!(o.models > 0);
            let symbolic = v.outcome == Outcome::WitnessFound;
            assert_ne!(v.outcome, Outcome::BudgetExceeded, "{}", prop);
            assert_eq!(symbolic, o.witness.is_some(), "{}", prop);
            if let Some(run) = &o.witness {
                assert_eq!(check_run(&d, run).unwrap(), Ok(()));
                assert!(evaluate_property(run, &p).unwrap());
                yes += 1;
            } else {
                no += 1;
            }
        }
    }
    assert!(yes >= 3 && no >= 3, "{} witnesses, {} without", yes, no);
}

#[test]
fn oracle_rejects_arithmetic() {
    let d = parse_spec("var x : rat = 0; trans t : x^w > x^r;").unwrap();
    let p = parse_property("F [x > 1]", &d.signature).unwrap();
    assert!(matches!(brute_force(&d, &p, &OracleOptions::default()), Err(OracleError::Infinite(_))));
}
