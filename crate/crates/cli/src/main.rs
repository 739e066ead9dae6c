use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dmtcheck::analysis::{classify, ClassifyOptions, LookbackOptions};
use dmtcheck::dmt::Dmt;
use dmtcheck::frontend::{parse_property, parse_spec, run_bench, verify, BenchOptions, Config, VerdictReport, VerifyOptions};
use dmtcheck::ltlf::Property;
use dmtcheck::product::{Budget, ExpandOptions, Outcome};

const EXIT_WITNESS: u8 = 0;
const EXIT_NO_WITNESS: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

/// LTLf model checking for data-aware processes.
///
/// Exit codes: 0 witness found (or command succeeded), 1 no witness,
/// 2 budget exceeded, 3 input error, 4 solver or internal failure.
#[derive(Parser)]
#[command(name = "dmtcheck", version)]
struct Cli {
    /// `key = value` settings file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    /// Maximum product nodes.
    #[arg(long)]
    budget_nodes: Option<usize>,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    budget_time: Option<f64>,
}

#[derive(Args, Clone)]
struct LookbackArgs {
    #[arg(long)]
    k: Option<usize>,
    /// Longest transition sequence probed.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search for a run satisfying the property.
    Verify {
        spec: PathBuf,
        property: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Build the whole finite product instead of stopping at the first final node.
        #[arg(long)]
        exhaustive: bool,
        /// Write the product graph.
        #[arg(long, value_name = "OUT")]
        dot: Option<PathBuf>,
        /// Write the verdict as JSON.
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
    /// Report decidable-class membership.
    Classify {
        spec: PathBuf,
        property: PathBuf,
        #[command(flatten)]
        lookback: LookbackArgs,
        /// Assert that the theory is locally finite.
        #[arg(long)]
        locally_finite: bool,
        /// Run the lookback probe even when a syntactic class applies.
        #[arg(long)]
        probe: bool,
        /// Write the sort graph.
        #[arg(long, value_name = "OUT")]
        dot: Option<PathBuf>,
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
    /// Run every bundle (`spec.dmt` plus `*.ltl`) under a directory.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        lookback: LookbackArgs,
        #[arg(long, value_name = "OUT")]
        csv: Option<PathBuf>,
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
    /// Emit a graph as DOT.
    Dump {
        what: Graph,
        spec: PathBuf,
        property: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_name = "OUT")]
        dot: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Graph {
    Nfa,
    Product,
}

struct Fail(u8, String);

impl Fail {
    fn input(msg: impl std::fmt::Display) -> Fail {
        Fail(EXIT_INPUT, msg.to_string())
    }

    fn runtime(msg: impl std::fmt::Display) -> Fail {
        Fail(EXIT_RUNTIME, msg.to_string())
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::input(format!("{}: {}", path.display(), e)))
}

fn write(path: &Path, text: &str) -> Result<(), Fail> {
    std::fs::write(path, text).map_err(|e| Fail::runtime(format!("{}: {}", path.display(), e)))
}

fn load(spec: &Path, property: &Path) -> Result<(Dmt, Property), Fail> {
    let d = parse_spec(&read(spec)?).map_err(|e| Fail::input(format!("{}:{}", spec.display(), e)))?;
    let p = parse_property(&read(property)?, &d.signature).map_err(|e| Fail::input(format!("{}:{}", property.display(), e)))?;
    Ok((d, p))
}

fn config(path: Option<&Path>) -> Result<Config, Fail> {
    let c = match path {
        Some(p) => Config::load(p).map_err(|e| Fail::input(format!("{}: {}", p.display(), e)))?,
        None => Config::default(),
    };
    Ok(c.with_env())
}

fn verify_options(cfg: &Config, b: &BudgetArgs, exhaustive: bool) -> Result<VerifyOptions, Fail> {
    let time = match b.budget_time {
        Some(s) if !(s.is_finite() && s > 0.0) => return Err(Fail::input("--budget-time must be positive")),
        Some(s) => Duration::from_secs_f64(s),
        None => cfg.budget_time,
    };
    let budget = Budget { max_nodes: b.budget_nodes.unwrap_or(cfg.budget_nodes), time, ..Budget::default() };
    Ok(VerifyOptions {
        expand: ExpandOptions { budget, exhaustive, ..ExpandOptions::default() },
        solver: cfg.solver_config(),
    })
}

fn classify_options(cfg: &Config, l: &LookbackArgs, locally_finite: bool, probe: bool) -> ClassifyOptions {
    ClassifyOptions {
        lookback: LookbackOptions {
            k: l.k.unwrap_or(cfg.k),
            depth: l.depth.unwrap_or(cfg.depth).max(1),
            jobs: l.jobs.unwrap_or(cfg.jobs).max(1),
            solver: cfg.solver_config(),
        },
        locally_finite,
        always_probe: probe,
    }
}

fn run(cli: Cli) -> Result<u8, Fail> {
    let cfg = config(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Verify { spec, property, budget, exhaustive, dot, json } => {
            let (d, p) = load(&spec, &property)?;
            let opts = verify_options(&cfg, &budget, exhaustive)?;
            let out = verify(&d, &p, &opts).map_err(Fail::runtime)?;
            let report = VerdictReport::new(&out);
            if let Some(path) = dot {
                let hl = out.verdict.accepting_path.clone().unwrap_or_default();
                write(&path, &out.verdict.graph.to_dot(&out.nfa, &hl))?;
            }
            if let Some(path) = json {
                write(&path, &report.to_json())?;
            }
            print_verdict(&report);
            Ok(match report.outcome {
                Outcome::WitnessFound => EXIT_WITNESS,
                Outcome::NoWitness => EXIT_NO_WITNESS,
                Outcome::BudgetExceeded => EXIT_BUDGET,
            })
        }
        Cmd::Classify { spec, property, lookback, locally_finite, probe, dot, json } => {
            let (d, p) = load(&spec, &property)?;
            let r = classify(&d, &p, &classify_options(&cfg, &lookback, locally_finite, probe)).map_err(Fail::runtime)?;
            let text = serde_json::to_string_pretty(&r).map_err(Fail::runtime)?;
            if let Some(path) = dot {
                write(&path, &r.sort_graph.to_dot())?;
            }
            if let Some(path) = json {
                write(&path, &text)?;
            }
            println!("class: {}", r.class_label());
            println!("{}", text);
            Ok(0)
        }
        Cmd::Bench { dir, budget, lookback, csv, json } => {
            if !dir.is_dir() {
                return Err(Fail::input(format!("{}: not a directory", dir.display())));
            }
            let opts = BenchOptions {
                verify: verify_options(&cfg, &budget, false)?,
                classify: classify_options(&cfg, &lookback, false, false),
            };
            let table = run_bench(&dir, &opts);
            if let Some(path) = csv {
                write(&path, &table.to_csv())?;
            }
            if let Some(path) = json {
                write(&path, &serde_json::to_string_pretty(&table).map_err(Fail::runtime)?)?;
            }
            print!("{}", table.to_text());
            Ok(0)
        }
        Cmd::Dump { what, spec, property, budget, dot } => {
            let (d, p) = load(&spec, &property)?;
            let opts = verify_options(&cfg, &budget, true)?;
            let out = verify(&d, &p, &opts).map_err(Fail::runtime)?;
            let text = match what {
                Graph::Nfa => out.nfa.to_dot(),
                Graph::Product => out.verdict.graph.to_dot(&out.nfa, &[]),
            };
            match dot {
                Some(path) => write(&path, &text)?,
                None => print!("{}", text),
            }
            Ok(match (what, out.verdict.outcome) {
                (Graph::Product, Outcome::BudgetExceeded) => EXIT_BUDGET,
                _ => 0,
            })
        }
    }
}

fn print_verdict(r: &VerdictReport) {
    let outcome = match r.outcome {
        Outcome::WitnessFound => "witness found",
        Outcome::NoWitness => "no witness",
        Outcome::BudgetExceeded => "budget exceeded",
    };
    println!("{}", outcome);
    if let Some(trace) = &r.trace {
        for (i, s) in trace.iter().enumerate() {
            let vals: Vec<String> = s.assignment.iter().map(|(k, v)| format!("{}={}", k, v)).collect();
            println!("  {} {:<16} {}", i, s.transition.as_deref().unwrap_or("(init)"), vals.join(" "));
        }
    }
    if let Some(diag) = &r.diagnostic {
        println!("  {}", diag);
    }
    let s = &r.stats;
    println!(
        "  nodes {}  edges {}  merges {}  smt checks {}  time {:.3}s  solver {}",
        s.product.nodes,
        s.product.edges,
        s.product.merges,
        s.product.smt.checks,
        s.product.wall_time.as_secs_f64(),
        s.solver
    );
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(code)
        }
    }
}
