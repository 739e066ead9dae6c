//! Satisfiability and equivalence checking modulo EUF + LRA, through either an
//! external SMT-LIB2 solver process or the in-process fallback.

mod builtin;
pub mod cc;
pub mod eval;
mod model;
pub mod simplex;
pub mod smtlib;
mod stats;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use crate::logic::{prenex, rename_apart, Const, Formula, Fresh, LogicError, Literal, Signature};

pub use builtin::{satisfiable, BuiltinSolver};
pub use model::{ModelFragment, Value};
pub use smtlib::SmtLibSolver;
pub use stats::{PhaseStats, SolverStats};

/// Signature plus the background theory: ground facts and distinctness.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TheoryContext {
    pub signature: Signature,
    pub arithmetic: bool,
    pub facts: Vec<Literal>,
    pub distinct: Vec<Vec<Const>>,
}

impl TheoryContext {
    pub fn new(signature: Signature) -> TheoryContext {
        let arithmetic = signature.uses_rat();
        TheoryContext { signature, arithmetic, facts: Vec::new(), distinct: Vec::new() }
    }

    pub fn background(&self) -> Vec<Formula> {
        let mut out: Vec<Formula> = self.facts.iter().cloned().map(Formula::lit).collect();
        for group in &self.distinct {
            for (i, a) in group.iter().enumerate() {
                for b in &group[i + 1..] {
                    out.push(Formula::neq(a.term(), b.term()));
                }
            }
        }
        out
    }

    pub fn facts_formula(&self) -> Formula {
        Formula::and(self.background())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatResult {
    pub verdict: Verdict,
    pub model: Option<ModelFragment>,
}

impl SatResult {
    pub fn sat(model: Option<ModelFragment>) -> SatResult {
        SatResult { verdict: Verdict::Sat, model }
    }

    pub fn unsat() -> SatResult {
        SatResult { verdict: Verdict::Unsat, model: None }
    }

    pub fn unknown(why: &str) -> SatResult {
        SatResult { verdict: Verdict::Unknown(why.to_string()), model: None }
    }

    pub fn is_sat(&self) -> bool {
        self.verdict == Verdict::Sat
    }

    pub fn is_unsat(&self) -> bool {
        self.verdict == Verdict::Unsat
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmtError {
    #[error("solver process: {0}")]
    Process(String),
    #[error("solver timed out")]
    Timeout,
    #[error("cannot parse solver reply: {0}")]
    Parse(String),
    #[error("solver answered unknown: {0}")]
    Unknown(String),
    #[error("unsupported query: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// A decision procedure for quantifier-free formulas.
pub trait Backend: Send {
    fn name(&self) -> String;
    /// `model` carries extra formulas whose symbols the model must cover.
    fn check(&mut self, ctx: &TheoryContext, f: &Formula, model: Option<&[Formula]>) -> Result<SatResult, SmtError>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackendChoice {
    Builtin,
    Process { bin: PathBuf, args: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub backend: BackendChoice,
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { backend: BackendChoice::Builtin, timeout: Duration::from_secs(10) }
    }
}

impl SolverConfig {
    /// `SOLVER_BIN` wins (`builtin` selects the fallback), then z3 or cvc5 on PATH.
    pub fn from_env() -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Ok(bin) = std::env::var("SOLVER_BIN") {
            cfg.backend = if bin.trim().is_empty() || bin == "builtin" {
                BackendChoice::Builtin
            } else {
                SolverConfig::process(PathBuf::from(bin))
            };
            return cfg;
        }
        for name in ["z3", "cvc5"] {
            if let Some(p) = which(name) {
                cfg.backend = SolverConfig::process(p);
                break;
            }
        }
        cfg
    }

    pub fn process(bin: PathBuf) -> BackendChoice {
        let args = SmtLibSolver::default_args(&bin);
        BackendChoice::Process { bin, args }
    }

    pub fn build(&self) -> Box<dyn Backend> {
        match &self.backend {
            BackendChoice::Builtin => Box::new(BuiltinSolver::new()),
            BackendChoice::Process { bin, args } => Box::new(SmtLibSolver::new(bin.clone(), args.clone(), self.timeout)),
        }
    }
}

fn which(name: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|d| d.join(name)).find(|p| p.is_file())
}

/// Single-client front door to a backend, with caching and instrumentation.
pub struct Gateway {
    backend: Box<dyn Backend>,
    ctx: TheoryContext,
    phase: String,
    stats: Arc<Mutex<SolverStats>>,
    cache: HashMap<Formula, Verdict>,
}

impl Gateway {
    pub fn new(ctx: TheoryContext, config: &SolverConfig) -> Gateway {
        Gateway::with_backend(ctx, config.build())
    }

    pub fn builtin(ctx: TheoryContext) -> Gateway {
        Gateway::with_backend(ctx, Box::new(BuiltinSolver::new()))
    }

    pub fn with_backend(ctx: TheoryContext, backend: Box<dyn Backend>) -> Gateway {
        Gateway {
            backend,
            ctx,
            phase: "default".into(),
            stats: Arc::new(Mutex::new(SolverStats::default())),
            cache: HashMap::new(),
        }
    }

    /// Shares a stats sink with other gateways of a pool.
    pub fn share_stats(&mut self, stats: Arc<Mutex<SolverStats>>) {
        self.stats = stats;
    }

    pub fn stats_handle(&self) -> Arc<Mutex<SolverStats>> {
        self.stats.clone()
    }

    pub fn context(&self) -> &TheoryContext {
        &self.ctx
    }

    pub fn backend_name(&self) -> String {
        self.backend.name()
    }

    pub fn set_phase(&mut self, phase: &str) {
        self.phase = phase.to_string();
    }

    pub fn phase(&self) -> &str {
        &self.phase
    }

    pub fn stats(&self) -> SolverStats {
        self.stats.lock().unwrap().clone()
    }

    pub fn reset_and_stats(&mut self, zero: bool) -> SolverStats {
        let mut s = self.stats.lock().unwrap();
        let out = s.clone();
        if zero {
            *s = SolverStats::default();
        }
        out
    }

    /// Existential prefixes become free variables before dispatch.
    fn prepare(f: &Formula) -> Result<Formula, SmtError> {
        if f.is_quantifier_free() {
            return Ok(f.clone());
        }
        let n = f.nnf()?;
        let mut fresh = Fresh::new("s");
        let (_, matrix) = prenex(&rename_apart(&n, &mut fresh));
        Ok(matrix)
    }

    pub fn check_sat(&mut self, f: &Formula, want_model: bool) -> Result<SatResult, SmtError> {
        let start = Instant::now();
        let g = Gateway::prepare(f)?;
        let result = if !want_model {
            if let Some(v) = self.cache.get(&g) {
                Ok(SatResult { verdict: v.clone(), model: None })
            } else {
                let r = self.backend.check(&self.ctx, &g, None);
                if let Ok(r) = &r {
                    if !matches!(r.verdict, Verdict::Unknown(_)) {
                        self.cache.insert(g, r.verdict.clone());
                    }
                }
                r
            }
        } else {
            let extra = [g.clone()];
            self.backend.check(&self.ctx, &g, Some(&extra))
        };
        self.stats.lock().unwrap().record(&self.phase, start.elapsed());
        result
    }

    /// Model query whose fragment also determines every atom of `extra`.
    pub fn check_sat_model(&mut self, f: &Formula, extra: &[Formula]) -> Result<SatResult, SmtError> {
        let start = Instant::now();
        let g = Gateway::prepare(f)?;
        let mut want = vec![g.clone()];
        for e in extra {
            want.push(Gateway::prepare(e)?);
        }
        let result = self.backend.check(&self.ctx, &g, Some(&want));
        self.stats.lock().unwrap().record(&self.phase, start.elapsed());
        result
    }

    pub fn is_sat(&mut self, f: &Formula) -> Result<bool, SmtError> {
        match self.check_sat(f, false)?.verdict {
            Verdict::Sat => Ok(true),
            Verdict::Unsat => Ok(false),
            Verdict::Unknown(why) => Err(SmtError::Unknown(why)),
        }
    }

    pub fn check_equiv(&mut self, f: &Formula, g: &Formula) -> Result<bool, SmtError> {
        if f == g {
            return Ok(true);
        }
        Ok(!self.is_sat(&Formula::not(Formula::iff(f.clone(), g.clone())))?)
    }

    pub fn implies(&mut self, f: &Formula, g: &Formula) -> Result<bool, SmtError> {
        Ok(!self.is_sat(&Formula::and2(f.clone(), Formula::not(g.clone())))?)
    }
}
