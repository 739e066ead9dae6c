use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::smt::{BackendChoice, SmtLibSolver, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}: {1}")]
    Io(String, String),
}

/// Settings read from a `key = value` file; unset keys keep their defaults.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    /// `builtin` or a path to an SMT-LIB2 solver; `None` probes the PATH.
    pub solver: Option<String>,
    pub solver_args: Option<Vec<String>>,
    pub timeout: Duration,
    pub budget_nodes: usize,
    pub budget_time: Duration,
    pub jobs: usize,
    pub k: usize,
    pub depth: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            solver: None,
            solver_args: None,
            timeout: Duration::from_secs(10),
            budget_nodes: 10_000,
            budget_time: Duration::from_secs(60),
            jobs: 1,
            k: 5,
            depth: 10,
        }
    }
}

fn secs(v: &str) -> Result<Duration, String> {
    v.parse::<f64>()
        .ok()
        .filter(|s| s.is_finite() && *s > 0.0)
        .map(Duration::from_secs_f64)
        .ok_or_else(|| format!("expected a positive number of seconds, got `{}`", v))
}

fn count(v: &str) -> Result<usize, String> {
    v.parse().map_err(|_| format!("expected a non-negative integer, got `{}`", v))
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ConfigError::Syntax { line: i + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "solver" => c.solver = Some(v.to_string()),
                "solver_args" => c.solver_args = Some(v.split_whitespace().map(String::from).collect()),
                "timeout" => c.timeout = secs(v).map_err(err)?,
                "budget_nodes" => c.budget_nodes = count(v).map_err(err)?,
                "budget_time" => c.budget_time = secs(v).map_err(err)?,
                "jobs" => c.jobs = count(v).map_err(err)?.max(1),
                "k" => c.k = count(v).map_err(err)?,
                "depth" => c.depth = count(v).map_err(err)?.max(1),
                other => return Err(err(format!("unknown key `{}`", other))),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.display().to_string(), e.to_string()))?;
        Config::parse(&text)
    }

    /// `SOLVER_BIN` and `SOLVER_ARGS` override the file.
    pub fn with_env(mut self) -> Config {
        if let Ok(b) = std::env::var("SOLVER_BIN") {
            self.solver = Some(b);
        }
        if let Ok(a) = std::env::var("SOLVER_ARGS") {
            self.solver_args = Some(a.split_whitespace().map(String::from).collect());
        }
        self
    }

    pub fn solver_config(&self) -> SolverConfig {
        let backend = match self.solver.as_deref() {
            None => SolverConfig::from_env().backend,
            Some("" | "builtin") => BackendChoice::Builtin,
            Some(p) => {
                let bin = PathBuf::from(p);
                let args = self.solver_args.clone().unwrap_or_else(|| SmtLibSolver::default_args(&bin));
                BackendChoice::Process { bin, args }
            }
        };
        SolverConfig { backend, timeout: self.timeout }
    }
}
